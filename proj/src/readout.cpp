#include "pamrc/readout.hpp"

#include <cmath>
#include <string>

#include "pamrc/errors.hpp"

namespace pamrc {

void Dataset::validate() const {
    if (features.rows() != targets.rows()) {
        throw ConfigError("dataset: feature/target row mismatch");
    }
    if (n_wash < 0 || n_train < 0 || n_eval < 0 ||
        n_wash + n_train + n_eval > features.rows()) {
        throw ConfigError("dataset: washout + train + eval exceeds rows");
    }
    if (!features.allFinite() || !targets.allFinite()) {
        throw NumericalError("dataset: non-finite entries");
    }
}

Eigen::Ref<const Eigen::MatrixXd> Dataset::train_features() const {
    return features.middleRows(n_wash, n_train);
}
Eigen::Ref<const Eigen::MatrixXd> Dataset::train_targets() const {
    return targets.middleRows(n_wash, n_train);
}
Eigen::Ref<const Eigen::MatrixXd> Dataset::eval_features() const {
    return features.middleRows(n_wash + n_train, n_eval);
}
Eigen::Ref<const Eigen::MatrixXd> Dataset::eval_targets() const {
    return targets.middleRows(n_wash + n_train, n_eval);
}

ReadoutWeights fit_ridge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda) {
    if (x.rows() != y.rows()) {
        throw ConfigError("fit_ridge: feature/target row mismatch");
    }
    if (x.rows() < 1) {
        throw ConfigError("fit_ridge: needs at least one training row");
    }
    if (lambda < 0.0) {
        throw ConfigError("fit_ridge: lambda must be non-negative");
    }

    const Eigen::Index p = x.cols();
    ReadoutWeights out;
    out.ridge_lambda = lambda;

    if (lambda == 0.0) {
        // Rank-revealing solve; names the first redundant column on failure.
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        qr.setThreshold(1e-10);
        if (qr.rank() < p) {
            const auto perm = qr.colsPermutation().indices();
            const Eigen::Index offending = perm[qr.rank()];
            throw NumericalError("fit_ridge: rank-deficient system with lambda = 0 (column " +
                                 std::to_string(offending) + " is linearly dependent)");
        }
        out.w_out = qr.solve(y);
        return out;
    }

    // Column scaling keeps the normal equations well conditioned; the penalty
    // is transformed with the scaling so the solution equals the raw-
    // coordinate ridge solution exactly.
    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double rms = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(x.rows()));
        scale[j] = rms > 1e-300 ? 1.0 / rms : 1.0;
    }
    const Eigen::MatrixXd xs = x * scale.asDiagonal();
    Eigen::MatrixXd gram = xs.transpose() * xs;
    gram.diagonal() += lambda * scale.array().square().matrix();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    bool good = ldlt.info() == Eigen::Success;
    if (good) {
        const Eigen::MatrixXd ws = ldlt.solve(xs.transpose() * y);
        out.w_out = scale.asDiagonal() * ws;
        // Verify against the raw normal equations; heavy collinearity can
        // defeat the factorization without tripping info().
        if (out.w_out.allFinite()) {
            const Eigen::MatrixXd residual =
                x.transpose() * (x * out.w_out - y) + lambda * out.w_out;
            const double rhs_norm = (x.transpose() * y).norm();
            good = residual.norm() <= 1e-9 * std::max(rhs_norm, 1e-300);
        } else {
            good = false;
        }
    }
    if (!good) {
        // Rank-proof route: QR of the lambda-augmented least-squares stack.
        Eigen::MatrixXd aug(x.rows() + p, p);
        aug.topRows(x.rows()) = x;
        aug.bottomRows(p) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(x.rows() + p, y.cols());
        rhs.topRows(x.rows()) = y;
        out.w_out = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(aug).solve(rhs);
    }
    if (!out.w_out.allFinite()) {
        throw NumericalError("fit_ridge: non-finite solution");
    }
    return out;
}

ReadoutWeights fit_ridge(const Dataset& ds, double lambda) {
    ds.validate();
    if (ds.n_train < 1) {
        throw ConfigError("fit_ridge: dataset has no training rows");
    }
    return fit_ridge(ds.train_features(), ds.train_targets(), lambda);
}

ReadoutWeights fit_ridge_grid(const Dataset& ds, std::span<const double> lambda_grid,
                              double validation_fraction) {
    ds.validate();
    if (lambda_grid.empty()) {
        throw ConfigError("fit_ridge_grid: empty lambda grid");
    }
    const Eigen::Index n_val =
        std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
                                      std::floor(validation_fraction *
                                                 static_cast<double>(ds.n_train))));
    const Eigen::Index n_fit = ds.n_train - n_val;
    if (n_fit < 1) {
        throw ConfigError("fit_ridge_grid: training split too small for validation");
    }
    const auto x_fit = ds.features.middleRows(ds.n_wash, n_fit);
    const auto y_fit = ds.targets.middleRows(ds.n_wash, n_fit);
    const auto x_val = ds.features.middleRows(ds.n_wash + n_fit, n_val);
    const auto y_val = ds.targets.middleRows(ds.n_wash + n_fit, n_val);

    double best_score = std::numeric_limits<double>::infinity();
    double best_lambda = lambda_grid[0];
    for (double lambda : lambda_grid) {
        ReadoutWeights w = fit_ridge(x_fit, y_fit, lambda);
        const double score = nmse(predict_all(w, x_val), y_val);
        if (score < best_score) {
            best_score = score;
            best_lambda = lambda;
        }
    }
    return fit_ridge(ds, best_lambda);
}

Eigen::VectorXd predict(const ReadoutWeights& w, const Eigen::VectorXd& x) {
    if (x.size() != w.w_out.rows()) {
        throw NumericalError("predict: dimension mismatch");
    }
    return w.w_out.transpose() * x;
}

Eigen::MatrixXd predict_all(const ReadoutWeights& w, const Eigen::MatrixXd& x) {
    if (x.cols() != w.w_out.rows()) {
        throw NumericalError("predict: dimension mismatch");
    }
    return x * w.w_out;
}

double nmse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size() || targets.size() < 2) {
        throw ConfigError("nmse: series must have equal length >= 2");
    }
    const auto n = static_cast<double>(targets.size());
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= n;
    double var = 0.0;
    double mse = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        var += (targets[i] - mean) * (targets[i] - mean);
        mse += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
    }
    var /= n;
    mse /= n;
    if (var <= 0.0) {
        throw NumericalError("nmse: degenerate target (zero variance)");
    }
    return mse / var;
}

double nmse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw ConfigError("nmse: shape mismatch");
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < targets.cols(); ++k) {
        std::vector<double> p(predictions.col(k).data(),
                              predictions.col(k).data() + predictions.rows());
        std::vector<double> t(targets.col(k).data(), targets.col(k).data() + targets.rows());
        total += nmse(p, t);
    }
    return total / static_cast<double>(targets.cols());
}

}  // namespace pamrc
