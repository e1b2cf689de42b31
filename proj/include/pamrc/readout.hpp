#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pamrc {

// Feature/target rows with the washout/training/evaluation split. Training
// uses rows [n_wash, n_wash + n_train), evaluation the n_eval rows after.
struct Dataset {
    Eigen::MatrixXd features;  // N_total x (M*L + 1)
    Eigen::MatrixXd targets;   // N_total x K
    Eigen::Index n_wash = 0;
    Eigen::Index n_train = 0;
    Eigen::Index n_eval = 0;

    void validate() const;
    Eigen::Ref<const Eigen::MatrixXd> train_features() const;
    Eigen::Ref<const Eigen::MatrixXd> train_targets() const;
    Eigen::Ref<const Eigen::MatrixXd> eval_features() const;
    Eigen::Ref<const Eigen::MatrixXd> eval_targets() const;
};

struct ReadoutWeights {
    Eigen::MatrixXd w_out;  // (M*L + 1) x K
    double ridge_lambda = 0.0;
};

// Ridge solution of (X^T X + lambda I) W = X^T Y. The bias column is
// regularized like any other. lambda = 0 falls back to a rank-revealing QR
// and reports the offending column on rank deficiency.
ReadoutWeights fit_ridge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda);
ReadoutWeights fit_ridge(const Dataset& ds, double lambda);

// Validation-scored log-grid search for lambda; the validation split is the
// tail fraction of the training rows.
ReadoutWeights fit_ridge_grid(const Dataset& ds, std::span<const double> lambda_grid,
                              double validation_fraction = 0.1);

Eigen::VectorXd predict(const ReadoutWeights& w, const Eigen::VectorXd& x);
Eigen::MatrixXd predict_all(const ReadoutWeights& w, const Eigen::MatrixXd& x);

// Mean squared error normalized by the population variance of the targets.
double nmse(std::span<const double> predictions, std::span<const double> targets);
double nmse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

}  // namespace pamrc
