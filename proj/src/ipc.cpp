#include "pamrc/ipc.hpp"

#include <algorithm>
#include <cmath>

#include "pamrc/errors.hpp"
#include "pamrc/rng.hpp"

namespace pamrc {

double legendre(int degree, double x) {
    if (degree < 0) {
        throw ConfigError("legendre: negative degree");
    }
    // Bonnet recurrence, then scale by sqrt(2d + 1) for unit variance.
    double p0 = 1.0;
    double p1 = x;
    if (degree == 0) return p0;
    for (int d = 2; d <= degree; ++d) {
        const double p2 =
            ((2.0 * d - 1.0) * x * p1 - (d - 1.0) * p0) / static_cast<double>(d);
        p0 = p1;
        p1 = p2;
    }
    return p1 * std::sqrt(2.0 * degree + 1.0);
}

int BasisTerm::total_degree() const {
    int sum = 0;
    for (const auto& f : factors) sum += f.degree;
    return sum;
}

int BasisTerm::max_delay() const {
    int m = 0;
    for (const auto& f : factors) m = std::max(m, f.delay);
    return m;
}

std::string BasisTerm::label() const {
    std::string s;
    for (const auto& f : factors) {
        if (!s.empty()) s += "*";
        s += "P" + std::to_string(f.degree) + "(u[n-" + std::to_string(f.delay) + "])";
    }
    return s;
}

namespace {

void enumerate_rec(int next_delay, int max_delay_d, int remaining_degree,
                   std::vector<BasisFactor>& current, std::vector<BasisTerm>& out) {
    if (!current.empty()) {
        out.push_back(BasisTerm{current});
        if (out.size() > 1000000) {
            throw ConfigError("enumerate_basis: more than 10^6 terms; reduce D or K");
        }
    }
    for (int k = next_delay; k < max_delay_d; ++k) {
        for (int d = 1; d <= remaining_degree; ++d) {
            current.push_back({k, d});
            enumerate_rec(k + 1, max_delay_d, remaining_degree - d, current, out);
            current.pop_back();
        }
    }
}

}  // namespace

std::vector<BasisTerm> enumerate_basis(int max_delay_d, int max_degree_k) {
    if (max_delay_d < 1 || max_degree_k < 1) {
        throw ConfigError("enumerate_basis: D and K must be >= 1");
    }
    std::vector<BasisTerm> out;
    std::vector<BasisFactor> current;
    enumerate_rec(0, max_delay_d, max_degree_k, current, out);
    std::sort(out.begin(), out.end(), [](const BasisTerm& a, const BasisTerm& b) {
        if (a.total_degree() != b.total_degree()) return a.total_degree() < b.total_degree();
        if (a.factors.size() != b.factors.size()) return a.factors.size() < b.factors.size();
        const auto key = [](const BasisTerm& t) {
            std::pair<std::vector<int>, std::vector<int>> k;
            for (const auto& f : t.factors) {
                k.first.push_back(f.delay);
                k.second.push_back(f.degree);
            }
            return k;
        };
        return key(a) < key(b);
    });
    return out;
}

namespace {

// Orthonormal basis of the column space, rank-revealing. Rank deficiency is
// expected here (bias plus near-duplicated multiplexed channels), so the
// pseudo-inverse route is the default.
struct Projector {
    Eigen::MatrixXd q;  // n x rank, orthonormal columns
    int rank = 0;

    explicit Projector(const Eigen::MatrixXd& states) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(states);
        qr.setThreshold(1e-10);
        rank = static_cast<int>(qr.rank());
        Eigen::MatrixXd thin = Eigen::MatrixXd::Identity(states.rows(), rank);
        q = qr.householderQ() * thin;
    }
};

double capacity_from_projection(const Eigen::VectorXd& coeffs, double target_sq_norm,
                                double centered_sq_norm) {
    if (centered_sq_norm <= 1e-12 * target_sq_norm || centered_sq_norm <= 0.0) {
        throw NumericalError("capacity: zero-variance target");
    }
    const double residual = target_sq_norm - coeffs.squaredNorm();
    return 1.0 - residual / centered_sq_norm;
}

double centered_sq_norm_of(const Eigen::VectorXd& z) {
    const double mean = z.mean();
    return z.squaredNorm() - static_cast<double>(z.size()) * mean * mean;
}

}  // namespace

double capacity(const Eigen::MatrixXd& states, const Eigen::VectorXd& target) {
    if (states.rows() != target.size()) {
        throw ConfigError("capacity: row mismatch between states and target");
    }
    Projector proj(states);
    const Eigen::VectorXd c = proj.q.transpose() * target;
    return capacity_from_projection(c, target.squaredNorm(), centered_sq_norm_of(target));
}

void IpcConfig::validate() const {
    if (max_delay < 1 || max_degree < 1) {
        throw ConfigError("ipc: D and K must be >= 1");
    }
    if (surrogates < 2) {
        throw ConfigError("ipc: needs at least 2 surrogates");
    }
    if (threshold_sigmas < 0.0) {
        throw ConfigError("ipc: threshold_sigmas must be non-negative");
    }
}

CapacitySpectrum total_ipc(const Eigen::MatrixXd& states, std::span<const double> input_u,
                           const IpcConfig& cfg) {
    cfg.validate();
    const long n_rows = states.rows();
    if (static_cast<long>(input_u.size()) != n_rows) {
        throw ConfigError("total_ipc: states and input must have matching length");
    }
    // Rows before max_delay have incomplete histories; drop them.
    const long usable = n_rows - cfg.max_delay;
    if (usable < 10 * states.cols()) {
        throw ConfigError("total_ipc: not enough samples for the requested delay depth");
    }

    const Eigen::MatrixXd x = states.bottomRows(usable);
    Projector proj(x);

    // Precompute the normalized Legendre table: poly_table[d-1][t] =
    // legendre(d, u_t) over the full input.
    std::vector<std::vector<double>> poly_table(cfg.max_degree);
    for (int d = 1; d <= cfg.max_degree; ++d) {
        auto& row = poly_table[d - 1];
        row.resize(input_u.size());
        for (std::size_t t = 0; t < input_u.size(); ++t) {
            const double u = input_u[t];
            if (u < -1.0 - 1e-12 || u > 1.0 + 1e-12) {
                throw ConfigError("total_ipc: input value outside [-1, 1]");
            }
            row[t] = legendre(d, u);
        }
    }

    const auto terms = enumerate_basis(cfg.max_delay, cfg.max_degree);
    CounterRng shift_rng = CounterRng(cfg.seed).stream("ipc-surrogates");

    CapacitySpectrum spectrum;
    spectrum.n_samples = usable;
    spectrum.rank = proj.rank;
    spectrum.entries.reserve(terms.size());

    Eigen::VectorXd z(usable);
    Eigen::MatrixXd surrogate_block(usable, cfg.surrogates);
    for (const auto& term : terms) {
        // Base target: product over factors of P_d(u_{n-k}), aligned so that
        // row i corresponds to input index (max_delay + i).
        for (long i = 0; i < usable; ++i) {
            const long t = cfg.max_delay + i;
            double v = 1.0;
            for (const auto& f : term.factors) {
                v *= poly_table[f.degree - 1][static_cast<std::size_t>(t - f.delay)];
            }
            z[i] = v;
        }
        const double z_sq = z.squaredNorm();
        const double z_centered = centered_sq_norm_of(z);
        const Eigen::VectorXd c = proj.q.transpose() * z;
        const double raw = capacity_from_projection(c, z_sq, z_centered);

        // Cyclic-shift surrogates destroy the input alignment but keep the
        // marginal distribution; their capacities estimate the finite-sample
        // floor for this term.
        const long min_shift = usable / 10;
        for (int s = 0; s < cfg.surrogates; ++s) {
            const long shift =
                min_shift + static_cast<long>(shift_rng.uniform_index(
                                static_cast<std::uint64_t>(usable - 2 * min_shift)));
            for (long i = 0; i < usable; ++i) {
                surrogate_block(i, s) = z[(i + shift) % usable];
            }
        }
        const Eigen::MatrixXd sc = proj.q.transpose() * surrogate_block;
        double mean = 0.0;
        double sq = 0.0;
        for (int s = 0; s < cfg.surrogates; ++s) {
            const double cap = capacity_from_projection(sc.col(s), z_sq, z_centered);
            mean += cap;
            sq += cap * cap;
        }
        mean /= cfg.surrogates;
        const double var = std::max(0.0, sq / cfg.surrogates - mean * mean);
        const double threshold = mean + cfg.threshold_sigmas * std::sqrt(var);

        CapacityEntry entry;
        entry.term = term;
        entry.raw = raw;
        entry.threshold = threshold;
        entry.thresholded = raw > threshold ? raw : 0.0;
        spectrum.entries.push_back(std::move(entry));
    }

    bool any_kept = false;
    for (const auto& e : spectrum.entries) {
        spectrum.total += e.thresholded;
        spectrum.by_degree[e.term.total_degree()] += e.thresholded;
        spectrum.by_max_delay[e.term.max_delay()] += e.thresholded;
        any_kept = any_kept || e.thresholded > 0.0;
    }
    spectrum.degenerate_warning = !any_kept;

    // The constant column is not an input-driven degree of freedom; detect it
    // by projecting the all-ones vector onto the column space.
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(usable);
    const double ones_residual =
        (ones - proj.q * (proj.q.transpose() * ones)).norm() / std::sqrt(double(usable));
    const bool bias_in_span = ones_residual < 1e-8;
    spectrum.feature_count = proj.rank - (bias_in_span ? 1 : 0);
    return spectrum;
}

}  // namespace pamrc
