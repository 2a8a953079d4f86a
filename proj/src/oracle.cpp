#include "mmsk/oracle.hpp"

#include <algorithm>
#include <limits>

#include "mmsk/error.hpp"

namespace mmsk {

Eigen::VectorXd expected_response(const AffinityMatrix& a, const Eigen::VectorXd& x, const ReceptionConfig& cfg) {
    if (x.size() != a.molecules()) throw Error("dimension mismatch");
    const Eigen::VectorXd pre = a.values() * x;
    Eigen::VectorXd out(pre.size());
    for (Eigen::Index r = 0; r < pre.size(); ++r) out[r] = expected_relu_poisson(pre[r], cfg.noise_mean, cfg.threshold);
    return out;
}

namespace {

struct Search {
    const Eigen::VectorXd& y;
    const AffinityMatrix& a;
    const ReceptionConfig& cfg;
    const std::vector<double>& grid;

    std::vector<int> support;
    Eigen::VectorXd x;
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x;

    // All grid assignments on the current support.
    void assign(std::size_t pos) {
        if (pos == support.size()) {
            const double err = (y - expected_response(a, x, cfg)).squaredNorm();
            if (err < best) {
                best = err;
                best_x = x;
            }
            return;
        }
        for (double g : grid) {
            x[support[pos]] = g;
            assign(pos + 1);
        }
        x[support[pos]] = 0.0;
    }

    void subsets(int start, int remaining) {
        if (remaining == 0) {
            assign(0);
            return;
        }
        for (int q = start; q < a.molecules(); ++q) {
            support.push_back(q);
            subsets(q + 1, remaining - 1);
            support.pop_back();
        }
    }
};

}  // namespace

OracleResult brute_force_sparse_oracle(const Eigen::VectorXd& y, const AffinityMatrix& a, const ReceptionConfig& cfg,
                                       int sparsity_cap, const std::vector<double>& grid, double error_budget) {
    if (a.molecules() > 12) throw Error("oracle limited to Q <= 12");
    if (sparsity_cap < 0 || sparsity_cap > 3) throw Error("oracle sparsity cap must lie in [0, 3]");
    if (y.size() != a.receptors()) throw Error("dimension mismatch");
    for (double g : grid)
        if (!(g > 0.0)) throw Error("oracle grid values must be positive");

    OracleResult overall;
    overall.error = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= sparsity_cap; ++k) {
        Search s{y, a, cfg, grid, {}, Eigen::VectorXd::Zero(a.molecules()), std::numeric_limits<double>::infinity(), {}};
        s.subsets(0, k);
        if (s.best_x.size() == 0) continue;
        if (s.best < overall.error) {
            overall.error = s.best;
            overall.concentrations = s.best_x;
        }
        if (s.best <= error_budget) {
            overall.error = s.best;
            overall.concentrations = s.best_x;
            overall.within_budget = true;
            break;
        }
    }
    for (Eigen::Index q = 0; q < overall.concentrations.size(); ++q)
        if (overall.concentrations[q] > 0.0) overall.support.push_back(static_cast<int>(q));
    return overall;
}

}  // namespace mmsk
