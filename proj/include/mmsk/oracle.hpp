#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mmsk/affinity.hpp"
#include "mmsk/channel.hpp"

namespace mmsk {

struct OracleResult {
    std::vector<int> support;        // sorted molecule indices
    Eigen::VectorXd concentrations;  // length Q, zero off the support
    double error = 0.0;              // squared distance to E{y | x}
    bool within_budget = false;
};

// Exhaustive sparse search for tiny systems (Q <= 12). Supports are tried in
// order of size (0, 1, ..., sparsity_cap) and every gridded concentration
// vector on a support is scored by |y - E{y | x}|^2, with the expectation over
// the Poisson noise taken exactly. The first size whose best score is within
// `error_budget` wins; otherwise the best score overall is returned.
OracleResult brute_force_sparse_oracle(const Eigen::VectorXd& y, const AffinityMatrix& a, const ReceptionConfig& cfg,
                                       int sparsity_cap, const std::vector<double>& grid, double error_budget);

// E{y | x} with n ~ Poisson(lambda_r) per receptor.
Eigen::VectorXd expected_response(const AffinityMatrix& a, const Eigen::VectorXd& x, const ReceptionConfig& cfg);

}  // namespace mmsk
