#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmsk/affinity.hpp"
#include "mmsk/channel.hpp"
#include "mmsk/conic_solver.hpp"
#include "mmsk/design.hpp"

namespace mmsk {

struct RecoveryConfig {
    double epsilon = 0.1;  // normalized reconstruction error
    double delta = 0.1;    // concentration deviation
    double solver_tol = 1e-7;
    int max_iters = 200;

    void validate() const;
};

struct RecoveryEstimate {
    Eigen::VectorXd x_hat;  // length Q
    Eigen::VectorXd w_hat;  // length M (OP2); empty for OP1
    std::vector<int> active;
    std::vector<int> inactive;
    SolveStatus status = SolveStatus::iteration_limit;
    double objective = 0.0;
    int iterations = 0;

    // Adaptive recovery only.
    int transmitter = -1;        // inferred active Tx, -1 if none
    bool no_active_tx = false;   // stage 1 found nothing to attribute
    bool refinement_failed = false;  // stage 2 not optimal; stage 1 kept
};

// Receptors with y_r > 0 and the rest.
std::pair<std::vector<int>, std::vector<int>> split_active(const Eigen::VectorXd& y);

// min |x|_1 over x >= 0 with
//   C1: |y_A - A_A x - (lambda_r - x_thr)|^2 <= |A| lambda_r eps
//   C2: A_Ac x + (lambda_r - x_thr) <= sqrt(lambda_r eps)
RecoveryEstimate solve_op1(const Eigen::VectorXd& y, const AffinityMatrix& a, const ReceptionConfig& cfg,
                           const RecoveryConfig& rcfg,
                           std::optional<std::uint64_t> random_start = std::nullopt);

// min |w|_1 over x, w >= 0 with C1, C2 and
//   C3: (x_q - (M w)_q)^2 <= delta (M w)_q  for every q
// M is the Q x M reception matrix. Molecule types that no column of M contains
// are pinned to x_q = 0.
RecoveryEstimate solve_op2(const Eigen::VectorXd& y, const AffinityMatrix& a, const Eigen::MatrixXd& reception,
                           const ReceptionConfig& cfg, const RecoveryConfig& rcfg,
                           std::optional<std::uint64_t> random_start = std::nullopt);

// OP2 on the full reception matrix, then again on the columns of the
// transmitter owning argmax w_hat. w_hat is returned at full length with zeros
// outside that transmitter's alphabet.
RecoveryEstimate solve_op2_adaptive(const Eigen::VectorXd& y, const AffinityMatrix& a, const MixtureBook& book,
                                    const ReceptionConfig& cfg, const RecoveryConfig& rcfg);

// argmax w_hat, lowest index on ties.
int detect_peak_mixture(const Eigen::VectorXd& w_hat);
Eigen::VectorXd one_hot(int index, Eigen::Index size);

// True when no mixture concentration exceeds `floor`.
bool is_empty_detection(const Eigen::VectorXd& w_hat, double floor = 1e-6);

// Worst constraint violations of a candidate (x, w), each divided by the
// magnitude of the terms in that constraint. Nonpositive means satisfied.
struct ConstraintReport {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double nonneg = 0.0;

    double worst() const;
};

ConstraintReport check_constraints(const Eigen::VectorXd& y, const AffinityMatrix& a, const ReceptionConfig& cfg,
                                   const RecoveryConfig& rcfg, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd* w = nullptr, const Eigen::MatrixXd* reception = nullptr);

}  // namespace mmsk
