#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mmsk {

// Cone linear program
//
//   minimize    c'x
//   subject to  G x + s = h,  A x = b,  s in K
//
// where K is the nonnegative orthant of dimension `nonneg` followed by the
// second-order cones {u : u0 >= |u1|} of the listed dimensions, in row order.
struct ConeProblem {
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double> G;
    Eigen::VectorXd h;
    Eigen::SparseMatrix<double> A;  // may have zero rows
    Eigen::VectorXd b;
    int nonneg = 0;
    std::vector<int> soc_dims;

    int variables() const { return static_cast<int>(c.size()); }
    int cone_rows() const;
    void check() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(SolveStatus s);

struct SolverOptions {
    double tol = 1e-7;  // feasibility and gap tolerance
    int max_iters = 200;
    // Start from a random interior point instead of the least-squares start.
    std::optional<std::uint64_t> random_start;
};

struct ConeSolution {
    SolveStatus status = SolveStatus::iteration_limit;
    Eigen::VectorXd x, s, y, z;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

// Homogeneous self-dual primal-dual interior-point method with Nesterov-Todd
// scaling and Mehrotra predictor-corrector steps. Infeasible problems return a
// Farkas certificate in (y, z) with status infeasible.
ConeSolution solve_cone_program(const ConeProblem& problem, const SolverOptions& options = {});

}  // namespace mmsk
