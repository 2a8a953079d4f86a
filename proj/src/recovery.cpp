#include "mmsk/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "mmsk/error.hpp"

namespace mmsk {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void RecoveryConfig::validate() const {
    if (!(epsilon > 0.0) || !(delta > 0.0)) throw Error("epsilon and delta must be positive");
    if (!(solver_tol > 0.0) || max_iters < 1) throw Error("invalid solver settings");
}

std::pair<std::vector<int>, std::vector<int>> split_active(const VectorXd& y) {
    std::pair<std::vector<int>, std::vector<int>> out;
    for (Eigen::Index r = 0; r < y.size(); ++r) (y[r] > 0.0 ? out.first : out.second).push_back(static_cast<int>(r));
    return out;
}

namespace {

// Rows of G and h accumulated per cone, then stacked in solver order.
struct RowBlock {
    std::vector<Eigen::Triplet<double>> g;
    std::vector<double> h;

    int add_row(double rhs) {
        h.push_back(rhs);
        return static_cast<int>(h.size()) - 1;
    }
};

struct Program {
    ConeProblem cone;
    std::vector<int> x_index;  // solver column of x_q, -1 when pinned
    int w_offset = 0;
    int m = 0;
};

// Assemble OP1 (reception == nullptr) or OP2.
Program assemble(const VectorXd& y, const AffinityMatrix& a, const MatrixXd* reception,
                 const ReceptionConfig& cfg, const RecoveryConfig& rcfg) {
    cfg.validate();
    rcfg.validate();
    const auto& am = a.values();
    const int q_count = static_cast<int>(am.cols());
    if (y.size() != am.rows()) throw Error("dimension mismatch");
    if (reception && reception->rows() != q_count) throw Error("dimension mismatch");

    Program p;
    p.m = reception ? static_cast<int>(reception->cols()) : 0;
    p.x_index.assign(static_cast<std::size_t>(q_count), -1);
    int n = 0;
    for (int q = 0; q < q_count; ++q)
        if (!reception || (reception->row(q).array() != 0.0).any()) p.x_index[static_cast<std::size_t>(q)] = n++;
    p.w_offset = n;
    n += p.m;

    const auto [active, inactive] = split_active(y);
    const double offset = cfg.noise_mean - cfg.threshold;
    const double radius = std::sqrt(static_cast<double>(active.size()) * cfg.noise_mean * rcfg.epsilon);
    const double bound = std::sqrt(cfg.noise_mean * rcfg.epsilon) - offset;

    RowBlock lin;
    for (int j = 0; j < n; ++j) lin.g.emplace_back(lin.add_row(0.0), j, -1.0);
    for (int r : inactive) {
        const int row = lin.add_row(bound);
        for (int q = 0; q < q_count; ++q) {
            const int col = p.x_index[static_cast<std::size_t>(q)];
            if (col >= 0 && am(r, q) != 0.0) lin.g.emplace_back(row, col, am(r, q));
        }
    }

    RowBlock soc;
    std::vector<int> dims;
    std::vector<Eigen::Triplet<double>> eq;
    std::vector<double> eq_rhs;
    if (!active.empty()) {
        if (radius > 0.0) {
            soc.add_row(radius);
            for (int r : active) {
                const int row = soc.add_row(y[r] - offset);
                for (int q = 0; q < q_count; ++q) {
                    const int col = p.x_index[static_cast<std::size_t>(q)];
                    if (col >= 0 && am(r, q) != 0.0) soc.g.emplace_back(row, col, am(r, q));
                }
            }
            dims.push_back(static_cast<int>(active.size()) + 1);
        } else {
            for (int r : active) {
                const int row = static_cast<int>(eq_rhs.size());
                eq_rhs.push_back(y[r] - offset);
                for (int q = 0; q < q_count; ++q) {
                    const int col = p.x_index[static_cast<std::size_t>(q)];
                    if (col >= 0 && am(r, q) != 0.0) eq.emplace_back(row, col, am(r, q));
                }
            }
        }
    }
    if (reception) {
        // (x - t)^2 <= delta t  as  |(2(x - t), delta - t)| <= delta + t,  t = (M w)_q
        for (int q = 0; q < q_count; ++q) {
            const int col = p.x_index[static_cast<std::size_t>(q)];
            if (col < 0) continue;
            const int r0 = soc.add_row(rcfg.delta);
            const int r1 = soc.add_row(0.0);
            const int r2 = soc.add_row(rcfg.delta);
            soc.g.emplace_back(r1, col, -2.0);
            for (int k = 0; k < p.m; ++k) {
                const double v = (*reception)(q, k);
                if (v == 0.0) continue;
                soc.g.emplace_back(r0, p.w_offset + k, -v);
                soc.g.emplace_back(r1, p.w_offset + k, 2.0 * v);
                soc.g.emplace_back(r2, p.w_offset + k, v);
            }
            dims.push_back(3);
        }
    }

    const int lin_rows = static_cast<int>(lin.h.size());
    const int rows = lin_rows + static_cast<int>(soc.h.size());
    std::vector<Eigen::Triplet<double>> all = lin.g;
    for (const auto& t : soc.g) all.emplace_back(t.row() + lin_rows, t.col(), t.value());
    p.cone.G.resize(rows, n);
    p.cone.G.setFromTriplets(all.begin(), all.end());
    p.cone.h.resize(rows);
    for (int i = 0; i < lin_rows; ++i) p.cone.h[i] = lin.h[static_cast<std::size_t>(i)];
    for (std::size_t i = 0; i < soc.h.size(); ++i) p.cone.h[lin_rows + static_cast<int>(i)] = soc.h[i];
    p.cone.A.resize(static_cast<Eigen::Index>(eq_rhs.size()), n);
    p.cone.A.setFromTriplets(eq.begin(), eq.end());
    p.cone.b = Eigen::Map<const VectorXd>(eq_rhs.data(), static_cast<Eigen::Index>(eq_rhs.size()));
    p.cone.nonneg = lin_rows;
    p.cone.soc_dims = std::move(dims);
    p.cone.c = VectorXd::Zero(n);
    if (reception)
        p.cone.c.tail(p.m).setOnes();
    else
        p.cone.c.setOnes();
    return p;
}

RecoveryEstimate run(const VectorXd& y, const AffinityMatrix& a, const MatrixXd* reception,
                     const ReceptionConfig& cfg, const RecoveryConfig& rcfg, std::optional<std::uint64_t> start) {
    const Program p = assemble(y, a, reception, cfg, rcfg);
    SolverOptions opt;
    opt.tol = rcfg.solver_tol;
    opt.max_iters = rcfg.max_iters;
    opt.random_start = start;
    const ConeSolution sol = solve_cone_program(p.cone, opt);

    RecoveryEstimate est;
    std::tie(est.active, est.inactive) = split_active(y);
    est.status = sol.status;
    est.iterations = sol.iterations;
    est.objective = sol.primal_objective;
    const auto q_count = a.molecules();
    est.x_hat = VectorXd::Zero(q_count);
    est.w_hat = VectorXd::Zero(p.m);
    if (sol.status == SolveStatus::optimal || sol.status == SolveStatus::iteration_limit) {
        for (Eigen::Index q = 0; q < q_count; ++q) {
            const int col = p.x_index[static_cast<std::size_t>(q)];
            if (col >= 0) est.x_hat[q] = std::max(0.0, sol.x[col]);
        }
        if (p.m > 0) est.w_hat = sol.x.segment(p.w_offset, p.m).cwiseMax(0.0);
    }
    return est;
}

}  // namespace

RecoveryEstimate solve_op1(const VectorXd& y, const AffinityMatrix& a, const ReceptionConfig& cfg,
                           const RecoveryConfig& rcfg, std::optional<std::uint64_t> random_start) {
    RecoveryEstimate est = run(y, a, nullptr, cfg, rcfg, random_start);
    est.w_hat.resize(0);
    return est;
}

RecoveryEstimate solve_op2(const VectorXd& y, const AffinityMatrix& a, const MatrixXd& reception,
                           const ReceptionConfig& cfg, const RecoveryConfig& rcfg,
                           std::optional<std::uint64_t> random_start) {
    if (reception.cols() == 0) throw Error("empty reception matrix");
    return run(y, a, &reception, cfg, rcfg, random_start);
}

RecoveryEstimate solve_op2_adaptive(const VectorXd& y, const AffinityMatrix& a, const MixtureBook& book,
                                    const ReceptionConfig& cfg, const RecoveryConfig& rcfg) {
    RecoveryEstimate first = solve_op2(y, a, book.reception, cfg, rcfg);
    if (first.status != SolveStatus::optimal) return first;
    if (is_empty_detection(first.w_hat)) {
        first.no_active_tx = true;
        return first;
    }
    const int tx = book.owner(detect_peak_mixture(first.w_hat));
    const std::vector<int> cols = book.columns_of(tx);
    MatrixXd sub(book.reception.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = book.reception.col(cols[i]);

    RecoveryEstimate second = solve_op2(y, a, sub, cfg, rcfg);
    if (second.status != SolveStatus::optimal) {
        first.transmitter = tx;
        first.refinement_failed = true;
        return first;
    }
    VectorXd w = VectorXd::Zero(book.reception.cols());
    for (std::size_t i = 0; i < cols.size(); ++i) w[cols[i]] = second.w_hat[static_cast<Eigen::Index>(i)];
    second.w_hat = w;
    second.transmitter = tx;
    second.iterations += first.iterations;
    return second;
}

int detect_peak_mixture(const VectorXd& w_hat) {
    if (w_hat.size() == 0) throw Error("empty mixture estimate");
    Eigen::Index best = 0;
    for (Eigen::Index m = 1; m < w_hat.size(); ++m)
        if (w_hat[m] > w_hat[best]) best = m;
    return static_cast<int>(best);
}

VectorXd one_hot(int index, Eigen::Index size) {
    VectorXd s = VectorXd::Zero(size);
    s[index] = 1.0;
    return s;
}

bool is_empty_detection(const VectorXd& w_hat, double floor) {
    return w_hat.size() == 0 || w_hat.maxCoeff() <= floor;
}

double ConstraintReport::worst() const { return std::max({c1, c2, c3, nonneg}); }

ConstraintReport check_constraints(const VectorXd& y, const AffinityMatrix& a, const ReceptionConfig& cfg,
                                   const RecoveryConfig& rcfg, const VectorXd& x, const VectorXd* w,
                                   const MatrixXd* reception) {
    const auto& am = a.values();
    if (x.size() != am.cols() || y.size() != am.rows()) throw Error("dimension mismatch");
    const auto [active, inactive] = split_active(y);
    const double offset = cfg.noise_mean - cfg.threshold;
    const VectorXd pre = am * x;

    ConstraintReport rep;
    rep.c1 = rep.c2 = rep.c3 = -std::numeric_limits<double>::infinity();
    rep.nonneg = -x.minCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff());

    if (!active.empty()) {
        double err = 0.0, ynorm = 0.0, fit = 0.0;
        for (int r : active) {
            err += std::pow(y[r] - pre[r] - offset, 2);
            ynorm += std::pow(y[r] - offset, 2);
            fit += pre[r] * pre[r];
        }
        const double radius = std::sqrt(static_cast<double>(active.size()) * cfg.noise_mean * rcfg.epsilon);
        const double scale = std::max({1.0, radius * radius, ynorm, fit});
        rep.c1 = (err - radius * radius) / scale;
    }
    const double bound = std::sqrt(cfg.noise_mean * rcfg.epsilon);
    for (int r : inactive) {
        const double lhs = pre[r] + offset;
        const double scale = std::max({1.0, bound, std::fabs(pre[r]), std::fabs(offset)});
        rep.c2 = std::max(rep.c2, (lhs - bound) / scale);
    }
    if (w && reception) {
        if (reception->rows() != x.size() || reception->cols() != w->size()) throw Error("dimension mismatch");
        rep.nonneg = std::max(rep.nonneg, -w->minCoeff() / std::max(1.0, w->cwiseAbs().maxCoeff()));
        const VectorXd t = *reception * *w;
        for (Eigen::Index q = 0; q < x.size(); ++q) {
            const double lhs = (x[q] - t[q]) * (x[q] - t[q]);
            const double rhs = rcfg.delta * t[q];
            const double scale = std::max({1.0, rhs, x[q] * x[q], t[q] * t[q]});
            rep.c3 = std::max(rep.c3, (lhs - rhs) / scale);
        }
    }
    return rep;
}

}  // namespace mmsk
