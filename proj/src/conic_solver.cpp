#include "mmsk/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmsk/error.hpp"
#include "mmsk/random.hpp"

namespace mmsk {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

int ConeProblem::cone_rows() const {
    int m = nonneg;
    for (int d : soc_dims) m += d;
    return m;
}

void ConeProblem::check() const {
    const auto n = c.size();
    if (n == 0) throw Error("cone program without variables");
    if (G.cols() != n || A.cols() != n) throw Error("dimension mismatch");
    if (G.rows() != h.size() || A.rows() != b.size()) throw Error("dimension mismatch");
    if (nonneg < 0) throw Error("negative orthant dimension");
    for (int d : soc_dims)
        if (d < 2) throw Error("second-order cone dimension must be at least 2");
    if (cone_rows() != G.rows()) throw Error("cone dimensions do not match G");
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::iteration_limit: return "iteration-limit";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cones {
    int nonneg = 0;
    std::vector<int> dims;
    std::vector<int> offsets;  // first row of each SOC

    int degree() const { return nonneg + static_cast<int>(dims.size()); }

    VectorXd identity(Eigen::Index m) const {
        VectorXd e = VectorXd::Zero(m);
        e.head(nonneg).setOnes();
        for (int o : offsets) e[o] = 1.0;
        return e;
    }

    // u o v
    VectorXd product(const VectorXd& u, const VectorXd& v) const {
        VectorXd r(u.size());
        r.head(nonneg) = u.head(nonneg).cwiseProduct(v.head(nonneg));
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const int o = offsets[k], d = dims[k];
            r[o] = u.segment(o, d).dot(v.segment(o, d));
            r.segment(o + 1, d - 1) = u[o] * v.segment(o + 1, d - 1) + v[o] * u.segment(o + 1, d - 1);
        }
        return r;
    }

    // x with lambda o x = b
    VectorXd divide(const VectorXd& lambda, const VectorXd& b) const {
        VectorXd x(b.size());
        x.head(nonneg) = b.head(nonneg).cwiseQuotient(lambda.head(nonneg));
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const int o = offsets[k], d = dims[k];
            const auto l1 = lambda.segment(o + 1, d - 1);
            const auto b1 = b.segment(o + 1, d - 1);
            const double det = lambda[o] * lambda[o] - l1.squaredNorm();
            x[o] = (lambda[o] * b[o] - l1.dot(b1)) / det;
            x.segment(o + 1, d - 1) = (b1 - x[o] * l1) / lambda[o];
        }
        return x;
    }

    // Largest step a >= 0 keeping u + a d in the cone (u interior).
    double max_step(const VectorXd& u, const VectorXd& d) const {
        double a = kInf;
        for (int i = 0; i < nonneg; ++i)
            if (d[i] < 0.0) a = std::min(a, -u[i] / d[i]);
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const int o = offsets[k], n = dims[k];
            const auto u1 = u.segment(o + 1, n - 1);
            const auto d1 = d.segment(o + 1, n - 1);
            const double qa = d[o] * d[o] - d1.squaredNorm();
            const double qb = u[o] * d[o] - u1.dot(d1);
            const double qc = std::max(0.0, u[o] * u[o] - u1.squaredNorm());
            const double disc = qb * qb - qa * qc;
            if (disc < 0.0) continue;
            const double den = -qb + std::sqrt(disc);
            if (den > 0.0) a = std::min(a, qc / den);
        }
        return a;
    }

    // Distance of u from the cone boundary along e; negative when outside.
    double margin(const VectorXd& u) const {
        double m = kInf;
        for (int i = 0; i < nonneg; ++i) m = std::min(m, u[i]);
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const int o = offsets[k], d = dims[k];
            m = std::min(m, u[o] - u.segment(o + 1, d - 1).norm());
        }
        return m;
    }
};

// Nesterov-Todd scaling W with W z = W^{-1} s. The orthant part is diagonal;
// each cone block is eta (2 v v' - J).
struct Scaling {
    VectorXd d;
    std::vector<double> eta;
    std::vector<VectorXd> v;
    std::vector<VectorXd> jv;  // J v

    void compute(const Cones& k, const VectorXd& s, const VectorXd& z) {
        d = (s.head(k.nonneg).array() / z.head(k.nonneg).array()).sqrt();
        eta.resize(k.dims.size());
        v.resize(k.dims.size());
        jv.resize(k.dims.size());
        for (std::size_t i = 0; i < k.dims.size(); ++i) {
            const int o = k.offsets[i], n = k.dims[i];
            VectorXd sb = s.segment(o, n), zb = z.segment(o, n);
            const double sjs = std::max(sb[0] * sb[0] - sb.tail(n - 1).squaredNorm(), 1e-300);
            const double zjz = std::max(zb[0] * zb[0] - zb.tail(n - 1).squaredNorm(), 1e-300);
            sb /= std::sqrt(sjs);
            zb /= std::sqrt(zjz);
            const double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
            VectorXd w(n);
            w[0] = (sb[0] + zb[0]) / (2.0 * gamma);
            w.tail(n - 1) = (sb.tail(n - 1) - zb.tail(n - 1)) / (2.0 * gamma);
            eta[i] = std::pow(sjs / zjz, 0.25);
            VectorXd vi = w;
            vi[0] += 1.0;
            vi /= std::sqrt(2.0 * (1.0 + w[0]));
            v[i] = vi;
            vi.tail(n - 1) = -vi.tail(n - 1);
            jv[i] = vi;
        }
    }

    template <bool Inverse>
    VectorXd apply(const Cones& k, const VectorXd& u) const {
        VectorXd r(u.size());
        if constexpr (Inverse)
            r.head(k.nonneg) = u.head(k.nonneg).cwiseQuotient(d);
        else
            r.head(k.nonneg) = u.head(k.nonneg).cwiseProduct(d);
        for (std::size_t i = 0; i < k.dims.size(); ++i) {
            const int o = k.offsets[i], n = k.dims[i];
            const auto ub = u.segment(o, n);
            auto rb = r.segment(o, n);
            const VectorXd& a = Inverse ? jv[i] : v[i];
            rb = 2.0 * a.dot(ub) * a;
            rb[0] -= ub[0];
            rb.tail(n - 1) += ub.tail(n - 1);
            rb *= Inverse ? 1.0 / eta[i] : eta[i];
        }
        return r;
    }

    VectorXd times(const Cones& k, const VectorXd& u) const { return apply<false>(k, u); }
    VectorXd solve(const Cones& k, const VectorXd& u) const { return apply<true>(k, u); }
};

// Column-compressed view of each cone block of G for assembling G'W^{-2}G.
struct Blocks {
    RowSparse rows;                        // G in row-major form
    std::vector<std::vector<int>> active;  // nonzero columns per cone block
    std::vector<MatrixXd> dense;           // dims[i] x active[i].size()
};

struct Newton {
    VectorXd x, y, ztilde;  // ztilde = W dz
};

class Solver {
public:
    Solver(const ConeProblem& p, const SolverOptions& o) : p_(p), opt_(o) {
        cones_.nonneg = p.nonneg;
        cones_.dims = p.soc_dims;
        int off = p.nonneg;
        for (int d : p.soc_dims) {
            cones_.offsets.push_back(off);
            off += d;
        }
        n_ = p.c.size();
        m_ = p.h.size();
        blocks_.rows = p.G;
        for (std::size_t i = 0; i < cones_.dims.size(); ++i) {
            const int o = cones_.offsets[i], d = cones_.dims[i];
            std::vector<int> cols;
            for (int r = o; r < o + d; ++r)
                for (RowSparse::InnerIterator it(blocks_.rows, r); it; ++it) cols.push_back(static_cast<int>(it.col()));
            std::sort(cols.begin(), cols.end());
            cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
            MatrixXd dense = MatrixXd::Zero(d, static_cast<Eigen::Index>(cols.size()));
            for (int r = o; r < o + d; ++r)
                for (RowSparse::InnerIterator it(blocks_.rows, r); it; ++it) {
                    const auto pos = std::lower_bound(cols.begin(), cols.end(), static_cast<int>(it.col())) - cols.begin();
                    dense(r - o, pos) = it.value();
                }
            blocks_.active.push_back(std::move(cols));
            blocks_.dense.push_back(std::move(dense));
        }
        a_ = MatrixXd(p.A);
        e_ = cones_.identity(m_);
    }

    ConeSolution run();

private:
    void factor();
    Newton solve_kkt(const VectorXd& bx, const VectorXd& by, const VectorXd& bz) const;
    Newton solve_once(const VectorXd& bx, const VectorXd& by, const VectorXd& bz) const;
    void start(VectorXd& x, VectorXd& y, VectorXd& s, VectorXd& z);

    const ConeProblem& p_;
    SolverOptions opt_;
    Cones cones_;
    Eigen::Index n_ = 0, m_ = 0;
    Blocks blocks_;
    MatrixXd a_;
    VectorXd e_;
    Scaling w_;
    Eigen::LLT<MatrixXd> h_llt_;
    MatrixXd h_inv_at_;
    Eigen::LLT<MatrixXd> schur_llt_;
};

void Solver::factor() {
    MatrixXd h = MatrixXd::Zero(n_, n_);
    for (int r = 0; r < cones_.nonneg; ++r) {
        const double wt = 1.0 / (w_.d[r] * w_.d[r]);
        for (RowSparse::InnerIterator i(blocks_.rows, r); i; ++i)
            for (RowSparse::InnerIterator j(blocks_.rows, r); j; ++j)
                h(i.col(), j.col()) += wt * i.value() * j.value();
    }
    for (std::size_t k = 0; k < cones_.dims.size(); ++k) {
        const MatrixXd& b = blocks_.dense[k];
        MatrixXd sb = 2.0 * w_.jv[k] * (w_.jv[k].transpose() * b);
        sb.row(0) -= b.row(0);
        sb.bottomRows(b.rows() - 1) += b.bottomRows(b.rows() - 1);
        sb /= w_.eta[k];
        const MatrixXd block = sb.transpose() * sb;
        const auto& cols = blocks_.active[k];
        for (std::size_t i = 0; i < cols.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j)
                h(cols[i], cols[j]) += block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    h_llt_.compute(h);
    if (h_llt_.info() != Eigen::Success) {
        const double reg = 1e-13 * std::max(1.0, h.diagonal().maxCoeff());
        h.diagonal().array() += reg;
        h_llt_.compute(h);
    }
    if (a_.rows() > 0) {
        h_inv_at_ = h_llt_.solve(a_.transpose());
        schur_llt_.compute(a_ * h_inv_at_);
    }
}

Newton Solver::solve_once(const VectorXd& bx, const VectorXd& by, const VectorXd& bz) const {
    const VectorXd wbz = w_.solve(cones_, w_.solve(cones_, bz));
    const VectorXd rhs = bx + p_.G.transpose() * wbz;
    Newton out;
    if (a_.rows() > 0) {
        out.y = schur_llt_.solve(a_ * h_llt_.solve(rhs) - by);
        out.x = h_llt_.solve(rhs - a_.transpose() * out.y);
    } else {
        out.y = VectorXd::Zero(0);
        out.x = h_llt_.solve(rhs);
    }
    out.ztilde = w_.solve(cones_, p_.G * out.x - bz);
    return out;
}

// One round of iterative refinement on the full KKT system
//   [0 A' G'; A 0 0; G 0 -W^2] [x; y; z] = [bx; by; bz].
Newton Solver::solve_kkt(const VectorXd& bx, const VectorXd& by, const VectorXd& bz) const {
    Newton u = solve_once(bx, by, bz);
    const VectorXd z = w_.solve(cones_, u.ztilde);
    VectorXd rx = bx - p_.G.transpose() * z;
    if (a_.rows() > 0) rx -= a_.transpose() * u.y;
    const VectorXd ry = a_.rows() > 0 ? VectorXd(by - a_ * u.x) : VectorXd::Zero(0);
    const VectorXd rz = bz - (p_.G * u.x - w_.times(cones_, u.ztilde));
    const Newton c = solve_once(rx, ry, rz);
    u.x += c.x;
    if (a_.rows() > 0) u.y += c.y;
    u.ztilde += c.ztilde;
    return u;
}

void Solver::start(VectorXd& x, VectorXd& y, VectorXd& s, VectorXd& z) {
    const auto p = a_.rows();
    if (opt_.random_start) {
        Rng rng(*opt_.random_start);
        x.resize(n_);
        for (auto& v : x) v = rng.normal();
        y.resize(p);
        for (auto& v : y) v = rng.normal();
        auto interior = [&](VectorXd& u) {
            u.resize(m_);
            for (int i = 0; i < cones_.nonneg; ++i) u[i] = 0.5 + rng.uniform();
            for (std::size_t k = 0; k < cones_.dims.size(); ++k) {
                const int o = cones_.offsets[k], d = cones_.dims[k];
                for (int i = 1; i < d; ++i) u[o + i] = 0.5 * rng.normal();
                u[o] = u.segment(o + 1, d - 1).norm() + 0.5 + rng.uniform();
            }
        };
        interior(s);
        interior(z);
        return;
    }
    w_.compute(cones_, e_, e_);
    factor();
    const Newton primal = solve_kkt(VectorXd::Zero(n_), p_.b, p_.h);
    x = primal.x;
    s = p_.h - p_.G * x;
    const Newton dual = solve_kkt(-p_.c, VectorXd::Zero(p), VectorXd::Zero(m_));
    y = dual.y;
    z = dual.ztilde;
    const double ms = cones_.margin(s);
    if (ms <= 0.0) s += (1.0 - ms) * e_;
    const double mz = cones_.margin(z);
    if (mz <= 0.0) z += (1.0 - mz) * e_;
}

ConeSolution Solver::run() {
    VectorXd x, y, s, z;
    start(x, y, s, z);
    double tau = 1.0, kappa = 1.0;

    const double resx0 = std::max(1.0, p_.c.norm());
    const double resy0 = std::max(1.0, p_.b.norm());
    const double resz0 = std::max(1.0, p_.h.norm());
    const double tol = opt_.tol;
    const int degree = cones_.degree();

    ConeSolution out;
    for (int iter = 0;; ++iter) {
        const VectorXd gtz = p_.G.transpose() * z;
        VectorXd rx = gtz + p_.c * tau;
        VectorXd aty = VectorXd::Zero(n_);
        VectorXd ax = VectorXd::Zero(a_.rows());
        if (a_.rows() > 0) {
            aty = a_.transpose() * y;
            ax = a_ * x;
            rx += aty;
        }
        const VectorXd ry = ax - p_.b * tau;
        const VectorXd gxs = p_.G * x + s;
        const VectorXd rz = gxs - p_.h * tau;
        const double cx = p_.c.dot(x);
        const double hz_by = p_.h.dot(z) + p_.b.dot(y);
        const double rt = kappa + cx + hz_by;

        const double pres = std::max(ry.norm() / resy0, rz.norm() / resz0) / tau;
        const double dres = rx.norm() / resx0 / tau;
        const double pcost = cx / tau;
        const double dcost = -hz_by / tau;
        const double gap = s.dot(z) / (tau * tau);
        double relgap = kInf;
        if (pcost < 0.0)
            relgap = gap / -pcost;
        else if (dcost > 0.0)
            relgap = gap / dcost;
        const double pinf = hz_by < 0.0 ? (aty + gtz).norm() / resx0 / -hz_by : kInf;
        const double dinf = cx < 0.0 ? std::max(ax.norm() / resy0, gxs.norm() / resz0) / -cx : kInf;

        out.iterations = iter;
        out.primal_residual = pres;
        out.dual_residual = dres;
        out.gap = gap;
        if (pres <= tol && dres <= tol && (gap <= tol || relgap <= tol)) {
            out.status = SolveStatus::optimal;
            out.x = x / tau;
            out.y = y / tau;
            out.s = s / tau;
            out.z = z / tau;
            out.primal_objective = pcost;
            out.dual_objective = dcost;
            return out;
        }
        if (pinf <= tol) {
            out.status = SolveStatus::infeasible;
            out.x = VectorXd::Constant(n_, std::numeric_limits<double>::quiet_NaN());
            out.y = y / -hz_by;
            out.z = z / -hz_by;
            out.s = VectorXd::Constant(m_, std::numeric_limits<double>::quiet_NaN());
            return out;
        }
        if (dinf <= tol) {
            out.status = SolveStatus::unbounded;
            out.x = x / -cx;
            out.s = s / -cx;
            out.y = VectorXd::Constant(a_.rows(), std::numeric_limits<double>::quiet_NaN());
            out.z = VectorXd::Constant(m_, std::numeric_limits<double>::quiet_NaN());
            return out;
        }
        if (iter >= opt_.max_iters || !std::isfinite(pres + dres + gap + tau + kappa)) {
            out.status = SolveStatus::iteration_limit;
            out.x = x / tau;
            out.y = y / tau;
            out.s = s / tau;
            out.z = z / tau;
            out.primal_objective = pcost;
            out.dual_objective = dcost;
            return out;
        }

        w_.compute(cones_, s, z);
        const VectorXd lambda = w_.times(cones_, z);
        factor();
        const Newton h1 = solve_kkt(-p_.c, p_.b, p_.h);
        const double h1_dot = p_.c.dot(h1.x) + (a_.rows() > 0 ? p_.b.dot(h1.y) : 0.0) +
                              p_.h.dot(w_.solve(cones_, h1.ztilde));
        const double mu = (lambda.squaredNorm() + tau * kappa) / (degree + 1);

        struct Step {
            VectorXd dx, dy, dzt, dst;  // dzt = W dz, dst = W^{-1} ds
            double dtau, dkappa;
        };
        auto direction = [&](double eta, const VectorXd& dsv, double dk) {
            const VectorXd g = cones_.divide(lambda, dsv);
            const VectorXd bz2 = -eta * rz - w_.times(cones_, g);
            const Newton h2 = solve_kkt(-eta * rx, -eta * ry, bz2);
            const double h2_dot = p_.c.dot(h2.x) + (a_.rows() > 0 ? p_.b.dot(h2.y) : 0.0) +
                                  p_.h.dot(w_.solve(cones_, h2.ztilde));
            Step st;
            st.dtau = (-eta * rt - dk / tau - h2_dot) / (h1_dot - kappa / tau);
            st.dx = h1.x * st.dtau + h2.x;
            st.dy = a_.rows() > 0 ? VectorXd(h1.y * st.dtau + h2.y) : VectorXd::Zero(0);
            st.dzt = h1.ztilde * st.dtau + h2.ztilde;
            st.dst = g - st.dzt;
            st.dkappa = (dk - kappa * st.dtau) / tau;
            return st;
        };
        auto step_length = [&](const Step& st) {
            double a = std::min(cones_.max_step(lambda, st.dst), cones_.max_step(lambda, st.dzt));
            if (st.dtau < 0.0) a = std::min(a, -tau / st.dtau);
            if (st.dkappa < 0.0) a = std::min(a, -kappa / st.dkappa);
            return a;
        };

        const Step aff = direction(1.0, -cones_.product(lambda, lambda), -tau * kappa);
        const double alpha_aff = std::min(1.0, step_length(aff));
        const double sigma = std::pow(1.0 - alpha_aff, 3);

        const VectorXd dsv = -cones_.product(lambda, lambda) - cones_.product(aff.dst, aff.dzt) + sigma * mu * e_;
        const double dk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        const Step st = direction(1.0 - sigma, dsv, dk);
        const double alpha = std::min(1.0, 0.99 * step_length(st));

        x += alpha * st.dx;
        if (a_.rows() > 0) y += alpha * st.dy;
        s += alpha * w_.times(cones_, st.dst);
        z += alpha * w_.solve(cones_, st.dzt);
        tau += alpha * st.dtau;
        kappa += alpha * st.dkappa;
    }
}

}  // namespace

ConeSolution solve_cone_program(const ConeProblem& problem, const SolverOptions& options) {
    problem.check();
    if (!(options.tol > 0.0) || options.max_iters < 1) throw Error("invalid solver options");

    // Drop linearly dependent equality rows; inconsistent ones make the
    // program infeasible outright.
    if (problem.A.rows() > 0) {
        const MatrixXd a(problem.A);
        Eigen::ColPivHouseholderQR<MatrixXd> qr(a.transpose());
        qr.setThreshold(1e-10);
        const auto rank = qr.rank();
        if (rank < a.rows()) {
            const VectorXd ls = a.colPivHouseholderQr().solve(problem.b);
            if ((a * ls - problem.b).norm() > 1e-8 * std::max(1.0, problem.b.norm())) {
                ConeSolution out;
                out.status = SolveStatus::infeasible;
                return out;
            }
            ConeProblem reduced = problem;
            MatrixXd keep(rank, a.cols());
            VectorXd kb(rank);
            for (Eigen::Index i = 0; i < rank; ++i) {
                const auto row = qr.colsPermutation().indices()[i];
                keep.row(i) = a.row(row);
                kb[i] = problem.b[row];
            }
            reduced.A = keep.sparseView();
            reduced.b = kb;
            ConeSolution out = Solver(reduced, options).run();
            if (out.status == SolveStatus::optimal) {
                // Report multipliers on the original rows.
                VectorXd y = VectorXd::Zero(a.rows());
                for (Eigen::Index i = 0; i < rank; ++i) y[qr.colsPermutation().indices()[i]] = out.y[i];
                out.y = y;
            }
            return out;
        }
    }
    return Solver(problem, options).run();
}

}  // namespace mmsk
