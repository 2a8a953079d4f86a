#include "mmsk/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mmsk/error.hpp"
#include "mmsk/random.hpp"

namespace mmsk {

AffinityMatrix AffinityMatrix::select_columns(const std::vector<int>& molecules) const {
    Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(molecules.size()));
    for (std::size_t i = 0; i < molecules.size(); ++i) {
        if (molecules[i] < 0 || molecules[i] >= values_.cols())
            throw Error("molecule index out of range");
        out.col(static_cast<Eigen::Index>(i)) = values_.col(molecules[i]);
    }
    return AffinityMatrix(std::move(out));
}

void AffinityParams::validate() const {
    if (receptors <= 0 || molecules <= 0) throw Error("R and Q must be positive");
    if (active_per_molecule <= 0 || active_per_molecule > receptors)
        throw Error("R_act must lie in [1, R]");
    if (!(max_inhibition >= 0.0 && max_inhibition <= 1.0)) throw Error("a_inh must lie in [0, 1]");
    if (!(max_coherence > 0.0 && max_coherence <= 1.0)) throw Error("mu_thr must lie in (0, 1]");
    if (retry_cap == 0) throw Error("retry cap must be positive");
}

double mutual_coherence(const Eigen::Ref<const Eigen::VectorXd>& a,
                        const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) throw Error("dimension mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw Error("degenerate column");
    return std::min(1.0, std::fabs(a.dot(b)) / (na * nb));
}

namespace {

Eigen::VectorXd draw_candidate(const AffinityParams& p, Rng& rng, std::vector<int>& rows) {
    // partial Fisher-Yates over receptor indices
    std::iota(rows.begin(), rows.end(), 0);
    for (int i = 0; i < p.active_per_molecule; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.receptors - i)));
        std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
    Eigen::VectorXd raw = Eigen::VectorXd::Zero(p.receptors);
    for (int i = 0; i < p.active_per_molecule; ++i)
        raw[rows[static_cast<std::size_t>(i)]] = rng.uniform_open_closed();

    Eigen::Index argmax = 0;
    const double peak = raw.maxCoeff(&argmax);
    Eigen::VectorXd col = Eigen::VectorXd::Zero(p.receptors);
    for (int i = 0; i < p.active_per_molecule; ++i) {
        const int r = rows[static_cast<std::size_t>(i)];
        col[r] = raw[r] / peak * (1.0 + p.max_inhibition) - p.max_inhibition;
    }
    col[argmax] = 1.0;  // exact, independent of rounding in the affine map
    return col;
}

}  // namespace

AffinityMatrix construct_affinity(const AffinityParams& params) {
    params.validate();
    Rng rng(params.seed);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(params.receptors, params.molecules);
    std::vector<int> rows(static_cast<std::size_t>(params.receptors));

    for (int q = 0; q < params.molecules; ++q) {
        std::size_t attempts = 0;
        for (;;) {
            if (++attempts > params.retry_cap) throw Error("coherence threshold unsatisfiable");
            Eigen::VectorXd cand = draw_candidate(params, rng, rows);
            // A candidate whose active entries all map to zero cannot be
            // compared; only possible when a_inh makes v*(1+a)-a vanish.
            if (cand.norm() == 0.0) continue;
            double mu = 0.0;
            for (int prev = 0; prev < q && mu <= params.max_coherence; ++prev)
                mu = std::max(mu, mutual_coherence(cand, a.col(prev)));
            if (q == 0 || mu <= params.max_coherence) {
                a.col(q) = cand;
                break;
            }
        }
    }
    return AffinityMatrix(std::move(a));
}

AffinityMatrix load_fixture_affinity() {
    static const double kValues[10][20] = {
        {0, 0, 0, 0, 0, 0.55, 1, -0.1, 0, 0, 0, -0.28, 0.46, 0.66, 1, 0, 0.76, -0.14, 0, 0},
        {0, -0.06, 0.31, 0.02, 1, 0, 0, 0.38, 0.38, -0.29, 0, 0, 1, 0, 0, 0, 0.81, 0.99, 0, 0},
        {0, 0, 1, 0.52, 0.38, 0.6, 0, -0.11, 0, 1, 0, 0, 0, 0, 0, 0.01, 0.98, 0, 0, 0},
        {1, 0.41, 0, 0, 0, 0, 0.27, 0, 0.9, 0, -0.25, 0.65, 0, -0.25, 0, 0, 1, 0, 1, 0.76},
        {0, 0, 0, 1, 0, 0, -0.01, 0, -0.25, 0, 0.71, -0.17, 0.73, 0, 0.38, 0, 0, -0.1, 0.88, 0.79},
        {0.55, 0.44, 0.55, 0, -0.25, 0.29, 0, 1, 0, 0, 0.31, 0, 0, -0.24, 0.96, 0.63, -0.24, 0, 0, 0},
        {-0.3, 1, 0, 0, 0.5, -0.29, 0, 0, 0.33, 0.6, 0, 0, 0, 1, 0.12, -0.17, 0, 0, -0.07, 0.75},
        {0, 0, 0.62, 0, 0, 0, 0, -0.19, 1, -0.17, 1, 0, -0.2, -0.13, 0.4, 0.55, 0, 0, 0, 0.36},
        {-0.08, 0.67, 0, 0, 0, 1, -0.21, 0, 0, 0, 0.45, 1, 0, 0, 0, 0, 0, 1, 0.77, 0},
        {0.16, 0, -0.3, 0.16, 0.83, 0, 0.89, 0, 0, 0.16, 0, 0.84, -0.18, 0, 0, 1, 0, 0, -0.21, 1},
    };
    Eigen::MatrixXd a(10, 20);
    for (int r = 0; r < 10; ++r)
        for (int q = 0; q < 20; ++q) a(r, q) = kValues[r][q];
    return AffinityMatrix(std::move(a));
}

std::vector<std::string> validate_affinity(const AffinityMatrix& a, const AffinityParams& params,
                                           const ValidationOptions& options) {
    if (a.receptors() != params.receptors || a.molecules() != params.molecules)
        throw Error("dimension mismatch");

    std::vector<std::string> report;
    const double tol = options.tolerance;
    const auto& m = a.values();

    for (Eigen::Index q = 0; q < m.cols(); ++q) {
        const auto col = m.col(q);
        const std::string name = "column Q" + std::to_string(q + 1);
        if (col.minCoeff() < -params.max_inhibition - tol)
            report.push_back(name + ": entry below -a_inh");
        if (col.maxCoeff() > 1.0 + tol) report.push_back(name + ": entry above 1");
        if (std::fabs(col.maxCoeff() - 1.0) > tol) report.push_back(name + ": column max != 1");
        const auto nnz = (col.array() != 0.0).count();
        const bool too_many = nnz > params.active_per_molecule;
        const bool too_few = nnz < params.active_per_molecule && !options.allow_rounded_support;
        if (too_many || too_few || nnz == 0) {
            std::ostringstream os;
            os << name << ": " << nnz << " nonzeros, expected " << params.active_per_molecule;
            report.push_back(os.str());
        }
    }

    for (Eigen::Index q = 0; q < m.cols(); ++q) {
        if (m.col(q).norm() == 0.0) continue;
        for (Eigen::Index p = q + 1; p < m.cols(); ++p) {
            if (m.col(p).norm() == 0.0) continue;
            const double mu = mutual_coherence(m.col(q), m.col(p));
            if (mu > params.max_coherence + tol) {
                std::ostringstream os;
                os << "coherence(Q" << q + 1 << ", Q" << p + 1 << ") = " << mu << " exceeds mu_thr";
                report.push_back(os.str());
            }
        }
    }
    return report;
}

}  // namespace mmsk
