#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmsk {

// Receptor-molecule affinity matrix: R rows (receptor types) by Q columns
// (molecule types). Entry (r, q) is the dimensionless activation strength of
// receptor r for a unit amount of molecule q; negative entries are inhibitory.
class AffinityMatrix {
public:
    AffinityMatrix() = default;
    explicit AffinityMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}

    Eigen::Index receptors() const { return values_.rows(); }
    Eigen::Index molecules() const { return values_.cols(); }

    double operator()(Eigen::Index r, Eigen::Index q) const { return values_(r, q); }
    auto column(Eigen::Index q) const { return values_.col(q); }
    const Eigen::MatrixXd& values() const { return values_; }

    // Matrix made of the listed molecule columns, in the listed order.
    AffinityMatrix select_columns(const std::vector<int>& molecules) const;

private:
    Eigen::MatrixXd values_;
};

struct AffinityParams {
    int receptors = 10;            // R
    int molecules = 20;            // Q
    int active_per_molecule = 5;   // R_act
    double max_inhibition = 0.3;   // a_inh
    double max_coherence = 0.5;    // mu_thr
    std::uint64_t seed = 1;
    std::size_t retry_cap = 1'000'000;

    void validate() const;

    friend bool operator==(const AffinityParams&, const AffinityParams&) = default;
};

// |a.b| / (|a| |b|). Throws Error("degenerate column") if either norm is zero.
double mutual_coherence(const Eigen::Ref<const Eigen::VectorXd>& a,
                        const Eigen::Ref<const Eigen::VectorXd>& b);

// Column-by-column randomized construction: each candidate column activates
// R_act random receptors with strengths drawn from (0,1], is rescaled so its
// maximum is one and its smallest possible value is -a_inh, and is accepted
// once its coherence with every earlier column is at most mu_thr.
AffinityMatrix construct_affinity(const AffinityParams& params);

// The 10x20 example matrix (two-decimal entries) used throughout the
// experiments.
AffinityMatrix load_fixture_affinity();

struct ValidationOptions {
    // Accept columns with fewer than R_act nonzeros. Needed for matrices
    // printed at finite precision, where a small entry can round to zero.
    bool allow_rounded_support = false;
    double tolerance = 1e-12;
};

// Empty result iff every invariant holds. Throws Error on dimension mismatch.
std::vector<std::string> validate_affinity(const AffinityMatrix& a,
                                           const AffinityParams& params,
                                           const ValidationOptions& options = {});

}  // namespace mmsk
