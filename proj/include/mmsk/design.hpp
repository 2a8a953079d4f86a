#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mmsk/affinity.hpp"
#include "mmsk/channel.hpp"

namespace mmsk {

// A set of molecule types released together in equal parts. Constituents are
// 0-based molecule indices, kept sorted.
class Mixture {
public:
    Mixture() = default;
    explicit Mixture(std::vector<int> constituents);

    const std::vector<int>& constituents() const { return constituents_; }
    std::size_t size() const { return constituents_.size(); }
    bool contains(int molecule) const;

    friend bool operator==(const Mixture&, const Mixture&) = default;
    friend auto operator<=>(const Mixture&, const Mixture&) = default;

private:
    std::vector<int> constituents_;
};

// Expected received counts per molecule type when a mixture delivers
// x_bar_mix molecules in total, split evenly across its constituents.
Eigen::VectorXd mixture_expected_concentration(const Mixture& mix, double x_bar_mix, int molecules);

// Dissimilarity values in dB over a list of mixtures, with per-pair Monte
// Carlo standard errors from batch means. Diagonal entries are unused.
struct DissimilarityTable {
    std::vector<Mixture> mixtures;
    Eigen::MatrixXd values;
    Eigen::MatrixXd std_error;
    int realizations = 0;
    std::uint64_t seed = 0;

    double operator()(std::size_t i, std::size_t j) const {
        return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    std::size_t size() const { return mixtures.size(); }
};

struct MetricSettings {
    double x_bar_mix = 100.0;
    int realizations = 10'000;  // mc, at least 1000
    std::uint64_t seed = 1;
    int batches = 10;           // for the standard-error estimate
};

// Monte Carlo array responses of one mixture: an R x mc matrix of y samples.
// The stream is derived from (seed, mixture), so the same mixture always sees
// the same realisations.
Eigen::MatrixXd mixture_response_samples(const AffinityMatrix& a, const Mixture& mix,
                                         const ReceptionConfig& cfg, const MetricSettings& s);

// Generalized SNR between two sample sets (columns are realisations):
// |mean1 - mean2|^2 / (var(p.y1) + var(p.y2)) in dB with p the unit mean
// difference. Returns -infinity when the means coincide (|diff|^2 < 1e-12).
double dissimilarity_from_samples(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2);

double dissimilarity(const AffinityMatrix& a, const Mixture& m1, const Mixture& m2,
                     const ReceptionConfig& cfg, const MetricSettings& s);

DissimilarityTable fill_dissimilarity_table(const AffinityMatrix& a, std::vector<Mixture> mixtures,
                                            const ReceptionConfig& cfg, const MetricSettings& s);

// All nonempty subsets of `molecules` with at most max_size members, ordered by
// size and then lexicographically.
std::vector<Mixture> enumerate_mixtures(const std::vector<int>& molecules, int max_size);

std::vector<Mixture> singletons(int molecules);

// Greedy molecule-to-transmitter allocation over a singleton table. Each
// transmitter first receives the most dissimilar remaining pair; the rest are
// filled one molecule at a time by the max-min rule. Ties go to the lowest
// index after rounding metrics to 1e-9 dB. Returned sets are sorted.
std::vector<std::vector<int>> allocate_molecules(const DissimilarityTable& singleton_table,
                                                 int transmitters, int per_transmitter);

// Greedy d_thr-distinguishable alphabet. `order` lists table indices in the
// order they were accepted; min_metric[i] is the minimum pairwise metric of
// the first i+1 accepted mixtures (NaN for i = 0).
struct Alphabet {
    std::vector<std::size_t> order;
    std::vector<double> min_metric;
};

Alphabet build_alphabet(const DissimilarityTable& table,
                        double d_thr = -std::numeric_limits<double>::infinity());

// True if every pair of the listed table entries meets d_thr.
bool is_distinguishable(const DissimilarityTable& table, const std::vector<std::size_t>& members,
                        double d_thr);

// Q x M matrix; column m holds 1/|m| at each constituent row. Alphabets are
// concatenated transmitter by transmitter.
Eigen::MatrixXd build_construction_matrix(const std::vector<std::vector<Mixture>>& alphabets,
                                          int molecules);

// Received composition: column m is construction(:,m) .* gamma, renormalized.
Eigen::MatrixXd build_reception_matrix(const Eigen::MatrixXd& construction,
                                       const std::vector<double>& gammas);

// Per-transmitter molecule sets and alphabets with the matrices derived from
// them. Mixture m (global index) belongs to owner(m).
struct MixtureBook {
    std::vector<std::vector<int>> allocations;
    std::vector<std::vector<Mixture>> alphabets;
    Eigen::MatrixXd construction;
    Eigen::MatrixXd reception;
    double x_bar_mix = 50.0;

    int transmitters() const { return static_cast<int>(alphabets.size()); }
    int mixture_count() const;
    int owner(int mixture) const;
    // Global column indices of transmitter k's alphabet.
    std::vector<int> columns_of(int transmitter) const;
    const Mixture& mixture(int global) const;

    // Throws Error if allocations overlap, a mixture leaves its transmitter's
    // set, or a matrix column does not sum to one.
    void check() const;
};

MixtureBook make_book(std::vector<std::vector<int>> allocations,
                      std::vector<std::vector<Mixture>> alphabets,
                      const std::vector<ChannelResponse>& channels, double x_bar_mix);

struct DesignParams {
    int transmitters = 4;     // K
    int per_transmitter = 4;  // Q_tx
    int max_mix = 3;          // M_mix
    double d_thr = -std::numeric_limits<double>::infinity();
    MetricSettings metric;    // x_bar_mix and mc used for the design tables
};

struct DesignResult {
    DissimilarityTable singleton_table;
    std::vector<std::vector<int>> allocations;
    std::vector<DissimilarityTable> mixture_tables;  // one per transmitter
    std::vector<Alphabet> alphabets;                 // indices into mixture_tables[k]
};

// Allocation followed by alphabet construction for every transmitter.
DesignResult run_design(const AffinityMatrix& a, const ReceptionConfig& cfg, const DesignParams& p);

// Book from the first `alphabet_size` accepted mixtures of every transmitter.
MixtureBook book_from_design(const DesignResult& design, int alphabet_size,
                             const std::vector<ChannelResponse>& channels, double x_bar_mix);

}  // namespace mmsk
