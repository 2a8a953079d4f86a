#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmsk/affinity.hpp"
#include "mmsk/channel.hpp"
#include "mmsk/design.hpp"
#include "mmsk/matched_filter.hpp"
#include "mmsk/pca.hpp"
#include "mmsk/recovery.hpp"

namespace mmsk {

enum class Variant { optimized, optimized_adaptive, random, random_adaptive };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);
inline bool is_adaptive(Variant v) { return v == Variant::optimized_adaptive || v == Variant::random_adaptive; }
inline bool is_optimized(Variant v) { return v == Variant::optimized || v == Variant::optimized_adaptive; }

struct ExperimentConfig {
    // "fixture" or "constructed" (from `affinity`)
    std::string affinity_source = "fixture";
    AffinityParams affinity;

    // "reference": the published per-Tx allocations and mixture orders.
    // "designed": allocation and alphabets computed by the greedy design.
    std::string book_source = "reference";
    int transmitters = 4;
    int per_transmitter = 4;
    int max_mix = 3;
    int alphabet_size = 4;
    double d_thr = -std::numeric_limits<double>::infinity();
    double x_bar_mix = 50.0;
    double design_x_bar_mix = 100.0;
    int design_realizations = 10'000;

    ChannelResponse default_channel;
    std::vector<ChannelResponse> channels;  // empty: default_channel for every type
    ReceptionConfig reception;

    std::vector<double> epsilons = {0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0};
    std::optional<double> delta;  // unset: delta = epsilon
    double solver_tol = 1e-7;
    int max_iters = 200;
    std::vector<Variant> variants = {Variant::optimized, Variant::optimized_adaptive, Variant::random,
                                     Variant::random_adaptive};

    int trials = 10'000;
    std::uint64_t seed = 1;
    std::string mode = "single-sample";  // or "multi-sample"

    // multi-sample trace
    double n_rls = 1e5;
    double trace_epsilon = 3.0;
    double support_epsilon = 1e-3;
    double rel_threshold = 0.5;
    int min_separation = 5;
    bool deterministic_arrivals = false;

    // PCA diagnostic
    int pca_realizations = 100'000;
    bool pca_standardize = true;

    void validate() const;
    std::vector<ChannelResponse> channel_list(int molecules) const;
    RecoveryConfig recovery(double epsilon) const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Allocations and mixtures (in acceptance order, 14 per Tx) of the published
// design on the fixture matrix. 0-based molecule indices.
std::vector<std::vector<int>> reference_allocations();
std::vector<std::vector<Mixture>> reference_alphabets();

struct Scenario {
    AffinityMatrix affinity;
    std::vector<ChannelResponse> channels;
    MixtureBook book;
    std::optional<DesignResult> design;
};

Scenario make_scenario(const ExperimentConfig& config);

// Random allocation of K * Q_tx molecules and `alphabet_size` distinct random
// 2-molecule mixtures per Tx.
MixtureBook random_pair_book(Rng& rng, int molecules, int transmitters, int per_transmitter, int alphabet_size,
                             const std::vector<ChannelResponse>& channels, double x_bar_mix);

struct TrialRecord {
    int trial = 0;
    int mixture = 0;
    int transmitter = 0;
    int detected = -1;  // -1 when nothing was detected
    SolveStatus status = SolveStatus::iteration_limit;
    bool correct = false;
};

struct PeEstimate {
    int trials = 0;
    int errors = 0;
    int infeasible = 0;  // solver status other than optimal
    int empty = 0;       // optimal but w_hat = 0
    double pe = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::vector<TrialRecord> records;
};

// Wilson score interval at 95%.
std::pair<double, double> wilson_interval(int errors, int trials);

// Single-sample error probability: every trial plants one uniformly chosen
// mixture, draws x ~ Poisson(x_bar_mix * M_rx(:, m)) and y = receive(A, x),
// then decides by argmax of the recovered w_hat. Infeasible and empty
// recoveries count as errors. Trial t uses stream derive_seed(seed, t).
PeEstimate run_single_sample(const Scenario& scenario, const ExperimentConfig& config, double epsilon, bool adaptive,
                             bool optimized_mixtures, bool keep_records = false);

struct SweepRow {
    double epsilon = 0.0;
    Variant variant = Variant::optimized;
    int alphabet_size = 0;
    PeEstimate estimate;
};

std::vector<SweepRow> sweep_epsilon(const Scenario& scenario, const ExperimentConfig& config,
                                    const std::vector<double>& grid, const std::vector<Variant>& variants);

// Grid value with the smallest P_e (first on ties).
const SweepRow& best_row(const std::vector<SweepRow>& rows, Variant variant);

struct ScheduledRelease {
    int mixture = 0;  // global, 0-based
    double time = 0.0;
};

struct Trace {
    double delta_t = 0.2;
    Eigen::MatrixXd release;     // M x J, molecules released within each sample
    Eigen::MatrixXd x_bar;       // Q x J
    Eigen::MatrixXd x;           // Q x J
    Eigen::MatrixXd y;           // R x J
    Eigen::MatrixXd x_hat;       // Q x J
    Eigen::MatrixXd w_hat;       // M x J
    Eigen::MatrixXd w_filtered;  // M x J
    std::vector<SolveStatus> status;
    std::vector<int> transmitter;
    std::vector<DetectedEvent> events;
};

// Release, propagation and reception over the observation window, adaptive
// OP2 per sample at trace_epsilon, then matched filtering and event detection.
Trace run_multisample(const Scenario& scenario, const ExperimentConfig& config,
                      const std::vector<ScheduledRelease>& schedule);

struct PcaScenario {
    std::vector<std::pair<double, double>> cases;  // (x_A, x_B) means
    PcaResult pca;
    Eigen::VectorXi labels;     // case index per sample row
    Eigen::MatrixXd centroids;  // cases x 2 in projected coordinates
};

// Two molecule types (affinity columns a and b) at the listed mean
// concentrations; y samples pooled and projected on the first two components.
PcaScenario run_pca_scenario(const AffinityMatrix& a, const ReceptionConfig& cfg,
                             const std::vector<std::pair<double, double>>& cases, int molecule_a, int molecule_b,
                             int realizations, std::uint64_t seed, bool standardize);

// Writes pe_sweep.csv, trace_<name>.csv, design.json and meta.json into
// out_dir (created if missing). Throws Error when the directory is unwritable.
struct ResultBundle {
    const ExperimentConfig* config = nullptr;
    const Scenario* scenario = nullptr;
    const std::vector<SweepRow>* sweep = nullptr;
    std::vector<std::pair<std::string, const Trace*>> traces;
};

void emit_results(const ResultBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace mmsk
