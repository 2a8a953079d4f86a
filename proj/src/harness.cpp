#include "mmsk/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "mmsk/error.hpp"
#include "mmsk/io.hpp"
#include "mmsk/random.hpp"

namespace mmsk {

namespace {

// Substream tags, far above any trial index.
constexpr std::uint64_t kDesignStream = 0x6465736967'6e0000ULL;
constexpr std::uint64_t kTraceStream = 0x7472616365'000000ULL;

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::optimized: return "optimized";
        case Variant::optimized_adaptive: return "optimized-adaptive";
        case Variant::random: return "random";
        case Variant::random_adaptive: return "random-adaptive";
    }
    return "unknown";
}

Variant variant_from_string(const std::string& name) {
    for (Variant v : {Variant::optimized, Variant::optimized_adaptive, Variant::random, Variant::random_adaptive})
        if (to_string(v) == name) return v;
    throw Error("unknown variant: " + name);
}

void ExperimentConfig::validate() const {
    if (affinity_source != "fixture" && affinity_source != "constructed")
        throw Error("affinity source must be fixture or constructed");
    if (book_source != "reference" && book_source != "designed")
        throw Error("book source must be reference or designed");
    if (affinity_source == "constructed") affinity.validate();
    if (transmitters < 1 || per_transmitter < 2 || max_mix < 1 || alphabet_size < 1)
        throw Error("invalid book parameters");
    if (!(x_bar_mix > 0.0) || !(design_x_bar_mix > 0.0)) throw Error("x_bar_mix must be positive");
    if (trials < 1) throw Error("trial count must be at least 1");
    if (mode != "single-sample" && mode != "multi-sample") throw Error("mode must be single-sample or multi-sample");
    reception.validate();
    default_channel.validate();
    for (const auto& c : channels) c.validate();
    for (double e : epsilons)
        if (!(e > 0.0)) throw Error("epsilon grid values must be positive");
    if (delta && !(*delta > 0.0)) throw Error("delta must be positive");
    if (!(n_rls > 0.0)) throw Error("N_rls must be positive");
}

std::vector<ChannelResponse> ExperimentConfig::channel_list(int molecules) const {
    if (channels.empty()) return std::vector<ChannelResponse>(static_cast<std::size_t>(molecules), default_channel);
    if (static_cast<int>(channels.size()) != molecules) throw Error("one channel response per molecule type required");
    return channels;
}

RecoveryConfig ExperimentConfig::recovery(double epsilon) const {
    RecoveryConfig rc;
    rc.epsilon = epsilon;
    rc.delta = delta.value_or(epsilon);
    rc.solver_tol = solver_tol;
    rc.max_iters = max_iters;
    return rc;
}

std::vector<std::vector<int>> reference_allocations() {
    const std::vector<std::vector<int>> one_based = {
        {1, 5, 11, 14}, {3, 7, 12, 19}, {2, 6, 13, 16}, {9, 10, 15, 18}};
    std::vector<std::vector<int>> out;
    for (const auto& set : one_based) {
        std::vector<int> s;
        for (int q : set) s.push_back(q - 1);
        out.push_back(s);
    }
    return out;
}

std::vector<std::vector<Mixture>> reference_alphabets() {
    using Set = std::vector<int>;
    const std::vector<std::vector<Set>> one_based = {
        {{5, 14}, {1, 11}, {1, 5}, {11, 14}, {5, 11}, {1, 14}, {1}, {14}, {5, 11, 14}, {5}, {1, 5, 11}, {11},
         {1, 5, 14}, {1, 11, 14}},
        {{7, 12}, {3, 19}, {3, 7}, {7, 19}, {3, 12}, {12, 19}, {7}, {3}, {3, 7, 12}, {3, 7, 19}, {19}, {12},
         {7, 12, 19}, {3, 12, 19}},
        {{2, 16}, {6, 13}, {2, 13}, {2, 6}, {13, 16}, {6, 16}, {2}, {16}, {2, 13, 16}, {13}, {6, 13, 16},
         {2, 6, 13}, {6}, {2, 6, 16}},
        {{9, 18}, {10, 15}, {9, 10}, {10, 18}, {15, 18}, {9, 15}, {10}, {9, 15, 18}, {18}, {9}, {10, 15, 18},
         {15}, {9, 10, 18}, {9, 10, 15}},
    };
    std::vector<std::vector<Mixture>> out;
    for (const auto& tx : one_based) {
        std::vector<Mixture> alphabet;
        for (const auto& m : tx) {
            Set s;
            for (int q : m) s.push_back(q - 1);
            alphabet.emplace_back(s);
        }
        out.push_back(std::move(alphabet));
    }
    return out;
}

Scenario make_scenario(const ExperimentConfig& config) {
    config.validate();
    Scenario sc;
    sc.affinity = config.affinity_source == "fixture" ? load_fixture_affinity() : construct_affinity(config.affinity);
    const int q = static_cast<int>(sc.affinity.molecules());
    sc.channels = config.channel_list(q);

    if (config.book_source == "reference") {
        if (config.affinity_source != "fixture" || config.transmitters != 4 || config.per_transmitter != 4)
            throw Error("reference book requires the fixture matrix with K = 4 and Q_tx = 4");
        auto full = reference_alphabets();
        if (config.alphabet_size > static_cast<int>(full.front().size()))
            throw Error("alphabet smaller than requested size");
        for (auto& a : full) a.resize(static_cast<std::size_t>(config.alphabet_size));
        sc.book = make_book(reference_allocations(), std::move(full), sc.channels, config.x_bar_mix);
    } else {
        DesignParams dp;
        dp.transmitters = config.transmitters;
        dp.per_transmitter = config.per_transmitter;
        dp.max_mix = config.max_mix;
        dp.d_thr = config.d_thr;
        dp.metric.x_bar_mix = config.design_x_bar_mix;
        dp.metric.realizations = config.design_realizations;
        dp.metric.seed = derive_seed(config.seed, kDesignStream);
        sc.design = run_design(sc.affinity, config.reception, dp);
        sc.book = book_from_design(*sc.design, config.alphabet_size, sc.channels, config.x_bar_mix);
    }
    return sc;
}

MixtureBook random_pair_book(Rng& rng, int molecules, int transmitters, int per_transmitter, int alphabet_size,
                             const std::vector<ChannelResponse>& channels, double x_bar_mix) {
    if (transmitters * per_transmitter > molecules) throw Error("insufficient molecules");
    const int pairs = per_transmitter * (per_transmitter - 1) / 2;
    if (alphabet_size > pairs) throw Error("alphabet smaller than requested size");

    std::vector<int> pool(static_cast<std::size_t>(molecules));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < transmitters * per_transmitter; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(molecules - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<std::vector<int>> alloc;
    std::vector<std::vector<Mixture>> alphabets;
    for (int k = 0; k < transmitters; ++k) {
        std::vector<int> set(pool.begin() + k * per_transmitter, pool.begin() + (k + 1) * per_transmitter);
        std::sort(set.begin(), set.end());
        std::vector<Mixture> candidates;
        for (std::size_t a = 0; a < set.size(); ++a)
            for (std::size_t b = a + 1; b < set.size(); ++b) candidates.emplace_back(std::vector<int>{set[a], set[b]});
        for (int i = 0; i < alphabet_size; ++i) {
            const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(pairs - i)));
            std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(j)]);
        }
        candidates.resize(static_cast<std::size_t>(alphabet_size));
        alloc.push_back(std::move(set));
        alphabets.push_back(std::move(candidates));
    }
    return make_book(std::move(alloc), std::move(alphabets), channels, x_bar_mix);
}

std::pair<double, double> wilson_interval(int errors, int trials) {
    if (trials <= 0) throw Error("trial count must be positive");
    const double z = 1.959963984540054;
    const double n = trials;
    const double p = errors / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

PeEstimate run_single_sample(const Scenario& scenario, const ExperimentConfig& config, double epsilon, bool adaptive,
                             bool optimized_mixtures, bool keep_records) {
    const RecoveryConfig rc = config.recovery(epsilon);
    rc.validate();
    const auto& cfg = config.reception;
    const auto& a = scenario.affinity;
    const int q = static_cast<int>(a.molecules());

    PeEstimate out;
    out.trials = config.trials;
    for (int t = 0; t < config.trials; ++t) {
        const std::uint64_t trial_seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
        Rng book_rng(derive_seed(trial_seed, 0));
        Rng rng(derive_seed(trial_seed, 1));

        MixtureBook random_book;
        const MixtureBook* book = &scenario.book;
        if (!optimized_mixtures) {
            random_book = random_pair_book(book_rng, q, config.transmitters, config.per_transmitter,
                                           config.alphabet_size, scenario.channels, config.x_bar_mix);
            book = &random_book;
        }
        const int m = static_cast<int>(rng.below(static_cast<std::uint64_t>(book->mixture_count())));
        const Eigen::VectorXd x = sample_poisson(book->reception.col(m) * config.x_bar_mix, rng);
        const ArrayObservation obs = receive(a, x, cfg, rng);
        const RecoveryEstimate est = adaptive ? solve_op2_adaptive(obs.output, a, *book, cfg, rc)
                                              : solve_op2(obs.output, a, book->reception, cfg, rc);

        TrialRecord rec;
        rec.trial = t;
        rec.mixture = m;
        rec.transmitter = book->owner(m);
        rec.status = est.status;
        if (est.status != SolveStatus::optimal) {
            ++out.infeasible;
        } else if (is_empty_detection(est.w_hat)) {
            ++out.empty;
        } else {
            rec.detected = detect_peak_mixture(est.w_hat);
            rec.correct = rec.detected == m;
        }
        if (!rec.correct) ++out.errors;
        if (keep_records) out.records.push_back(rec);
    }
    out.pe = static_cast<double>(out.errors) / out.trials;
    std::tie(out.ci_lo, out.ci_hi) = wilson_interval(out.errors, out.trials);
    return out;
}

std::vector<SweepRow> sweep_epsilon(const Scenario& scenario, const ExperimentConfig& config,
                                    const std::vector<double>& grid, const std::vector<Variant>& variants) {
    if (grid.empty()) throw Error("epsilon grid is empty");
    std::vector<SweepRow> rows;
    for (double eps : grid)
        for (Variant v : variants) {
            SweepRow row;
            row.epsilon = eps;
            row.variant = v;
            row.alphabet_size = config.alphabet_size;
            row.estimate = run_single_sample(scenario, config, eps, is_adaptive(v), is_optimized(v));
            rows.push_back(std::move(row));
        }
    return rows;
}

const SweepRow& best_row(const std::vector<SweepRow>& rows, Variant variant) {
    const SweepRow* best = nullptr;
    for (const auto& r : rows)
        if (r.variant == variant && (!best || r.estimate.errors < best->estimate.errors)) best = &r;
    if (!best) throw Error("variant not present in sweep");
    return *best;
}

Trace run_multisample(const Scenario& scenario, const ExperimentConfig& config,
                      const std::vector<ScheduledRelease>& schedule) {
    const auto& cfg = config.reception;
    const auto& book = scenario.book;
    const auto& a = scenario.affinity;
    const int mixtures = book.mixture_count();
    const int j_count = cfg.samples;

    std::set<int> seen;
    std::vector<ReleaseEvent> events;
    for (const auto& s : schedule) {
        if (s.mixture < 0 || s.mixture >= mixtures) throw Error("mixture index out of range");
        if (!(s.time >= 0.0)) throw Error("release time must be nonnegative");
        if (!seen.insert(s.mixture).second) throw Error("at most one release per mixture per window");
        events.push_back({s.mixture, s.time, config.n_rls});
    }

    Trace tr;
    tr.delta_t = cfg.sample_interval;
    tr.release = Eigen::MatrixXd::Zero(mixtures, j_count);
    for (const auto& ev : events) {
        const int c = std::max(0, static_cast<int>(std::ceil(ev.release_time / cfg.sample_interval)) - 1);
        if (c < j_count) tr.release(ev.mixture, c) += ev.molecules;
    }
    tr.x_bar.resize(a.molecules(), j_count);
    tr.x.resize(a.molecules(), j_count);
    tr.y.resize(a.receptors(), j_count);
    tr.x_hat.resize(a.molecules(), j_count);
    tr.w_hat.resize(mixtures, j_count);

    const RecoveryConfig rc = config.recovery(config.trace_epsilon);
    Rng rng(derive_seed(config.seed, kTraceStream));
    for (int j = 1; j <= j_count; ++j) {
        const Eigen::VectorXd xbar = expected_arrivals(events, book.construction, scenario.channels, cfg, j);
        const Eigen::VectorXd x =
            config.deterministic_arrivals ? Eigen::VectorXd(xbar.array().round()) : sample_poisson(xbar, rng);
        const ArrayObservation obs = receive(a, x, cfg, rng);
        const RecoveryEstimate est = solve_op2_adaptive(obs.output, a, book, cfg, rc);
        const int c = j - 1;
        tr.x_bar.col(c) = xbar;
        tr.x.col(c) = x;
        tr.y.col(c) = obs.output;
        // Empty windows contribute zero.
        const bool ok = est.status == SolveStatus::optimal && !est.no_active_tx;
        tr.x_hat.col(c) = ok ? est.x_hat : Eigen::VectorXd::Zero(a.molecules());
        tr.w_hat.col(c) = ok ? est.w_hat : Eigen::VectorXd::Zero(mixtures);
        tr.status.push_back(est.status);
        tr.transmitter.push_back(est.transmitter);
    }
    const MatchedFilterBank bank =
        build_filter_bank(book.construction, scenario.channels, cfg.sample_interval, config.support_epsilon);
    tr.w_filtered = matched_filter(tr.w_hat, bank);
    tr.events = detect_release_events(tr.w_filtered, config.rel_threshold, config.min_separation);
    return tr;
}

PcaScenario run_pca_scenario(const AffinityMatrix& a, const ReceptionConfig& cfg,
                             const std::vector<std::pair<double, double>>& cases, int molecule_a, int molecule_b,
                             int realizations, std::uint64_t seed, bool standardize) {
    if (cases.empty()) throw Error("no PCA cases");
    if (molecule_a == molecule_b || molecule_a < 0 || molecule_b < 0 || molecule_a >= a.molecules() ||
        molecule_b >= a.molecules())
        throw Error("molecule index out of range");
    const int per_case = std::max(1, realizations / static_cast<int>(cases.size()));
    const Eigen::Index rows = per_case * static_cast<Eigen::Index>(cases.size());

    PcaScenario out;
    out.cases = cases;
    Eigen::MatrixXd samples(rows, a.receptors());
    out.labels.resize(rows);
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        Rng rng(derive_seed(seed, k));
        for (int i = 0; i < per_case; ++i, ++row) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(a.molecules());
            x[molecule_a] = static_cast<double>(rng.poisson(cases[k].first));
            x[molecule_b] = static_cast<double>(rng.poisson(cases[k].second));
            samples.row(row) = receive(a, x, cfg, rng).output.transpose();
            out.labels[row] = static_cast<int>(k);
        }
    }
    out.pca = pca_project(samples, 2, standardize);
    out.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cases.size()), 2);
    for (Eigen::Index r = 0; r < rows; ++r) out.centroids.row(out.labels[r]) += out.pca.scores.row(r);
    out.centroids /= per_case;
    return out;
}

namespace {

std::string sweep_csv(const std::vector<SweepRow>& rows, const ExperimentConfig& config) {
    std::ostringstream os;
    os << "epsilon,variant,trials,errors,pe,ci_lo,ci_hi\n";
    for (const auto& r : rows) {
        std::string name = to_string(r.variant);
        if (r.alphabet_size != config.alphabet_size) name += "-m" + std::to_string(r.alphabet_size);
        os << format_number(r.epsilon, 10) << ',' << name << ',' << r.estimate.trials << ',' << r.estimate.errors
           << ',' << format_number(r.estimate.pe, 10) << ',' << format_number(r.estimate.ci_lo, 10) << ','
           << format_number(r.estimate.ci_hi, 10) << '\n';
    }
    return os.str();
}

std::string trace_csv(const Trace& t) {
    std::ostringstream os;
    os << "j,t_s";
    auto header = [&](const char* prefix, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << prefix << i + 1;
    };
    header("u_m", t.release.rows());
    header("xbar_q", t.x_bar.rows());
    header("x_q", t.x.rows());
    header("y_r", t.y.rows());
    header("xhat_q", t.x_hat.rows());
    header("what_m", t.w_hat.rows());
    header("wflt_m", t.w_filtered.rows());
    os << ",status,tx\n";
    for (Eigen::Index c = 0; c < t.y.cols(); ++c) {
        os << c + 1 << ',' << format_number((c + 1) * t.delta_t, 10);
        for (const Eigen::MatrixXd* m : {&t.release, &t.x_bar, &t.x, &t.y, &t.x_hat, &t.w_hat, &t.w_filtered})
            for (Eigen::Index i = 0; i < m->rows(); ++i) os << ',' << format_number((*m)(i, c), 6);
        const int tx = t.transmitter[static_cast<std::size_t>(c)];
        os << ',' << to_string(t.status[static_cast<std::size_t>(c)]) << ',' << (tx >= 0 ? tx + 1 : 0) << '\n';
    }
    return os.str();
}

std::string events_csv(const Trace& t) {
    std::ostringstream os;
    os << "mixture,j,release_time_s,value\n";
    for (const auto& e : t.events)
        os << e.mixture + 1 << ',' << e.sample + 1 << ',' << format_number(release_time_estimate(e.sample, t.delta_t), 10)
           << ',' << format_number(e.value, 10) << '\n';
    return os.str();
}

}  // namespace

void emit_results(const ResultBundle& bundle, const std::filesystem::path& out_dir) {
    if (!bundle.config) throw Error("result bundle without config");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create output directory: " + out_dir.string());

    Json files = Json::array();
    auto put = [&](const std::string& name, const std::string& text) {
        write_text(out_dir / name, text);
        files.push_back({{"name", name}, {"hash", git_blob_hash(text)}});
    };
    if (bundle.sweep) put("pe_sweep.csv", sweep_csv(*bundle.sweep, *bundle.config));
    for (const auto& [name, trace] : bundle.traces) {
        put("trace_" + name + ".csv", trace_csv(*trace));
        put("trace_" + name + "_events.csv", events_csv(*trace));
    }
    if (bundle.scenario) {
        Json design = {{"book", to_json(bundle.scenario->book)}};
        if (bundle.scenario->design) design["design"] = to_json(*bundle.scenario->design);
        put("design.json", design.dump(2) + "\n");
    }

    const Json config = to_json(*bundle.config);
    std::ostringstream inputs;
    inputs << config.dump();
    if (bundle.scenario) {
        const auto& a = bundle.scenario->affinity.values();
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index q = 0; q < a.cols(); ++q) inputs << ',' << format_number(a(r, q), 17);
    }
    Json meta;
    meta["config"] = config;
    meta["seeds"] = {{"master", bundle.config->seed},
                     {"design", derive_seed(bundle.config->seed, kDesignStream)},
                     {"trace", derive_seed(bundle.config->seed, kTraceStream)}};
    meta["input_hash"] = git_blob_hash(inputs.str());
    meta["files"] = files;
    write_text(out_dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace mmsk
