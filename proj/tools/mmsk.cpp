#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mmsk/error.hpp"
#include "mmsk/harness.hpp"
#include "mmsk/io.hpp"

using namespace mmsk;

namespace {

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

AffinityMatrix affinity_from(const std::string& path) {
    if (path.empty()) return load_fixture_affinity();
    return AffinityMatrix(read_matrix_csv(path));
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_text(out, text);
}

struct AffinityArgs {
    AffinityParams p;
    bool fixture = false;
    std::string out;
};

void cmd_construct_affinity(const AffinityArgs& args) {
    const AffinityMatrix a = args.fixture ? load_fixture_affinity() : construct_affinity(args.p);
    write_matrix_csv(args.out, a.values(), 6);
    write_text(args.out + ".json", affinity_sidecar(args.p, args.fixture).dump(2) + "\n");
}

struct DesignArgs {
    std::string affinity;
    std::string config;
    DesignParams p;
    int mc = 10'000;
    double x_bar_mix = 100.0;
    std::uint64_t seed = 1;
    std::string out;
};

void cmd_design(DesignArgs args) {
    const ExperimentConfig cfg = args.config.empty() ? ExperimentConfig{} : load_config(args.config);
    const AffinityMatrix a = affinity_from(args.affinity);
    args.p.metric.realizations = args.mc;
    args.p.metric.x_bar_mix = args.x_bar_mix;
    args.p.metric.seed = args.seed;
    const DesignResult d = run_design(a, cfg.reception, args.p);

    std::size_t size = d.alphabets.front().order.size();
    for (const auto& al : d.alphabets) size = std::min(size, al.order.size());
    const MixtureBook book = book_from_design(d, static_cast<int>(size),
                                              cfg.channel_list(static_cast<int>(a.molecules())), cfg.x_bar_mix);
    Json j = to_json(book);
    j["construction"] = matrix_json(book.construction);
    j["reception"] = matrix_json(book.reception);
    j["design"] = to_json(d);
    emit(args.out, j.dump(2) + "\n");
}

struct RecoverArgs {
    std::string observation;
    std::string book;
    std::string affinity;
    std::string config;
    double epsilon = 3.0;
    double delta = -1.0;
    bool adaptive = false;
    std::string out;
};

void cmd_recover(const RecoverArgs& args) {
    const ExperimentConfig cfg = args.config.empty() ? ExperimentConfig{} : load_config(args.config);
    const AffinityMatrix a = affinity_from(args.affinity);
    const MixtureBook book =
        book_from_json(Json::parse(read_text(args.book)), cfg.channel_list(static_cast<int>(a.molecules())));
    RecoveryConfig rc = cfg.recovery(args.epsilon);
    if (args.delta > 0.0) rc.delta = args.delta;
    rc.validate();

    const ObservationSeries obs = read_observations_csv(args.observation);
    if (obs.y.rows() != a.receptors()) throw Error("observation width does not match receptor count");

    std::ostringstream os;
    os << "j";
    for (Eigen::Index q = 0; q < a.molecules(); ++q) os << ",xhat_" << q + 1;
    for (int m = 0; m < book.mixture_count(); ++m) os << ",what_" << m + 1;
    os << ",s_hat,status\n";
    for (Eigen::Index c = 0; c < obs.y.cols(); ++c) {
        const Eigen::VectorXd y = obs.y.col(c);
        const RecoveryEstimate est = args.adaptive ? solve_op2_adaptive(y, a, book, cfg.reception, rc)
                                                   : solve_op2(y, a, book.reception, cfg.reception, rc);
        const bool ok = est.status == SolveStatus::optimal;
        os << obs.samples[static_cast<std::size_t>(c)];
        for (Eigen::Index q = 0; q < a.molecules(); ++q) os << ',' << format_number(ok ? est.x_hat[q] : 0.0, 6);
        for (int m = 0; m < book.mixture_count(); ++m) os << ',' << format_number(ok ? est.w_hat[m] : 0.0, 6);
        const int s = ok && !is_empty_detection(est.w_hat) ? detect_peak_mixture(est.w_hat) + 1 : 0;
        os << ',' << s << ',' << to_string(est.status) << '\n';
    }
    emit(args.out, os.str());
}

void cmd_sweep(const std::string& config_path, const std::string& out) {
    const ExperimentConfig cfg = load_config(config_path);
    const Scenario sc = make_scenario(cfg);
    const auto rows = sweep_epsilon(sc, cfg, cfg.epsilons, cfg.variants);
    emit_results({&cfg, &sc, &rows, {}}, out);
    for (const auto& r : rows)
        std::cout << format_number(r.epsilon, 6) << ' ' << to_string(r.variant) << ' ' << r.estimate.errors << '/'
                  << r.estimate.trials << '\n';
}

void cmd_trace(const std::string& config_path, const std::string& schedule_path, const std::string& out) {
    ExperimentConfig cfg = load_config(config_path);
    cfg.mode = "multi-sample";
    const Scenario sc = make_scenario(cfg);
    const Trace tr = run_multisample(sc, cfg, read_schedule_csv(schedule_path));
    emit_results({&cfg, &sc, nullptr, {{"main", &tr}}}, out);
    for (const auto& e : tr.events)
        std::cout << "mixture " << e.mixture + 1 << " at " << format_number(release_time_estimate(e.sample, tr.delta_t), 6)
                  << " s\n";
}

void cmd_pca(const std::string& config_path, const std::string& out, int mol_a, int mol_b) {
    const ExperimentConfig cfg = load_config(config_path);
    const Scenario sc = make_scenario(cfg);
    const std::vector<std::pair<double, double>> cases = {{0, 0}, {50, 0}, {100, 0}, {0, 50}, {0, 100}, {50, 50}};
    const PcaScenario p = run_pca_scenario(sc.affinity, cfg.reception, cases, mol_a - 1, mol_b - 1,
                                           cfg.pca_realizations, cfg.seed, cfg.pca_standardize);
    std::ostringstream os;
    os << "x_a,x_b,pc1,pc2\n";
    for (std::size_t k = 0; k < cases.size(); ++k)
        os << format_number(cases[k].first, 6) << ',' << format_number(cases[k].second, 6) << ','
           << format_number(p.centroids(static_cast<Eigen::Index>(k), 0), 8) << ','
           << format_number(p.centroids(static_cast<Eigen::Index>(k), 1), 8) << '\n';
    std::filesystem::create_directories(out);
    write_text(std::filesystem::path(out) / "pca_centroids.csv", os.str());
    std::cout << "explained " << format_number(p.pca.explained[0], 4) << ' ' << format_number(p.pca.explained[1], 4)
              << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixture shift keying simulator"};
    app.require_subcommand(1);

    AffinityArgs aff;
    auto* ca = app.add_subcommand("construct-affinity", "Build or export a receptor affinity matrix");
    ca->add_option("--R", aff.p.receptors);
    ca->add_option("--Q", aff.p.molecules);
    ca->add_option("--R-act", aff.p.active_per_molecule);
    ca->add_option("--a-inh", aff.p.max_inhibition);
    ca->add_option("--mu-thr", aff.p.max_coherence);
    ca->add_option("--seed", aff.p.seed);
    ca->add_flag("--fixture", aff.fixture, "Write the built-in 10x20 matrix");
    ca->add_option("--out", aff.out)->required();

    DesignArgs des;
    auto* de = app.add_subcommand("design", "Allocate molecules and build mixture alphabets");
    de->add_option("--affinity", des.affinity, "CSV matrix (default: built-in fixture)");
    de->add_option("--config", des.config, "Reception and channel parameters");
    de->add_option("--K", des.p.transmitters);
    de->add_option("--Q-tx", des.p.per_transmitter);
    de->add_option("--M-mix", des.p.max_mix);
    de->add_option("--d-thr", des.p.d_thr);
    de->add_option("--x-bar-mix", des.x_bar_mix);
    de->add_option("--mc", des.mc);
    de->add_option("--seed", des.seed);
    de->add_option("--out", des.out);

    RecoverArgs rec;
    auto* re = app.add_subcommand("recover", "Recover mixtures from receptor outputs");
    re->add_option("--observation", rec.observation)->required();
    re->add_option("--book", rec.book)->required();
    re->add_option("--affinity", rec.affinity);
    re->add_option("--config", rec.config);
    re->add_option("--epsilon", rec.epsilon);
    re->add_option("--delta", rec.delta, "Default: epsilon");
    re->add_flag("--adaptive", rec.adaptive);
    re->add_option("--out", rec.out);

    std::string config, schedule, out = "results";
    int mol_a = 1, mol_b = 2;
    auto* sw = app.add_subcommand("sweep", "Error probability over the epsilon grid");
    sw->add_option("--config", config)->required();
    sw->add_option("--out", out);
    auto* tr = app.add_subcommand("trace", "Multi-sample pipeline for a release schedule");
    tr->add_option("--config", config)->required();
    tr->add_option("--schedule", schedule)->required();
    tr->add_option("--out", out);
    auto* pc = app.add_subcommand("pca", "Two-molecule PCA diagnostic");
    pc->add_option("--config", config)->required();
    pc->add_option("--molecules", [&](const CLI::results_t& r) {
        if (r.size() != 2) return false;
        mol_a = std::stoi(r[0]);
        mol_b = std::stoi(r[1]);
        return true;
    })->expected(2);
    pc->add_option("--out", out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*ca) cmd_construct_affinity(aff);
        if (*de) cmd_design(des);
        if (*re) cmd_recover(rec);
        if (*sw) cmd_sweep(config, out);
        if (*tr) cmd_trace(config, schedule, out);
        if (*pc) cmd_pca(config, out, mol_a, mol_b);
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", e.what()}}.dump() << '\n';
        return 2;
    }
    return 0;
}
