#include "mmsk/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/sha.h>

#include "mmsk/error.hpp"

namespace mmsk {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

// Numeric rows of a CSV file; a leading non-numeric line is treated as a header.
std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read file: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_fields(line);
        std::vector<double> row;
        bool ok = true;
        for (const auto& f : fields) {
            double v = 0.0;
            if (!parse_double(f, v)) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            if (first) {
                first = false;
                continue;
            }
            throw Error("malformed CSV row in " + path.string());
        }
        first = false;
        if (!rows.empty() && rows.front().size() != row.size())
            throw Error("ragged CSV rows in " + path.string());
        rows.push_back(std::move(row));
    }
    return rows;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json channel_json(const ChannelResponse& c) {
    return {{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}};
}

ChannelResponse channel_from(const Json& j) {
    ChannelResponse c;
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.gamma = j.value("gamma", c.gamma);
    return c;
}

Json ids_json(const std::vector<int>& v) {
    Json a = Json::array();
    for (int q : v) a.push_back(q + 1);
    return a;
}

std::vector<int> ids_from(const Json& j) {
    std::vector<int> out;
    for (const auto& e : j) {
        const int id = e.get<int>();
        if (id < 1) throw Error("ids are 1-based");
        out.push_back(id - 1);
    }
    return out;
}

Json table_json(const DissimilarityTable& t) {
    Json mixtures = Json::array();
    for (const auto& m : t.mixtures) mixtures.push_back(ids_json(m.constituents()));
    Json values = Json::array();
    Json errors = Json::array();
    for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
        Json vr = Json::array();
        Json er = Json::array();
        for (Eigen::Index k = 0; k < t.values.cols(); ++k) {
            vr.push_back(i == k ? Json(nullptr) : number_or_null(t.values(i, k)));
            er.push_back(i == k ? Json(nullptr) : number_or_null(t.std_error(i, k)));
        }
        values.push_back(vr);
        errors.push_back(er);
    }
    return {{"mixtures", mixtures}, {"realizations", t.realizations}, {"seed", t.seed},
            {"values_db", values}, {"std_error_db", errors}};
}

}  // namespace

std::string format_number(double v, int digits) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v == 0.0 ? 0.0 : v);
    return buf;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m, int digits) {
    std::ostringstream os;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << format_number(m(r, c), digits);
        os << '\n';
    }
    write_text(path, os.str());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    const auto rows = read_numeric_rows(path);
    if (rows.empty()) throw Error("empty matrix file: " + path.string());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

ObservationSeries read_observations_csv(const std::filesystem::path& path) {
    const auto rows = read_numeric_rows(path);
    if (rows.empty()) throw Error("no observations in " + path.string());
    if (rows.front().size() < 2) throw Error("observation rows need j and at least one receptor");
    ObservationSeries out;
    const auto r = static_cast<Eigen::Index>(rows.front().size() - 1);
    out.y.resize(r, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c) {
        out.samples.push_back(static_cast<int>(std::lround(rows[c][0])));
        for (Eigen::Index i = 0; i < r; ++i) {
            const double v = rows[c][static_cast<std::size_t>(i) + 1];
            if (!(v >= 0.0)) throw Error("receptor outputs must be nonnegative");
            out.y(i, static_cast<Eigen::Index>(c)) = v;
        }
    }
    return out;
}

std::vector<ScheduledRelease> read_schedule_csv(const std::filesystem::path& path) {
    std::vector<ScheduledRelease> out;
    for (const auto& row : read_numeric_rows(path)) {
        if (row.size() != 2) throw Error("schedule rows are mixture_id,release_time_s");
        const long id = std::lround(row[0]);
        if (id < 1 || static_cast<double>(id) != row[0]) throw Error("mixture ids are 1-based integers");
        out.push_back({static_cast<int>(id - 1), row[1]});
    }
    return out;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["affinity_source"] = c.affinity_source;
    j["affinity"] = {{"R", c.affinity.receptors},
                     {"Q", c.affinity.molecules},
                     {"R_act", c.affinity.active_per_molecule},
                     {"a_inh", c.affinity.max_inhibition},
                     {"mu_thr", c.affinity.max_coherence},
                     {"seed", c.affinity.seed},
                     {"retry_cap", c.affinity.retry_cap}};
    j["book_source"] = c.book_source;
    j["K"] = c.transmitters;
    j["Q_tx"] = c.per_transmitter;
    j["M_mix"] = c.max_mix;
    j["alphabet_size"] = c.alphabet_size;
    j["d_thr"] = number_or_null(c.d_thr);
    j["x_bar_mix"] = c.x_bar_mix;
    j["design_x_bar_mix"] = c.design_x_bar_mix;
    j["design_realizations"] = c.design_realizations;
    j["channel"] = channel_json(c.default_channel);
    Json chans = Json::array();
    for (const auto& ch : c.channels) chans.push_back(channel_json(ch));
    j["channels"] = chans;
    j["reception"] = {{"lambda_r", c.reception.noise_mean},
                      {"x_thr", c.reception.threshold},
                      {"delta_t", c.reception.sample_interval},
                      {"J", c.reception.samples}};
    j["epsilons"] = c.epsilons;
    j["delta"] = c.delta ? Json(*c.delta) : Json(nullptr);
    j["solver_tol"] = c.solver_tol;
    j["max_iters"] = c.max_iters;
    Json variants = Json::array();
    for (Variant v : c.variants) variants.push_back(to_string(v));
    j["variants"] = variants;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["mode"] = c.mode;
    j["N_rls"] = c.n_rls;
    j["trace_epsilon"] = c.trace_epsilon;
    j["support_epsilon"] = c.support_epsilon;
    j["rel_threshold"] = c.rel_threshold;
    j["min_separation"] = c.min_separation;
    j["deterministic_arrivals"] = c.deterministic_arrivals;
    j["pca_realizations"] = c.pca_realizations;
    j["pca_standardize"] = c.pca_standardize;
    return j;
}

ExperimentConfig config_from_json(const Json& j) {
    static const std::vector<std::string> known = {
        "affinity_source", "affinity", "book_source", "K", "Q_tx", "M_mix", "alphabet_size", "d_thr",
        "x_bar_mix", "design_x_bar_mix", "design_realizations", "channel", "channels", "reception", "epsilons",
        "delta", "solver_tol", "max_iters", "variants", "trials", "seed", "mode", "N_rls", "trace_epsilon",
        "support_epsilon", "rel_threshold", "min_separation", "deterministic_arrivals", "pca_realizations",
        "pca_standardize"};
    if (!j.is_object()) throw Error("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw Error("unknown config key: " + key);

    ExperimentConfig c;
    try {
        c.affinity_source = j.value("affinity_source", c.affinity_source);
        if (j.contains("affinity")) {
            const auto& a = j["affinity"];
            c.affinity.receptors = a.value("R", c.affinity.receptors);
            c.affinity.molecules = a.value("Q", c.affinity.molecules);
            c.affinity.active_per_molecule = a.value("R_act", c.affinity.active_per_molecule);
            c.affinity.max_inhibition = a.value("a_inh", c.affinity.max_inhibition);
            c.affinity.max_coherence = a.value("mu_thr", c.affinity.max_coherence);
            c.affinity.seed = a.value("seed", c.affinity.seed);
            c.affinity.retry_cap = a.value("retry_cap", c.affinity.retry_cap);
        }
        c.book_source = j.value("book_source", c.book_source);
        c.transmitters = j.value("K", c.transmitters);
        c.per_transmitter = j.value("Q_tx", c.per_transmitter);
        c.max_mix = j.value("M_mix", c.max_mix);
        c.alphabet_size = j.value("alphabet_size", c.alphabet_size);
        if (j.contains("d_thr") && !j["d_thr"].is_null()) c.d_thr = j["d_thr"].get<double>();
        c.x_bar_mix = j.value("x_bar_mix", c.x_bar_mix);
        c.design_x_bar_mix = j.value("design_x_bar_mix", c.design_x_bar_mix);
        c.design_realizations = j.value("design_realizations", c.design_realizations);
        if (j.contains("channel")) c.default_channel = channel_from(j["channel"]);
        if (j.contains("channels"))
            for (const auto& ch : j["channels"]) c.channels.push_back(channel_from(ch));
        if (j.contains("reception")) {
            const auto& r = j["reception"];
            c.reception.noise_mean = r.value("lambda_r", c.reception.noise_mean);
            c.reception.threshold = r.value("x_thr", c.reception.threshold);
            c.reception.sample_interval = r.value("delta_t", c.reception.sample_interval);
            c.reception.samples = r.value("J", c.reception.samples);
        }
        if (j.contains("epsilons")) c.epsilons = j["epsilons"].get<std::vector<double>>();
        if (j.contains("delta") && !j["delta"].is_null()) c.delta = j["delta"].get<double>();
        c.solver_tol = j.value("solver_tol", c.solver_tol);
        c.max_iters = j.value("max_iters", c.max_iters);
        if (j.contains("variants")) {
            c.variants.clear();
            for (const auto& v : j["variants"]) c.variants.push_back(variant_from_string(v.get<std::string>()));
        }
        c.trials = j.value("trials", c.trials);
        c.seed = j.value("seed", c.seed);
        c.mode = j.value("mode", c.mode);
        c.n_rls = j.value("N_rls", c.n_rls);
        c.trace_epsilon = j.value("trace_epsilon", c.trace_epsilon);
        c.support_epsilon = j.value("support_epsilon", c.support_epsilon);
        c.rel_threshold = j.value("rel_threshold", c.rel_threshold);
        c.min_separation = j.value("min_separation", c.min_separation);
        c.deterministic_arrivals = j.value("deterministic_arrivals", c.deterministic_arrivals);
        c.pca_realizations = j.value("pca_realizations", c.pca_realizations);
        c.pca_standardize = j.value("pca_standardize", c.pca_standardize);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad config value: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

Json affinity_sidecar(const AffinityParams& p, bool fixture) {
    Json j;
    j["source"] = fixture ? "fixture" : "constructed";
    if (!fixture) {
        j["R"] = p.receptors;
        j["Q"] = p.molecules;
        j["R_act"] = p.active_per_molecule;
        j["a_inh"] = p.max_inhibition;
        j["mu_thr"] = p.max_coherence;
        j["seed"] = p.seed;
    }
    return j;
}

Json to_json(const MixtureBook& book) {
    Json tx = Json::array();
    for (int k = 0; k < book.transmitters(); ++k) {
        Json alphabet = Json::array();
        for (const auto& m : book.alphabets[static_cast<std::size_t>(k)]) alphabet.push_back(ids_json(m.constituents()));
        tx.push_back({{"id", k + 1},
                      {"molecules", ids_json(book.allocations[static_cast<std::size_t>(k)])},
                      {"mixtures", alphabet}});
    }
    return {{"x_bar_mix", book.x_bar_mix}, {"transmitters", tx}};
}

MixtureBook book_from_json(const Json& j, const std::vector<ChannelResponse>& channels) {
    try {
        std::vector<std::vector<int>> alloc;
        std::vector<std::vector<Mixture>> alphabets;
        for (const auto& tx : j.at("transmitters")) {
            alloc.push_back(ids_from(tx.at("molecules")));
            std::vector<Mixture> alphabet;
            for (const auto& m : tx.at("mixtures")) alphabet.emplace_back(ids_from(m));
            alphabets.push_back(std::move(alphabet));
        }
        return make_book(std::move(alloc), std::move(alphabets), channels, j.value("x_bar_mix", 50.0));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad mixture book: ") + e.what());
    }
}

Json to_json(const DesignResult& d) {
    Json j;
    j["singletons"] = table_json(d.singleton_table);
    Json alloc = Json::array();
    for (const auto& s : d.allocations) alloc.push_back(ids_json(s));
    j["allocations"] = alloc;
    Json tx = Json::array();
    for (std::size_t k = 0; k < d.alphabets.size(); ++k) {
        const auto& table = d.mixture_tables[k];
        Json order = Json::array();
        Json metric = Json::array();
        for (std::size_t i = 0; i < d.alphabets[k].order.size(); ++i) {
            order.push_back(ids_json(table.mixtures[d.alphabets[k].order[i]].constituents()));
            metric.push_back(number_or_null(d.alphabets[k].min_metric[i]));
        }
        tx.push_back({{"id", k + 1}, {"order", order}, {"min_metric_db", metric}, {"table", table_json(table)}});
    }
    j["alphabets"] = tx;
    return j;
}

std::string git_blob_hash(const std::string& content) {
    const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
    std::ostringstream os;
    for (unsigned char b : digest) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << text;
    if (!out) throw Error("cannot write file: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace mmsk
