#include "mmsk/matched_filter.hpp"

#include <algorithm>
#include <cmath>

#include "mmsk/error.hpp"

namespace mmsk {

int response_support(const ChannelResponse& ch, double delta_t, double support_epsilon) {
    if (!(delta_t > 0.0)) throw Error("sample interval must be positive");
    if (!(support_epsilon > 0.0 && support_epsilon < 1.0)) throw Error("support epsilon must lie in (0, 1)");
    const double peak_t = response_peak_time(ch);
    const double floor = support_epsilon * response_rate(ch, peak_t);
    int l = static_cast<int>(std::ceil(peak_t / delta_t));
    while (response_rate(ch, l * delta_t) >= floor) ++l;
    return l;
}

double energy_normalization(const ChannelResponse& ch, double delta_t) {
    const double peak_t = response_peak_time(ch);
    double sum = 0.0;
    for (int k = 0;; ++k) {
        const double v = response_rate(ch, k * delta_t);
        sum += v * v;
        if (k * delta_t > peak_t && v * v < 1e-18 * sum) break;
    }
    if (!(sum > 0.0)) throw Error("channel response vanishes on the sampling grid");
    return 1.0 / sum;
}

MatchedFilterBank build_filter_bank(const Eigen::MatrixXd& construction, const std::vector<ChannelResponse>& channels,
                                    double delta_t, double support_epsilon) {
    if (static_cast<Eigen::Index>(channels.size()) != construction.rows())
        throw Error("one channel response per molecule type required");
    MatchedFilterBank bank;
    bank.delta_t = delta_t;
    for (Eigen::Index m = 0; m < construction.cols(); ++m) {
        int len = 1;
        for (Eigen::Index q = 0; q < construction.rows(); ++q)
            if (construction(q, m) != 0.0)
                len = std::max(len, response_support(channels[static_cast<std::size_t>(q)], delta_t, support_epsilon));
        Eigen::VectorXd f = Eigen::VectorXd::Zero(len);
        for (Eigen::Index q = 0; q < construction.rows(); ++q) {
            const double frac = construction(q, m);
            if (frac == 0.0) continue;
            const auto& ch = channels[static_cast<std::size_t>(q)];
            const double c = energy_normalization(ch, delta_t);
            for (int i = 0; i < len; ++i) f[i] += c * response_rate(ch, i * delta_t) * frac;
        }
        bank.taps.push_back(std::move(f));
    }
    return bank;
}

MatchedFilterBank build_filter_bank_from_samples(const Eigen::MatrixXd& construction,
                                                 const std::vector<Eigen::VectorXd>& sampled, double delta_t) {
    if (static_cast<Eigen::Index>(sampled.size()) != construction.rows())
        throw Error("one sampled response per molecule type required");
    MatchedFilterBank bank;
    bank.delta_t = delta_t;
    for (Eigen::Index m = 0; m < construction.cols(); ++m) {
        Eigen::Index len = 1;
        for (Eigen::Index q = 0; q < construction.rows(); ++q)
            if (construction(q, m) != 0.0) len = std::max(len, sampled[static_cast<std::size_t>(q)].size());
        Eigen::VectorXd f = Eigen::VectorXd::Zero(len);
        for (Eigen::Index q = 0; q < construction.rows(); ++q) {
            const double frac = construction(q, m);
            if (frac == 0.0) continue;
            const auto& v = sampled[static_cast<std::size_t>(q)];
            const double energy = v.squaredNorm();
            if (!(energy > 0.0)) throw Error("channel response vanishes on the sampling grid");
            f.head(v.size()) += frac / energy * v;
        }
        bank.taps.push_back(std::move(f));
    }
    return bank;
}

Eigen::MatrixXd matched_filter(const Eigen::MatrixXd& series, const MatchedFilterBank& bank) {
    if (series.rows() != bank.mixtures()) throw Error("one filter per mixture series required");
    const Eigen::Index n = series.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(series.rows(), n);
    for (Eigen::Index m = 0; m < series.rows(); ++m) {
        const auto& f = bank.taps[static_cast<std::size_t>(m)];
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index len = std::min<Eigen::Index>(f.size(), n - j);
            out(m, j) = f.head(len).dot(series.row(m).segment(j, len).transpose());
        }
    }
    return out;
}

std::vector<DetectedEvent> detect_release_events(const Eigen::MatrixXd& filtered, double rel_threshold,
                                                 int min_separation) {
    if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) throw Error("relative threshold must lie in (0, 1)");
    if (min_separation < 0) throw Error("minimum separation must be nonnegative");
    std::vector<DetectedEvent> out;
    if (filtered.size() == 0) return out;
    const double global = filtered.maxCoeff();
    if (!(global > 0.0)) return out;

    const Eigen::Index n = filtered.cols();
    std::vector<DetectedEvent> cand;
    for (Eigen::Index m = 0; m < filtered.rows(); ++m)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = filtered(m, j);
            if (v <= rel_threshold * global) continue;
            if (j > 0 && filtered(m, j - 1) >= v) continue;
            if (j + 1 < n && filtered(m, j + 1) > v) continue;
            Eigen::Index winner = 0;
            filtered.col(j).maxCoeff(&winner);
            if (winner != m) continue;
            cand.push_back({static_cast<int>(m), static_cast<int>(j), v});
        }
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
    for (const auto& c : cand) {
        const bool close = std::any_of(out.begin(), out.end(), [&](const auto& e) {
            return std::abs(e.sample - c.sample) < std::max(1, min_separation);
        });
        if (!close) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.sample < b.sample; });
    return out;
}

}  // namespace mmsk
