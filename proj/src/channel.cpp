#include "mmsk/channel.hpp"

#include <cmath>
#include <limits>

#include "mmsk/error.hpp"

namespace mmsk {

void ChannelResponse::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw Error("channel alpha and beta must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("channel gamma must lie in (0, 1]");
}

void ReceptionConfig::validate() const {
    if (!(noise_mean >= 0.0) || !(threshold >= 0.0)) throw Error("noise mean and threshold must be >= 0");
    if (!(sample_interval > 0.0)) throw Error("sample interval must be positive");
    if (samples <= 0) throw Error("observation window must contain at least one sample");
}

double response_rate(const ChannelResponse& ch, double t) {
    if (!(t >= 0.0)) return 0.0;
    if (std::isinf(t)) return 0.0;
    return ch.gamma / ch.beta * (1.0 + ch.alpha / ch.beta) * (-std::expm1(-t / ch.alpha)) *
           std::exp(-t / ch.beta);
}

double response_integral(const ChannelResponse& ch, double t0, double t1) {
    if (!(t0 >= 0.0)) throw Error("integration interval must start at t >= 0");
    if (t1 < t0) throw Error("integration interval reversed");
    if (t1 == t0) return 0.0;
    const double fast = (ch.alpha + ch.beta) / (ch.alpha * ch.beta);
    const double weight = ch.alpha / (ch.alpha + ch.beta);
    auto slow_term = [&](double t) { return std::isinf(t) ? 0.0 : std::exp(-t / ch.beta); };
    auto fast_term = [&](double t) { return std::isinf(t) ? 0.0 : std::exp(-t * fast); };
    const double slow = slow_term(t0) - slow_term(t1);
    const double quick = fast_term(t0) - fast_term(t1);
    return ch.gamma * (1.0 + ch.alpha / ch.beta) * (slow - weight * quick);
}

double response_peak_time(const ChannelResponse& ch) {
    return ch.alpha * std::log1p(ch.beta / ch.alpha);
}

Eigen::VectorXd expected_arrivals(const std::vector<ReleaseEvent>& events,
                                  const Eigen::MatrixXd& construction,
                                  const std::vector<ChannelResponse>& channels,
                                  const ReceptionConfig& cfg, int j) {
    if (static_cast<Eigen::Index>(channels.size()) != construction.rows())
        throw Error("one channel response per molecule type required");
    if (j < 1 || j > cfg.samples) throw Error("sample index out of range");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(construction.rows());
    const double lo = (j - 1) * cfg.sample_interval;
    const double hi = j * cfg.sample_interval;
    for (const auto& ev : events) {
        if (ev.mixture < 0 || ev.mixture >= construction.cols()) throw Error("mixture index out of range");
        const double a = std::max(0.0, lo - ev.release_time);
        const double b = std::max(0.0, hi - ev.release_time);
        if (b <= a) continue;
        for (Eigen::Index q = 0; q < construction.rows(); ++q) {
            const double frac = construction(q, ev.mixture);
            if (frac == 0.0) continue;
            out[q] += ev.molecules * frac * response_integral(channels[static_cast<std::size_t>(q)], a, b);
        }
    }
    return out;
}

Eigen::VectorXd sample_arrivals(const Eigen::VectorXd& expected, Rng& rng) {
    return sample_poisson(expected, rng);
}

Eigen::VectorXd receive_with_noise(const AffinityMatrix& a, const Eigen::VectorXd& arrivals,
                                   const Eigen::VectorXd& noise, double threshold) {
    if (arrivals.size() != a.molecules() || noise.size() != a.receptors())
        throw Error("dimension mismatch");
    Eigen::VectorXd pre = a.values() * arrivals + noise;
    for (Eigen::Index r = 0; r < pre.size(); ++r) pre[r] = relu(pre[r], threshold);
    return pre;
}

ArrayObservation receive(const AffinityMatrix& a, const Eigen::VectorXd& arrivals,
                         const ReceptionConfig& cfg, Rng& rng) {
    const Eigen::VectorXd noise =
        sample_poisson(Eigen::VectorXd::Constant(a.receptors(), cfg.noise_mean), rng);
    ArrayObservation obs;
    obs.arrivals = arrivals;
    obs.output = receive_with_noise(a, arrivals, noise, cfg.threshold);
    return obs;
}

double expected_relu_poisson(double v, double lambda, double threshold) {
    // (v + k - thr)^+ is nonzero for k >= k0 = max(0, ceil(thr - v)); with
    // S(m) = P(n >= m) the sum is (v - thr) S(k0) + lambda S(k0 - 1).
    if (lambda == 0.0) return relu(v, threshold);
    const double start = std::ceil(threshold - v);
    if (start <= 0.0) return v - threshold + lambda;
    const auto k0 = static_cast<long>(start);
    // P(n <= m) summed directly; k0 is small in every use here.
    auto cdf = [lambda](long m) {
        if (m < 0) return 0.0;
        double p = std::exp(-lambda);
        double c = p;
        for (long k = 1; k <= m; ++k) {
            p *= lambda / static_cast<double>(k);
            c += p;
        }
        return std::min(1.0, c);
    };
    const double tail_k0 = 1.0 - cdf(k0 - 1);
    const double tail_k0m1 = 1.0 - cdf(k0 - 2);
    return std::max(0.0, (v - threshold) * tail_k0 + lambda * tail_k0m1);
}

}  // namespace mmsk
