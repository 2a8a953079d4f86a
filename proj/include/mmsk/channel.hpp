#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mmsk/affinity.hpp"
#include "mmsk/random.hpp"

namespace mmsk {

// Parametric arrival-rate function of one molecule type:
//   v(t) = (gamma/beta) (1 + alpha/beta) (1 - exp(-t/alpha)) exp(-t/beta),  t >= 0.
// alpha and beta are in seconds; gamma is the total fraction of released
// molecules that ever reach the receiver.
struct ChannelResponse {
    double alpha = 0.5;
    double beta = 1.7;
    double gamma = 0.01;

    void validate() const;

    friend bool operator==(const ChannelResponse&, const ChannelResponse&) = default;
};

double response_rate(const ChannelResponse& ch, double t);

// Integral of v over [t0, t1] from the closed-form antiderivative. t1 may be
// +infinity. Throws Error if t1 < t0 or t0 < 0.
double response_integral(const ChannelResponse& ch, double t0, double t1);

// Time of the rate maximum, alpha * ln(1 + beta/alpha).
double response_peak_time(const ChannelResponse& ch);

struct ReleaseEvent {
    int mixture = 0;                 // global mixture index (0-based)
    double release_time = 0.0;       // seconds
    double molecules = 1e5;          // N_rls per release
};

// Receptor noise, activation threshold and sampling grid. The noise mean is a
// single scalar shared by all receptor types.
struct ReceptionConfig {
    double noise_mean = 10.0;      // lambda_r, counts per sample
    double threshold = 5.0;        // x_thr, counts
    double sample_interval = 0.2;  // delta t, seconds
    int samples = 50;              // observation window length J

    void validate() const;

    friend bool operator==(const ReceptionConfig&, const ReceptionConfig&) = default;
};

// One sampling interval of the array: expected and realised molecule
// arrivals (length Q) and the receptor outputs (length R).
struct ArrayObservation {
    Eigen::VectorXd expected;
    Eigen::VectorXd arrivals;  // integer valued
    Eigen::VectorXd output;
};

// Expected arrivals in sample j (1-based), i.e. over ((j-1)dt, j dt]. A
// released molecule is counted in at most one interval.
//   construction: Q x M mixture construction matrix
//   channels:     one response per molecule type (size Q)
Eigen::VectorXd expected_arrivals(const std::vector<ReleaseEvent>& events,
                                  const Eigen::MatrixXd& construction,
                                  const std::vector<ChannelResponse>& channels,
                                  const ReceptionConfig& cfg, int j);

Eigen::VectorXd sample_arrivals(const Eigen::VectorXd& expected, Rng& rng);

inline double relu(double v, double threshold) { return v >= threshold ? v - threshold : 0.0; }

// y = relu(A x + n, x_thr) with n ~ Poisson(lambda_r) drawn from rng.
ArrayObservation receive(const AffinityMatrix& a, const Eigen::VectorXd& arrivals,
                         const ReceptionConfig& cfg, Rng& rng);

// Same map with a caller-provided noise vector (e.g. n = lambda_r for the
// deterministic-noise checks).
Eigen::VectorXd receive_with_noise(const AffinityMatrix& a, const Eigen::VectorXd& arrivals,
                                   const Eigen::VectorXd& noise, double threshold);

// E[(v + n - x_thr)^+] for n ~ Poisson(lambda); exact series via the Poisson
// CDF.
double expected_relu_poisson(double v, double lambda, double threshold);

}  // namespace mmsk
