#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mmsk/channel.hpp"

namespace mmsk {

// taps[m][i] holds f_m[-i], i = 0..L_m-1.
struct MatchedFilterBank {
    std::vector<Eigen::VectorXd> taps;
    double delta_t = 0.2;

    int mixtures() const { return static_cast<int>(taps.size()); }
};

// Smallest L past the rate peak with v(L dt) < support_epsilon * max v.
int response_support(const ChannelResponse& ch, double delta_t, double support_epsilon);

// 1 / sum_{k >= 0} v(k dt)^2
double energy_normalization(const ChannelResponse& ch, double delta_t);

MatchedFilterBank build_filter_bank(const Eigen::MatrixXd& construction, const std::vector<ChannelResponse>& channels,
                                    double delta_t, double support_epsilon = 1e-3);

// Same construction from responses already sampled on the grid:
// sampled[q][k] = v_q(k dt), taken as zero past its end.
MatchedFilterBank build_filter_bank_from_samples(const Eigen::MatrixXd& construction,
                                                 const std::vector<Eigen::VectorXd>& sampled, double delta_t);

// Filters one series per row: out(m, j) = sum_i f_m[-i] w(m, j + i), zero beyond
// the last sample. Same shape as the input.
Eigen::MatrixXd matched_filter(const Eigen::MatrixXd& series, const MatchedFilterBank& bank);

struct DetectedEvent {
    int mixture = 0;
    int sample = 0;  // 0-based column of the filtered series
    double value = 0.0;
};

// Local maxima above rel_threshold times the global maximum. A candidate is
// dropped if another mixture is larger at the same sample, and accepted
// events are at least min_separation samples apart (largest first). Sorted
// by sample.
std::vector<DetectedEvent> detect_release_events(const Eigen::MatrixXd& filtered, double rel_threshold,
                                                 int min_separation);

// Release time for a detection at 0-based column c: sample c + 1 covers
// (c dt, (c + 1) dt], and a release at tau lines its rate up with that sample's
// midpoint.
inline double release_time_estimate(int sample, double delta_t) { return (sample + 0.5) * delta_t; }

}  // namespace mmsk
