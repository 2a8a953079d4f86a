#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmsk/harness.hpp"

namespace mmsk {

using Json = nlohmann::ordered_json;

// CSV with one matrix row per line, `digits` significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m, int digits = 6);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

std::string format_number(double v, int digits);

// Observation file: one row per sample, "j, y_1, ..., y_R"; an optional
// non-numeric header line is skipped. Returns y as R x J and the j column.
struct ObservationSeries {
    std::vector<int> samples;
    Eigen::MatrixXd y;
};
ObservationSeries read_observations_csv(const std::filesystem::path& path);

// Schedule file: "mixture_id, release_time_s" per line, ids 1-based.
std::vector<ScheduledRelease> read_schedule_csv(const std::filesystem::path& path);

Json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

Json affinity_sidecar(const AffinityParams& p, bool fixture);

// Files use 1-based molecule and mixture ids.
Json to_json(const MixtureBook& book);
MixtureBook book_from_json(const Json& j, const std::vector<ChannelResponse>& channels);
Json to_json(const DesignResult& d);

// SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_hash(const std::string& content);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mmsk
