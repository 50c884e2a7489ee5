#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcnsim/game.hpp"
#include "pcnsim/htlc2.hpp"
#include "pcnsim/probe.hpp"
#include "pcnsim/sim.hpp"
#include "pcnsim/topology.hpp"

namespace pcn::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads a TOML file, or JSON when the extension is .json, into a JSON tree.
nlohmann::json load_config(const std::filesystem::path& path);

// Tables [sim], [probe], [htlc2] and [synthetic]; missing keys keep defaults.
SimConfig sim_config_from(const nlohmann::json& config);
ProbeScenario probe_scenario_from(const nlohmann::json& config);
htlc2::Scenario htlc2_scenario_from(const nlohmann::json& config);
SyntheticOptions synthetic_options_from(const nlohmann::json& config);

// Ingests `snapshot`, or generates a synthetic one when absent, then fills
// missing policy fields from `seed`.
Network load_network(const std::optional<std::filesystem::path>& snapshot, const SyntheticOptions& synthetic,
                     std::uint64_t seed);

struct ModelResult {
  FeeModel model;
  Metrics metrics;
};

// Runs the three fee models on the same network and payment sequence.
std::vector<ModelResult> compare_models(const Network& network, const SimConfig& base);

// One row per model: mean and std of every metric.
std::string comparison_csv(const std::vector<ModelResult>& results);

// Replaces `path` with `content` through a temporary file and rename.
void write_atomically(const std::filesystem::path& path, const std::string& content);


struct OracleCase {
  std::size_t index = 0;
  std::size_t hops = 0;
  FeeModel model = FeeModel::Original;
  bool locks_agree = false;
  bool all_reveal = false;
};

// Random paths with 2..max_hops hops and random beliefs; compares decide_lock
// per intermediary with the solved game tree.
std::vector<OracleCase> game_oracle(std::size_t cases, std::size_t max_hops, std::uint64_t seed);

std::string game_oracle_csv(const std::vector<OracleCase>& cases);

}  // namespace pcn::cli
