#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "pcnsim/topology.hpp"

namespace pcn {

namespace {

using json = nlohmann::json;

// Announced-policy shapes loosely follow public Lightning gossip: most nodes
// charge a 0 or 1 sat base fee, fee rates spread over several decades of ppm,
// and timelock deltas cluster on a few popular defaults.
Satoshi draw_base_fee(std::mt19937_64& rng) {
  std::discrete_distribution<int> pick({30, 60, 10});
  switch (pick(rng)) {
    case 0: return 0;
    case 1: return 1;
    default: return std::uniform_int_distribution<Satoshi>(2, 10)(rng);
  }
}

double draw_fee_rate(std::mt19937_64& rng) {
  // log-uniform between 1 ppm and 2000 ppm
  std::uniform_real_distribution<double> exponent(0.0, std::log10(2000.0));
  double ppm = std::round(std::pow(10.0, exponent(rng)));
  return ppm * 1e-6;
}

Blocks draw_timelock(std::mt19937_64& rng) {
  static constexpr std::array<Blocks, 4> kDeltas{18, 40, 80, 144};
  std::discrete_distribution<std::size_t> pick({10, 40, 20, 30});
  return kDeltas[pick(rng)];
}

}  // namespace

std::string generate_snapshot(const SyntheticOptions& options, std::uint64_t seed) {
  if (options.nodes < options.channels_per_node + 1 || options.channels_per_node == 0)
    throw std::invalid_argument("synthetic snapshot needs nodes > channels_per_node > 0");

  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> capacity(std::log(static_cast<double>(options.median_capacity)),
                                                options.capacity_log_sigma);
  std::bernoulli_distribution announced(options.announced_fraction);

  json doc;
  doc["nodes"] = json::array();
  doc["channels"] = json::array();
  for (std::size_t i = 0; i < options.nodes; ++i)
    doc["nodes"].push_back({{"id", "n" + std::to_string(i)}});

  // Preferential attachment: endpoints[] holds one entry per channel end.
  std::vector<std::size_t> endpoints;
  std::size_t channel_no = 0;
  auto add_channel = [&](std::size_t a, std::size_t b) {
    json c;
    c["id"] = "c" + std::to_string(channel_no++);
    c["node1"] = "n" + std::to_string(a);
    c["node2"] = "n" + std::to_string(b);
    auto cap = static_cast<Satoshi>(std::llround(capacity(rng)));
    c["capacity_sat"] = std::clamp<Satoshi>(cap, 20'000, 100'000'000);
    for (const char* side : {"node1_policy", "node2_policy"}) {
      json p;
      if (announced(rng)) {
        p["base_fee_sat"] = draw_base_fee(rng);
        p["fee_rate"] = draw_fee_rate(rng);
        p["timelock_delta"] = draw_timelock(rng);
      } else {
        p["base_fee_sat"] = nullptr;
        p["fee_rate"] = nullptr;
        p["timelock_delta"] = nullptr;
      }
      c[side] = std::move(p);
    }
    doc["channels"].push_back(std::move(c));
    endpoints.push_back(a);
    endpoints.push_back(b);
  };

  std::size_t seed_nodes = options.channels_per_node + 1;
  for (std::size_t a = 0; a < seed_nodes; ++a)
    for (std::size_t b = a + 1; b < seed_nodes; ++b) add_channel(a, b);

  for (std::size_t v = seed_nodes; v < options.nodes; ++v) {
    std::set<std::size_t> targets;
    while (targets.size() < options.channels_per_node) {
      std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
      targets.insert(endpoints[pick(rng)]);
    }
    for (std::size_t t : targets) add_channel(t, v);
  }

  // Guarantee at least one complete policy so parameter sampling is defined.
  json& first = doc["channels"][0]["node1_policy"];
  if (first["fee_rate"].is_null()) {
    first["base_fee_sat"] = 1;
    first["fee_rate"] = 0.0001;
    first["timelock_delta"] = 40;
  }
  return doc.dump();
}

}  // namespace pcn
