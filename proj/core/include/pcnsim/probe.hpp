#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pcnsim/beliefs.hpp"
#include "pcnsim/game.hpp"
#include "pcnsim/topology.hpp"

namespace pcn {

// Attacker v_0 probes the channel (v_1, v_2) of target v_1; v_2 is the far
// node and acts as the receiver.
struct ProbeScenario {
  std::string attacker = "attacker";
  std::string target = "target";
  std::string far_node = "far";
  Satoshi capacity = 4'600'000;
  Satoshi balance = 0;  // hidden from the attacker
  Blocks timelock = 144;
  ChannelParams target_params{1, 100e-6, 144};
  double risk_factor = 1.5e-7;
  FeeModel fee_model = FeeModel::ModGuaranteed;
  BeliefParams beliefs;
  Minutes delay_min = 0.1;
  Minutes delay_max = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ProbeOutcome {
  bool locked = false;
  Satoshi cost = 0;
  Satoshi fee = 0;
  double fraction = 0.0;
  double target_p_success = 0.0;
};

// Belief and clock state shared by the probes of one search.
class ProbeSession {
 public:
  explicit ProbeSession(const ProbeScenario& scenario);

  // Advances the clock by one delay draw and sends a probe of `amount`.
  ProbeOutcome probe_once(Satoshi amount);

  Minutes now() const noexcept { return now_; }
  const BeliefStore& beliefs() const noexcept { return beliefs_; }

 private:
  const ProbeScenario& scenario_;
  BeliefStore beliefs_;
  std::mt19937_64 rng_;
  Minutes now_ = 0.0;
};

struct ProbeResult {
  Satoshi low = 0;   // inferred interval [low, high)
  Satoshi high = 0;
  std::size_t iterations = 0;
  Satoshi total_cost = 0;
};

// Bisection over [0, C + 1): probe the midpoint, keep the upper half when the
// target locks. Stops once high - low <= granularity.
ProbeResult binary_search_balance(const ProbeScenario& scenario, Satoshi granularity = 1);

struct CostPoint {
  Satoshi balance = 0;
  std::size_t iterations = 0;
  Satoshi cost = 0;
  double window_mean_cost = 0.0;
};

inline constexpr Satoshi kCostWindow = 500'000;

// One fresh search per balance. window_mean_cost averages the costs of all
// points whose balance lies within kCostWindow / 2 of the point's balance.
std::vector<CostPoint> cost_curve(const ProbeScenario& scenario, std::span<const Satoshi> balances,
                                  Satoshi granularity = 1);

// Columns B, iterations, cost_sat, window_mean_cost.
std::string cost_curve_csv(std::span<const CostPoint> points);

// `count` balances evenly spaced over [0, capacity].
std::vector<Satoshi> even_balances(Satoshi capacity, std::size_t count);

}  // namespace pcn
