#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pcnsim/topology.hpp"
#include "pcnsim/types.hpp"

namespace pcn {

class BeliefStore;

// Fee charged by a forwarding node: base + round-half-up(amount * rate).
Satoshi hop_fee(const ChannelParams& params, Satoshi amount);

// LND channel weight: timelock penalty plus fee, amount * timelock * risk + fee.
double edge_weight(Satoshi amount, Blocks hop_timelock, double risk_factor, Satoshi fee);

// Apriori success probability decayed by the time since the last failure:
// P_A when no failure is known, otherwise P_A * (1 - 2^(-t / half_life)).
// Throws std::invalid_argument for negative elapsed time or bad parameters.
double channel_success_probability(std::optional<Minutes> since_last_failure, double apriori,
                                   Minutes half_life);

inline constexpr double kUnusablePath = std::numeric_limits<double>::infinity();

// penalty / prod(probs); kUnusablePath if any probability is zero.
double path_bias(std::span<const double> success_probs, double penalty);

struct HopPlan {
  DirectedChannel channel;
  NodeIndex from = 0;
  NodeIndex to = 0;
  Satoshi amount_to_forward = 0;  // locked by `from` on this channel
  Satoshi fee = 0;                // charged by `from`; zero for the sender's own hop
  Blocks hop_timelock = 0;
  Blocks cumulative_timelock = 0;  // sum of hop timelocks from here to the receiver
};

struct PathPlan {
  std::vector<HopPlan> hops;  // sender first
  Satoshi amount = 0;         // delivered to the receiver
  Satoshi total_fee = 0;      // sum of intermediary fees
  double cost = 0.0;          // search cost of the sender node (weights + bias)

  NodeIndex sender() const { return hops.front().from; }
  NodeIndex receiver() const { return hops.back().to; }
  std::size_t intermediary_count() const { return hops.empty() ? 0 : hops.size() - 1; }
};

// Builds the amount/fee/timelock plan for a fixed route (sender first) by
// walking back from the receiver. Does not check capacities.
PathPlan plan_route(const Network& network, std::span<const DirectedChannel> route, Satoshi amount);

struct PathQuery {
  NodeIndex sender = 0;
  NodeIndex receiver = 0;
  Satoshi amount = 0;
  double risk_factor = 1.5e-9;
  double penalty = 100.0;
  // The sender knows its own channel balances and skips first hops that cannot carry the amount.
  bool check_local_balance = true;
};

using HopProbability = std::function<double(DirectedChannel)>;

// Cheapest path from sender to receiver, searched from the receiver backwards.
// A frontier node's cost is its accumulated edge weight plus
// penalty / (product of hop success probabilities on its suffix). Channels whose
// public capacity is below the amount they would lock are skipped. Ties are
// broken towards the lexicographically smaller next-hop id. Returns nullopt
// when no path satisfies the capacity constraint.
std::optional<PathPlan> find_path(const Network& network, const PathQuery& query,
                                  const HopProbability& hop_probability);

// Hop probabilities from the sender's refusal observations in `beliefs`.
std::optional<PathPlan> find_path(const Network& network, const PathQuery& query,
                                  const BeliefStore& beliefs, Minutes now);

}  // namespace pcn
