#include "pcnsim/pathfinding.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

#include "pcnsim/beliefs.hpp"

namespace pcn {

Satoshi hop_fee(const ChannelParams& params, Satoshi amount) {
  if (amount < 0) throw std::invalid_argument("hop_fee: negative amount");
  double proportional = static_cast<double>(amount) * params.fee_rate;
  return params.base_fee + static_cast<Satoshi>(std::floor(proportional + 0.5));
}

double edge_weight(Satoshi amount, Blocks hop_timelock, double risk_factor, Satoshi fee) {
  return static_cast<double>(amount) * static_cast<double>(hop_timelock) * risk_factor +
         static_cast<double>(fee);
}

double channel_success_probability(std::optional<Minutes> since_last_failure, double apriori,
                                   Minutes half_life) {
  if (!(apriori >= 0.0 && apriori <= 1.0))
    throw std::invalid_argument("apriori probability must lie in [0, 1]");
  if (!(half_life > 0.0)) throw std::invalid_argument("half-life must be positive");
  if (!since_last_failure) return apriori;
  if (*since_last_failure < 0.0) throw std::invalid_argument("negative time since last failure");
  return apriori * (1.0 - std::exp2(-*since_last_failure / half_life));
}

double path_bias(std::span<const double> success_probs, double penalty) {
  double product = 1.0;
  for (double p : success_probs) {
    if (p <= 0.0) return kUnusablePath;
    product *= p;
  }
  return penalty / product;
}

PathPlan plan_route(const Network& network, std::span<const DirectedChannel> route, Satoshi amount) {
  PathPlan plan;
  plan.amount = amount;
  plan.hops.resize(route.size());
  Satoshi incoming = amount;  // amount that must reach the next node
  Blocks cumulative = 0;
  for (std::size_t k = route.size(); k-- > 0;) {
    HopPlan& hop = plan.hops[k];
    hop.channel = route[k];
    hop.from = network.hop_from(route[k]);
    hop.to = network.hop_to(route[k]);
    ChannelParams params = network.hop_params(route[k]);
    hop.amount_to_forward = incoming;
    hop.fee = k == 0 ? 0 : hop_fee(params, incoming);
    hop.hop_timelock = params.timelock_delta;
    cumulative += params.timelock_delta;
    hop.cumulative_timelock = cumulative;
    incoming += hop.fee;
    plan.total_fee += hop.fee;
  }
  return plan;
}

namespace {

struct Label {
  double cost = kUnusablePath;
  double weight = 0.0;       // accumulated edge weights to the receiver
  double probability = 1.0;  // product of hop success probabilities to the receiver
  Satoshi incoming = 0;      // amount that must arrive at this node
  Blocks cumulative = 0;
  std::optional<DirectedChannel> next;
  bool settled = false;
};

struct Frontier {
  double cost;
  NodeIndex node;
  bool operator>(const Frontier& o) const {
    if (cost != o.cost) return cost > o.cost;
    return node > o.node;
  }
};

}  // namespace

std::optional<PathPlan> find_path(const Network& network, const PathQuery& query,
                                  const HopProbability& hop_probability) {
  if (query.sender == query.receiver) throw std::invalid_argument("find_path: sender equals receiver");
  if (query.amount <= 0) throw std::invalid_argument("find_path: amount must be positive");
  if (query.sender >= network.node_count() || query.receiver >= network.node_count())
    throw std::out_of_range("find_path: unknown endpoint");

  std::vector<Label> labels(network.node_count());
  std::priority_queue<Frontier, std::vector<Frontier>, std::greater<>> frontier;

  Label& target = labels[query.receiver];
  target.cost = query.penalty;
  target.incoming = query.amount;
  frontier.push({target.cost, query.receiver});

  while (!frontier.empty()) {
    auto [cost, u] = frontier.top();
    frontier.pop();
    Label& lu = labels[u];
    if (lu.settled || cost != lu.cost) continue;
    lu.settled = true;
    if (u == query.sender) break;

    for (ChannelIndex ci : network.incident(u)) {
      const Channel& ch = network.channel(ci);
      Direction dir = ch.node2 == u ? Direction::Forward : Direction::Backward;
      DirectedChannel hop{ci, dir};
      NodeIndex w = ch.from(dir);
      Label& lw = labels[w];
      if (lw.settled) continue;

      Satoshi locked = lu.incoming;
      if (ch.capacity < locked) continue;
      if (w == query.sender && query.check_local_balance && ch.balance_of(dir) < locked) continue;

      double p = hop_probability(hop);
      if (p <= 0.0) continue;

      ChannelParams params = ch.params(dir);
      Satoshi fee = w == query.sender ? 0 : hop_fee(params, locked);
      double weight = lu.weight + edge_weight(locked, params.timelock_delta, query.risk_factor, fee);
      double probability = lu.probability * p;
      double candidate = weight + query.penalty / probability;

      bool better = candidate < lw.cost;
      if (!better && candidate == lw.cost && lw.next) {
        NodeIndex current_next = network.hop_to(*lw.next);
        better = network.node_id(u) < network.node_id(current_next);
      }
      if (!better) continue;

      lw.cost = candidate;
      lw.weight = weight;
      lw.probability = probability;
      lw.incoming = locked + fee;
      lw.cumulative = lu.cumulative + params.timelock_delta;
      lw.next = hop;
      frontier.push({candidate, w});
    }
  }

  const Label& source = labels[query.sender];
  if (!source.settled) return std::nullopt;

  std::vector<DirectedChannel> route;
  for (NodeIndex v = query.sender; v != query.receiver;) {
    const DirectedChannel hop = *labels[v].next;
    route.push_back(hop);
    v = network.hop_to(hop);
  }
  PathPlan plan = plan_route(network, route, query.amount);
  plan.cost = source.cost;
  return plan;
}

std::optional<PathPlan> find_path(const Network& network, const PathQuery& query,
                                  const BeliefStore& beliefs, Minutes now) {
  auto probability = [&](DirectedChannel hop) {
    return beliefs.success_estimate(
        ObservationKey{query.sender, hop, ObservationKind::SenderRefusalToLock}, now);
  };
  return find_path(network, query, probability);
}

}  // namespace pcn
