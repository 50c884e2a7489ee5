#include "pcnsim/beliefs.hpp"

#include <json.hpp>

#include "pcnsim/pathfinding.hpp"
#include "pcnsim/topology.hpp"

namespace pcn {

const char* to_string(ObservationKind kind) {
  switch (kind) {
    case ObservationKind::IntermediaryDownstreamFailure: return "intermediary_downstream_failure";
    case ObservationKind::SenderPostLockFailure: return "sender_post_lock_failure";
    case ObservationKind::SenderRefusalToLock: return "sender_refusal_to_lock";
  }
  return "unknown";
}

void BeliefParams::validate() const {
  if (!(apriori >= 0.0 && apriori <= 1.0)) throw std::invalid_argument("apriori must lie in [0, 1]");
  if (!(half_life_intermediary > 0.0)) throw std::invalid_argument("half-life must be positive");
  if (!(tau > 1.0)) throw std::invalid_argument("tau must exceed 1");
}

BeliefStore::BeliefStore(BeliefParams params) : params_(params) { params_.validate(); }

void BeliefStore::record_failure(const ObservationKey& key, Minutes time) {
  if (latest_ && time < *latest_)
    throw ClockRegressionError("record_failure: time " + std::to_string(time) +
                               " precedes an earlier record at " + std::to_string(*latest_));
  latest_ = time;
  last_failure_[key] = time;
}

std::optional<Minutes> BeliefStore::last_failure(const ObservationKey& key) const {
  auto it = last_failure_.find(key);
  if (it == last_failure_.end()) return std::nullopt;
  return it->second;
}

double BeliefStore::success_estimate(const ObservationKey& key, Minutes now) const {
  std::optional<Minutes> elapsed;
  if (auto last = last_failure(key)) elapsed = std::max(0.0, now - *last);
  return channel_success_probability(elapsed, params_.apriori, params_.half_life(key.kind));
}

double BeliefStore::sender_buffer(NodeIndex sender, DirectedChannel hop, Minutes now) const {
  double lock_probability =
      success_estimate(ObservationKey{sender, hop, ObservationKind::SenderRefusalToLock}, now);
  return kBufferScale * (1.0 - lock_probability);
}

std::string BeliefStore::dump_json(const Network& network) const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, time] : last_failure_) {
    const Channel& ch = network.channel(key.hop.channel);
    out.push_back({{"observer", network.node_id(key.observer).str()},
                   {"channel", ch.id},
                   {"from", network.node_id(ch.from(key.hop.direction)).str()},
                   {"to", network.node_id(ch.to(key.hop.direction)).str()},
                   {"kind", to_string(key.kind)},
                   {"last_failure_time", time}});
  }
  return out.dump();
}

}  // namespace pcn
