#include "pcnsim/topology.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace pcn {

using json = nlohmann::json;

ChannelParams PolicyFields::params() const {
  if (!complete()) throw std::logic_error("channel policy has unsampled fields");
  return ChannelParams{*base_fee, *fee_rate, *timelock_delta};
}

NodeIndex Network::add_node(NodeId id) {
  auto [it, inserted] = by_id_.emplace(id.str(), static_cast<NodeIndex>(nodes_.size()));
  if (!inserted) throw std::invalid_argument("duplicate node id: " + id.str());
  nodes_.push_back(std::move(id));
  adjacency_.emplace_back();
  return it->second;
}

ChannelIndex Network::add_channel(Channel channel) {
  if (channel.node1 >= nodes_.size() || channel.node2 >= nodes_.size())
    throw std::invalid_argument("channel endpoint is not a known node: " + channel.id);
  auto index = static_cast<ChannelIndex>(channels_.size());
  adjacency_[channel.node1].push_back(index);
  if (channel.node2 != channel.node1) adjacency_[channel.node2].push_back(index);
  channels_.push_back(std::move(channel));
  return index;
}

std::optional<NodeIndex> Network::find_node(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Network::node_index(std::string_view id) const {
  auto found = find_node(id);
  if (!found) throw std::out_of_range("unknown node: " + std::string(id));
  return *found;
}

void Network::transfer(DirectedChannel h, Satoshi amount) {
  Channel& ch = channel(h.channel);
  auto out = index_of(h.direction);
  auto in = index_of(reverse(h.direction));
  if (amount < 0 || ch.balance[out] < amount)
    throw std::logic_error("transfer would make balance negative on channel " + ch.id);
  ch.balance[out] -= amount;
  ch.balance[in] += amount;
}

void Network::check_invariants() const {
  for (const Channel& ch : channels_) {
    if (ch.capacity <= 0) throw std::logic_error("non-positive capacity on " + ch.id);
    if (ch.balance[0] < 0 || ch.balance[1] < 0)
      throw std::logic_error("negative balance on " + ch.id);
    if (ch.balance[0] + ch.balance[1] != ch.capacity)
      throw std::logic_error("balances do not sum to capacity on " + ch.id);
    for (const PolicyFields& p : ch.policy) {
      if (p.base_fee && *p.base_fee < 0) throw std::logic_error("negative base fee on " + ch.id);
      if (p.fee_rate && (*p.fee_rate < 0.0 || *p.fee_rate >= 1.0))
        throw std::logic_error("fee rate out of range on " + ch.id);
      if (p.timelock_delta && *p.timelock_delta <= 0)
        throw std::logic_error("non-positive timelock on " + ch.id);
    }
  }
}

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw SnapshotError("snapshot schema: " + where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) schema_error(where + "." + key, "expected string");
  return v.get<std::string>();
}

// Returns nullopt for null, and sets `invalid` for out-of-range values.
PolicyFields parse_policy(const json& obj, const std::string& where, bool& invalid) {
  PolicyFields p;
  if (obj.is_null()) return p;
  if (!obj.is_object()) schema_error(where, "expected object or null");

  if (auto it = obj.find("base_fee_sat"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) schema_error(where + ".base_fee_sat", "expected number or null");
    double v = it->get<double>();
    if (v < 0) invalid = true;
    p.base_fee = static_cast<Satoshi>(std::llround(v));
  }
  if (auto it = obj.find("fee_rate"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) schema_error(where + ".fee_rate", "expected number or null");
    double v = it->get<double>();
    if (v < 0.0 || v >= 1.0) invalid = true;
    p.fee_rate = v;
  }
  if (auto it = obj.find("timelock_delta"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) schema_error(where + ".timelock_delta", "expected integer or null");
    auto v = it->get<std::int64_t>();
    if (v <= 0) invalid = true;
    p.timelock_delta = v;
  }
  return p;
}

struct RawChannel {
  std::string id;
  std::string node1;
  std::string node2;
  Satoshi capacity;
  std::array<PolicyFields, 2> policy;
};

}  // namespace

Network ingest_snapshot(std::string_view document, IngestStats* stats) {
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  st = IngestStats{};

  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw SnapshotParseError("malformed snapshot at byte " + std::to_string(e.byte) + ": " + e.what(),
                             e.byte);
  }
  if (!doc.is_object()) schema_error("$", "top level must be an object");
  const json& nodes = require(doc, "nodes", "$");
  const json& channels = require(doc, "channels", "$");
  if (!nodes.is_array()) schema_error("$.nodes", "expected array");
  if (!channels.is_array()) schema_error("$.channels", "expected array");

  std::vector<std::string> node_order;
  std::set<std::string, std::less<>> known;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::string where = "$.nodes[" + std::to_string(i) + "]";
    if (!nodes[i].is_object()) schema_error(where, "expected object");
    std::string id = require_string(nodes[i], "id", where);
    if (id.empty()) schema_error(where + ".id", "empty node id");
    if (!known.insert(id).second) {
      ++st.duplicate_nodes;
      continue;
    }
    node_order.push_back(std::move(id));
  }

  std::vector<RawChannel> kept;
  std::set<std::string, std::less<>> channel_ids;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    std::string where = "$.channels[" + std::to_string(i) + "]";
    const json& c = channels[i];
    if (!c.is_object()) schema_error(where, "expected object");
    RawChannel raw;
    raw.id = require_string(c, "id", where);
    raw.node1 = require_string(c, "node1", where);
    raw.node2 = require_string(c, "node2", where);
    const json& cap = require(c, "capacity_sat", where);
    if (!cap.is_number_integer()) schema_error(where + ".capacity_sat", "expected integer");
    raw.capacity = cap.get<Satoshi>();
    bool invalid = false;
    if (auto it = c.find("node1_policy"); it != c.end())
      raw.policy[0] = parse_policy(*it, where + ".node1_policy", invalid);
    if (auto it = c.find("node2_policy"); it != c.end())
      raw.policy[1] = parse_policy(*it, where + ".node2_policy", invalid);

    if (!channel_ids.insert(raw.id).second) {
      ++st.duplicate_channels;
      continue;
    }
    if (!known.contains(raw.node1) || !known.contains(raw.node2)) {
      ++st.unknown_endpoint_channels;
      continue;
    }
    if (invalid || raw.capacity <= 0 || raw.node1 == raw.node2) {
      ++st.invalid_channels;
      continue;
    }
    kept.push_back(std::move(raw));
  }

  std::set<std::string, std::less<>> connected;
  for (const RawChannel& c : kept) {
    connected.insert(c.node1);
    connected.insert(c.node2);
  }

  Network net;
  for (std::string& id : node_order) {
    if (!connected.contains(id)) {
      ++st.isolated_nodes;
      continue;
    }
    net.add_node(NodeId(std::move(id)));
  }
  if (net.empty() || kept.empty()) throw EmptyNetworkError("snapshot contains no usable channels");

  for (RawChannel& raw : kept) {
    Channel ch;
    ch.id = std::move(raw.id);
    ch.node1 = net.node_index(raw.node1);
    ch.node2 = net.node_index(raw.node2);
    ch.capacity = raw.capacity;
    ch.policy = raw.policy;
    ch.balance = {raw.capacity, 0};
    net.add_channel(std::move(ch));
  }
  return net;
}

namespace {

json policy_json(const PolicyFields& p) {
  json out = json::object();
  out["base_fee_sat"] = p.base_fee ? json(*p.base_fee) : json(nullptr);
  out["fee_rate"] = p.fee_rate ? json(*p.fee_rate) : json(nullptr);
  out["timelock_delta"] = p.timelock_delta ? json(*p.timelock_delta) : json(nullptr);
  return out;
}

}  // namespace

std::string to_snapshot_json(const Network& network) {
  json doc;
  doc["nodes"] = json::array();
  for (NodeIndex n = 0; n < network.node_count(); ++n)
    doc["nodes"].push_back({{"id", network.node_id(n).str()}});
  doc["channels"] = json::array();
  for (const Channel& ch : network.channels()) {
    json c;
    c["id"] = ch.id;
    c["node1"] = network.node_id(ch.node1).str();
    c["node2"] = network.node_id(ch.node2).str();
    c["capacity_sat"] = ch.capacity;
    c["node1_policy"] = policy_json(ch.policy[0]);
    c["node2_policy"] = policy_json(ch.policy[1]);
    doc["channels"].push_back(std::move(c));
  }
  return doc.dump();
}

Network sample_missing_params(Network network, std::uint64_t seed) {
  std::vector<Satoshi> base_pool;
  std::vector<double> rate_pool;
  std::vector<Blocks> timelock_pool;
  bool any_complete = false;
  for (const Channel& ch : network.channels()) {
    for (const PolicyFields& p : ch.policy) {
      if (p.base_fee) base_pool.push_back(*p.base_fee);
      if (p.fee_rate) rate_pool.push_back(*p.fee_rate);
      if (p.timelock_delta) timelock_pool.push_back(*p.timelock_delta);
      any_complete = any_complete || p.complete();
    }
  }
  if (!any_complete)
    throw ParamSamplingError("no channel announces a complete policy; cannot derive distributions");

  std::mt19937_64 rng(seed);
  auto draw = [&rng](const auto& pool) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)];
  };
  for (Channel& ch : network.channels()) {
    for (PolicyFields& p : ch.policy) {
      if (!p.base_fee) p.base_fee = draw(base_pool);
      if (!p.fee_rate) p.fee_rate = draw(rate_pool);
      if (!p.timelock_delta) p.timelock_delta = draw(timelock_pool);
    }
  }
  return network;
}

Network initialize_balances(Network network, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (Channel& ch : network.channels()) {
    std::uniform_int_distribution<Satoshi> split(0, ch.capacity);
    ch.balance[0] = split(rng);
    ch.balance[1] = ch.capacity - ch.balance[0];
  }
  return network;
}

}  // namespace pcn
