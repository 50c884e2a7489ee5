#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pcnsim/types.hpp"

namespace pcn {

// Public forwarding policy of one channel direction.
struct ChannelParams {
  Satoshi base_fee = 0;
  double fee_rate = 0.0;  // fraction of the forwarded amount, in [0, 1)
  Blocks timelock_delta = 1;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

// A policy as announced; null fields are filled by sample_missing_params.
struct PolicyFields {
  std::optional<Satoshi> base_fee;
  std::optional<double> fee_rate;
  std::optional<Blocks> timelock_delta;

  bool complete() const noexcept {
    return base_fee.has_value() && fee_rate.has_value() && timelock_delta.has_value();
  }
  // Throws std::logic_error when a field is still missing.
  ChannelParams params() const;

  friend bool operator==(const PolicyFields&, const PolicyFields&) = default;
};

struct Channel {
  std::string id;
  NodeIndex node1 = 0;
  NodeIndex node2 = 0;
  Satoshi capacity = 0;
  std::array<PolicyFields, 2> policy{};
  // balance[d] is spendable by the sending side of direction d.
  std::array<Satoshi, 2> balance{};

  NodeIndex from(Direction d) const noexcept { return d == Direction::Forward ? node1 : node2; }
  NodeIndex to(Direction d) const noexcept { return d == Direction::Forward ? node2 : node1; }
  ChannelParams params(Direction d) const { return policy[index_of(d)].params(); }
  Satoshi balance_of(Direction d) const noexcept { return balance[index_of(d)]; }
};

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SnapshotParseError : public SnapshotError {
 public:
  SnapshotParseError(const std::string& what, std::size_t byte_offset)
      : SnapshotError(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class EmptyNetworkError : public SnapshotError {
 public:
  using SnapshotError::SnapshotError;
};

class ParamSamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Payment channel network. Nodes and channels are addressed by dense indices
// assigned in document order; the adjacency index lists incident channels.
class Network {
 public:
  Network() = default;

  NodeIndex add_node(NodeId id);
  // Endpoints must already exist. Returns the new channel's index.
  ChannelIndex add_channel(Channel channel);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t channel_count() const noexcept { return channels_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  const NodeId& node_id(NodeIndex n) const { return nodes_.at(n); }
  std::optional<NodeIndex> find_node(std::string_view id) const;
  NodeIndex node_index(std::string_view id) const;  // throws std::out_of_range

  const Channel& channel(ChannelIndex c) const { return channels_.at(c); }
  Channel& channel(ChannelIndex c) { return channels_.at(c); }
  std::span<const Channel> channels() const noexcept { return channels_; }
  std::span<Channel> channels() noexcept { return channels_; }
  std::span<const ChannelIndex> incident(NodeIndex n) const { return adjacency_.at(n); }

  // Convenience accessors for a directed hop.
  NodeIndex hop_from(DirectedChannel h) const { return channel(h.channel).from(h.direction); }
  NodeIndex hop_to(DirectedChannel h) const { return channel(h.channel).to(h.direction); }
  ChannelParams hop_params(DirectedChannel h) const { return channel(h.channel).params(h.direction); }
  Satoshi hop_balance(DirectedChannel h) const { return channel(h.channel).balance_of(h.direction); }

  // Moves `amount` from the sending side of `h` to the receiving side.
  // Throws std::logic_error if that would make a balance negative.
  void transfer(DirectedChannel h, Satoshi amount);

  // Throws std::logic_error if any channel violates balance or parameter invariants.
  void check_invariants() const;

 private:
  std::vector<NodeId> nodes_;
  std::unordered_map<std::string, NodeIndex> by_id_;
  std::vector<Channel> channels_;
  std::vector<std::vector<ChannelIndex>> adjacency_;
};

struct IngestStats {
  std::size_t duplicate_nodes = 0;
  std::size_t duplicate_channels = 0;
  std::size_t unknown_endpoint_channels = 0;
  std::size_t invalid_channels = 0;  // self loops, non-positive capacity, out-of-range policy
  std::size_t isolated_nodes = 0;

  std::size_t warnings() const noexcept {
    return duplicate_nodes + duplicate_channels + unknown_endpoint_channels + invalid_channels +
           isolated_nodes;
  }
};

// Parses the normalized snapshot document and applies the cleanup rules:
// duplicates keep their first occurrence, channels with unknown endpoints or
// invalid values are dropped, nodes left without channels are dropped.
// Balances are zero until initialize_balances runs.
Network ingest_snapshot(std::string_view document, IngestStats* stats = nullptr);

// Serializes to the same schema ingest_snapshot reads (balances are not part of it).
std::string to_snapshot_json(const Network& network);

// Fills every null policy field by resampling, with replacement, from the
// values present on other channel directions. Each field is drawn independently.
Network sample_missing_params(Network network, std::uint64_t seed);

// Splits every channel's capacity uniformly at random between its directions.
Network initialize_balances(Network network, std::uint64_t seed);

// Parameters of the seeded synthetic snapshot generator.
struct SyntheticOptions {
  std::size_t nodes = 600;
  // Each new node opens this many channels to existing nodes, chosen with
  // probability proportional to degree.
  std::size_t channels_per_node = 2;
  // Fraction of channel directions that announce a complete policy; the rest
  // carry nulls and exercise sample_missing_params.
  double announced_fraction = 0.15;
  // Median channel capacity and log-normal spread.
  Satoshi median_capacity = 2'000'000;
  double capacity_log_sigma = 1.2;
};

// Emits a snapshot document in the ingest schema.
std::string generate_snapshot(const SyntheticOptions& options, std::uint64_t seed);

}  // namespace pcn
