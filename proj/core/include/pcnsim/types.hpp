#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace pcn {

// All amounts and fees are integer satoshis.
using Satoshi = std::int64_t;
using Blocks = std::int64_t;
// Simulated wall clock.
using Minutes = double;

using NodeIndex = std::uint32_t;
using ChannelIndex = std::uint32_t;

// Opaque public identifier of a network participant.
class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw std::invalid_argument("NodeId must be non-empty");
  }

  const std::string& str() const noexcept { return value_; }
  std::string_view view() const noexcept { return value_; }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;

 private:
  std::string value_;
};

// A channel traversed in one direction. Forward means node1 -> node2.
enum class Direction : std::uint8_t { Forward = 0, Backward = 1 };

constexpr Direction reverse(Direction d) noexcept {
  return d == Direction::Forward ? Direction::Backward : Direction::Forward;
}

constexpr std::size_t index_of(Direction d) noexcept { return static_cast<std::size_t>(d); }

struct DirectedChannel {
  ChannelIndex channel = 0;
  Direction direction = Direction::Forward;

  friend auto operator<=>(const DirectedChannel&, const DirectedChannel&) = default;
};

}  // namespace pcn
