#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pcnsim/topology.hpp"

namespace pcn::testing {

struct Edge {
  std::string a;
  std::string b;
  Satoshi capacity = 1'000'000;
  ChannelParams ab{0, 0.0, 40};
  ChannelParams ba{0, 0.0, 40};
  Satoshi balance_ab = -1;  // -1: half of the capacity
};

inline PolicyFields fields(const ChannelParams& p) { return {p.base_fee, p.fee_rate, p.timelock_delta}; }

// Builds a network with complete policies; node indices follow first appearance.
inline Network make_network(const std::vector<Edge>& edges) {
  Network net;
  auto node = [&](const std::string& id) {
    if (auto n = net.find_node(id)) return *n;
    return net.add_node(NodeId(id));
  };
  int i = 0;
  for (const Edge& e : edges) {
    Channel ch;
    ch.id = "c" + std::to_string(i++);
    ch.node1 = node(e.a);
    ch.node2 = node(e.b);
    ch.capacity = e.capacity;
    ch.policy = {fields(e.ab), fields(e.ba)};
    Satoshi ab = e.balance_ab < 0 ? e.capacity / 2 : e.balance_ab;
    ch.balance = {ab, e.capacity - ab};
    net.add_channel(std::move(ch));
  }
  return net;
}

}  // namespace pcn::testing
