#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "fixtures.hpp"
#include "pcnsim/beliefs.hpp"
#include "pcnsim/pathfinding.hpp"

namespace pcn {
namespace {

using testing::Edge;
using testing::make_network;

TEST(HopFee, Examples) {
  EXPECT_EQ(hop_fee({0, 0.0, 40}, 123'456), 0);
  EXPECT_EQ(hop_fee({1, 0.000001, 40}, 1'000'000), 2);
  EXPECT_EQ(hop_fee({5, 0.0, 40}, 48'000), 5);
}

TEST(HopFee, RoundsHalfUp) {
  EXPECT_EQ(hop_fee({0, 0.5, 40}, 1), 1);
  EXPECT_EQ(hop_fee({0, 0.25, 40}, 1), 0);
  EXPECT_EQ(hop_fee({0, 0.0001, 40}, 15'000), 2);  // 1.5
}

TEST(EdgeWeight, Examples) {
  EXPECT_DOUBLE_EQ(edge_weight(50'000, 144, 0.0, 7), 7.0);
  EXPECT_NEAR(edge_weight(16'000, 144, 1.5e-7, 3), 3.3456, 1e-9 * 3.3456);
  EXPECT_DOUBLE_EQ(edge_weight(1, 1, 1.0, 0), 1.0);
}

TEST(SuccessProbability, Examples) {
  EXPECT_DOUBLE_EQ(channel_success_probability(std::nullopt, 0.6, 30), 0.6);
  EXPECT_NEAR(channel_success_probability(30.0, 0.6, 30), 0.3, 1e-12);
  EXPECT_NEAR(channel_success_probability(30.0 * 1e9, 0.6, 30), 0.6, 1e-9);
  EXPECT_THROW(channel_success_probability(-1.0, 0.6, 30), std::invalid_argument);
}

TEST(SuccessProbability, MonotoneInElapsedTime) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(0.0, 500.0), pa(0.0, 1.0), hl(0.1, 100.0);
  for (int i = 0; i < 10'000; ++i) {
    double a = t(rng), b = t(rng), p = pa(rng), h = hl(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(channel_success_probability(a, p, h), channel_success_probability(b, p, h) + 1e-15);
    EXPECT_LE(channel_success_probability(b, p, h), p);
  }
}

TEST(PathBias, Examples) {
  std::vector<double> ones{1.0, 1.0, 1.0};
  std::vector<double> halves{0.5, 0.5};
  std::vector<double> dead{0.9, 0.0};
  EXPECT_DOUBLE_EQ(path_bias(ones, 100), 100);
  EXPECT_DOUBLE_EQ(path_bias(halves, 100), 400);
  EXPECT_EQ(path_bias(dead, 100), kUnusablePath);
}

double always(DirectedChannel) { return 1.0; }

TEST(FindPath, DirectChannelHasNoIntermediaryFee) {
  Network net = make_network({{"s", "r", 100'000, {3, 0.001, 40}, {3, 0.001, 40}}});
  auto plan = find_path(net, {0, 1, 20'000}, always);
  ASSERT_TRUE(plan);
  EXPECT_EQ(plan->hops.size(), 1u);
  EXPECT_EQ(plan->total_fee, 0);
  EXPECT_EQ(plan->hops[0].amount_to_forward, 20'000);
}

TEST(FindPath, LineAppliesAmountRecurrence) {
  ChannelParams p1{1, 0.0001, 40};
  Network net = make_network({{"v0", "v1", 100'000, {0, 0.0, 18}, {}}, {"v1", "v2", 100'000, p1, {}}});
  auto plan = find_path(net, {0, 2, 30'000}, always);
  ASSERT_TRUE(plan);
  ASSERT_EQ(plan->hops.size(), 2u);
  Satoshi f1 = hop_fee(p1, 30'000);
  EXPECT_EQ(f1, 4);
  EXPECT_EQ(plan->hops[1].fee, f1);
  EXPECT_EQ(plan->hops[1].amount_to_forward, 30'000);
  EXPECT_EQ(plan->hops[0].amount_to_forward, 30'000 + f1);
  EXPECT_EQ(plan->hops[0].cumulative_timelock, 18 + 40);
  EXPECT_EQ(plan->hops[1].cumulative_timelock, 40);
  EXPECT_EQ(plan->total_fee, f1);
}

TEST(FindPath, CapacityFilterAndNoPath) {
  Network net = make_network({{"s", "m", 100'000, {}, {}}, {"m", "r", 10'000, {}, {}}});
  EXPECT_FALSE(find_path(net, {0, 2, 20'000}, always));
  EXPECT_TRUE(find_path(net, {0, 2, 9'000}, always));
}

TEST(FindPath, SenderSkipsFirstHopsItCannotFund) {
  Network net = make_network({{"s", "a", 100'000, {}, {}, 1'000},
                              {"a", "r", 100'000, {}, {}},
                              {"s", "b", 100'000, {}, {}, 90'000},
                              {"b", "r", 100'000, {9, 0.0, 40}, {}}});
  auto plan = find_path(net, {0, net.node_index("r"), 20'000}, always);
  ASSERT_TRUE(plan);
  EXPECT_EQ(net.node_id(plan->hops[0].to).str(), "b");
}

TEST(FindPath, RecentFailureSteersAroundCheaperRoute) {
  // Route via a is 2 sat cheaper, but a's hop failed a minute ago.
  Network net = make_network({{"s", "a", 100'000, {}, {}},
                              {"a", "r", 100'000, {1, 0.0, 40}, {}},
                              {"s", "b", 100'000, {}, {}},
                              {"b", "r", 100'000, {3, 0.0, 40}, {}}});
  NodeIndex s = 0, r = net.node_index("r");
  BeliefStore beliefs;
  DirectedChannel a_r{1, Direction::Forward};
  beliefs.record_failure({s, a_r, ObservationKind::SenderRefusalToLock}, 0.0);
  auto plan = find_path(net, {s, r, 20'000}, beliefs, 1.0);
  ASSERT_TRUE(plan);
  EXPECT_EQ(net.node_id(plan->hops[0].to).str(), "b");

  auto fresh = find_path(net, {s, r, 20'000}, BeliefStore{}, 1.0);
  ASSERT_TRUE(fresh);
  EXPECT_EQ(net.node_id(fresh->hops[0].to).str(), "a");
}

TEST(FindPath, TiesGoToSmallerNextHopId) {
  Network net = make_network({{"s", "z", 100'000, {}, {}},
                              {"z", "r", 100'000, {2, 0.0, 40}, {}},
                              {"s", "m", 100'000, {}, {}},
                              {"m", "r", 100'000, {2, 0.0, 40}, {}}});
  auto plan = find_path(net, {0, net.node_index("r"), 5'000}, always);
  ASSERT_TRUE(plan);
  EXPECT_EQ(net.node_id(plan->hops[0].to).str(), "m");
}

// Independent cost of a fixed route: walk back from the receiver.
struct RouteCost {
  bool feasible = true;
  double cost = 0.0;
};

RouteCost oracle_cost(const Network& net, const std::vector<DirectedChannel>& route, Satoshi amount, double r,
                      double penalty, const std::map<DirectedChannel, double>& probs, bool check_balance) {
  RouteCost rc;
  Satoshi carried = amount;
  double weight = 0.0, product = 1.0;
  for (std::size_t k = route.size(); k-- > 0;) {
    const Channel& ch = net.channel(route[k].channel);
    ChannelParams p = ch.params(route[k].direction);
    if (ch.capacity < carried) rc.feasible = false;
    if (k == 0 && check_balance && ch.balance_of(route[k].direction) < carried) rc.feasible = false;
    Satoshi fee = k == 0 ? 0 : p.base_fee + static_cast<Satoshi>(std::floor(carried * p.fee_rate + 0.5));
    weight += static_cast<double>(carried) * static_cast<double>(p.timelock_delta) * r + static_cast<double>(fee);
    product *= probs.at(route[k]);
    carried += fee;
  }
  rc.cost = weight + penalty / product;
  return rc;
}

void enumerate(const Network& net, NodeIndex at, NodeIndex target, std::vector<bool>& seen,
               std::vector<DirectedChannel>& route, std::vector<std::vector<DirectedChannel>>& out) {
  if (at == target) {
    out.push_back(route);
    return;
  }
  for (ChannelIndex ci : net.incident(at)) {
    const Channel& ch = net.channel(ci);
    Direction d = ch.node1 == at ? Direction::Forward : Direction::Backward;
    NodeIndex next = ch.to(d);
    if (seen[next]) continue;
    seen[next] = true;
    route.push_back({ci, d});
    enumerate(net, next, target, seen, route, out);
    route.pop_back();
    seen[next] = false;
  }
}

struct RandomCase {
  Network net;
  std::map<DirectedChannel, double> probs;
};

RandomCase random_case(std::mt19937_64& rng, bool constant_bias, bool amount_free_weights) {
  std::uniform_int_distribution<int> nodes(4, 8);
  std::uniform_int_distribution<Satoshi> cap(5'000, 200'000), base(0, 20);
  std::uniform_real_distribution<double> rate(0.0, 0.002), unit(0.0, 1.0), prob(0.05, 1.0);
  std::uniform_int_distribution<int> delta_pick(0, 3);
  const Blocks deltas[] = {18, 40, 80, 144};
  int n = nodes(rng);
  std::vector<Edge> edges;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (unit(rng) > 0.45) continue;
      Edge e{"n" + std::to_string(a), "n" + std::to_string(b), cap(rng)};
      auto params = [&] {
        return ChannelParams{base(rng), amount_free_weights ? 0.0 : rate(rng), deltas[delta_pick(rng)]};
      };
      e.ab = params();
      e.ba = params();
      e.balance_ab = std::uniform_int_distribution<Satoshi>(0, e.capacity)(rng);
      edges.push_back(e);
    }
  if (edges.empty()) edges.push_back({"n0", "n1", 100'000});
  RandomCase rc{make_network(edges), {}};
  for (std::size_t c = 0; c < rc.net.channel_count(); ++c)
    for (Direction d : {Direction::Forward, Direction::Backward})
      rc.probs[{static_cast<ChannelIndex>(c), d}] = constant_bias ? 1.0 : prob(rng);
  return rc;
}

void check_against_enumeration(bool constant_bias, bool amount_free_weights, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int compared = 0;
  for (int trial = 0; trial < 400; ++trial) {
    RandomCase rc = random_case(rng, constant_bias, amount_free_weights);
    if (rc.net.node_count() < 2) continue;
    NodeIndex s = 0, r = static_cast<NodeIndex>(rc.net.node_count() - 1);
    Satoshi amount = std::uniform_int_distribution<Satoshi>(1'000, 60'000)(rng);
    double risk = amount_free_weights ? 0.0 : 1.5e-7;
    PathQuery q{s, r, amount, risk, 100.0, true};
    auto plan = find_path(rc.net, q, [&](DirectedChannel h) { return rc.probs.at(h); });

    std::vector<bool> seen(rc.net.node_count(), false);
    seen[s] = true;
    std::vector<DirectedChannel> route;
    std::vector<std::vector<DirectedChannel>> all;
    enumerate(rc.net, s, r, seen, route, all);
    double best = kUnusablePath;
    for (const auto& path : all) {
      RouteCost c = oracle_cost(rc.net, path, amount, risk, 100.0, rc.probs, true);
      if (c.feasible) best = std::min(best, c.cost);
    }

    if (!plan) {
      if (constant_bias && amount_free_weights) EXPECT_EQ(best, kUnusablePath);
      continue;
    }
    std::vector<DirectedChannel> got;
    for (const HopPlan& h : plan->hops) got.push_back(h.channel);
    RouteCost mine = oracle_cost(rc.net, got, amount, risk, 100.0, rc.probs, true);
    ASSERT_TRUE(mine.feasible);
    EXPECT_NEAR(plan->cost, mine.cost, 1e-9 * mine.cost);
    EXPECT_GE(mine.cost, best - 1e-9 * best);
    if (constant_bias && amount_free_weights) EXPECT_NEAR(mine.cost, best, 1e-9 * best);
    for (std::size_t k = 0; k + 1 < plan->hops.size(); ++k)
      EXPECT_EQ(plan->hops[k].amount_to_forward - plan->hops[k + 1].amount_to_forward, plan->hops[k + 1].fee);
    for (const HopPlan& h : plan->hops)
      EXPECT_GE(rc.net.channel(h.channel.channel).capacity, h.amount_to_forward);
    ++compared;
  }
  EXPECT_GT(compared, 100);
}

TEST(FindPathOracle, OptimalWhenCostsAreAdditive) { check_against_enumeration(true, true, 101); }

TEST(FindPathOracle, ReportedCostMatchesRouteAndNeverBeatsEnumeration) {
  check_against_enumeration(false, false, 202);
}

TEST(PlanRoute, MatchesHandRecurrenceOnThreeHops) {
  ChannelParams p1{1, 0.0001, 40}, p2{2, 0.0005, 144};
  Network net = make_network({{"v0", "v1", 1'000'000, {0, 0.0, 18}, {}},
                              {"v1", "v2", 1'000'000, p1, {}},
                              {"v2", "v3", 1'000'000, p2, {}}});
  std::vector<DirectedChannel> route{{0, Direction::Forward}, {1, Direction::Forward}, {2, Direction::Forward}};
  PathPlan plan = plan_route(net, route, 40'000);
  // f_2 = 2 + 20 = 22; alpha_1 = 40'022; f_1 = 1 + round(4.0022) = 5; alpha_0 = 40'027.
  EXPECT_EQ(plan.hops[2].fee, 22);
  EXPECT_EQ(plan.hops[1].amount_to_forward, 40'022);
  EXPECT_EQ(plan.hops[1].fee, 5);
  EXPECT_EQ(plan.hops[0].amount_to_forward, 40'027);
  EXPECT_EQ(plan.hops[0].cumulative_timelock, 18 + 40 + 144);
  EXPECT_EQ(plan.total_fee, 27);
}

}  // namespace
}  // namespace pcn
