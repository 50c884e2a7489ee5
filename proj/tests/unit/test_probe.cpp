#include <gtest/gtest.h>

#include <cmath>

#include "pcnsim/probe.hpp"

namespace pcn {
namespace {

ProbeScenario scenario(Satoshi capacity, Satoshi balance, FeeModel model = FeeModel::ModGuaranteed) {
  ProbeScenario s;
  s.capacity = capacity;
  s.balance = balance;
  s.fee_model = model;
  s.seed = 5;
  return s;
}

TEST(Probe, SmallCapacityWalkthrough) {
  ProbeResult r = binary_search_balance(scenario(8, 5));
  EXPECT_EQ(r.low, 5);
  EXPECT_EQ(r.high, 6);
  EXPECT_EQ(r.iterations, 3u);
}

TEST(Probe, EmptyChannel) {
  ProbeResult r = binary_search_balance(scenario(8, 0));
  EXPECT_EQ(r.low, 0);
  EXPECT_EQ(r.high, 1);
}

TEST(Probe, GranularityStopsEarly) {
  ProbeResult r = binary_search_balance(scenario(1'000'000, 333'333), 1000);
  EXPECT_LE(r.high - r.low, 1000);
  EXPECT_LE(r.low, 333'333);
  EXPECT_GT(r.high, 333'333);
  EXPECT_THROW(binary_search_balance(scenario(10, 1), 0), std::invalid_argument);
}

TEST(Probe, ExhaustiveSmallCapacities) {
  for (Satoshi cap : {1, 2, 7, 64, 255, 256}) {
    double bits = std::log2(static_cast<double>(cap + 1));
    for (Satoshi b = 0; b <= cap; ++b) {
      ProbeResult r = binary_search_balance(scenario(cap, b));
      ASSERT_EQ(r.low, b) << "C=" << cap;
      ASSERT_EQ(r.high, b + 1) << "C=" << cap;
      EXPECT_GE(r.iterations, static_cast<std::size_t>(std::floor(bits)));
      EXPECT_LE(r.iterations, static_cast<std::size_t>(std::ceil(bits)));
    }
  }
}

TEST(Probe, OriginalModelIsFree) {
  for (Satoshi b : {0, 1'000'000, 4'600'000}) EXPECT_EQ(binary_search_balance(scenario(4'600'000, b, FeeModel::Original)).total_cost, 0);
}

TEST(Probe, GuaranteedCostIsRoundedCollateral) {
  ProbeScenario s = scenario(4'600'000, 4'600'000);
  ProbeSession session(s);
  ProbeOutcome o = session.probe_once(1'000'000);
  ASSERT_TRUE(o.locked);
  EXPECT_EQ(o.fee, 101);
  EXPECT_EQ(o.cost, 22);  // c = 144 * 1e6 * 1.5e-7 = 21.6
  ProbeOutcome refused = ProbeSession(scenario(4'600'000, 10)).probe_once(1'000'000);
  EXPECT_FALSE(refused.locked);
  EXPECT_EQ(refused.cost, 0);
}

TEST(Probe, CostCurveIsDeterministicAndWindowed) {
  ProbeScenario s = scenario(4'600'000, 0);
  std::vector<Satoshi> bs = even_balances(4'600'000, 5);
  EXPECT_EQ(bs, (std::vector<Satoshi>{0, 1'150'000, 2'300'000, 3'450'000, 4'600'000}));
  auto a = cost_curve(s, bs), b = cost_curve(s, bs);
  EXPECT_EQ(cost_curve_csv(a), cost_curve_csv(b));
  // Points are 1.15M apart so each window holds only the point itself.
  for (const CostPoint& p : a) EXPECT_DOUBLE_EQ(p.window_mean_cost, static_cast<double>(p.cost));
  EXPECT_EQ(a.front().cost, 0);
  EXPECT_GT(a.back().cost, 0);
}

TEST(Probe, ScenarioValidation) {
  EXPECT_THROW(binary_search_balance(scenario(10, 11)), std::invalid_argument);
  EXPECT_THROW(ProbeSession(scenario(10, 5)).probe_once(11), std::invalid_argument);
}

}  // namespace
}  // namespace pcn
