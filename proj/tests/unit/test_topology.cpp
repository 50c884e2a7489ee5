#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "pcnsim/topology.hpp"

namespace pcn {
namespace {

const char* kThreeNodes = R"({
  "nodes": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
  "channels": [
    {"id": "ab", "node1": "a", "node2": "b", "capacity_sat": 1000,
     "node1_policy": {"base_fee_sat": 1, "fee_rate": 0.0001, "timelock_delta": 40},
     "node2_policy": {"base_fee_sat": 0, "fee_rate": 0.000002, "timelock_delta": 144}},
    {"id": "bc", "node1": "b", "node2": "c", "capacity_sat": 500,
     "node1_policy": {"base_fee_sat": 2, "fee_rate": 0.0, "timelock_delta": 18},
     "node2_policy": {"base_fee_sat": 1, "fee_rate": 0.001, "timelock_delta": 80}}
  ]
})";

TEST(Ingest, MapsNodesAndChannels) {
  IngestStats stats;
  Network net = ingest_snapshot(kThreeNodes, &stats);
  EXPECT_EQ(net.node_count(), 3u);
  EXPECT_EQ(net.channel_count(), 2u);
  EXPECT_EQ(stats.warnings(), 0u);
  const Channel& ab = net.channel(0);
  EXPECT_EQ(ab.capacity, 1000);
  EXPECT_EQ(ab.params(Direction::Forward), (ChannelParams{1, 0.0001, 40}));
  EXPECT_EQ(ab.params(Direction::Backward), (ChannelParams{0, 0.000002, 144}));
  EXPECT_EQ(net.incident(net.node_index("b")).size(), 2u);
}

TEST(Ingest, DropsChannelWithUnknownEndpoint) {
  IngestStats stats;
  Network net = ingest_snapshot(R"({"nodes":[{"id":"a"},{"id":"b"}],"channels":[
    {"id":"x","node1":"a","node2":"b","capacity_sat":10,"node1_policy":null,"node2_policy":null},
    {"id":"y","node1":"a","node2":"ghost","capacity_sat":10}]})",
                                &stats);
  EXPECT_EQ(net.channel_count(), 1u);
  EXPECT_EQ(stats.unknown_endpoint_channels, 1u);
}

TEST(Ingest, DropsIsolatedNodes) {
  IngestStats stats;
  Network net = ingest_snapshot(R"({"nodes":[{"id":"a"},{"id":"b"},{"id":"lonely"}],"channels":[
    {"id":"x","node1":"a","node2":"b","capacity_sat":10}]})",
                                &stats);
  EXPECT_EQ(net.node_count(), 2u);
  EXPECT_FALSE(net.find_node("lonely"));
  EXPECT_EQ(stats.isolated_nodes, 1u);
}

TEST(Ingest, DuplicatesKeepFirstOccurrence) {
  IngestStats stats;
  Network net = ingest_snapshot(R"({"nodes":[{"id":"a"},{"id":"a"},{"id":"b"}],"channels":[
    {"id":"x","node1":"a","node2":"b","capacity_sat":10},
    {"id":"x","node1":"a","node2":"b","capacity_sat":99}]})",
                                &stats);
  EXPECT_EQ(net.channel_count(), 1u);
  EXPECT_EQ(net.channel(0).capacity, 10);
  EXPECT_EQ(stats.duplicate_nodes, 1u);
  EXPECT_EQ(stats.duplicate_channels, 1u);
}

TEST(Ingest, MalformedDocumentReportsByteOffset) {
  std::string doc = R"({"nodes": [}, "channels": []})";
  try {
    ingest_snapshot(doc);
    FAIL() << "expected a parse error";
  } catch (const SnapshotParseError& e) {
    EXPECT_GT(e.byte_offset(), 0u);
    EXPECT_LE(e.byte_offset(), doc.size());
  }
}

TEST(Ingest, SchemaErrorNamesThePath) {
  try {
    ingest_snapshot(R"({"nodes":[{"id":"a"}],"channels":[{"id":"x","node1":"a"}]})");
    FAIL() << "expected a schema error";
  } catch (const SnapshotParseError&) {
    FAIL() << "schema problems are not syntax errors";
  } catch (const SnapshotError& e) {
    EXPECT_NE(std::string(e.what()).find("$.channels[0]"), std::string::npos);
  }
}

TEST(Ingest, EmptyNetworkIsADistinctError) {
  EXPECT_THROW(ingest_snapshot(R"({"nodes":[{"id":"a"}],"channels":[]})"), EmptyNetworkError);
}

TEST(Ingest, RoundTripThroughSerializedForm) {
  Network net = ingest_snapshot(kThreeNodes);
  Network again = ingest_snapshot(to_snapshot_json(net));
  ASSERT_EQ(again.node_count(), net.node_count());
  ASSERT_EQ(again.channel_count(), net.channel_count());
  for (std::size_t c = 0; c < net.channel_count(); ++c) {
    EXPECT_EQ(again.channel(c).id, net.channel(c).id);
    EXPECT_EQ(again.channel(c).capacity, net.channel(c).capacity);
    EXPECT_EQ(again.channel(c).policy, net.channel(c).policy);
  }
  EXPECT_EQ(to_snapshot_json(again), to_snapshot_json(net));
}

TEST(SampleParams, CompleteNetworkIsUnchanged) {
  Network net = ingest_snapshot(kThreeNodes);
  Network sampled = sample_missing_params(net, 3);
  EXPECT_EQ(to_snapshot_json(sampled), to_snapshot_json(net));
}

TEST(SampleParams, SingleDonorValueIsCopied) {
  Network net = ingest_snapshot(R"({"nodes":[{"id":"a"},{"id":"b"}],"channels":[
    {"id":"x","node1":"a","node2":"b","capacity_sat":10,
     "node1_policy":{"base_fee_sat":1,"fee_rate":0.0001,"timelock_delta":40},
     "node2_policy":{"base_fee_sat":1,"fee_rate":null,"timelock_delta":40}}]})");
  Network sampled = sample_missing_params(net, 11);
  EXPECT_DOUBLE_EQ(*sampled.channel(0).policy[1].fee_rate, 0.0001);
}

TEST(SampleParams, NoCompletePolicyIsAnError) {
  Network net = ingest_snapshot(R"({"nodes":[{"id":"a"},{"id":"b"}],"channels":[
    {"id":"x","node1":"a","node2":"b","capacity_sat":10}]})");
  EXPECT_THROW(sample_missing_params(net, 1), ParamSamplingError);
}

TEST(SampleParams, DeterministicAndDrawnFromDonorPool) {
  SyntheticOptions opts;
  opts.nodes = 80;
  Network net = ingest_snapshot(generate_snapshot(opts, 5));
  std::set<Satoshi> bases;
  std::set<double> rates;
  std::set<Blocks> deltas;
  for (const Channel& ch : net.channels())
    for (const PolicyFields& p : ch.policy) {
      if (p.base_fee) bases.insert(*p.base_fee);
      if (p.fee_rate) rates.insert(*p.fee_rate);
      if (p.timelock_delta) deltas.insert(*p.timelock_delta);
    }
  Network a = sample_missing_params(net, 42);
  Network b = sample_missing_params(net, 42);
  EXPECT_EQ(to_snapshot_json(a), to_snapshot_json(b));
  for (const Channel& ch : a.channels())
    for (const PolicyFields& p : ch.policy) {
      ASSERT_TRUE(p.complete());
      EXPECT_TRUE(bases.count(*p.base_fee));
      EXPECT_TRUE(rates.count(*p.fee_rate));
      EXPECT_TRUE(deltas.count(*p.timelock_delta));
    }
}

TEST(Balances, SplitSumsToCapacityAndIsDeterministic) {
  SyntheticOptions opts;
  opts.nodes = 60;
  Network net = sample_missing_params(ingest_snapshot(generate_snapshot(opts, 9)), 9);
  Network a = initialize_balances(net, 17);
  Network b = initialize_balances(net, 17);
  a.check_invariants();
  for (std::size_t c = 0; c < a.channel_count(); ++c) {
    const Channel& ch = a.channel(c);
    EXPECT_EQ(ch.balance[0] + ch.balance[1], ch.capacity);
    EXPECT_GE(ch.balance[0], 0);
    EXPECT_EQ(ch.balance, b.channel(c).balance);
  }
}

TEST(Balances, TransferConservesCapacityAndRejectsOverdraft) {
  Network net = testing::make_network({{"a", "b", 100, {}, {}, 50}});
  net.transfer({0, Direction::Forward}, 10);
  EXPECT_EQ(net.channel(0).balance, (std::array<Satoshi, 2>{40, 60}));
  EXPECT_THROW(net.transfer({0, Direction::Forward}, 41), std::logic_error);
  net.check_invariants();
}

TEST(Synthetic, SameSeedSameDocument) {
  SyntheticOptions opts;
  opts.nodes = 50;
  EXPECT_EQ(generate_snapshot(opts, 1), generate_snapshot(opts, 1));
  EXPECT_NE(generate_snapshot(opts, 1), generate_snapshot(opts, 2));
}

}  // namespace
}  // namespace pcn
