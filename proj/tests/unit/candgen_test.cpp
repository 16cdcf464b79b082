#include <random>

#include <gtest/gtest.h>

#include "sidekick/candgen.hpp"
#include "testkit.hpp"

namespace sidekick {
namespace {

const std::vector<std::pair<double, double>> kSixCustomers = {{0, 0}, {10, 2}, {4, 9}, {-6, 5}, {-3, -8}, {7, -6}, {12, 11}};

TEST(Candgen, AllEligibleSixCustomersGives43Nodes) {
  const auto s = testkit::make_setup(testkit::instance_from(kSixCustomers), VariantConfig::fstsp());
  EXPECT_EQ(default_k(s.instance), 7);
  EXPECT_EQ(s.graph.size(), 43);
  EXPECT_EQ(s.graph.k(), 7);
}

TEST(Candgen, OneTruckOnlyCustomerGives37Nodes) {
  const auto s = testkit::make_setup(testkit::instance_from(kSixCustomers, {4}), VariantConfig::vrpd_sacramento(3));
  EXPECT_EQ(s.graph.size(), 37);
  EXPECT_FALSE(s.graph.eligible(4));
  EXPECT_EQ(s.graph.members(4).size(), 1u);
}

TEST(Candgen, SingleCustomerUsesTheDepotCopy) {
  const auto s = testkit::make_setup(testkit::instance_from({{0, 0}, {1, 1}}), VariantConfig::fstsp(), 10, 2);
  ASSERT_EQ(s.graph.size(), 3);
  EXPECT_EQ(s.graph.nodes[2].role, NodeRole::kCandidateCopy);
  EXPECT_EQ(s.graph.nodes[2].location, 0);
  EXPECT_EQ(s.graph.nodes[2].color, 1);
}

TEST(Candgen, KBeyondPoolIsRejected) {
  const Instance inst = testkit::instance_from({{0, 0}, {1, 1}, {2, 0}});
  const auto dm = build_distance_model(inst, VariantConfig::fstsp(), 10);
  EXPECT_THROW(expand_candidates(inst, dm, VariantConfig::fstsp(), 4), ConfigError);
  EXPECT_NO_THROW(expand_candidates(inst, dm, VariantConfig::fstsp(), 3));
}

TEST(Candgen, NearestPoolWithIdTieBreak) {
  // Locations 2 and 3 are equidistant from customer 1, both nearer than the depot.
  const auto s = testkit::make_setup(testkit::instance_from({{0, 0}, {5, 0}, {5, 3}, {5, -3}, {20, 0}}),
                                     VariantConfig::fstsp(), 10, 3);
  const auto m = s.graph.members(1);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(s.graph.nodes[static_cast<std::size_t>(m[0])].role, NodeRole::kCustomerSelf);
  EXPECT_EQ(s.graph.nodes[static_cast<std::size_t>(m[1])].location, 2);
  EXPECT_EQ(s.graph.nodes[static_cast<std::size_t>(m[2])].location, 3);
}

TEST(Candgen, StructuralInvariantsOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 9;
    const auto s = testkit::make_setup(testkit::random_instance(rng, n), VariantConfig::fstsp());
    const int k = default_k(s.instance);
    EXPECT_EQ(s.graph.size(), 1 + n * k);
    for (int c = 1; c <= n; ++c) {
      int selves = 0;
      for (int node : s.graph.members(c)) {
        const CandidateNode& cn = s.graph.nodes[static_cast<std::size_t>(node)];
        if (cn.role == NodeRole::kCustomerSelf) {
          ++selves;
          EXPECT_EQ(cn.location, c);
        } else {
          EXPECT_NE(cn.location, c);
        }
      }
      EXPECT_EQ(selves, 1);
    }
    for (int a = 0; a < s.graph.size(); ++a) {
      for (int b = 0; b < s.graph.size(); ++b) {
        EXPECT_EQ(s.graph.distance(a, b), s.dm.truck_ticks(s.graph.nodes[static_cast<std::size_t>(a)].location,
                                                           s.graph.nodes[static_cast<std::size_t>(b)].location));
      }
    }
  }
}

TEST(Candgen, AllowLoopDoublesCopies) {
  VariantConfig cfg = VariantConfig::fstsp();
  cfg.loop = LoopPolicy::kAllow;
  const auto s = testkit::make_setup(testkit::instance_from({{0, 0}, {1, 1}, {2, 0}}), cfg, 10, 3);
  EXPECT_EQ(s.graph.members(1).size(), 5u);
}

TEST(Candgen, GraphOnlyDistanceModelReproducesTicks) {
  const auto s = testkit::make_setup(testkit::instance_from(kSixCustomers), VariantConfig::fstsp());
  const DistanceModel dm = distance_model_from_graph(s.graph, s.config, 10);
  for (int i = 0; i <= 6; ++i) {
    for (int j = 0; j <= 6; ++j) EXPECT_EQ(dm.truck_ticks(i, j), s.dm.truck_ticks(i, j));
  }
  for (int c = 1; c <= 6; ++c) {
    for (int node : s.graph.members(c)) {
      const int loc = s.graph.nodes[static_cast<std::size_t>(node)].location;
      EXPECT_EQ(dm.drone_ticks(loc, c), s.dm.drone_ticks(loc, c));
    }
  }
}

}  // namespace
}  // namespace sidekick
