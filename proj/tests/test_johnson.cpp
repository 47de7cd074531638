// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "itersc/johnson.hpp"

using namespace itersc;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

VertexSet vs(int n, int m, std::vector<ProcessSet> v) { return VertexSet(n, m, std::move(v)); }

bool subset(const VertexSet& a, const VertexSet& b) {
  for (auto v : a.vertices)
    if (!b.contains(v)) return false;
  return true;
}

}  // namespace

TEST(VertexSet, CanonicalAndValidated) {
  auto u = vs(4, 2, {{3, 4}, {1, 2}, {3, 4}});
  EXPECT_EQ(u.size(), 2u);
  EXPECT_EQ(u.vertices[0], (ProcessSet{1, 2}));
  EXPECT_EQ(code_of([] { vs(4, 2, {{1, 2, 3}}); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { vs(3, 2, {{3, 4}}); }), ErrorCode::DomainError);
}

TEST(Adjacency, SymmetricIrreflexiveJohnsonRule) {
  for (int n = 2; n <= 6; ++n)
    for (int m = 1; m <= n; ++m) {
      auto all = all_vertices(n, m);
      for (auto a : all)
        for (auto b : all) {
          EXPECT_EQ(johnson_adjacent(a, b, m), johnson_adjacent(b, a, m));
          EXPECT_EQ(johnson_adjacent(a, b, m), (a & b).size() == m - 1 && !(a == b));
        }
      for (auto a : all) EXPECT_FALSE(johnson_adjacent(a, a, m));
    }
}

TEST(Zeta, Examples) {
  EXPECT_EQ(zeta(vs(3, 2, {{1, 2}, {2, 3}})), vs(3, 3, {{1, 2, 3}}));
  EXPECT_TRUE(zeta(vs(4, 2, {{1, 2}})).empty());
  EXPECT_TRUE(zeta(vs(4, 2, {{1, 2}, {3, 4}})).empty());
  EXPECT_EQ(code_of([] { zeta(vs(3, 3, {{1, 2, 3}})); }), ErrorCode::DomainError);
}

TEST(ZetaIter, Examples) {
  auto u = vs(4, 2, {{1, 2}, {2, 3}, {3, 4}});
  EXPECT_EQ(zeta_iter(u, 0), u);
  EXPECT_EQ(zeta_iter(u, 1), vs(4, 3, {{1, 2, 3}, {2, 3, 4}}));
  EXPECT_EQ(zeta_iter(u, 2), vs(4, 4, {{1, 2, 3, 4}}));
  EXPECT_TRUE(zeta_iter(vs(4, 2, {{1, 2}, {2, 3}}), 2).empty());
  EXPECT_EQ(code_of([&] { zeta_iter(u, 3); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([&] { zeta_iter(u, -1); }), ErrorCode::DomainError);
}

TEST(Components, Examples) {
  EXPECT_TRUE(components(vs(3, 2, {})).empty());
  EXPECT_EQ(components(vs(3, 2, {{1, 2}, {2, 3}})).size(), 1u);
  EXPECT_EQ(components(vs(4, 2, {{1, 2}, {3, 4}})).size(), 2u);
}

TEST(UnionBound, Examples) {
  EXPECT_TRUE(verify_union_bound(vs(4, 2, {{1, 2}})));
  EXPECT_TRUE(verify_union_bound(vs(4, 2, {{1, 2}, {2, 3}, {3, 4}})));
  EXPECT_EQ(code_of([] { verify_union_bound(vs(4, 2, {{1, 2}, {3, 4}})); }), ErrorCode::PreconditionViolation);
}

TEST(UnionBound, AllConnectedSetsSmallN) {
  for (int n = 2; n <= 5; ++n)
    for (int m = 1; m <= n; ++m)
      for (const auto& u : subsets_up_to(n, m, 4))
        if (!u.empty() && is_connected(u)) EXPECT_TRUE(verify_union_bound(u));
}

TEST(PartitionTwoBlocks, Examples) {
  auto [a, b] = partition_two_blocks(vs(4, 2, {{1, 2}, {3, 4}}));
  EXPECT_EQ(a, (ProcessSet{1, 2}));
  EXPECT_EQ(b, (ProcessSet{3, 4}));
  auto [a3, b3] = partition_two_blocks(vs(3, 2, {}));
  EXPECT_EQ(a3, (ProcessSet{1, 2}));
  EXPECT_EQ(b3, (ProcessSet{3}));
  EXPECT_EQ(code_of([] { partition_two_blocks(vs(4, 2, {{1, 2}, {2, 3}, {3, 4}})); }), ErrorCode::PreconditionViolation);
  EXPECT_EQ(code_of([] { partition_two_blocks(vs(4, 3, {})); }), ErrorCode::DomainError);
}

TEST(PartitionTwoBlocks, ExhaustiveUpToSix) {
  for (int n = 2; n <= 6; ++n)
    for (const auto& u : subsets_up_to(n, 2, n - 2)) {
      auto [a, b] = partition_two_blocks(u);
      EXPECT_TRUE(check_partition(u, a, b)) << u.to_json().dump();
    }
}

TEST(CheckPartition, RejectsBadSplits) {
  auto u = vs(4, 2, {{1, 2}, {3, 4}});
  EXPECT_TRUE(check_partition(u, ProcessSet{1, 2}, ProcessSet{3, 4}));
  EXPECT_FALSE(check_partition(u, ProcessSet{1, 3}, ProcessSet{2, 4}));
  EXPECT_FALSE(check_partition(u, ProcessSet{1, 2}, ProcessSet{3}));
  EXPECT_FALSE(check_partition(u, ProcessSet{1, 2, 3}, ProcessSet{3, 4}));
  EXPECT_FALSE(check_partition(u, ProcessSet{}, ProcessSet::full(4)));
}

TEST(ZetaProperties, MonotoneInInclusion) {
  for (int n = 3; n <= 5; ++n)
    for (int m = 1; m < n; ++m) {
      auto sets = subsets_up_to(n, m, 3);
      for (const auto& u : sets)
        for (const auto& w : sets)
          if (subset(u, w)) EXPECT_TRUE(subset(zeta(u), zeta(w)));
    }
}

TEST(ZetaProperties, UnionShrinks) {
  for (int n = 3; n <= 5; ++n)
    for (int m = 1; m < n; ++m)
      for (const auto& u : subsets_up_to(n, m, 3))
        for (int v = 0; v <= n - m; ++v) EXPECT_TRUE(zeta_iter(u, v).union_all().subset_of(u.union_all()));
}

TEST(ZetaProperties, ConnectivityPreserved) {
  for (int n = 3; n <= 5; ++n)
    for (int m = 1; m < n; ++m)
      for (const auto& u : subsets_up_to(n, m, 4)) {
        if (u.size() <= 1 || !is_connected(u)) continue;
        auto z = zeta(u);
        EXPECT_TRUE(is_connected(z)) << u.to_json().dump();
        EXPECT_EQ(z.union_all(), u.union_all()) << u.to_json().dump();
      }
}

TEST(ZetaProperties, SmallConnectedSetsDoNotCover) {
  for (int n = 2; n <= 5; ++n)
    for (int m = 1; m <= n; ++m)
      for (const auto& u : subsets_up_to(n, m, n - m)) {
        if (u.empty() || !is_connected(u)) continue;
        EXPECT_NE(u.union_all(), ProcessSet::full(n)) << u.to_json().dump();
      }
}

TEST(Vanishing, Examples) {
  auto r3 = verify_zeta_vanishing(3, 2, SampleMode::Exhaustive);
  EXPECT_EQ(r3.checked, 4u);
  EXPECT_TRUE(r3.counterexamples.empty());
  auto r4 = verify_zeta_vanishing(4, 2, SampleMode::Exhaustive);
  EXPECT_EQ(r4.checked, 22u);
  EXPECT_TRUE(r4.counterexamples.empty());
  ASSERT_TRUE(r4.survivor.has_value());
  EXPECT_EQ(*r4.survivor, vs(4, 2, {{1, 2}, {2, 3}, {3, 4}}));
  EXPECT_EQ(code_of([] { verify_zeta_vanishing(20, 2, SampleMode::Exhaustive); }), ErrorCode::BudgetExceeded);
  auto j = r4.to_json();
  for (const char* k : {"n", "m", "mode", "checked", "counterexamples"}) EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Vanishing, SampledSmoke) {
  auto r = verify_zeta_vanishing(8, 3, SampleMode::Sampled, 10000, 7);
  EXPECT_EQ(r.checked, 10000u);
  EXPECT_TRUE(r.counterexamples.empty());
}
