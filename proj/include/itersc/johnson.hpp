// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "itersc/common.hpp"

namespace itersc {

// A set of m-subsets of 1..n, kept sorted and duplicate-free.
struct VertexSet {
  int n = 0;
  int m = 0;
  std::vector<ProcessSet> vertices;

  VertexSet() = default;
  VertexSet(int n_, int m_, std::vector<ProcessSet> vs);
  std::size_t size() const { return vertices.size(); }
  bool empty() const { return vertices.empty(); }
  bool contains(ProcessSet v) const;
  ProcessSet union_all() const;
  nlohmann::json to_json() const;
  friend bool operator==(const VertexSet&, const VertexSet&) = default;
};

bool johnson_adjacent(ProcessSet a, ProcessSet b, int m);

VertexSet zeta(const VertexSet& u);
VertexSet zeta_iter(const VertexSet& u, int v);
std::vector<VertexSet> components(const VertexSet& u);
bool is_connected(const VertexSet& u);
bool verify_union_bound(const VertexSet& u);

// A, B partition of 1..n with every vertex of U inside A or inside B.
std::pair<ProcessSet, ProcessSet> partition_two_blocks(const VertexSet& u);
// Independent check used by tests: nonempty, disjoint, covering, boxes contained.
bool check_partition(const VertexSet& u, ProcessSet a, ProcessSet b);

enum class SampleMode { Exhaustive, Sampled };

struct VanishReport {
  int n = 0;
  int m = 0;
  SampleMode mode = SampleMode::Exhaustive;
  std::uint64_t checked = 0;
  std::vector<VertexSet> counterexamples;
  std::optional<VertexSet> survivor;  // a set of size n-m+1 whose iterate is nonempty
  nlohmann::json to_json() const;
};

VanishReport verify_zeta_vanishing(int n, int m, SampleMode mode, std::uint64_t samples = 10000, std::uint64_t seed = 7);

// Every subset of V_{n,m} of size at most k, in a fixed order.
std::vector<VertexSet> subsets_up_to(int n, int m, int k);
std::vector<ProcessSet> all_vertices(int n, int m);

}  // namespace itersc
