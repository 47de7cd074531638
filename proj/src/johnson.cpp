// SPDX-License-Identifier: Apache-2.0
#include "itersc/johnson.hpp"

#include <algorithm>
#include <functional>
#include <random>

namespace itersc {

namespace {

bool vertex_less(ProcessSet a, ProcessSet b) { return a.members() < b.members(); }

}  // namespace

VertexSet::VertexSet(int n_, int m_, std::vector<ProcessSet> vs) : n(n_), m(m_), vertices(std::move(vs)) {
  if (m < 1 || m > n) throw Error(ErrorCode::DomainError, "vertex size outside 1..n");
  for (auto v : vertices)
    if (v.size() != m || !v.subset_of(ProcessSet::full(n)))
      throw Error(ErrorCode::DomainError, "vertex " + v.str() + " is not an m-subset of 1..n");
  std::sort(vertices.begin(), vertices.end(), vertex_less);
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
}

bool VertexSet::contains(ProcessSet v) const {
  return std::binary_search(vertices.begin(), vertices.end(), v, vertex_less);
}

ProcessSet VertexSet::union_all() const {
  ProcessSet s;
  for (auto v : vertices) s = s | v;
  return s;
}

nlohmann::json VertexSet::to_json() const {
  auto arr = nlohmann::json::array();
  for (auto v : vertices) arr.push_back(v.to_json());
  return arr;
}

bool johnson_adjacent(ProcessSet a, ProcessSet b, int m) { return (a & b).size() == m - 1 && !(a == b); }

VertexSet zeta(const VertexSet& u) {
  if (u.m >= u.n) throw Error(ErrorCode::DomainError, "zeta needs m < n");
  std::vector<ProcessSet> out;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j)
      if (johnson_adjacent(u.vertices[i], u.vertices[j], u.m)) out.push_back(u.vertices[i] | u.vertices[j]);
  return VertexSet(u.n, u.m + 1, std::move(out));
}

VertexSet zeta_iter(const VertexSet& u, int v) {
  if (v < 0 || v > u.n - u.m) throw Error(ErrorCode::DomainError, "iterate count outside 0..n-m");
  VertexSet cur = u;
  for (int k = 0; k < v; ++k) cur = zeta(cur);
  return cur;
}

std::vector<VertexSet> components(const VertexSet& u) {
  std::vector<int> comp(u.size(), -1);
  int c = 0;
  for (std::size_t s = 0; s < u.size(); ++s) {
    if (comp[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    comp[s] = c;
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      for (std::size_t y = 0; y < u.size(); ++y)
        if (comp[y] < 0 && johnson_adjacent(u.vertices[x], u.vertices[y], u.m)) {
          comp[y] = c;
          stack.push_back(y);
        }
    }
    ++c;
  }
  std::vector<VertexSet> out;
  for (int k = 0; k < c; ++k) {
    std::vector<ProcessSet> vs;
    for (std::size_t s = 0; s < u.size(); ++s)
      if (comp[s] == k) vs.push_back(u.vertices[s]);
    out.emplace_back(u.n, u.m, std::move(vs));
  }
  return out;
}

bool is_connected(const VertexSet& u) { return components(u).size() <= 1; }

bool verify_union_bound(const VertexSet& u) {
  if (u.empty() || !is_connected(u)) throw Error(ErrorCode::PreconditionViolation, "union bound needs a connected nonempty set");
  return u.union_all().size() <= u.m - 1 + static_cast<int>(u.size());
}

std::pair<ProcessSet, ProcessSet> partition_two_blocks(const VertexSet& u) {
  if (u.m != 2) throw Error(ErrorCode::DomainError, "partition lemma is about 2-subsets");
  if (u.n < 2) throw Error(ErrorCode::DomainError, "need n >= 2");
  if (static_cast<int>(u.size()) > u.n - 2) throw Error(ErrorCode::PreconditionViolation, "more than n-2 vertices");
  ProcessSet all = ProcessSet::full(u.n);
  ProcessSet uncovered = all - u.union_all();
  if (!uncovered.empty()) {
    ProcessSet b = ProcessSet::single(uncovered.max());
    return {all - b, b};
  }
  auto comps = components(u);
  ProcessSet a = comps.front().union_all();  // vertices are sorted, so this holds the least vertex
  return {a, all - a};
}

bool check_partition(const VertexSet& u, ProcessSet a, ProcessSet b) {
  ProcessSet all = ProcessSet::full(u.n);
  if (a.empty() || b.empty() || a.intersects(b) || !((a | b) == all)) return false;
  for (auto v : u.vertices)
    if (!v.subset_of(a) && !v.subset_of(b)) return false;
  return true;
}

std::vector<ProcessSet> all_vertices(int n, int m) {
  std::vector<ProcessSet> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    ProcessSet s(mask << 1);
    if (s.size() == m) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), vertex_less);
  return out;
}

std::vector<VertexSet> subsets_up_to(int n, int m, int k) {
  auto verts = all_vertices(n, m);
  std::vector<VertexSet> out;
  std::vector<ProcessSet> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    out.emplace_back(n, m, cur);
    if (static_cast<int>(cur.size()) == k) return;
    for (std::size_t i = start; i < verts.size(); ++i) {
      cur.push_back(verts[i]);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

nlohmann::json VanishReport::to_json() const {
  auto ce = nlohmann::json::array();
  for (const auto& c : counterexamples) ce.push_back(c.to_json());
  nlohmann::json j = {{"n", n},
                      {"m", m},
                      {"mode", mode == SampleMode::Exhaustive ? "exhaustive" : "sampled"},
                      {"checked", checked},
                      {"max_size", n - m},
                      {"counterexamples", ce}};
  j["survivor_witness"] = survivor ? survivor->to_json() : nlohmann::json(nullptr);
  return j;
}

VanishReport verify_zeta_vanishing(int n, int m, SampleMode mode, std::uint64_t samples, std::uint64_t seed) {
  if (n < 2 || m < 1 || m > n) throw Error(ErrorCode::DomainError, "need 1 <= m <= n");
  VanishReport rep;
  rep.n = n;
  rep.m = m;
  rep.mode = mode;
  const int k = n - m;
  auto vanishes = [&](const VertexSet& u) { return zeta_iter(u, k).empty(); };
  if (mode == SampleMode::Exhaustive) {
    if (n > 8) throw Error(ErrorCode::BudgetExceeded, "exhaustive vanishing check is limited to n <= 8");
    std::uint64_t count = 0;
    for (int s = 0; s <= k; ++s) count += binomial(static_cast<int>(binomial(n, m)), s);
    if (count > 5000000) throw Error(ErrorCode::BudgetExceeded, "too many candidate sets");
    for (const auto& u : subsets_up_to(n, m, k)) {
      ++rep.checked;
      if (!vanishes(u)) rep.counterexamples.push_back(u);
    }
  } else {
    std::mt19937_64 rng(seed);
    auto verts = all_vertices(n, m);
    for (std::uint64_t t = 0; t < samples; ++t) {
      int size = static_cast<int>(t % static_cast<std::uint64_t>(k + 1));
      size = std::min<int>(size, static_cast<int>(verts.size()));
      std::vector<ProcessSet> pick = verts;
      std::shuffle(pick.begin(), pick.end(), rng);
      pick.resize(static_cast<std::size_t>(size));
      VertexSet u(n, m, pick);
      ++rep.checked;
      if (!vanishes(u)) rep.counterexamples.push_back(u);
    }
  }
  // a chain {1..m},{2..m+1},... of n-m+1 vertices survives n-m iterations
  if (k >= 1) {
    std::vector<ProcessSet> chain;
    for (int s = 1; s + m - 1 <= n; ++s) {
      ProcessSet v;
      for (int i = s; i < s + m; ++i) v.insert(i);
      chain.push_back(v);
    }
    VertexSet c(n, m, chain);
    if (!zeta_iter(c, k).empty()) rep.survivor = c;
  }
  return rep;
}

}  // namespace itersc
