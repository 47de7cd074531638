// SPDX-License-Identifier: Apache-2.0
#include "itersc/schedule.hpp"

#include <algorithm>
#include <array>
#include <functional>

namespace itersc {

std::string RoundSchedule::str() const {
  std::string s;
  for (const auto& e : events) {
    if (!s.empty()) s += " ";
    s += static_cast<char>(e.kind);
    s += e.group.str();
  }
  return s;
}

nlohmann::json RoundSchedule::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& e : events) arr.push_back({{"kind", std::string(1, static_cast<char>(e.kind))}, {"group", e.group.to_json()}});
  return arr;
}

RoundSchedule RoundSchedule::from_json(const nlohmann::json& j) {
  RoundSchedule s;
  for (const auto& e : j) {
    auto k = e.at("kind").get<std::string>();
    if (k != "W" && k != "S" && k != "R") throw Error(ErrorCode::InvalidSchedule, "unknown event kind " + k);
    s.events.push_back({static_cast<EventKind>(k[0]), ProcessSet::from_json(e.at("group"))});
  }
  return s;
}

Family parse_family(const std::string& s) {
  if (s == "sigma") return Family::Sigma;
  if (s == "partition" || s == "ordered-partition") return Family::Partition;
  throw Error(ErrorCode::InvalidConfiguration, "unknown schedule family " + s);
}

const char* family_name(Family f) { return f == Family::Sigma ? "sigma" : "partition"; }

std::vector<EventKind> model_order(Model m) {
  switch (m) {
    case Model::WOR: return {EventKind::W, EventKind::S, EventKind::R};
    case Model::WRO: return {EventKind::W, EventKind::R, EventKind::S};
    case Model::OWR: return {EventKind::S, EventKind::W, EventKind::R};
  }
  return {};
}

std::string schedule_problem(const RoundSchedule& s, int n, Model m) {
  auto order = model_order(m);
  std::vector<int> progress(static_cast<std::size_t>(n + 1), 0);
  ProcessSet all = ProcessSet::full(n);
  for (const auto& e : s.events) {
    if (e.group.empty()) return "empty group";
    if (!e.group.subset_of(all)) return "group " + e.group.str() + " outside 1.." + std::to_string(n);
    for (int i : e.group.members()) {
      auto& p = progress[static_cast<std::size_t>(i)];
      if (p >= 3) return "process " + std::to_string(i) + " has too many events";
      if (order[static_cast<std::size_t>(p)] != e.kind)
        return "process " + std::to_string(i) + " runs " + std::string(1, static_cast<char>(e.kind)) + " out of model order";
      ++p;
    }
  }
  for (int i = 1; i <= n; ++i)
    if (progress[static_cast<std::size_t>(i)] != 3) return "process " + std::to_string(i) + " misses events";
  return {};
}

void validate_schedule(const RoundSchedule& s, int n, Model m) {
  auto p = schedule_problem(s, n, m);
  if (!p.empty()) throw Error(ErrorCode::InvalidSchedule, p);
}

RoundSchedule sigma_schedule(const Sigma& groups, int n, Model m) {
  ProcessSet used;
  for (auto g : groups) {
    if (g.empty()) throw Error(ErrorCode::InvalidSchedule, "empty sigma group");
    if (!g.subset_of(ProcessSet::full(n))) throw Error(ErrorCode::InvalidSchedule, "sigma group outside 1..n");
    if (g.intersects(used)) throw Error(ErrorCode::InvalidSchedule, "sigma groups overlap");
    used = used | g;
  }
  Sigma all = groups;
  ProcessSet rest = ProcessSet::full(n) - used;
  if (!rest.empty()) all.push_back(rest);
  RoundSchedule s;
  if (m == Model::WRO) {
    for (auto g : all) {
      s.events.push_back({EventKind::W, g});
      s.events.push_back({EventKind::R, g});
    }
    s.events.push_back({EventKind::S, ProcessSet::full(n)});
    return s;
  }
  auto order = model_order(m);
  for (auto g : all)
    for (auto k : order) s.events.push_back({k, g});
  return s;
}

Sigma canonical_sigma(const Sigma& groups, int n) {
  Sigma out;
  ProcessSet used;
  for (auto g : groups) {
    if (g.empty()) continue;
    out.push_back(g);
    used = used | g;
  }
  if (!out.empty() && used == ProcessSet::full(n)) out.pop_back();
  return out;
}

std::string sigma_str(const Sigma& groups) {
  std::string s = "<";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i) s += ",";
    s += groups[i].str();
  }
  return s + ">";
}

std::vector<Sigma> enumerate_sigmas(int n) {
  // ordered set partitions of 1..n; the last block is the complement
  std::vector<Sigma> out;
  Sigma cur;
  std::function<void(ProcessSet)> rec = [&](ProcessSet rest) {
    if (rest.empty()) {
      Sigma s(cur.begin(), cur.end() - 1);
      out.push_back(s);
      return;
    }
    std::uint32_t r = rest.bits();
    std::vector<std::uint32_t> subs;
    for (std::uint32_t sub = r; sub; sub = (sub - 1) & r) subs.push_back(sub);
    std::sort(subs.begin(), subs.end(), [](std::uint32_t a, std::uint32_t b) { return ProcessSet(a) < ProcessSet(b); });
    for (auto sub : subs) {
      cur.push_back(ProcessSet(sub));
      rec(rest - ProcessSet(sub));
      cur.pop_back();
    }
  };
  rec(ProcessSet::full(n));
  return out;
}

std::vector<RoundSchedule> enumerate_round_schedules(int n, Model m, Family f, std::size_t budget) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  if (n > 6) throw Error(ErrorCode::BudgetExceeded, "exhaustive schedule families are limited to n <= 6");
  std::vector<RoundSchedule> out;
  if (f == Family::Sigma) {
    for (const auto& s : enumerate_sigmas(n)) {
      out.push_back(sigma_schedule(s, n, m));
      if (out.size() > budget) throw Error(ErrorCode::BudgetExceeded, "schedule budget exhausted");
    }
    return out;
  }
  auto order = model_order(m);
  std::array<int, 32> progress{};
  RoundSchedule cur;
  std::function<void()> rec = [&]() {
    bool done = true;
    for (int i = 1; i <= n; ++i)
      if (progress[static_cast<std::size_t>(i)] < 3) done = false;
    if (done) {
      out.push_back(cur);
      if (out.size() > budget) throw Error(ErrorCode::BudgetExceeded, "schedule budget exhausted");
      return;
    }
    for (EventKind k : {EventKind::W, EventKind::S, EventKind::R}) {
      if (k != EventKind::S && !cur.events.empty() && cur.events.back().kind == k) continue;
      ProcessSet eligible;
      for (int i = 1; i <= n; ++i) {
        int p = progress[static_cast<std::size_t>(i)];
        if (p < 3 && order[static_cast<std::size_t>(p)] == k) eligible.insert(i);
      }
      std::uint32_t e = eligible.bits();
      std::vector<std::uint32_t> subs;
      for (std::uint32_t sub = e; sub; sub = (sub - 1) & e) subs.push_back(sub);
      std::sort(subs.begin(), subs.end());
      for (auto sub : subs) {
        ProcessSet g(sub);
        for (int i : g.members()) ++progress[static_cast<std::size_t>(i)];
        cur.events.push_back({k, g});
        rec();
        cur.events.pop_back();
        for (int i : g.members()) --progress[static_cast<std::size_t>(i)];
      }
    }
  };
  rec();
  return out;
}

RoundSchedule random_schedule(int n, Model m, Family f, std::mt19937_64& rng) {
  if (f == Family::Sigma) {
    // random ordered partition: random block labels, compressed
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<ProcessSet> blocks(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) blocks[static_cast<std::size_t>(pick(rng))].insert(i);
    Sigma s;
    for (auto b : blocks)
      if (!b.empty()) s.push_back(b);
    return sigma_schedule(canonical_sigma(s, n), n, m);
  }
  auto order = model_order(m);
  std::vector<int> progress(static_cast<std::size_t>(n + 1), 0);
  RoundSchedule s;
  std::bernoulli_distribution coin(0.5);
  for (;;) {
    std::vector<EventKind> kinds;
    std::array<ProcessSet, 3> elig{};
    int idx = 0;
    for (EventKind k : {EventKind::W, EventKind::S, EventKind::R}) {
      for (int i = 1; i <= n; ++i) {
        int p = progress[static_cast<std::size_t>(i)];
        if (p < 3 && order[static_cast<std::size_t>(p)] == k) elig[static_cast<std::size_t>(idx)].insert(i);
      }
      if (!elig[static_cast<std::size_t>(idx)].empty()) kinds.push_back(k);
      ++idx;
    }
    if (kinds.empty()) break;
    std::uniform_int_distribution<std::size_t> pk(0, kinds.size() - 1);
    EventKind k = kinds[pk(rng)];
    ProcessSet e = elig[k == EventKind::W ? 0 : (k == EventKind::S ? 1 : 2)];
    ProcessSet g;
    auto mem = e.members();
    for (int i : mem)
      if (coin(rng)) g.insert(i);
    if (g.empty()) {
      std::uniform_int_distribution<std::size_t> pi(0, mem.size() - 1);
      g.insert(mem[pi(rng)]);
    }
    for (int i : g.members()) ++progress[static_cast<std::size_t>(i)];
    if (k != EventKind::S && !s.events.empty() && s.events.back().kind == k)
      s.events.back().group = s.events.back().group | g;
    else
      s.events.push_back({k, g});
  }
  return s;
}

}  // namespace itersc
