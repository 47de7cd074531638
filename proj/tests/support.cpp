// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <map>
#include <random>

namespace itersc::testing {

namespace {

RoundSchedule only(const RoundSchedule& s, bool invoke) {
  RoundSchedule out;
  for (const auto& e : s.events)
    if ((e.kind == EventKind::S) == invoke) out.events.push_back(e);
  return out;
}

RoundSchedule join(const RoundSchedule& a, const RoundSchedule& b) {
  RoundSchedule out = a;
  out.events.insert(out.events.end(), b.events.begin(), b.events.end());
  return out;
}

RoundSchedule concurrent_write_read(int n) {
  return {{{EventKind::W, ProcessSet::full(n)}, {EventKind::R, ProcessSet::full(n)}}};
}

RoundSchedule concurrent_invoke(int n) { return {{{EventKind::S, ProcessSet::full(n)}}}; }

}  // namespace

ShiftReport check_transform_shift(const ProtocolAutomaton& src, int n, int runs, std::uint64_t seed) {
  const bool from_wro = src.model == Model::WRO;
  auto dst = from_wro ? transform_wro_to_owr(src) : transform_owr_to_wro(src);
  ShiftReport rep;
  std::mt19937_64 rng(seed);
  const int L = (src.round_budget > 0 ? src.round_budget : 3) + 1;
  for (int run = 0; run < runs; ++run) {
    std::vector<int> in(static_cast<std::size_t>(n));
    for (auto& v : in) v = static_cast<int>(rng() % 3);
    std::vector<RoundSchedule> pi;
    Family fam = run % 2 ? Family::Sigma : Family::Partition;
    for (int r = 0; r < L; ++r) pi.push_back(random_schedule(n, src.model, fam, rng));
    RandomAdversary radv(rng());
    auto e = run_execution(src, int_values(in), pi, radv);

    // source round l -> transformed round l+1 (WRO->OWR) or round l (OWR->WRO)
    std::map<std::pair<int, ObjectIndex>, int> script;
    for (const auto& st : e.steps)
      for (const auto& c : st.choices) script[{from_wro ? c.round + 1 : c.round, c.object}] = c.value;
    FunctionAdversary adv([&](const ContentionContext& ctx) -> std::optional<int> {
      auto it = script.find({ctx.round, ctx.object});
      if (it != script.end()) return it->second;
      return ctx.contenders.min();
    });
    std::vector<RoundSchedule> tau;
    for (int r = 1; r <= L + 1; ++r) {
      const RoundSchedule* cur = r <= L ? &pi[static_cast<std::size_t>(r - 1)] : nullptr;
      const RoundSchedule* prev = r >= 2 ? &pi[static_cast<std::size_t>(r - 2)] : nullptr;
      if (from_wro) {
        auto s_part = prev ? only(*prev, true) : concurrent_invoke(n);
        auto wr_part = cur ? only(*cur, false) : concurrent_write_read(n);
        tau.push_back(join(s_part, wr_part));
      } else {
        auto wr_part = prev ? only(*prev, false) : concurrent_write_read(n);
        auto s_part = cur ? only(*cur, true) : concurrent_invoke(n);
        tau.push_back(join(wr_part, s_part));
      }
    }
    auto f = run_execution(dst, int_values(in), tau, adv);
    ++rep.executions;
    for (int i = 1; i <= n; ++i) {
      if (!f.steps[0].state.local(i).dec.is_bottom()) {
        ++rep.mismatches;
        if (rep.first_mismatch.empty()) rep.first_mismatch = "run " + std::to_string(run) + ": decided in round 1";
      }
      for (int l = 1; l <= L; ++l) {
        const auto& a = e.steps[static_cast<std::size_t>(l - 1)].state.local(i).dec;
        const auto& b = f.steps[static_cast<std::size_t>(l)].state.local(i).dec;
        ++rep.decisions_compared;
        if (!a.is_bottom()) ++rep.decided_compared;
        if (!(a == b)) {
          ++rep.mismatches;
          if (rep.first_mismatch.empty())
            rep.first_mismatch = "run " + std::to_string(run) + " process " + std::to_string(i) + " round " +
                                 std::to_string(l) + ": " + a.str() + " vs " + b.str();
        }
      }
    }
  }
  return rep;
}

}  // namespace itersc::testing
