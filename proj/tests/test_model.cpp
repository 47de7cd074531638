// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "itersc/executor.hpp"

using namespace itersc;

namespace {

Value I(int v) { return Value::integer(v); }

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

SafeConsensusInstance instance(ProcessSet invokers) {
  SafeConsensusInstance inst;
  inst.round = 1;
  inst.object = 7;
  inst.invokers = invokers;
  for (int i : invokers.members()) inst.inputs[i] = I(i);
  return inst;
}

}  // namespace

TEST(Value, BottomIntTupleRoundTrip) {
  Value b;
  EXPECT_TRUE(b.is_bottom());
  EXPECT_EQ(b.to_json(), nullptr);
  Value t = Value::pair(I(3), Value());
  EXPECT_EQ(Value::from_json(t.to_json()), t);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], I(3));
  EXPECT_NE(I(1), I(2));
  EXPECT_EQ(I(5).hash(), I(5).hash());
}

TEST(ProcessSet, Basics) {
  ProcessSet s{1, 3};
  EXPECT_EQ(s.str(), "{1,3}");
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(s.min(), 1);
  EXPECT_EQ(s.max(), 3);
  EXPECT_TRUE(s.subset_of(ProcessSet::full(3)));
  EXPECT_EQ(ProcessSet::full(3) - s, ProcessSet{2});
  EXPECT_EQ(parse_process_set("1,3"), s);
  auto l = parse_set_list("1,2;2,3");
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[1], (ProcessSet{2, 3}));
  EXPECT_EQ(binomial(4, 2), 6u);
}

TEST(Errors, MessagesCarryKebabName) {
  Error e(ErrorCode::FullBoxConflict, "x");
  EXPECT_EQ(std::string(e.what()), "full-box-conflict: x");
  EXPECT_EQ(parse_model("wro"), Model::WRO);
  EXPECT_EQ(code_of([] { parse_model("xyz"); }), ErrorCode::InvalidConfiguration);
}

TEST(MakeInitialState, TwoProcesses) {
  auto s = make_initial_state(2, std::vector<int>{0, 1}, Model::WOR);
  EXPECT_EQ(s.round, 0);
  EXPECT_EQ(s.local(1).sm, I(0));
  EXPECT_EQ(s.local(2).sm, I(1));
  EXPECT_TRUE(s.local(1).dec.is_bottom());
  EXPECT_TRUE(s.local(2).dec.is_bottom());
}

TEST(MakeInitialState, AllZeroThree) {
  auto s = make_initial_state(3, std::vector<int>{0, 0, 0}, Model::WOR);
  for (int i = 1; i <= 3; ++i) {
    EXPECT_EQ(s.local(i).input, I(0));
    EXPECT_EQ(s.local(i).id, i);
  }
}

TEST(MakeInitialState, Errors) {
  EXPECT_EQ(code_of([] { make_initial_state(1, std::vector<int>{0}, Model::WOR); }), ErrorCode::InvalidConfiguration);
  EXPECT_EQ(code_of([] { make_initial_state(3, std::vector<int>{0, 1}, Model::WOR); }), ErrorCode::InvalidConfiguration);
}

TEST(ResolveSafeConsensus, TrivialBoxReturnsOwnInput) {
  auto inst = instance({2});
  EXPECT_EQ(resolve_safe_consensus(inst, {ProcessSet{1, 2, 3}}, std::nullopt, 3), I(2));
}

TEST(ResolveSafeConsensus, ConcurrentUsesAdversary) {
  auto inst = instance({1, 3});
  EXPECT_EQ(resolve_safe_consensus(inst, {ProcessSet{1, 3}}, 2, 3), I(2));
}

TEST(ResolveSafeConsensus, SoloFirstGetsOwnInput) {
  auto inst = instance({1, 3});
  EXPECT_EQ(resolve_safe_consensus(inst, {ProcessSet{1}, ProcessSet{3}}, 2, 3), I(1));
}

TEST(ResolveSafeConsensus, Errors) {
  auto inst = instance({1, 3});
  EXPECT_EQ(code_of([&] { resolve_safe_consensus(inst, {ProcessSet{1, 3}}, std::nullopt, 3); }),
            ErrorCode::UnresolvedInstance);
  EXPECT_EQ(code_of([&] { resolve_safe_consensus(inst, {ProcessSet{1, 3}}, 4, 3); }), ErrorCode::InvalidAdversary);
  EXPECT_EQ(code_of([&] { resolve_safe_consensus(inst, {ProcessSet{1, 3}}, 0, 3); }), ErrorCode::InvalidAdversary);
}

TEST(Indistinguishability, Examples) {
  auto s = make_initial_state(3, std::vector<int>{0, 0, 0}, Model::WOR);
  auto q = make_initial_state(3, std::vector<int>{0, 1, 0}, Model::WOR);
  EXPECT_EQ(indistinguishability_set(s, s), ProcessSet::full(3));
  EXPECT_EQ(indistinguishability_set(s, q), (ProcessSet{1, 3}));
  auto p = protocol_consensus_wor(3);
  LowestContenderAdversary adv;
  auto s1 = apply_round(initial_state(p, std::vector<int>{0, 0, 0}), sigma_schedule({}, 3, p.model), adv, p);
  EXPECT_EQ(code_of([&] { indistinguishability_set(s, s1); }), ErrorCode::RoundMismatch);
}

TEST(Indistinguishability, MatchedAdversaryAcrossSigma) {
  // S.sigma<A> and S.sigma<full> with equal box values agree on B
  auto p = protocol_consensus_wor(3);
  auto s = initial_state(p, std::vector<int>{0, 1, 1});
  ProcessSet a{1, 2}, b{3};
  auto qa = round_successors(s, sigma_schedule({a}, 3, p.model), p);
  auto qf = round_successors(s, sigma_schedule({}, 3, p.model), p);
  bool found = false;
  for (const auto& x : qa)
    for (const auto& y : qf)
      if (b.subset_of(indistinguishability_set(x.state, y.state))) found = true;
  EXPECT_TRUE(found);
}

TEST(InvocationSpec, Examples) {
  auto shared = generic_automaton("shared", Model::WOR, 3, HRule::Shared, DRule::MinVisible, 1);
  auto pair = generic_automaton("pair", Model::WOR, 3, HRule::Pair12, DRule::MinVisible, 1);
  LowestContenderAdversary adv;
  auto s0 = initial_state(shared, std::vector<int>{0, 1, 0});
  EXPECT_EQ(code_of([&] { invocation_spec(s0); }), ErrorCode::NoInvocations);
  auto s1 = apply_round(s0, sigma_schedule({}, 3, Model::WOR), adv, shared);
  EXPECT_EQ(invocation_spec(s1).boxes, (std::vector<Box>{ProcessSet{1, 2, 3}}));
  auto q1 = apply_round(initial_state(pair, std::vector<int>{0, 1, 0}), sigma_schedule({}, 3, Model::WOR), adv, pair);
  EXPECT_EQ(invocation_spec(q1).boxes, (std::vector<Box>{ProcessSet{1, 2}, ProcessSet{3}}));
  auto c = protocol_consensus_wor(4);
  auto c1 = apply_round(initial_state(c, std::vector<int>{0, 1, 0, 1}), sigma_schedule({}, 4, Model::WOR), adv, c);
  EXPECT_EQ(invocation_spec(c1).boxes, (std::vector<Box>{ProcessSet{1, 2}, ProcessSet{3}, ProcessSet{4}}));
}

TEST(ScValueOf, Examples) {
  auto pair = generic_automaton("pair", Model::WOR, 3, HRule::Pair12, DRule::MinVisible, 1);
  auto s0 = initial_state(pair, std::vector<int>{0, 1, 0});
  EXPECT_EQ(code_of([&] { sc_value_of(ProcessSet{3}, s0); }), ErrorCode::MissingBox);
  FunctionAdversary adv([](const ContentionContext&) { return std::optional<int>(2); });
  auto s1 = apply_round(s0, sigma_schedule({}, 3, Model::WOR), adv, pair);
  EXPECT_EQ(sc_value_of(ProcessSet{3}, s1), I(3));
  EXPECT_EQ(sc_value_of(ProcessSet{1, 2}, s1), I(2));
  EXPECT_EQ(code_of([&] { sc_value_of(ProcessSet{1, 3}, s1); }), ErrorCode::MissingBox);
}

TEST(SnapshotObject, UpdateScanOncePerRound) {
  SnapshotObject m(3);
  m.update(2, I(9));
  auto v = m.scan(1);
  EXPECT_TRUE(v[0].is_bottom());
  EXPECT_EQ(v[1], I(9));
  EXPECT_EQ(code_of([&] { m.update(2, I(1)); }), ErrorCode::InvalidSchedule);
  EXPECT_EQ(code_of([&] { m.scan(1); }), ErrorCode::InvalidSchedule);
}

namespace {

// Random executions of several automata in every model, for the per-round invariants below.
struct Sample {
  ProtocolAutomaton p;
  Execution e;
};

std::vector<Sample> sample_executions() {
  std::vector<std::pair<ProtocolAutomaton, int>> ps = {
      {protocol_consensus_wor(3), 3},
      {protocol_consensus_wor(4), 4},
      {generic_automaton("g", Model::WOR, 4, HRule::RotatingPairs, DRule::MinVisible, 2), 4}};
  for (auto& na : wro_samples(3)) ps.push_back({na.automaton, 3});
  for (auto& na : owr_samples(3)) ps.push_back({na.automaton, 3});
  std::vector<Sample> out;
  std::uint64_t seed = 100;
  for (const auto& [p, n] : ps) {
    for (int k = 0; k < 25; ++k) {
      std::vector<Value> in;
      for (int i = 0; i < n; ++i) in.push_back(I(static_cast<int>((seed >> i) & 1)));
      out.push_back({p, run_random_execution(p, in, std::max(2, p.round_budget), k % 2 ? Family::Sigma : Family::Partition,
                                             seed++)});
    }
  }
  return out;
}

// position of each process's W and R events in the schedule
std::map<int, std::pair<std::size_t, std::size_t>> write_read_positions(const RoundSchedule& s, int n) {
  std::map<int, std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < s.events.size(); ++k)
    for (int i = 1; i <= n; ++i)
      if (s.events[k].group.contains(i)) {
        if (s.events[k].kind == EventKind::W) out[i].first = k;
        if (s.events[k].kind == EventKind::R) out[i].second = k;
      }
  return out;
}

}  // namespace

TEST(ModelInvariants, SnapshotAtomicity) {
  for (const auto& smp : sample_executions()) {
    for (const auto& st : smp.e.steps) {
      const int n = st.state.n;
      auto pos = write_read_positions(st.schedule, n);
      const auto& cells = st.state.last->memory.cells();
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
          // process i saw j's cell iff j wrote before i scanned; the round's memory keeps every write
          bool before = pos[j].first < pos[i].second;
          if (!before) continue;
          EXPECT_FALSE(cells[static_cast<std::size_t>(j - 1)].is_bottom());
        }
      // two scans in the same group read the same array
      for (const auto& ev : st.schedule.events) {
        if (ev.kind != EventKind::R || ev.group.size() < 2) continue;
        auto m = ev.group.members();
        for (std::size_t k = 1; k < m.size(); ++k) {
          auto pi = write_read_positions(st.schedule, n);
          for (int j = 1; j <= n; ++j)
            EXPECT_EQ(pi[j].first < pi[m[0]].second, pi[j].first < pi[m[k]].second);
        }
      }
    }
  }
}

TEST(ModelInvariants, SnapshotScanContents) {
  // the scan returned to each process has exactly the cells written before it
  auto p = generic_automaton("w", Model::WOR, 4, HRule::Solo, DRule::Never, 0);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    auto sched = random_schedule(4, Model::WOR, Family::Partition, rng);
    LowestContenderAdversary adv;
    auto s = apply_round(initial_state(p, std::vector<int>{1, 2, 3, 4}), sched, adv, p);
    auto pos = write_read_positions(sched, 4);
    for (int i = 1; i <= 4; ++i) {
      const auto& sm = s.local(i).sm;
      ASSERT_TRUE(sm.is_tuple());
      for (int j = 1; j <= 4; ++j)
        EXPECT_EQ(!sm[static_cast<std::size_t>(j - 1)].is_bottom(), pos[j].first < pos[i].second)
            << sched.str() << " i=" << i << " j=" << j;
    }
  }
}

TEST(ModelInvariants, SafeConsensusAgreementAndValidity) {
  for (const auto& smp : sample_executions()) {
    for (const auto& st : smp.e.steps) {
      for (const auto& inst : st.state.last->instances) {
        ASSERT_TRUE(inst.output.has_value());
        for (int i : inst.invokers.members()) {
          // val right after the invoke equals the output; models that overwrite val later keep it in the instance
          EXPECT_TRUE(inst.inputs.count(i));
        }
        if (inst.first_group.size() == 1) EXPECT_EQ(*inst.output, inst.inputs.at(inst.first_group.min()));
        if (inst.invokers.size() == 1) EXPECT_FALSE(inst.contended);
      }
    }
  }
}

TEST(ModelInvariants, InvokersShareVal) {
  // WOR and WRO automata keep the safe-consensus output in val until the next invoke
  for (const auto& smp : sample_executions()) {
    if (smp.p.model == Model::OWR || smp.p.name.rfind("consensus", 0) == 0) continue;
    for (const auto& st : smp.e.steps)
      for (const auto& inst : st.state.last->instances)
        for (int i : inst.invokers.members()) EXPECT_EQ(st.state.local(i).val, *inst.output) << smp.p.name;
  }
}

TEST(ModelInvariants, IndistinguishabilityIsEquivalence) {
  auto p = protocol_consensus_wor(3);
  std::vector<GlobalState> init;
  for (auto& v : binary_input_vectors(3)) init.push_back(initial_state(p, v));
  ExploreOptions opt;
  opt.rounds = 1;
  auto ex = explore(p, init, opt);
  const auto& L = ex.final_layer();
  std::mt19937_64 rng(3);
  for (int t = 0; t < 3000; ++t) {
    const auto& a = L[rng() % L.size()].state;
    const auto& b = L[rng() % L.size()].state;
    const auto& c = L[rng() % L.size()].state;
    EXPECT_EQ(indistinguishability_set(a, b), indistinguishability_set(b, a));
    auto ab = indistinguishability_set(a, b), bc = indistinguishability_set(b, c);
    EXPECT_TRUE((ab & bc).subset_of(indistinguishability_set(a, c)));
  }
}

TEST(ModelInvariants, DecisionMonotonicity) {
  for (const auto& smp : sample_executions()) {
    const int n = smp.e.initial.n;
    for (int i = 1; i <= n; ++i) {
      Value seen;
      for (const auto& st : smp.e.steps) {
        const auto& d = st.state.local(i).dec;
        if (!seen.is_bottom()) EXPECT_EQ(d, seen) << smp.p.name;
        if (!d.is_bottom()) seen = d;
      }
    }
  }
}

TEST(GlobalState, CanonicalJsonAndDigest) {
  auto p = protocol_consensus_wor(3);
  auto a = initial_state(p, std::vector<int>{0, 1, 1});
  auto b = initial_state(p, std::vector<int>{0, 1, 1});
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.to_json()["locals"][0]["dec"], nullptr);
}
