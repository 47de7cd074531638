// SPDX-License-Identifier: Apache-2.0
#include "itersc/executor.hpp"

#include <algorithm>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace itersc {

nlohmann::json AdversaryChoice::to_json() const {
  return {{"round", round}, {"object", object}, {"contenders", contenders.to_json()}, {"value", value}};
}

AdversaryChoice AdversaryChoice::from_json(const nlohmann::json& j) {
  AdversaryChoice c;
  if (j.is_array()) {
    if (j.size() != 3) throw Error(ErrorCode::InvalidConfiguration, "adversary entry must be [round, object, value]");
    c.round = j[0].get<int>();
    c.object = j[1].get<ObjectIndex>();
    c.value = j[2].get<int>();
    return c;
  }
  c.round = j.at("round").get<int>();
  c.object = j.at("object").get<ObjectIndex>();
  c.value = j.at("value").get<int>();
  if (j.contains("contenders")) c.contenders = ProcessSet::from_json(j["contenders"]);
  return c;
}

ScriptedAdversary::ScriptedAdversary(const AdversaryChoices& script) {
  for (const auto& c : script) set(c.round, c.object, c.value);
}

std::optional<int> ScriptedAdversary::choose(const ContentionContext& ctx) {
  auto it = script_.find({ctx.round, ctx.object});
  if (it == script_.end()) return std::nullopt;
  return it->second;
}

ScriptedAdversary ScriptedAdversary::from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw Error(ErrorCode::InvalidConfiguration, "adversary script must be a JSON array");
  ScriptedAdversary a;
  for (const auto& e : arr) {
    auto c = AdversaryChoice::from_json(e);
    a.set(c.round, c.object, c.value);
  }
  return a;
}

std::optional<int> RandomAdversary::choose(const ContentionContext& ctx) {
  std::uniform_int_distribution<int> d(1, ctx.n);
  return d(rng_);
}

RoundResult apply_round_recorded(const GlobalState& s, const RoundSchedule& sched, AdversaryPolicy& adv,
                                 const ProtocolAutomaton& p) {
  if (p.model != s.model)
    throw Error(ErrorCode::ModelMismatch, std::string("automaton is ") + model_name(p.model) + ", state is " + model_name(s.model));
  validate_schedule(sched, s.n, s.model);
  const int r = s.round + 1;
  const int n = s.n;
  RoundResult res;
  GlobalState& out = res.state;
  out.model = s.model;
  out.n = n;
  out.round = r;
  out.locals = s.locals;
  auto rec = std::make_shared<RoundRecord>();
  rec->round = r;
  rec->memory = SnapshotObject(n);
  rec->prev = s.last;
  std::map<ObjectIndex, SafeConsensusInstance> insts;

  for (const auto& ev : sched.events) {
    switch (ev.kind) {
      case EventKind::W:
        for (int i : ev.group.members()) rec->memory.update(i, p.payload(r, out.locals[static_cast<std::size_t>(i - 1)]));
        break;
      case EventKind::R: {
        Value view;
        bool first = true;
        for (int i : ev.group.members()) {
          Value v = rec->memory.scan(i);
          if (first) view = v;
          first = false;
          auto& l = out.locals[static_cast<std::size_t>(i - 1)];
          l.sm = view;
          if (p.after_scan) p.after_scan(r, l);
        }
        break;
      }
      case EventKind::S: {
        std::map<ObjectIndex, ProcessSet> by_obj;
        for (int i : ev.group.members()) {
          const auto& l = out.locals[static_cast<std::size_t>(i - 1)];
          ObjectIndex o = p.object_for(r, l);
          auto& inst = insts[o];
          inst.round = r;
          inst.object = o;
          inst.invokers.insert(i);
          inst.inputs[i] = p.invoke_input(r, l);
          by_obj[o].insert(i);
        }
        for (const auto& [o, members] : by_obj) {
          auto& inst = insts[o];
          if (!inst.output) {
            inst.first_group = members;
            if (members.size() == 1) {
              inst.output = inst.inputs[members.min()];
            } else {
              ContentionContext ctx{r, o, members, n, &s};
              auto c = adv.choose(ctx);
              if (!c) throw Error(ErrorCode::UnresolvedInstance, "no adversary choice for object " + std::to_string(o) + " in round " + std::to_string(r));
              if (*c < 1 || *c > n) throw Error(ErrorCode::InvalidAdversary, "adversary value " + std::to_string(*c) + " outside 1.." + std::to_string(n));
              inst.output = Value::integer(*c);
              inst.contended = true;
              res.choices.push_back({r, o, members, *c});
            }
          }
          for (int i : members.members()) {
            auto& l = out.locals[static_cast<std::size_t>(i - 1)];
            l.val = *inst.output;
            if (p.after_invoke) p.after_invoke(r, l);
          }
        }
        break;
      }
    }
  }
  for (auto& l : out.locals) {
    l.round = r;
    if (p.step) p.step(r, l);
    if (l.dec.is_bottom()) {
      Value d = p.decision(r, l);
      if (!d.is_bottom()) l.dec = d;
    }
  }
  for (auto& [o, inst] : insts) rec->instances.push_back(std::move(inst));
  std::sort(res.choices.begin(), res.choices.end(), [](const auto& a, const auto& b) { return a.object < b.object; });
  out.last = std::move(rec);
  return res;
}

GlobalState apply_round(const GlobalState& s, const RoundSchedule& sched, AdversaryPolicy& adv, const ProtocolAutomaton& p) {
  return apply_round_recorded(s, sched, adv, p).state;
}

std::vector<RoundResult> round_successors(const GlobalState& s, const RoundSchedule& sched, const ProtocolAutomaton& p) {
  FunctionAdversary probe([](const ContentionContext&) { return 1; });
  std::vector<RoundResult> out;
  out.push_back(apply_round_recorded(s, sched, probe, p));
  std::vector<ObjectIndex> objs;
  for (const auto& c : out.front().choices) objs.push_back(c.object);
  if (objs.empty()) return out;
  const int n = s.n;
  std::vector<int> vals(objs.size(), 1);
  for (;;) {
    std::size_t k = vals.size();
    while (k > 0 && vals[k - 1] == n) vals[--k] = 1;
    if (k == 0) break;
    ++vals[k - 1];
    ScriptedAdversary a;
    for (std::size_t i = 0; i < objs.size(); ++i) a.set(s.round + 1, objs[i], vals[i]);
    out.push_back(apply_round_recorded(s, sched, a, p));
  }
  return out;
}

Execution run_execution(const ProtocolAutomaton& p, const std::vector<Value>& inputs,
                        const std::vector<RoundSchedule>& scheds, AdversaryPolicy& adv) {
  if (scheds.empty()) throw Error(ErrorCode::InvalidArgument, "an execution needs at least one round");
  Execution e;
  e.initial = initial_state(p, inputs);
  const GlobalState* cur = &e.initial;
  e.steps.reserve(scheds.size());
  for (const auto& s : scheds) {
    auto rr = apply_round_recorded(*cur, s, adv, p);
    e.steps.push_back({s, std::move(rr.choices), std::move(rr.state)});
    cur = &e.steps.back().state;
  }
  return e;
}

Execution run_execution(const ProtocolAutomaton& p, const std::vector<int>& inputs,
                        const std::vector<RoundSchedule>& scheds, AdversaryPolicy& adv) {
  return run_execution(p, int_values(inputs), scheds, adv);
}

Execution run_random_execution(const ProtocolAutomaton& p, const std::vector<Value>& inputs, int rounds, Family f,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RoundSchedule> scheds;
  int n = static_cast<int>(inputs.size());
  for (int r = 0; r < rounds; ++r) scheds.push_back(random_schedule(n, p.model, f, rng));
  RandomAdversary adv(mix64(seed ^ 0xadadadadULL));
  return run_execution(p, inputs, scheds, adv);
}

Execution replay_execution(const ProtocolAutomaton& p, const Execution& e) {
  std::vector<Value> inputs;
  for (const auto& l : e.initial.locals) inputs.push_back(l.input);
  std::vector<RoundSchedule> scheds;
  AdversaryChoices all;
  for (const auto& st : e.steps) {
    scheds.push_back(st.schedule);
    all.insert(all.end(), st.choices.begin(), st.choices.end());
  }
  ScriptedAdversary a(all);
  return run_execution(p, inputs, scheds, a);
}

std::string trace_jsonl(const ProtocolAutomaton& p, const Execution& e) {
  std::ostringstream os;
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& l : e.initial.locals) inputs.push_back(l.input.to_json());
  nlohmann::json header = {{"type", "header"}, {"protocol", p.name}, {"model", model_name(p.model)},
                           {"n", e.initial.n}, {"inputs", inputs}};
  os << header.dump() << "\n";
  for (const auto& st : e.steps) {
    nlohmann::json adv = nlohmann::json::array();
    for (const auto& c : st.choices) adv.push_back(c.to_json());
    nlohmann::json digests = nlohmann::json::array();
    nlohmann::json decs = nlohmann::json::array();
    for (const auto& l : st.state.locals) {
      digests.push_back(hex64(fnv1a(l.to_json().dump())));
      decs.push_back(l.dec.to_json());
    }
    nlohmann::json line = {{"type", "round"}, {"round", st.state.round}, {"schedule", st.schedule.to_json()},
                           {"adversary", adv}, {"locals", digests}, {"dec", decs}};
    os << line.dump() << "\n";
  }
  return os.str();
}

Execution replay_trace(const ProtocolAutomaton& p, const std::string& jsonl) {
  std::istringstream is(jsonl);
  std::string line;
  std::vector<Value> inputs;
  std::vector<RoundSchedule> scheds;
  ScriptedAdversary adv;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.at("type") == "header") {
      for (const auto& v : j.at("inputs")) inputs.push_back(Value::from_json(v));
      have_header = true;
    } else {
      scheds.push_back(RoundSchedule::from_json(j.at("schedule")));
      for (const auto& c : j.at("adversary")) {
        auto ch = AdversaryChoice::from_json(c);
        adv.set(ch.round, ch.object, ch.value);
      }
    }
  }
  if (!have_header) throw Error(ErrorCode::InvalidConfiguration, "trace without header line");
  return run_execution(p, inputs, scheds, adv);
}

nlohmann::json Verdict::to_json() const {
  nlohmann::json j = {{"ok", ok}};
  if (!ok) {
    j["property"] = property;
    j["processes"] = processes;
    j["detail"] = detail;
  }
  return j;
}

namespace {

Verdict agreement_check(const std::vector<Value>& d) {
  Verdict v;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].is_bottom()) continue;
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      if (!d[j].is_bottom() && !(d[i] == d[j])) {
        v.ok = false;
        v.property = "agreement";
        v.processes = {static_cast<int>(i) + 1, static_cast<int>(j) + 1};
        v.detail = "p" + std::to_string(i + 1) + " decided " + d[i].str() + ", p" + std::to_string(j + 1) + " decided " + d[j].str();
        return v;
      }
    }
  }
  return v;
}

Verdict termination_check(const std::vector<Value>& d) {
  Verdict v;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i].is_bottom()) v.processes.push_back(static_cast<int>(i) + 1);
  if (!v.processes.empty()) {
    v.ok = false;
    v.property = "termination";
    v.detail = "undecided within the round budget";
  }
  return v;
}

}  // namespace

Verdict check_consensus_decisions(const std::vector<Value>& d, const std::vector<Value>& inputs) {
  Verdict v = agreement_check(d);
  if (!v.ok) return v;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].is_bottom()) continue;
    if (std::find(inputs.begin(), inputs.end(), d[i]) == inputs.end()) {
      v.ok = false;
      v.property = "validity";
      v.processes = {static_cast<int>(i) + 1};
      v.detail = "decided " + d[i].str() + " which is nobody's input";
      return v;
    }
  }
  return termination_check(d);
}

Verdict check_consensus(const Execution& e, const std::vector<Value>& inputs) {
  return check_consensus_decisions(decisions_of(e.final_state()), inputs);
}

Verdict check_2cc_decisions(const std::vector<Value>& d, const CoalitionsTuple& c) {
  if (!validate_coalitions_tuple(c)) throw Error(ErrorCode::InvalidInput, "not a coalitions tuple");
  Verdict v = agreement_check(d);
  if (!v.ok) return v;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].is_bottom()) continue;
    bool found = false;
    for (const auto& [l, r] : c)
      if ((!l.is_bottom() && l == d[i]) || (!r.is_bottom() && r == d[i])) found = true;
    if (!found) {
      v.ok = false;
      v.property = "validity";
      v.processes = {static_cast<int>(i) + 1};
      v.detail = "output " + d[i].str() + " is no entry's left or right field";
      return v;
    }
  }
  return termination_check(d);
}

Verdict check_2cc(const Execution& e, const CoalitionsTuple& c) { return check_2cc_decisions(decisions_of(e.final_state()), c); }

Execution ExploreResult::execution_to(std::size_t layer, std::size_t index) const {
  std::vector<const ExploreNode*> chain;
  long idx = static_cast<long>(index);
  for (std::size_t k = layer + 1; k-- > 0;) {
    const auto& node = layers[k][static_cast<std::size_t>(idx)];
    chain.push_back(&node);
    idx = node.parent;
  }
  std::reverse(chain.begin(), chain.end());
  Execution e;
  e.initial = chain.front()->state;
  for (std::size_t k = 1; k < chain.size(); ++k) e.steps.push_back({chain[k]->schedule, chain[k]->choices, chain[k]->state});
  return e;
}

ExploreResult explore(const ProtocolAutomaton& p, const std::vector<GlobalState>& initial, const ExploreOptions& opt,
                      const TransitionVisitor& visit) {
  if (initial.empty()) throw Error(ErrorCode::InvalidArgument, "no initial states");
  if (opt.rounds < 0) throw Error(ErrorCode::InvalidArgument, "negative round count");
  const int n = initial.front().n;
  ExploreResult res;
  res.layers.emplace_back();
  for (const auto& s : initial) res.layers[0].push_back({s, 1, -1, {}, {}});
  if (opt.rounds == 0) return res;
  const auto scheds = enumerate_round_schedules(n, p.model, opt.family);
  for (int round = 1; round <= opt.rounds; ++round) {
    const auto& prev = res.layers.back();
    std::vector<ExploreNode> next;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
    for (std::size_t pi = 0; pi < prev.size(); ++pi) {
      const auto& node = prev[pi];
      for (const auto& sched : scheds) {
        for (auto& rr : round_successors(node.state, sched, p)) {
          ++res.transitions;
          if (visit) visit(node.state, rr);
          auto h = rr.state.locals_hash();
          auto& bucket = index[h];
          bool merged = false;
          for (auto j : bucket) {
            if (next[j].state.same_locals(rr.state)) {
              std::uint64_t sum;
              if (__builtin_add_overflow(next[j].count, node.count, &sum)) sum = UINT64_MAX;
              next[j].count = sum;
              merged = true;
              break;
            }
          }
          if (merged) continue;
          if (next.size() >= opt.max_states_per_round) {
            res.partial = true;
            continue;
          }
          bucket.push_back(next.size());
          next.push_back({std::move(rr.state), node.count, static_cast<long>(pi), sched, std::move(rr.choices)});
        }
      }
    }
    res.layers.push_back(std::move(next));
  }
  return res;
}

nlohmann::json GammaReport::to_json() const {
  nlohmann::json g = nlohmann::json::object();
  nlohmann::json nuj = nlohmann::json::object();
  for (const auto& [m, boxes] : gamma) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto b : boxes) arr.push_back(b.to_json());
    g[std::to_string(m)] = arr;
  }
  for (const auto& [m, c] : nu) nuj[std::to_string(m)] = c;
  return {{"gamma", g}, {"nu", nuj}, {"nu_total", total}, {"shared_objects", objects.size()}, {"partial", partial}};
}

std::vector<std::vector<Value>> binary_input_vectors(int n) {
  std::vector<std::vector<Value>> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<Value> v;
    for (int i = 0; i < n; ++i) v.push_back(Value::integer((mask >> i) & 1));
    out.push_back(v);
  }
  return out;
}

std::vector<Value> int_values(const std::vector<int>& v) {
  std::vector<Value> out;
  for (int x : v) out.push_back(Value::integer(x));
  return out;
}

GammaReport collect_gamma(const ProtocolAutomaton& p, int n, const GammaBudget& budget) {
  int rounds = budget.rounds ? budget.rounds : p.round_budget;
  if (rounds <= 0) throw Error(ErrorCode::InvalidArgument, "collect_gamma needs a round bound");
  auto inputs = budget.inputs.empty() ? binary_input_vectors(n) : budget.inputs;
  std::vector<GlobalState> init;
  for (const auto& in : inputs) init.push_back(initial_state(p, in));
  GammaReport rep;
  for (int m = 2; m <= n; ++m) {
    rep.gamma[m];
    rep.nu[m] = 0;
  }
  ExploreOptions opt{budget.family, rounds, budget.max_states_per_round};
  auto res = explore(p, init, opt, [&](const GlobalState&, const RoundResult& rr) {
    for (const auto& inst : rr.state.last->instances) {
      if (inst.invokers.size() < 2) continue;
      rep.gamma[inst.invokers.size()].insert(inst.invokers);
      rep.objects.insert({inst.round, inst.object});
    }
  });
  rep.partial = res.partial;
  for (const auto& [m, boxes] : rep.gamma) {
    rep.nu[m] = static_cast<int>(boxes.size());
    rep.total += rep.nu[m];
  }
  return rep;
}

nlohmann::json ConsensusReport::to_json() const {
  nlohmann::json j = {{"ok", ok},
                      {"executions", executions},
                      {"distinct_final_states", distinct_final_states},
                      {"input_vectors", input_vectors}};
  if (violation) {
    j["violation"] = violation->to_json();
    nlohmann::json in = nlohmann::json::array();
    for (const auto& v : *violation_inputs) in.push_back(v.to_json());
    j["violation_inputs"] = in;
  }
  if (counterexample_trace) j["counterexample_trace"] = *counterexample_trace;
  return j;
}

namespace {

struct PerInput {
  std::uint64_t executions = 0;
  std::uint64_t finals = 0;
  std::optional<Verdict> violation;
  std::optional<std::string> trace;
  std::optional<Error> error;
};

PerInput verify_one_exhaustive(const ProtocolAutomaton& p, const std::vector<Value>& inputs, Family family) {
  PerInput out;
  ExploreOptions opt{family, p.round_budget, 200000};
  auto res = explore(p, {initial_state(p, inputs)}, opt);
  if (res.partial) throw Error(ErrorCode::BudgetExceeded, "state budget exhausted during exhaustive verification");
  const auto& fin = res.final_layer();
  out.finals = fin.size();
  for (std::size_t i = 0; i < fin.size(); ++i) {
    std::uint64_t sum;
    if (__builtin_add_overflow(out.executions, fin[i].count, &sum)) sum = UINT64_MAX;
    out.executions = sum;
    if (out.violation) continue;
    auto v = check_consensus_decisions(decisions_of(fin[i].state), inputs);
    if (!v.ok) {
      out.violation = v;
      out.trace = trace_jsonl(p, res.execution_to(res.layers.size() - 1, i));
    }
  }
  return out;
}

}  // namespace

ConsensusReport verify_consensus(const ProtocolAutomaton& p, int n, const ConsensusOptions& opt) {
  if (p.round_budget <= 0) throw Error(ErrorCode::InvalidArgument, "consensus verification needs a round budget");
  auto inputs = opt.inputs;
  if (inputs.empty()) {
    inputs = binary_input_vectors(n);
    std::vector<Value> distinct;
    for (int i = 1; i <= n; ++i) distinct.push_back(Value::integer(i));
    inputs.push_back(distinct);
  }
  ConsensusReport rep;
  rep.input_vectors = inputs.size();
  if (opt.exhaustive) {
    if (n > 6) throw Error(ErrorCode::BudgetExceeded, "exhaustive verification is limited to n <= 6");
    std::vector<PerInput> results(inputs.size());
    int jobs = std::max(1, opt.jobs);
    auto worker = [&](int w) {
      for (std::size_t k = static_cast<std::size_t>(w); k < inputs.size(); k += static_cast<std::size_t>(jobs)) {
        try {
          results[k] = verify_one_exhaustive(p, inputs[k], opt.family);
        } catch (const Error& e) {
          results[k].error = e;
        }
      }
    };
    if (jobs == 1) {
      worker(0);
    } else {
      std::vector<std::thread> ts;
      for (int w = 0; w < jobs; ++w) ts.emplace_back(worker, w);
      for (auto& t : ts) t.join();
    }
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (results[k].error) throw *results[k].error;
      rep.executions += results[k].executions;
      rep.distinct_final_states += results[k].finals;
      if (results[k].violation && !rep.violation) {
        rep.ok = false;
        rep.violation = results[k].violation;
        rep.violation_inputs = inputs[k];
        rep.counterexample_trace = results[k].trace;
      }
    }
    return rep;
  }
  for (std::uint64_t k = 0; k < opt.samples; ++k) {
    const auto& in = inputs[k % inputs.size()];
    auto e = run_random_execution(p, in, p.round_budget, opt.family, mix64(opt.seed * 1000003ULL + k));
    ++rep.executions;
    auto v = check_consensus(e, in);
    if (!v.ok && !rep.violation) {
      rep.ok = false;
      rep.violation = v;
      rep.violation_inputs = in;
      rep.counterexample_trace = trace_jsonl(p, e);
    }
  }
  return rep;
}

nlohmann::json TwoCCReport::to_json() const {
  nlohmann::json j = {{"ok", ok}, {"tuples", tuples}, {"executions", executions}};
  if (violation) j["violation"] = violation->to_json();
  return j;
}

std::vector<CoalitionsTuple> all_coalitions_tuples(int g) {
  const Value vals[3] = {Value(), Value::integer(5), Value::integer(7)};
  std::vector<CoalitionsTuple> out;
  int per = 9;
  std::uint64_t total = 1;
  for (int i = 0; i < g; ++i) total *= static_cast<std::uint64_t>(per);
  for (std::uint64_t code = 0; code < total; ++code) {
    CoalitionsTuple c;
    std::uint64_t x = code;
    for (int i = 0; i < g; ++i) {
      int e = static_cast<int>(x % 9);
      x /= 9;
      c.push_back({vals[e / 3], vals[e % 3]});
    }
    if (validate_coalitions_tuple(c)) out.push_back(c);
  }
  return out;
}

TwoCCReport verify_2cc(int g, Family family) {
  TwoCCReport rep;
  auto p = protocol_2cc(g);
  for (const auto& c : all_coalitions_tuples(g)) {
    ++rep.tuples;
    ExploreOptions opt{family, 1, 1000000};
    auto res = explore(p, {initial_state(p, coalitions_inputs(c))}, opt);
    for (const auto& node : res.final_layer()) {
      rep.executions += node.count;
      auto v = check_2cc_decisions(decisions_of(node.state), c);
      if (!v.ok && !rep.violation) {
        rep.ok = false;
        rep.violation = v;
      }
    }
  }
  return rep;
}

}  // namespace itersc
