// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "itersc/automaton.hpp"
#include "itersc/protocols.hpp"
#include "itersc/schedule.hpp"

namespace itersc {

struct ContentionContext {
  int round = 0;
  ObjectIndex object = 0;
  ProcessSet contenders;
  int n = 0;
  const GlobalState* pre = nullptr;
};

struct AdversaryChoice {
  int round = 0;
  ObjectIndex object = 0;
  ProcessSet contenders;
  int value = 0;
  nlohmann::json to_json() const;
  static AdversaryChoice from_json(const nlohmann::json& j);
  friend bool operator==(const AdversaryChoice&, const AdversaryChoice&) = default;
};
using AdversaryChoices = std::vector<AdversaryChoice>;

class AdversaryPolicy {
 public:
  virtual ~AdversaryPolicy() = default;
  // nullopt = no choice available (scripted gap)
  virtual std::optional<int> choose(const ContentionContext& ctx) = 0;
  virtual std::string mode() const = 0;
};

class ScriptedAdversary : public AdversaryPolicy {
 public:
  ScriptedAdversary() = default;
  explicit ScriptedAdversary(const AdversaryChoices& script);
  void set(int round, ObjectIndex object, int value) { script_[{round, object}] = value; }
  std::optional<int> choose(const ContentionContext& ctx) override;
  std::string mode() const override { return "scripted"; }
  static ScriptedAdversary from_json(const nlohmann::json& arr);

 private:
  std::map<std::pair<int, ObjectIndex>, int> script_;
};

class RandomAdversary : public AdversaryPolicy {
 public:
  explicit RandomAdversary(std::uint64_t seed) : rng_(seed) {}
  std::optional<int> choose(const ContentionContext& ctx) override;
  std::string mode() const override { return "seeded-random"; }

 private:
  std::mt19937_64 rng_;
};

class FunctionAdversary : public AdversaryPolicy {
 public:
  explicit FunctionAdversary(std::function<std::optional<int>(const ContentionContext&)> f) : f_(std::move(f)) {}
  std::optional<int> choose(const ContentionContext& ctx) override { return f_(ctx); }
  std::string mode() const override { return "function"; }

 private:
  std::function<std::optional<int>(const ContentionContext&)> f_;
};

// Returns the lowest contender; a neutral default for constructions.
class LowestContenderAdversary : public AdversaryPolicy {
 public:
  std::optional<int> choose(const ContentionContext& ctx) override { return ctx.contenders.min(); }
  std::string mode() const override { return "lowest-contender"; }
};

struct RoundResult {
  GlobalState state;
  AdversaryChoices choices;  // sorted by object index
};

RoundResult apply_round_recorded(const GlobalState& s, const RoundSchedule& sched, AdversaryPolicy& adv,
                                 const ProtocolAutomaton& p);
GlobalState apply_round(const GlobalState& s, const RoundSchedule& sched, AdversaryPolicy& adv,
                        const ProtocolAutomaton& p);

// All adversary resolutions of one (state, schedule) pair, lexicographic by
// (object index, value).
std::vector<RoundResult> round_successors(const GlobalState& s, const RoundSchedule& sched, const ProtocolAutomaton& p);

struct ExecutionStep {
  RoundSchedule schedule;
  AdversaryChoices choices;
  GlobalState state;
};

struct Execution {
  GlobalState initial;
  std::vector<ExecutionStep> steps;
  const GlobalState& final_state() const { return steps.empty() ? initial : steps.back().state; }
};

Execution run_execution(const ProtocolAutomaton& p, const std::vector<Value>& inputs,
                        const std::vector<RoundSchedule>& scheds, AdversaryPolicy& adv);
Execution run_execution(const ProtocolAutomaton& p, const std::vector<int>& inputs,
                        const std::vector<RoundSchedule>& scheds, AdversaryPolicy& adv);
Execution run_random_execution(const ProtocolAutomaton& p, const std::vector<Value>& inputs, int rounds, Family f,
                               std::uint64_t seed);
Execution replay_execution(const ProtocolAutomaton& p, const Execution& e);

// JSON lines: a header line, then one line per round.
std::string trace_jsonl(const ProtocolAutomaton& p, const Execution& e);
Execution replay_trace(const ProtocolAutomaton& p, const std::string& jsonl);

struct Verdict {
  bool ok = true;
  std::string property;  // "agreement", "validity", "termination", "" when ok
  std::vector<int> processes;
  std::string detail;
  nlohmann::json to_json() const;
};

Verdict check_consensus_decisions(const std::vector<Value>& decisions, const std::vector<Value>& inputs);
Verdict check_consensus(const Execution& e, const std::vector<Value>& inputs);
Verdict check_2cc_decisions(const std::vector<Value>& decisions, const CoalitionsTuple& c);
Verdict check_2cc(const Execution& e, const CoalitionsTuple& c);

// Layered exploration with deduplication on (round, locals).
struct ExploreOptions {
  Family family = Family::Sigma;
  int rounds = 1;
  std::size_t max_states_per_round = 100000;
};

struct ExploreNode {
  GlobalState state;
  std::uint64_t count = 0;  // number of (schedule, adversary) sequences reaching it
  long parent = -1;         // index in previous layer
  RoundSchedule schedule;
  AdversaryChoices choices;
};

struct ExploreResult {
  std::vector<std::vector<ExploreNode>> layers;  // layers[0] = initial states
  std::uint64_t transitions = 0;
  bool partial = false;
  const std::vector<ExploreNode>& final_layer() const { return layers.back(); }
  Execution execution_to(std::size_t layer, std::size_t index) const;
};

using TransitionVisitor = std::function<void(const GlobalState& from, const RoundResult& to)>;

ExploreResult explore(const ProtocolAutomaton& p, const std::vector<GlobalState>& initial, const ExploreOptions& opt,
                      const TransitionVisitor& visit = {});

struct GammaReport {
  std::map<int, std::set<Box>> gamma;  // m -> boxes (m >= 2)
  std::map<int, int> nu;
  int total = 0;
  std::set<std::pair<int, ObjectIndex>> objects;  // shared objects, (round, index)
  bool partial = false;
  nlohmann::json to_json() const;
};

struct GammaBudget {
  Family family = Family::Sigma;
  int rounds = 0;  // 0 = automaton's round budget
  std::size_t max_states_per_round = 100000;
  std::vector<std::vector<Value>> inputs;  // empty = every 0/1 vector
};

GammaReport collect_gamma(const ProtocolAutomaton& p, int n, const GammaBudget& budget = {});

std::vector<std::vector<Value>> binary_input_vectors(int n);
std::vector<Value> int_values(const std::vector<int>& v);

struct ConsensusReport {
  bool ok = true;
  std::uint64_t executions = 0;
  std::uint64_t distinct_final_states = 0;
  std::size_t input_vectors = 0;
  std::optional<Verdict> violation;
  std::optional<std::vector<Value>> violation_inputs;
  std::optional<std::string> counterexample_trace;
  nlohmann::json to_json() const;
};

struct ConsensusOptions {
  Family family = Family::Sigma;
  bool exhaustive = true;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::vector<std::vector<Value>> inputs;  // empty = 0/1 vectors plus 1..n
};

ConsensusReport verify_consensus(const ProtocolAutomaton& p, int n, const ConsensusOptions& opt);

struct TwoCCReport {
  bool ok = true;
  std::uint64_t tuples = 0;
  std::uint64_t executions = 0;
  std::optional<Verdict> violation;
  nlohmann::json to_json() const;
};
// Every valid coalitions tuple of length g over {5,7} with bottom.
std::vector<CoalitionsTuple> all_coalitions_tuples(int g);
TwoCCReport verify_2cc(int g, Family family);

}  // namespace itersc
