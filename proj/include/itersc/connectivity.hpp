// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "itersc/executor.hpp"

namespace itersc {

struct Path {
  std::vector<GlobalState> states;
  std::vector<ProcessSet> labels;  // labels[k] joins states[k] and states[k+1]
  std::vector<long> parents;       // source index in the previous round's path, -1 if unknown
  std::vector<Sigma> sigmas;       // sigma schedule that produced each state, if any

  std::size_t size() const { return states.size(); }
  int n() const { return states.empty() ? 0 : states.front().n; }
  // min label size; n for a single state
  int degree() const;
  std::set<ProcessSet> isets() const;
  nlohmann::json to_json() const;
  std::string to_dot(const std::string& name = "path") const;
};

Path singleton_path(const GlobalState& s);

struct PathCheck {
  bool ok = true;
  long bad_edge = -1;
  std::string detail;
};
// Labels nonempty and contained in the actual indistinguishability sets.
PathCheck verify_path(const Path& p);

// Removes cycles through repeated states (same round and locals).
Path loop_erase(const Path& p);

struct IndistGraph {
  std::vector<GlobalState> states;
  std::vector<std::vector<std::pair<std::size_t, ProcessSet>>> adj;
  std::size_t edge_count() const;
};
IndistGraph build_indist_graph(const std::vector<GlobalState>& states);
std::optional<Path> find_path(const IndistGraph& g, std::size_t s, std::size_t q, int min_degree);

bool is_b_regular(const Path& p);

// Boxes every one-round successor of s would produce (WOR/OWR: independent
// of the schedule); computed from the fully concurrent successor.
InvocationSpec successor_boxes(const GlobalState& s, const ProtocolAutomaton& p, const Sigma& sigma = {});

// Lemma-step plans: each node is (source state, sigma, optional pins for
// adversary values keyed by object index); labels are the claimed sets.
struct PlanNode {
  const GlobalState* source = nullptr;
  long source_index = -1;
  Sigma sigma;
  std::map<ObjectIndex, int> pins;
  bool pinned = false;  // pins given for all contended objects
};
struct Plan {
  std::vector<PlanNode> nodes;
  std::vector<ProcessSet> labels;
  // dedupe: skip the node when it repeats the previous (source, sigma); its pins move to the previous node
  void add(const GlobalState* src, long idx, Sigma sigma, std::optional<ProcessSet> label_from_prev, bool dedupe = true);
};
Path realize(const Plan& plan, const ProtocolAutomaton& p);

Path connect_partition_round(const GlobalState& s, ProcessSet a, ProcessSet b, const ProtocolAutomaton& p);
Path extend_path_partition(const Path& path, ProcessSet a, ProcessSet b, const ProtocolAutomaton& p);
Path extend_path_no3box(const Path& path, const ProtocolAutomaton& p);

struct LadderState {
  const GlobalState* base = nullptr;
  std::vector<ProcessSet> groups;  // C1..Cu
  Box step;
  ProcessSet tail;                 // b and X
  Sigma sigma() const;
  nlohmann::json to_json() const;
};
// Checks the four ladder conditions for target set x.
bool is_ladder_state(const LadderState& l, ProcessSet x, const InvocationSpec& spec, int n);
std::pair<LadderState, Path> build_ladder_path(const GlobalState& s, ProcessSet x, Box b, const ProtocolAutomaton& p);

using AdversaryPins = std::map<Box, int>;
std::vector<Box> diff_boxes(const GlobalState& q1, const GlobalState& q2);

struct OneRoundResult {
  Path path;
  std::vector<Box> diff;  // boxes of both specs with differing values
  bool property_a = true;  // diff empty => deg >= n-2
  bool property_b = true;  // deg >= min(n-|b|) and small labels are complements of diff boxes
};
// Pins fix the adversary value of contended boxes of the two endpoints
// S.sigma<X> and S.sigma<Y>; unpinned boxes default to their least member.
OneRoundResult connect_one_round_successors(const GlobalState& s, ProcessSet x, ProcessSet y, const ProtocolAutomaton& p,
                                            const AdversaryPins& pins_x = {}, const AdversaryPins& pins_y = {});

enum class Valency { Zero, One, Bivalent, Undecided, Other };
const char* valency_name(Valency v);
struct ValencyResult {
  Valency valency = Valency::Undecided;
  std::set<Value> decided;
  std::uint64_t final_states = 0;
  bool partial = false;
  nlohmann::json to_json() const;
};
ValencyResult bounded_valency(const GlobalState& s, const ProtocolAutomaton& p, int horizon, Family family = Family::Sigma,
                              bool enumerate = true, std::uint64_t samples = 1000, std::uint64_t seed = 1);

// n=3 lower-bound demo: connects successors of 000 and 111 for `rounds` rounds.
struct DemoReport {
  bool ok = true;
  std::string engine;
  nlohmann::json json;
};
DemoReport lower_bound_demo(const ProtocolAutomaton& p, int rounds);

// WRO constructions.
Path wro_basic_path(const GlobalState& s, int i, int j, const ProtocolAutomaton& p);
Path wro_extend_path(const Path& path, const ProtocolAutomaton& p);
DemoReport wro_obstruction_demo(const ProtocolAutomaton& p, int rounds);

// Breadth-first search for a path among the sigma-schedule successors of the
// states of `path`, from a successor of the first state to one of the last.
// Edges join successors of the same or of adjacent states when at least
// min_degree processes agree. With `spec`, only successors with that
// invocation specification are used. Family::Partition searches every schedule.
std::optional<Path> search_extend_path(const Path& path, const ProtocolAutomaton& p, int min_degree,
                                       const std::optional<InvocationSpec>& spec = std::nullopt,
                                       Family family = Family::Sigma);

// Initial path 0..0 ~ 10..0 ~ 110..0 ~ ... ~ 1..1 with labels of size n-1.
Path staircase_initial_path(const ProtocolAutomaton& p, int n);

// One-round extension of a whole WOR path: t-edges S_{l-1}.sigma<X_l> ~X_l~ S_l.sigma<X_l>
// joined inside each S_l by the ladder construction (no value switches).
Path extend_path_ladder(const Path& path, const ProtocolAutomaton& p);

}  // namespace itersc
