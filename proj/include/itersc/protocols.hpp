// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <utility>
#include <vector>

#include "itersc/automaton.hpp"

namespace itersc {

std::int64_t tup(std::int64_t i, std::int64_t j);
int gamma(int n, int m);

struct CoalitionGroup {
  int firstid = 0;
  int lastid = 0;
  int step = 0;
  ProcessSet members() const;
  friend bool operator==(const CoalitionGroup&, const CoalitionGroup&) = default;
};
CoalitionGroup coalition_group(int n, int r);

using CoalitionsTuple = std::vector<std::pair<Value, Value>>;  // entry k is process k+1
bool validate_coalitions_tuple(const CoalitionsTuple& c);
std::vector<Value> coalitions_inputs(const CoalitionsTuple& c);

ProtocolAutomaton protocol_2cc(int g);
ProtocolAutomaton protocol_consensus_wor(int n);

ProtocolAutomaton transform_wro_to_owr(const ProtocolAutomaton& p);
ProtocolAutomaton transform_owr_to_wro(const ProtocolAutomaton& p);

// Agreements entry of a consensus-protocol local state, bottom if absent.
Value agreement_entry(const LocalState& l, int i, int j);

// Inputs of processes visible in a full-information view ((sm,val) writes).
std::map<int, Value> visible_inputs(const LocalState& l);

// Families of small generic automata used by demos and tests. Every one
// writes (sm,val) and invokes with its own id.
enum class HRule {
  Shared,          // one object for everyone
  Solo,            // every process alone
  Pair12,          // {1,2} share, rest alone
  Pair12Triple,    // odd rounds {1,2}, even rounds everyone
  RotatingPairs,   // {1,2},{2,3},{1,3},... by round, rest alone
  ViewPairs,       // pair chosen from the view, never all three at n=3
  ViewParity,      // object = parity of (visible ones + round)
  ValFollow,       // object = previous safe-consensus output
  RoundParity,     // odd rounds shared, even rounds solo
  LowHigh,         // ids <= n/2 share one object, others another
  SeenCount,       // object = number of visible inputs
};
enum class DRule {
  MinVisible,  // min visible input
  Leader,      // input of the process named by val when visible, else min visible
  OwnInput,    // own input (not a consensus protocol)
  MaxVisible,  // max visible input
  Never,
};
const char* hrule_name(HRule h);
const char* drule_name(DRule d);

ProtocolAutomaton generic_automaton(const std::string& name, Model model, int n, HRule h, DRule d, int decide_round);

struct NamedAutomaton {
  std::string name;
  ProtocolAutomaton automaton;
};
// n=3 WOR automata with nu(3,2) <= 1 or nu(3,3) = 0.
std::vector<NamedAutomaton> wor_deficient_samples();
std::vector<NamedAutomaton> wro_samples(int n);
std::vector<NamedAutomaton> owr_samples(int n);
// looks up any of the above, "consensus", or "2cc"; n used where relevant
ProtocolAutomaton automaton_by_name(const std::string& name, int n);

}  // namespace itersc
