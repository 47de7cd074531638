// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "itersc/model.hpp"

namespace itersc {

// A deterministic protocol for the iterated models. Every callback receives
// the current round number r (1-based) and a process's local state.
//
// Per round, the process runs the events of its model in order:
//   W: cell <- write_payload(r, l)
//   S: obj <- select_object(r, l); l.val <- safe-consensus(obj, sc_input(r, l)); after_invoke(r, l)
//   R: l.sm <- scan; after_scan(r, l)
// then step(r, l), and if l.dec is bottom, l.dec <- decide(r, l).
struct ProtocolAutomaton {
  std::string name;
  Model model = Model::WOR;
  int round_budget = 0;  // rounds by which every process must decide; 0 = no bound

  std::function<Locals(int id, const Value& input)> init;
  std::function<ObjectIndex(int r, const LocalState& l)> select_object;
  std::function<Value(int r, const LocalState& l)> sc_input;
  std::function<Value(int r, const LocalState& l)> write_payload;
  std::function<void(int r, LocalState& l)> after_invoke;
  std::function<void(int r, LocalState& l)> after_scan;
  std::function<void(int r, LocalState& l)> step;
  std::function<Value(int r, const LocalState& l)> decide;

  nlohmann::json descriptor;

  ObjectIndex object_for(int r, const LocalState& l) const { return select_object(r, l); }
  Value invoke_input(int r, const LocalState& l) const {
    return sc_input ? sc_input(r, l) : Value::integer(l.id);
  }
  Value payload(int r, const LocalState& l) const {
    return write_payload ? write_payload(r, l) : Value::pair(l.sm, l.val);
  }
  Value decision(int r, const LocalState& l) const { return decide ? decide(r, l) : Value(); }
  nlohmann::json describe() const;
};

// make_initial_state plus the automaton's init hook.
GlobalState initial_state(const ProtocolAutomaton& p, const std::vector<Value>& inputs);
GlobalState initial_state(const ProtocolAutomaton& p, const std::vector<int>& inputs);

}  // namespace itersc
