// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "itersc/common.hpp"
#include "itersc/value.hpp"

namespace itersc {

using ObjectIndex = std::int64_t;
using Locals = std::map<std::string, Value>;

struct LocalState {
  int id = 0;
  int round = 0;
  Value input;
  Value sm;
  Value val;
  Value dec;
  Locals locals;

  const Value& local(const std::string& key) const;
  std::uint64_t hash() const;
  bool operator==(const LocalState& o) const = default;
  nlohmann::json to_json() const;
};

// One-shot snapshot object of one round.
class SnapshotObject {
 public:
  SnapshotObject() = default;
  explicit SnapshotObject(int n) : cells_(static_cast<std::size_t>(n)) {}

  void update(int id, Value v);
  Value scan(int id);

  int n() const { return static_cast<int>(cells_.size()); }
  const std::vector<Value>& cells() const { return cells_; }
  ProcessSet updated_by() const { return updated_by_; }
  ProcessSet scanned_by() const { return scanned_by_; }
  nlohmann::json to_json() const;

 private:
  std::vector<Value> cells_;
  ProcessSet updated_by_;
  ProcessSet scanned_by_;
};

struct SafeConsensusInstance {
  int round = 0;
  ObjectIndex object = 0;
  ProcessSet invokers;
  std::map<int, Value> inputs;
  std::optional<Value> output;
  ProcessSet first_group;  // invokers of this object in its first invoke group
  bool contended = false;  // adversary was consulted

  nlohmann::json to_json() const;
};

struct RoundRecord {
  int round = 0;
  SnapshotObject memory;
  std::vector<SafeConsensusInstance> instances;  // sorted by object index
  std::shared_ptr<const RoundRecord> prev;
};

using Box = ProcessSet;

struct InvocationSpec {
  std::vector<Box> boxes;  // canonical order (by least member)

  bool contains(Box b) const;
  nlohmann::json to_json() const;
  friend bool operator==(const InvocationSpec&, const InvocationSpec&) = default;
};

class GlobalState {
 public:
  Model model = Model::WOR;
  int n = 0;
  int round = 0;
  std::vector<LocalState> locals;  // locals[i-1] is process i
  std::shared_ptr<const RoundRecord> last;

  const LocalState& local(int id) const { return locals.at(static_cast<std::size_t>(id - 1)); }
  std::uint64_t locals_hash() const;
  bool same_locals(const GlobalState& o) const { return round == o.round && locals == o.locals; }
  // digest of the locals only, stable across runs
  std::string digest() const;
  nlohmann::json to_json() const;
};

GlobalState make_initial_state(int n, const std::vector<Value>& inputs, Model model);
GlobalState make_initial_state(int n, const std::vector<int>& inputs, Model model);

// Output of one instance given the ordered invoke groups of its round.
Value resolve_safe_consensus(const SafeConsensusInstance& inst, const std::vector<ProcessSet>& invoke_groups,
                             std::optional<int> adversary_choice, int n);

ProcessSet indistinguishability_set(const GlobalState& s, const GlobalState& q);
InvocationSpec invocation_spec(const GlobalState& s);
Value sc_value_of(Box b, const GlobalState& s);
const SafeConsensusInstance& instance_of(Box b, const GlobalState& s);

std::vector<Value> decisions_of(const GlobalState& s);

}  // namespace itersc
