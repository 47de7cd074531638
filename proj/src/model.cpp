// SPDX-License-Identifier: Apache-2.0
#include "itersc/model.hpp"

#include <algorithm>

namespace itersc {

const Value& LocalState::local(const std::string& key) const {
  static const Value bottom;
  auto it = locals.find(key);
  return it == locals.end() ? bottom : it->second;
}

std::uint64_t LocalState::hash() const {
  std::uint64_t h = hash_combine(static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(round));
  h = hash_combine(h, input.hash());
  h = hash_combine(h, sm.hash());
  h = hash_combine(h, val.hash());
  h = hash_combine(h, dec.hash());
  for (const auto& [k, v] : locals) {
    h = hash_combine(h, fnv1a(k));
    h = hash_combine(h, v.hash());
  }
  return h;
}

nlohmann::json LocalState::to_json() const {
  nlohmann::json loc = nlohmann::json::object();
  for (const auto& [k, v] : locals) loc[k] = v.to_json();
  return {{"id", id},   {"round", round},      {"input", input.to_json()}, {"sm", sm.to_json()},
          {"val", val.to_json()}, {"dec", dec.to_json()}, {"locals", loc}};
}

void SnapshotObject::update(int id, Value v) {
  if (id < 1 || id > n()) throw Error(ErrorCode::InvalidArgument, "update by unknown process");
  if (updated_by_.contains(id)) throw Error(ErrorCode::InvalidSchedule, "process updated twice in one round");
  cells_[static_cast<std::size_t>(id - 1)] = std::move(v);
  updated_by_.insert(id);
}

Value SnapshotObject::scan(int id) {
  if (id < 1 || id > n()) throw Error(ErrorCode::InvalidArgument, "scan by unknown process");
  if (scanned_by_.contains(id)) throw Error(ErrorCode::InvalidSchedule, "process scanned twice in one round");
  scanned_by_.insert(id);
  return Value::tuple(cells_);
}

nlohmann::json SnapshotObject::to_json() const {
  auto cells = nlohmann::json::array();
  for (const auto& c : cells_) cells.push_back(c.to_json());
  return {{"cells", cells}, {"updated_by", updated_by_.to_json()}, {"scanned_by", scanned_by_.to_json()}};
}

nlohmann::json SafeConsensusInstance::to_json() const {
  nlohmann::json in = nlohmann::json::object();
  for (const auto& [k, v] : inputs) in[std::to_string(k)] = v.to_json();
  return {{"round", round},
          {"object", object},
          {"invokers", invokers.to_json()},
          {"inputs", in},
          {"output", output ? output->to_json() : nlohmann::json(nullptr)},
          {"contended", contended}};
}

bool InvocationSpec::contains(Box b) const { return std::find(boxes.begin(), boxes.end(), b) != boxes.end(); }

nlohmann::json InvocationSpec::to_json() const {
  auto arr = nlohmann::json::array();
  for (auto b : boxes) arr.push_back(b.to_json());
  return arr;
}

std::uint64_t GlobalState::locals_hash() const {
  std::uint64_t h = static_cast<std::uint64_t>(round);
  for (const auto& l : locals) h = hash_combine(h, l.hash());
  return h;
}

std::string GlobalState::digest() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : locals) arr.push_back(l.to_json());
  return hex64(fnv1a(arr.dump()));
}

nlohmann::json GlobalState::to_json() const {
  nlohmann::json loc = nlohmann::json::array();
  for (const auto& l : locals) loc.push_back(l.to_json());
  std::vector<const RoundRecord*> recs;
  for (auto r = last.get(); r; r = r->prev.get()) recs.push_back(r);
  std::reverse(recs.begin(), recs.end());
  nlohmann::json memory = nlohmann::json::array();
  nlohmann::json inst = nlohmann::json::array();
  for (const auto* r : recs) {
    auto m = r->memory.to_json();
    m["round"] = r->round;
    memory.push_back(m);
    for (const auto& i : r->instances) inst.push_back(i.to_json());
  }
  return {{"model", model_name(model)}, {"n", n}, {"round", round}, {"locals", loc}, {"memory", memory},
          {"sc_instances", inst}};
}

GlobalState make_initial_state(int n, const std::vector<Value>& inputs, Model model) {
  if (n < 2) throw Error(ErrorCode::InvalidConfiguration, "need at least two processes");
  if (n > 30) throw Error(ErrorCode::InvalidConfiguration, "too many processes");
  if (static_cast<int>(inputs.size()) != n) throw Error(ErrorCode::InvalidConfiguration, "input vector length differs from n");
  GlobalState s;
  s.model = model;
  s.n = n;
  s.round = 0;
  for (int i = 1; i <= n; ++i) {
    LocalState l;
    l.id = i;
    l.input = inputs[static_cast<std::size_t>(i - 1)];
    l.sm = l.input;
    s.locals.push_back(std::move(l));
  }
  return s;
}

GlobalState make_initial_state(int n, const std::vector<int>& inputs, Model model) {
  std::vector<Value> v;
  for (int x : inputs) v.push_back(Value::integer(x));
  return make_initial_state(n, v, model);
}

Value resolve_safe_consensus(const SafeConsensusInstance& inst, const std::vector<ProcessSet>& invoke_groups,
                             std::optional<int> adversary_choice, int n) {
  if (inst.invokers.empty()) throw Error(ErrorCode::InvalidArgument, "instance without invokers");
  ProcessSet seen;
  for (auto g : invoke_groups) seen = seen | g;
  if (!inst.invokers.subset_of(seen)) throw Error(ErrorCode::InvalidArgument, "invoker missing from schedule context");
  auto input_of = [&](int id) {
    auto it = inst.inputs.find(id);
    return it == inst.inputs.end() ? Value::integer(id) : it->second;
  };
  if (inst.invokers.size() == 1) return input_of(inst.invokers.min());
  for (auto g : invoke_groups) {
    ProcessSet first = g & inst.invokers;
    if (first.empty()) continue;
    if (first.size() == 1) return input_of(first.min());
    break;
  }
  if (!adversary_choice) throw Error(ErrorCode::UnresolvedInstance, "contended instance needs an adversary choice");
  if (*adversary_choice < 1 || *adversary_choice > n)
    throw Error(ErrorCode::InvalidAdversary, "adversary value outside 1.." + std::to_string(n));
  return Value::integer(*adversary_choice);
}

ProcessSet indistinguishability_set(const GlobalState& s, const GlobalState& q) {
  if (s.round != q.round) throw Error(ErrorCode::RoundMismatch, "states at different rounds");
  if (s.n != q.n) throw Error(ErrorCode::InvalidArgument, "states with different n");
  ProcessSet out;
  for (int i = 1; i <= s.n; ++i)
    if (s.local(i) == q.local(i)) out.insert(i);
  return out;
}

InvocationSpec invocation_spec(const GlobalState& s) {
  if (s.round == 0 || !s.last) throw Error(ErrorCode::NoInvocations, "initial state has no invocations");
  InvocationSpec spec;
  for (const auto& i : s.last->instances) spec.boxes.push_back(i.invokers);
  std::sort(spec.boxes.begin(), spec.boxes.end(), [](Box a, Box b) { return a.min() < b.min(); });
  return spec;
}

const SafeConsensusInstance& instance_of(Box b, const GlobalState& s) {
  if (s.round == 0 || !s.last) throw Error(ErrorCode::MissingBox, "no round has been run");
  for (const auto& i : s.last->instances)
    if (i.invokers == b) return i;
  throw Error(ErrorCode::MissingBox, "box " + b.str() + " not in the invocation specification");
}

Value sc_value_of(Box b, const GlobalState& s) { return *instance_of(b, s).output; }

std::vector<Value> decisions_of(const GlobalState& s) {
  std::vector<Value> out;
  for (const auto& l : s.locals) out.push_back(l.dec);
  return out;
}

}  // namespace itersc
