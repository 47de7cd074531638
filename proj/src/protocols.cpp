// SPDX-License-Identifier: Apache-2.0
#include "itersc/protocols.hpp"

#include <algorithm>
#include <set>

namespace itersc {

nlohmann::json ProtocolAutomaton::describe() const {
  nlohmann::json d = descriptor.is_null() ? nlohmann::json::object() : descriptor;
  d["name"] = name;
  d["model"] = model_name(model);
  d["round_budget"] = round_budget;
  return d;
}

GlobalState initial_state(const ProtocolAutomaton& p, const std::vector<Value>& inputs) {
  GlobalState s = make_initial_state(static_cast<int>(inputs.size()), inputs, p.model);
  if (p.init)
    for (auto& l : s.locals) l.locals = p.init(l.id, l.input);
  return s;
}

GlobalState initial_state(const ProtocolAutomaton& p, const std::vector<int>& inputs) {
  std::vector<Value> v;
  for (int x : inputs) v.push_back(Value::integer(x));
  return initial_state(p, v);
}

std::int64_t tup(std::int64_t i, std::int64_t j) {
  if (i < 0 || j < 0) throw Error(ErrorCode::DomainError, "tup needs non-negative arguments");
  std::int64_t k = i + j + 1;
  return k * (k - 1) / 2 + j;
}

int gamma(int n, int m) {
  if (m < 0 || m >= n) throw Error(ErrorCode::DomainError, "gamma needs 0 <= m < n");
  int g = 0;
  for (int k = 1; k <= m; ++k) g += n - k;
  return g;
}

ProcessSet CoalitionGroup::members() const {
  ProcessSet s;
  for (int i = firstid; i <= lastid; ++i) s.insert(i);
  return s;
}

CoalitionGroup coalition_group(int n, int r) {
  if (n < 2) throw Error(ErrorCode::DomainError, "coalition_group needs n >= 2");
  if (r < 1 || r > gamma(n, n - 1)) throw Error(ErrorCode::DomainError, "round outside 1..C(n,2)");
  for (int m = 1; m < n; ++m) {
    if (r <= gamma(n, m)) {
      int c = r - gamma(n, m - 1);
      return {c, c + m, m};
    }
  }
  throw Error(ErrorCode::DomainError, "unreachable round");
}

bool validate_coalitions_tuple(const CoalitionsTuple& c) {
  if (c.size() < 2) return false;
  std::optional<Value> left, right;
  int no_right = 0;
  int no_left_at = -1, no_left_count = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto& [l, r] = c[k];
    if (l.is_bottom() && r.is_bottom()) return false;
    if (!l.is_bottom()) {
      if (left && !(*left == l)) return false;
      left = l;
    } else {
      ++no_left_count;
      no_left_at = static_cast<int>(k);
    }
    if (!r.is_bottom()) {
      if (right && !(*right == r)) return false;
      right = r;
    } else {
      ++no_right;
    }
  }
  return no_right == 1 && no_left_count == 1 && no_left_at == static_cast<int>(c.size()) - 1;
}

std::vector<Value> coalitions_inputs(const CoalitionsTuple& c) {
  std::vector<Value> out;
  for (const auto& [l, r] : c) out.push_back(Value::pair(l, r));
  return out;
}

namespace {

// First non-bottom left (or right) field among cells lo..hi of a scan.
Value pick_field(const Value& sm, int lo, int hi, bool right) {
  for (int j = lo; j <= hi; ++j) {
    if (static_cast<std::size_t>(j) > sm.size()) break;
    const Value& cell = sm[static_cast<std::size_t>(j - 1)];
    if (!cell.is_tuple() || cell.size() != 2) continue;
    const Value& f = right ? cell[1] : cell[0];
    if (!f.is_bottom()) return f;
  }
  return {};
}

std::string agr_key(std::int64_t t) { return "a/" + std::to_string(t); }

int local_int(const LocalState& l, const char* key) { return static_cast<int>(l.local(key).as_int()); }

}  // namespace

ProtocolAutomaton protocol_2cc(int g) {
  if (g < 2) throw Error(ErrorCode::InvalidConfiguration, "2cc needs g >= 2");
  ProtocolAutomaton p;
  p.name = "2cc(" + std::to_string(g) + ")";
  p.model = Model::WOR;
  p.round_budget = 1;
  p.select_object = [](int, const LocalState&) -> ObjectIndex { return 0; };
  p.write_payload = [](int, const LocalState& l) { return l.input; };
  p.decide = [g](int r, const LocalState& l) -> Value {
    if (r != 1) return {};
    bool right = l.val.is_int() && l.val.as_int() == g;
    return pick_field(l.sm, 1, g, right);
  };
  p.descriptor = {{"g", g}, {"objects", nlohmann::json::array({{{"round", 1}, {"group", ProcessSet::full(g).to_json()}}})}};
  return p;
}

Value agreement_entry(const LocalState& l, int i, int j) { return l.local(agr_key(tup(i, j))); }

ProtocolAutomaton protocol_consensus_wor(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidConfiguration, "consensus needs n >= 2");
  const int rounds = gamma(n, n - 1);
  const ObjectIndex trivial_base = 1000000;
  ProtocolAutomaton p;
  p.name = "consensus(" + std::to_string(n) + ")";
  p.model = Model::WOR;
  p.round_budget = rounds;
  p.init = [](int id, const Value& input) {
    Locals loc;
    loc["step"] = Value::integer(1);
    loc["firstid"] = Value::integer(1);
    loc["lastid"] = Value::integer(1);
    loc[agr_key(tup(id, id))] = input;
    return loc;
  };
  auto member = [](const LocalState& l) {
    int f = local_int(l, "firstid");
    int last = f + local_int(l, "step");
    return l.id >= f && l.id <= last;
  };
  p.select_object = [=](int r, const LocalState& l) -> ObjectIndex {
    if (member(l)) return r;
    return trivial_base + static_cast<ObjectIndex>(r) * (n + 1) + l.id;
  };
  p.write_payload = [=](int, const LocalState& l) {
    if (!member(l)) return Value::pair({}, {});
    int f = local_int(l, "firstid");
    int last = f + local_int(l, "step");
    return Value::pair(agreement_entry(l, f, last - 1), agreement_entry(l, f + 1, last));
  };
  p.step = [=](int, LocalState& l) {
    int f = local_int(l, "firstid");
    int s = local_int(l, "step");
    int last = f + s;
    if (member(l)) {
      bool right = l.val.is_int() && l.val.as_int() == last;
      l.locals[agr_key(tup(f, last))] = pick_field(l.sm, f, last, right);
    }
    l.locals["lastid"] = Value::integer(last);
    if (last < n) {
      l.locals["firstid"] = Value::integer(f + 1);
    } else if (f > 1) {
      l.locals["firstid"] = Value::integer(1);
      l.locals["step"] = Value::integer(s + 1);
    }
  };
  p.decide = [=](int r, const LocalState& l) -> Value {
    if (r != rounds) return {};
    return agreement_entry(l, 1, n);
  };
  auto table = nlohmann::json::array();
  for (int r = 1; r <= rounds; ++r) {
    auto g = coalition_group(n, r);
    table.push_back({{"round", r}, {"object", r}, {"group", g.members().to_json()}});
  }
  p.descriptor = {{"n", n}, {"objects", table}};
  return p;
}

namespace {
// pending decision of the simulated automaton; keyed by name so nested transforms do not collide
std::string dec_key(const ProtocolAutomaton& src) { return "~dec:" + src.name; }
}  // namespace

ProtocolAutomaton transform_wro_to_owr(const ProtocolAutomaton& a) {
  if (a.model != Model::WRO) throw Error(ErrorCode::ModelMismatch, "source must be a WRO automaton");
  ProtocolAutomaton b;
  b.name = "wro2owr(" + a.name + ")";
  b.model = Model::OWR;
  b.round_budget = a.round_budget ? a.round_budget + 1 : 0;
  b.init = a.init;
  const std::string key = dec_key(a);
  b.select_object = [a](int r, const LocalState& l) { return a.object_for(r - 1, l); };
  b.sc_input = [a](int r, const LocalState& l) { return a.invoke_input(r - 1, l); };
  b.after_invoke = [a, key](int r, LocalState& l) {
    if (r == 1) {
      l.val = Value();
      return;
    }
    if (a.after_invoke) a.after_invoke(r - 1, l);
    if (a.step) a.step(r - 1, l);
    if (l.local(key).is_bottom()) {
      Value d = a.decision(r - 1, l);
      if (!d.is_bottom()) l.locals[key] = d;
    }
  };
  b.write_payload = [a](int r, const LocalState& l) { return a.payload(r, l); };
  if (a.after_scan) b.after_scan = [a](int r, LocalState& l) { a.after_scan(r, l); };
  b.decide = [key](int, const LocalState& l) { return l.local(key); };
  b.descriptor = {{"transform", "wro->owr"}, {"source", a.describe()}};
  return b;
}

ProtocolAutomaton transform_owr_to_wro(const ProtocolAutomaton& b) {
  if (b.model != Model::OWR) throw Error(ErrorCode::ModelMismatch, "source must be an OWR automaton");
  ProtocolAutomaton a;
  a.name = "owr2wro(" + b.name + ")";
  a.model = Model::WRO;
  a.round_budget = b.round_budget ? b.round_budget + 1 : 0;
  a.init = b.init;
  const std::string key = dec_key(b);
  a.write_payload = [b](int r, const LocalState& l) { return b.payload(r - 1, l); };
  a.after_scan = [b, key](int r, LocalState& l) {
    if (r == 1) {
      l.sm = l.input;
      return;
    }
    if (b.after_scan) b.after_scan(r - 1, l);
    if (b.step) b.step(r - 1, l);
    if (l.local(key).is_bottom()) {
      Value d = b.decision(r - 1, l);
      if (!d.is_bottom()) l.locals[key] = d;
    }
  };
  a.select_object = [b](int r, const LocalState& l) { return b.object_for(r, l); };
  a.sc_input = [b](int r, const LocalState& l) { return b.invoke_input(r, l); };
  if (b.after_invoke) a.after_invoke = [b](int r, LocalState& l) { b.after_invoke(r, l); };
  a.decide = [key](int, const LocalState& l) { return l.local(key); };
  a.descriptor = {{"transform", "owr->wro"}, {"source", b.describe()}};
  return a;
}

namespace {

void collect_inputs(const Value& sm, int owner, std::map<int, Value>& out, std::set<std::pair<const void*, int>>& seen) {
  if (!seen.insert({sm.identity(), owner}).second) return;
  if (sm.is_int()) {
    out.emplace(owner, sm);
    return;
  }
  if (!sm.is_tuple()) return;
  for (std::size_t j = 0; j < sm.size(); ++j) {
    const Value& cell = sm[j];
    if (cell.is_tuple() && cell.size() == 2) collect_inputs(cell[0], static_cast<int>(j) + 1, out, seen);
  }
}

}  // namespace

std::map<int, Value> visible_inputs(const LocalState& l) {
  std::map<int, Value> out;
  out.emplace(l.id, l.input);
  std::set<std::pair<const void*, int>> seen;
  collect_inputs(l.sm, l.id, out, seen);
  return out;
}

const char* hrule_name(HRule h) {
  switch (h) {
    case HRule::Shared: return "shared";
    case HRule::Solo: return "solo";
    case HRule::Pair12: return "pair12";
    case HRule::Pair12Triple: return "pair12-triple";
    case HRule::RotatingPairs: return "rotating-pairs";
    case HRule::ViewPairs: return "view-pairs";
    case HRule::ViewParity: return "view-parity";
    case HRule::ValFollow: return "val-follow";
    case HRule::RoundParity: return "round-parity";
    case HRule::LowHigh: return "low-high";
    case HRule::SeenCount: return "seen-count";
  }
  return "?";
}

const char* drule_name(DRule d) {
  switch (d) {
    case DRule::MinVisible: return "min-visible";
    case DRule::Leader: return "leader";
    case DRule::OwnInput: return "own-input";
    case DRule::MaxVisible: return "max-visible";
    case DRule::Never: return "never";
  }
  return "?";
}

namespace {

int count_visible_ones(const LocalState& l) {
  int c = 0;
  for (const auto& [id, v] : visible_inputs(l))
    if (v.is_int() && v.as_int() == 1) ++c;
  return c;
}

ObjectIndex pick_object(HRule h, int n, int r, const LocalState& l) {
  const ObjectIndex solo = 100 + l.id;
  auto pair12 = [&]() -> ObjectIndex { return l.id <= 2 ? 1 : solo; };
  switch (h) {
    case HRule::Shared: return 1;
    case HRule::Solo: return solo;
    case HRule::Pair12: return pair12();
    case HRule::Pair12Triple: return (r % 2 != 0) ? pair12() : 1;
    case HRule::RotatingPairs: {
      static const int pairs[3][2] = {{1, 2}, {2, 3}, {1, 3}};
      int k = ((r - 1) % 3 + 3) % 3;
      if (l.id == pairs[k][0] || l.id == pairs[k][1]) return 10 + k;
      return solo;
    }
    case HRule::ViewPairs: {
      // objects named by the pair they serve: 12, 13, 23
      static const int options[4][2] = {{0, 0}, {12, 13}, {12, 23}, {13, 23}};
      if (l.id > 3) return solo;
      int bit = (count_visible_ones(l) + r) % 2;
      return options[l.id][bit];
    }
    case HRule::ViewParity: return (count_visible_ones(l) + r) % 2;
    case HRule::ValFollow: return l.val.is_int() ? l.val.as_int() : 0;
    case HRule::RoundParity: return (r % 2 != 0) ? 1 : solo;
    case HRule::LowHigh: return l.id <= n / 2 ? 1 : 2;
    case HRule::SeenCount: return static_cast<ObjectIndex>(visible_inputs(l).size());
  }
  return solo;
}

Value pick_decision(DRule d, const LocalState& l) {
  auto vis = visible_inputs(l);
  switch (d) {
    case DRule::MinVisible: {
      Value best = vis.begin()->second;
      for (const auto& [id, v] : vis) best = std::min(best, v);
      return best;
    }
    case DRule::MaxVisible: {
      Value best = vis.begin()->second;
      for (const auto& [id, v] : vis) best = std::max(best, v);
      return best;
    }
    case DRule::Leader: {
      if (l.val.is_int()) {
        auto it = vis.find(static_cast<int>(l.val.as_int()));
        if (it != vis.end()) return it->second;
      }
      return pick_decision(DRule::MinVisible, l);
    }
    case DRule::OwnInput: return l.input;
    case DRule::Never: return {};
  }
  return {};
}

}  // namespace

ProtocolAutomaton generic_automaton(const std::string& name, Model model, int n, HRule h, DRule d, int decide_round) {
  ProtocolAutomaton p;
  p.name = name;
  p.model = model;
  p.round_budget = d == DRule::Never ? 0 : decide_round;
  p.select_object = [h, n](int r, const LocalState& l) { return pick_object(h, n, r, l); };
  p.decide = [d, decide_round](int r, const LocalState& l) -> Value {
    if (r < decide_round) return {};
    return pick_decision(d, l);
  };
  p.descriptor = {{"h", hrule_name(h)}, {"delta", drule_name(d)}, {"decide_round", decide_round}, {"n", n}};
  return p;
}

std::vector<NamedAutomaton> wor_deficient_samples() {
  struct Row {
    const char* name;
    HRule h;
    DRule d;
    int round;
  };
  static const Row rows[] = {
      {"lb-solo", HRule::Solo, DRule::MinVisible, 1},
      {"lb-pair12", HRule::Pair12, DRule::Leader, 2},
      {"lb-pair12-triple", HRule::Pair12Triple, DRule::Leader, 2},
      {"lb-rotating", HRule::RotatingPairs, DRule::MinVisible, 2},
      {"lb-view-pairs", HRule::ViewPairs, DRule::Leader, 1},
  };
  std::vector<NamedAutomaton> out;
  for (const auto& r : rows) out.push_back({r.name, generic_automaton(r.name, Model::WOR, 3, r.h, r.d, r.round)});
  return out;
}

std::vector<NamedAutomaton> wro_samples(int n) {
  struct Row {
    const char* name;
    HRule h;
    DRule d;
    int round;
  };
  static const Row rows[] = {
      {"wro-shared-min", HRule::Shared, DRule::MinVisible, 1},
      {"wro-solo-min", HRule::Solo, DRule::MinVisible, 2},
      {"wro-pair12-leader", HRule::Pair12, DRule::Leader, 1},
      {"wro-rotating-leader", HRule::RotatingPairs, DRule::Leader, 2},
      {"wro-viewparity-min", HRule::ViewParity, DRule::MinVisible, 2},
      {"wro-valfollow-leader", HRule::ValFollow, DRule::Leader, 2},
      {"wro-roundparity-max", HRule::RoundParity, DRule::MaxVisible, 2},
      {"wro-lowhigh-leader", HRule::LowHigh, DRule::Leader, 1},
      {"wro-seencount-min", HRule::SeenCount, DRule::MinVisible, 3},
      {"wro-shared-never", HRule::Shared, DRule::Never, 1},
  };
  std::vector<NamedAutomaton> out;
  for (const auto& r : rows) out.push_back({r.name, generic_automaton(r.name, Model::WRO, n, r.h, r.d, r.round)});
  return out;
}

std::vector<NamedAutomaton> owr_samples(int n) {
  struct Row {
    const char* name;
    HRule h;
    DRule d;
    int round;
  };
  static const Row rows[] = {
      {"owr-shared-leader", HRule::Shared, DRule::Leader, 1},
      {"owr-pair12-min", HRule::Pair12, DRule::MinVisible, 2},
      {"owr-viewparity-leader", HRule::ViewParity, DRule::Leader, 2},
      {"owr-valfollow-max", HRule::ValFollow, DRule::MaxVisible, 3},
      {"owr-lowhigh-own", HRule::LowHigh, DRule::OwnInput, 1},
  };
  std::vector<NamedAutomaton> out;
  for (const auto& r : rows) out.push_back({r.name, generic_automaton(r.name, Model::OWR, n, r.h, r.d, r.round)});
  return out;
}

ProtocolAutomaton automaton_by_name(const std::string& name, int n) {
  if (name == "consensus") return protocol_consensus_wor(n);
  if (name == "2cc") return protocol_2cc(n);
  for (auto& s : wor_deficient_samples())
    if (s.name == name) return s.automaton;
  for (auto& s : wro_samples(n))
    if (s.name == name) return s.automaton;
  for (auto& s : owr_samples(n))
    if (s.name == name) return s.automaton;
  throw Error(ErrorCode::InvalidConfiguration, "unknown protocol " + name);
}

}  // namespace itersc
