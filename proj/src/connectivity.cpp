// SPDX-License-Identifier: Apache-2.0
#include "itersc/connectivity.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "itersc/johnson.hpp"

namespace itersc {

namespace {

nlohmann::json sigma_json(const Sigma& s) {
  auto arr = nlohmann::json::array();
  for (auto g : s) arr.push_back(g.to_json());
  return arr;
}

std::string dec_str(const GlobalState& s) {
  std::string out;
  for (const auto& l : s.locals) out += l.dec.is_bottom() ? "_" : l.dec.str();
  return out;
}

}  // namespace

int Path::degree() const {
  if (labels.empty()) return n();
  int d = n();
  for (auto l : labels) d = std::min(d, l.size());
  return d;
}

std::set<ProcessSet> Path::isets() const { return {labels.begin(), labels.end()}; }

nlohmann::json Path::to_json() const {
  nlohmann::json j;
  auto st = nlohmann::json::array();
  for (std::size_t k = 0; k < states.size(); ++k) {
    nlohmann::json e = {{"round", states[k].round}, {"digest", states[k].digest()}};
    auto d = nlohmann::json::array();
    for (const auto& l : states[k].locals) d.push_back(l.dec.to_json());
    e["dec"] = d;
    if (k < parents.size()) e["parent"] = parents[k];
    if (k < sigmas.size()) e["sigma"] = sigma_json(sigmas[k]);
    st.push_back(e);
  }
  j["states"] = st;
  auto lab = nlohmann::json::array();
  for (auto l : labels) lab.push_back(l.to_json());
  j["labels"] = lab;
  j["degree"] = degree();
  auto is = nlohmann::json::array();
  for (auto l : isets()) is.push_back(l.to_json());
  j["isets"] = is;
  return j;
}

std::string Path::to_dot(const std::string& name) const {
  std::ostringstream o;
  o << "graph " << name << " {\n";
  for (std::size_t k = 0; k < states.size(); ++k)
    o << "  s" << k << " [label=\"" << k << " r" << states[k].round << " dec=" << dec_str(states[k]) << "\"];\n";
  for (std::size_t k = 0; k < labels.size(); ++k)
    o << "  s" << k << " -- s" << k + 1 << " [label=\"" << labels[k].str() << "\"];\n";
  o << "}\n";
  return o.str();
}

Path singleton_path(const GlobalState& s) {
  Path p;
  p.states.push_back(s);
  p.parents.push_back(-1);
  return p;
}

PathCheck verify_path(const Path& p) {
  PathCheck c;
  if (p.states.empty()) {
    c.ok = false;
    c.detail = "empty path";
    return c;
  }
  if (p.labels.size() + 1 != p.states.size()) {
    c.ok = false;
    c.detail = "label count does not match state count";
    return c;
  }
  for (std::size_t k = 0; k < p.labels.size(); ++k) {
    const auto& a = p.states[k];
    const auto& b = p.states[k + 1];
    if (a.round != b.round) {
      c.ok = false;
      c.bad_edge = static_cast<long>(k);
      c.detail = "states of different rounds";
      return c;
    }
    if (p.labels[k].empty()) {
      c.ok = false;
      c.bad_edge = static_cast<long>(k);
      c.detail = "empty label";
      return c;
    }
    auto ind = indistinguishability_set(a, b);
    if (!p.labels[k].subset_of(ind)) {
      c.ok = false;
      c.bad_edge = static_cast<long>(k);
      c.detail = "label " + p.labels[k].str() + " not inside " + ind.str();
      return c;
    }
  }
  return c;
}

Path loop_erase(const Path& p) {
  Path out;
  std::unordered_multimap<std::uint64_t, std::size_t> seen;
  for (std::size_t k = 0; k < p.states.size(); ++k) {
    const auto& s = p.states[k];
    auto h = s.locals_hash();
    long hit = -1;
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it)
      if (out.states[it->second].same_locals(s)) hit = static_cast<long>(it->second);
    if (hit >= 0) {
      auto keep = static_cast<std::size_t>(hit) + 1;
      for (std::size_t j = keep; j < out.states.size(); ++j) {
        auto h2 = out.states[j].locals_hash();
        auto [a, b] = seen.equal_range(h2);
        for (auto it = a; it != b; ++it)
          if (it->second == j) {
            seen.erase(it);
            break;
          }
      }
      out.states.resize(keep);
      out.labels.resize(keep - 1);
      if (out.parents.size() > keep) out.parents.resize(keep);
      if (out.sigmas.size() > keep) out.sigmas.resize(keep);
      continue;
    }
    if (k > 0) out.labels.push_back(p.labels[k - 1]);
    seen.emplace(h, out.states.size());
    out.states.push_back(s);
    if (k < p.parents.size()) out.parents.push_back(p.parents[k]);
    if (k < p.sigmas.size()) out.sigmas.push_back(p.sigmas[k]);
  }
  return out;
}

std::size_t IndistGraph::edge_count() const {
  std::size_t c = 0;
  for (const auto& a : adj) c += a.size();
  return c / 2;
}

IndistGraph build_indist_graph(const std::vector<GlobalState>& states) {
  IndistGraph g;
  g.states = states;
  g.adj.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      auto ind = indistinguishability_set(states[i], states[j]);
      if (ind.empty()) continue;
      g.adj[i].push_back({j, ind});
      g.adj[j].push_back({i, ind});
    }
  return g;
}

std::optional<Path> find_path(const IndistGraph& g, std::size_t s, std::size_t q, int min_degree) {
  if (s >= g.states.size() || q >= g.states.size()) throw Error(ErrorCode::InvalidArgument, "state index out of range");
  std::vector<long> prev(g.states.size(), -2);
  std::vector<ProcessSet> via(g.states.size());
  std::deque<std::size_t> queue{s};
  prev[s] = -1;
  while (!queue.empty()) {
    auto x = queue.front();
    queue.pop_front();
    if (x == q) break;
    for (auto [y, lab] : g.adj[x]) {
      if (prev[y] != -2 || lab.size() < min_degree) continue;
      prev[y] = static_cast<long>(x);
      via[y] = lab;
      queue.push_back(y);
    }
  }
  if (prev[q] == -2) return std::nullopt;
  std::vector<std::size_t> order;
  for (long x = static_cast<long>(q); x >= 0; x = prev[static_cast<std::size_t>(x)]) order.push_back(static_cast<std::size_t>(x));
  std::reverse(order.begin(), order.end());
  Path p;
  for (std::size_t k = 0; k < order.size(); ++k) {
    p.states.push_back(g.states[order[k]]);
    p.parents.push_back(-1);
    if (k > 0) p.labels.push_back(via[order[k]]);
  }
  return p;
}

bool is_b_regular(const Path& p) {
  if (p.states.empty()) return true;
  auto first = invocation_spec(p.states.front());
  for (std::size_t k = 1; k < p.states.size(); ++k)
    if (!(invocation_spec(p.states[k]) == first)) return false;
  return true;
}

InvocationSpec successor_boxes(const GlobalState& s, const ProtocolAutomaton& p, const Sigma& sigma) {
  LowestContenderAdversary adv;
  return invocation_spec(apply_round(s, sigma_schedule(sigma, s.n, p.model), adv, p));
}

void Plan::add(const GlobalState* src, long idx, Sigma sigma, std::optional<ProcessSet> label_from_prev, bool dedupe) {
  if (!src) throw Error(ErrorCode::InvalidArgument, "plan node without source state");
  sigma = canonical_sigma(sigma, src->n);
  if (dedupe && !nodes.empty() && nodes.back().source == src && nodes.back().sigma == sigma) return;
  if (!nodes.empty() && !label_from_prev) throw Error(ErrorCode::InvalidArgument, "plan edge without label");
  PlanNode nd;
  nd.source = src;
  nd.source_index = idx;
  nd.sigma = std::move(sigma);
  nodes.push_back(std::move(nd));
  if (nodes.size() > 1) labels.push_back(*label_from_prev);
}

namespace {

struct CandidateCache {
  std::map<std::pair<const GlobalState*, std::vector<std::uint32_t>>, std::vector<RoundResult>> map;

  const std::vector<RoundResult>& get(const PlanNode& nd, const ProtocolAutomaton& p) {
    std::vector<std::uint32_t> key;
    for (auto g : nd.sigma) key.push_back(g.bits());
    auto k = std::make_pair(nd.source, key);
    auto it = map.find(k);
    if (it != map.end()) return it->second;
    auto res = round_successors(*nd.source, sigma_schedule(nd.sigma, nd.source->n, p.model), p);
    return map.emplace(k, std::move(res)).first->second;
  }
};

bool pins_match(const RoundResult& rr, const std::map<ObjectIndex, int>& pins) {
  for (const auto& c : rr.choices) {
    auto it = pins.find(c.object);
    if (it != pins.end() && it->second != c.value) return false;
  }
  return true;
}

int agreement(const AdversaryChoices& a, const AdversaryChoices& b) {
  int k = 0;
  for (const auto& x : a)
    for (const auto& y : b)
      if (x.object == y.object && x.value == y.value) ++k;
  return k;
}

}  // namespace

Path realize(const Plan& plan, const ProtocolAutomaton& p) {
  if (plan.nodes.empty()) throw Error(ErrorCode::InvalidArgument, "empty plan");
  CandidateCache cache;
  const std::size_t K = plan.nodes.size();
  std::vector<std::vector<const RoundResult*>> cand(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (const auto& rr : cache.get(plan.nodes[k], p))
      if (pins_match(rr, plan.nodes[k].pins)) cand[k].push_back(&rr);
    if (cand[k].empty())
      throw Error(ErrorCode::ConstructionFailed, "plan node " + std::to_string(k) + " has no state matching its pins");
  }
  // feasible[k][c]: some chain of candidates reaches cand[k][c] with every claimed label respected
  std::vector<std::vector<char>> feasible(K);
  feasible[0].assign(cand[0].size(), 1);
  for (std::size_t k = 1; k < K; ++k) {
    feasible[k].assign(cand[k].size(), 0);
    bool any = false;
    for (std::size_t c = 0; c < cand[k].size(); ++c)
      for (std::size_t d = 0; d < cand[k - 1].size(); ++d) {
        if (!feasible[k - 1][d]) continue;
        if (plan.labels[k - 1].subset_of(indistinguishability_set(cand[k - 1][d]->state, cand[k][c]->state))) {
          feasible[k][c] = 1;
          any = true;
          break;
        }
      }
    if (!any)
      throw Error(ErrorCode::ConstructionFailed, "no adversary values realize edge " + std::to_string(k - 1) + " (" +
                                                     sigma_str(plan.nodes[k - 1].sigma) + " ~" +
                                                     plan.labels[k - 1].str() + "~ " + sigma_str(plan.nodes[k].sigma) +
                                                     ")");
  }
  std::vector<std::size_t> pick(K);
  pick[K - 1] = static_cast<std::size_t>(std::find(feasible[K - 1].begin(), feasible[K - 1].end(), 1) - feasible[K - 1].begin());
  for (std::size_t k = K - 1; k > 0; --k) {
    const auto* succ = cand[k][pick[k]];
    long best = -1;
    int best_score = -1;
    for (std::size_t d = 0; d < cand[k - 1].size(); ++d) {
      if (!feasible[k - 1][d]) continue;
      if (!plan.labels[k - 1].subset_of(indistinguishability_set(cand[k - 1][d]->state, succ->state))) continue;
      int score = agreement(cand[k - 1][d]->choices, succ->choices);
      if (score > best_score) {
        best_score = score;
        best = static_cast<long>(d);
      }
    }
    pick[k - 1] = static_cast<std::size_t>(best);
  }
  Path out;
  for (std::size_t k = 0; k < K; ++k) {
    out.states.push_back(cand[k][pick[k]]->state);
    out.parents.push_back(plan.nodes[k].source_index);
    out.sigmas.push_back(plan.nodes[k].sigma);
  }
  out.labels = plan.labels;
  return out;
}

namespace {

void require_model(const ProtocolAutomaton& p, Model m) {
  if (p.model != m) throw Error(ErrorCode::ModelMismatch, std::string("construction needs a ") + model_name(m) + " automaton");
}

// Path from S.sigma<X> to S.sigma<full> inside one state, as (sigma, label) steps.
using Steps = std::vector<std::pair<Sigma, ProcessSet>>;

Steps partition_bridge(ProcessSet x, int n) {
  ProcessSet all = ProcessSet::full(n);
  if (x == all) return {};
  return {{Sigma{}, all - x}};
}

Steps no3box_bridge(const InvocationSpec& spec, ProcessSet x, int n) {
  ProcessSet all = ProcessSet::full(n);
  std::optional<Box> b;
  for (auto bx : spec.boxes) {
    if (bx.size() >= 3) throw Error(ErrorCode::PreconditionViolation, "successor has a box of size 3");
    if (bx.size() == 2) b = bx;
  }
  if (!b) return partition_bridge(x, n);
  ProcessSet c = all - *b;
  if (x.size() == 1) return {{Sigma{}, x == c ? *b : c}};
  if (x == *b) return {{Sigma{}, c}};
  // x = {j} with j in b, plus c
  ProcessSet j = x & *b;
  return {{Sigma{j, c}, c}, {Sigma{j}, *b}, {Sigma{}, c}};
}

void append_bridge_between(Plan& plan, const GlobalState* s, long idx, const Steps& to_full_a, const Steps& to_full_b,
                           ProcessSet b_start, int n) {
  for (const auto& [sg, lab] : to_full_a) plan.add(s, idx, sg, lab);
  // reverse of the second bridge: sigmas walk back from full to sigma<b_start>
  for (std::size_t k = to_full_b.size(); k-- > 0;) {
    Sigma sg = k == 0 ? Sigma{b_start} : to_full_b[k - 1].first;
    plan.add(s, idx, sg, to_full_b[k].second);
  }
  (void)n;
}

std::vector<ProcessSet> split_blocks(ProcessSet part) {
  std::vector<ProcessSet> out;
  auto m = part.members();
  if (m.size() <= 2) {
    if (!m.empty()) out.push_back(part);
    return out;
  }
  out.push_back(ProcessSet{m[0], m[1]});
  for (std::size_t i = 2; i < m.size(); ++i) out.push_back(ProcessSet::single(m[i]));
  return out;
}

Sigma concat(const std::vector<ProcessSet>& a, const std::vector<ProcessSet>& b) {
  Sigma s = a;
  s.insert(s.end(), b.begin(), b.end());
  return s;
}

// Steps from sigma<X> to the ladder state <C1..Cu, X and b>.
Steps ladder_steps(const InvocationSpec& spec, ProcessSet x, Box b, int n, std::vector<ProcessSet>& groups) {
  ProcessSet all = ProcessSet::full(n);
  Steps out;
  groups.clear();
  ProcessSet rest = x;
  for (auto bk : spec.boxes) {
    if (bk == b) continue;
    for (auto d : split_blocks(x & bk)) {
      groups.push_back(d);
      rest = rest - d;
      out.push_back({concat(groups, {rest}), all - d});
    }
  }
  return out;
}

void add_steps(Plan& plan, const GlobalState* s, long idx, const Steps& st) {
  for (const auto& [sg, lab] : st) plan.add(s, idx, sg, lab);
}

void add_steps_reversed(Plan& plan, const GlobalState* s, long idx, const Sigma& start, const Steps& st) {
  for (std::size_t k = st.size(); k-- > 0;) plan.add(s, idx, k == 0 ? start : st[k - 1].first, st[k].second);
}

// Appends the path S.sigma<X> ~ ... ~ S.sigma<Y>; assumes the plan already ends at S.sigma<X>.
void append_one_round(Plan& plan, const GlobalState* s, long idx, const InvocationSpec& spec, ProcessSet x, ProcessSet y,
                      const std::set<Box>& switching, int n) {
  ProcessSet all = ProcessSet::full(n);
  ProcessSet cur = x;
  for (auto b : spec.boxes) {
    ProcessSet next = (cur - (cur & b)) | (y & b);
    bool sw = switching.count(b) > 0;
    if (next == cur && !sw) continue;
    std::vector<ProcessSet> cs;
    add_steps(plan, s, idx, ladder_steps(spec, cur, b, n, cs));
    // phase 2, first half: peel X_b into blocks and merge back into the last group
    ProcessSet xb = cur & b;
    auto dblocks = split_blocks(xb);
    std::vector<ProcessSet> pre;
    ProcessSet left = xb;
    for (auto d : dblocks) {
      pre.push_back(d);
      left = left - d;
      Sigma sg = concat(cs, pre);
      if (!left.empty()) sg.push_back(left);
      plan.add(s, idx, sg, all - d);
    }
    for (std::size_t k = dblocks.size(); k-- > 0;) {
      std::vector<ProcessSet> head(pre.begin(), pre.begin() + static_cast<long>(k));
      plan.add(s, idx, concat(cs, head), all - dblocks[k]);
    }
    // second half: optional value switch at <C>, then peel Y_b and merge back
    ProcessSet yb = next & b;
    auto eblocks = split_blocks(yb);
    if (eblocks.empty()) {
      if (sw) plan.add(s, idx, cs, all - b, false);
    } else {
      std::vector<ProcessSet> epre;
      for (std::size_t k = 0; k < eblocks.size(); ++k) {
        epre.push_back(eblocks[k]);
        ProcessSet lab = (k == 0 && sw) ? all - b : all - eblocks[k];
        plan.add(s, idx, concat(cs, epre), lab, !(k == 0 && sw));
      }
      for (std::size_t k = eblocks.size() - 1; k-- > 0;) {
        std::vector<ProcessSet> head(epre.begin(), epre.begin() + static_cast<long>(k));
        ProcessSet tailset;
        for (std::size_t t = k; t < eblocks.size(); ++t) tailset = tailset | eblocks[t];
        Sigma sg = concat(cs, head);
        sg.push_back(tailset);
        plan.add(s, idx, sg, all - eblocks[k]);
      }
    }
    std::vector<ProcessSet> cs2;
    auto back = ladder_steps(spec, next, b, n, cs2);
    add_steps_reversed(plan, s, idx, Sigma{next}, back);
    cur = next;
  }
}

std::map<ObjectIndex, int> choice_pins(const AdversaryChoices& ch) {
  std::map<ObjectIndex, int> out;
  for (const auto& c : ch) out[c.object] = c.value;
  return out;
}

}  // namespace

namespace {

// Every successor box other than the full one lies inside A or inside B.
void check_partition_boxes(const GlobalState& s, ProcessSet a, ProcessSet b, const ProtocolAutomaton& p) {
  ProcessSet all = ProcessSet::full(s.n);
  if (a.empty() || b.empty() || a.intersects(b) || !((a | b) == all))
    throw Error(ErrorCode::PreconditionViolation, "A and B must partition 1..n");
  for (auto bx : successor_boxes(s, p).boxes)
    if (!(bx == all) && !bx.subset_of(a) && !bx.subset_of(b))
      throw Error(ErrorCode::PreconditionViolation, "box " + bx.str() + " meets both " + a.str() + " and " + b.str());
}

}  // namespace

Path connect_partition_round(const GlobalState& s, ProcessSet a, ProcessSet b, const ProtocolAutomaton& p) {
  require_model(p, Model::WOR);
  check_partition_boxes(s, a, b, p);
  Plan plan;
  plan.add(&s, 0, Sigma{a}, std::nullopt);
  plan.add(&s, 0, Sigma{}, b);
  plan.add(&s, 0, Sigma{b}, a);
  return realize(plan, p);
}

namespace {

ProcessSet normalized_label(ProcessSet x, int keep) {
  while (x.size() > keep) x.erase(x.max());
  return x;
}

Path extend_with_bridges(const Path& path, const ProtocolAutomaton& p,
                         const std::function<ProcessSet(ProcessSet)>& norm,
                         const std::function<Steps(const GlobalState&, ProcessSet)>& bridge) {
  const int n = path.n();
  Plan plan;
  const auto q = path.labels.size();
  if (q == 0) {
    plan.add(&path.states[0], 0, Sigma{}, std::nullopt);
    return realize(plan, p);
  }
  std::vector<ProcessSet> xs;
  for (auto l : path.labels) xs.push_back(norm(l));
  plan.add(&path.states[0], 0, Sigma{xs[0]}, std::nullopt);
  for (std::size_t l = 1; l <= q; ++l) {
    const GlobalState* sl = &path.states[l];
    plan.add(sl, static_cast<long>(l), Sigma{xs[l - 1]}, xs[l - 1]);
    if (l < q && !(xs[l] == xs[l - 1]))
      append_bridge_between(plan, sl, static_cast<long>(l), bridge(*sl, xs[l - 1]), bridge(*sl, xs[l]), xs[l], n);
  }
  return loop_erase(realize(plan, p));
}

}  // namespace

Path extend_path_partition(const Path& path, ProcessSet a, ProcessSet b, const ProtocolAutomaton& p) {
  require_model(p, Model::WOR);
  if (path.states.empty()) throw Error(ErrorCode::InvalidArgument, "path without states");
  for (auto l : path.labels)
    if (!(l == a) && !(l == b)) throw Error(ErrorCode::PreconditionViolation, "label " + l.str() + " is neither A nor B");
  for (const auto& st : path.states) check_partition_boxes(st, a, b, p);
  const int n = path.n();
  return extend_with_bridges(
      path, p, [](ProcessSet x) { return x; }, [n](const GlobalState&, ProcessSet x) { return partition_bridge(x, n); });
}

Path extend_path_no3box(const Path& path, const ProtocolAutomaton& p) {
  require_model(p, Model::WOR);
  if (path.states.empty()) throw Error(ErrorCode::InvalidArgument, "path without states");
  const int n = path.n();
  if (n != 3) throw Error(ErrorCode::PreconditionViolation, "this construction is for n = 3");
  for (const auto& st : path.states)
    for (auto bx : successor_boxes(st, p).boxes)
      if (bx.size() == 3) throw Error(ErrorCode::PreconditionViolation, "successor has a box of size 3");
  for (auto l : path.labels)
    if (l.empty()) throw Error(ErrorCode::PreconditionViolation, "empty label");
  return extend_with_bridges(
      path, p, [](ProcessSet x) { return normalized_label(x, 2); },
      [&p, n](const GlobalState& s, ProcessSet x) { return no3box_bridge(successor_boxes(s, p), x, n); });
}

Sigma LadderState::sigma() const {
  Sigma s = groups;
  if (!tail.empty()) s.push_back(tail);
  return base ? canonical_sigma(s, base->n) : s;
}

nlohmann::json LadderState::to_json() const {
  return {{"groups", sigma_json(groups)}, {"step", step.to_json()}, {"tail", tail.to_json()}};
}

bool is_ladder_state(const LadderState& l, ProcessSet x, const InvocationSpec& spec, int n) {
  if (!spec.contains(l.step)) return false;
  ProcessSet cover;
  for (auto c : l.groups) {
    if (c.empty() || c.size() > 2 || c.intersects(cover)) return false;
    cover = cover | c;
  }
  if (cover.intersects(l.step)) return false;
  if (!(l.tail == (l.step & x))) return false;
  if (!((cover | l.tail) == x)) return false;
  return x.subset_of(ProcessSet::full(n));
}

std::pair<LadderState, Path> build_ladder_path(const GlobalState& s, ProcessSet x, Box b, const ProtocolAutomaton& p) {
  require_model(p, Model::WOR);
  auto spec = successor_boxes(s, p);
  if (!spec.contains(b)) throw Error(ErrorCode::MissingBox, "step box " + b.str() + " is not a successor box");
  LadderState l;
  l.base = &s;
  l.step = b;
  l.tail = x & b;
  auto st = ladder_steps(spec, x, b, s.n, l.groups);
  Plan plan;
  plan.add(&s, 0, Sigma{x}, std::nullopt);
  add_steps(plan, &s, 0, st);
  return {l, realize(plan, p)};
}

std::vector<Box> diff_boxes(const GlobalState& q1, const GlobalState& q2) {
  auto s1 = invocation_spec(q1);
  auto s2 = invocation_spec(q2);
  std::vector<Box> out;
  for (auto b : s1.boxes)
    if (s2.contains(b) && !(sc_value_of(b, q1) == sc_value_of(b, q2))) out.push_back(b);
  return out;
}

OneRoundResult connect_one_round_successors(const GlobalState& s, ProcessSet x, ProcessSet y, const ProtocolAutomaton& p,
                                            const AdversaryPins& pins_x, const AdversaryPins& pins_y) {
  require_model(p, Model::WOR);
  const int n = s.n;
  ProcessSet all = ProcessSet::full(n);
  if (x.empty() || y.empty() || !x.subset_of(all) || !y.subset_of(all))
    throw Error(ErrorCode::InvalidArgument, "X and Y must be nonempty subsets of 1..n");
  LowestContenderAdversary low;
  auto probe = apply_round(s, sigma_schedule({}, n, p.model), low, p);
  auto spec = invocation_spec(probe);
  std::map<Box, ObjectIndex> obj_of;
  for (const auto& inst : probe.last->instances) obj_of[inst.invokers] = inst.object;
  auto endpoint = [&](ProcessSet z, const AdversaryPins& pins) {
    for (const auto& [b, v] : pins) {
      if (!spec.contains(b)) throw Error(ErrorCode::MissingBox, "pinned box " + b.str() + " is not a successor box");
      if (v < 1 || v > n) throw Error(ErrorCode::InvalidAdversary, "pin outside 1..n");
    }
    FunctionAdversary adv([&](const ContentionContext& ctx) -> std::optional<int> {
      for (const auto& [b, o] : obj_of)
        if (o == ctx.object) {
          auto it = pins.find(b);
          if (it != pins.end()) return it->second;
        }
      return ctx.contenders.min();
    });
    return apply_round_recorded(s, sigma_schedule({z}, n, p.model), adv, p);
  };
  auto q1 = endpoint(x, pins_x);
  auto q2 = endpoint(y, pins_y);
  OneRoundResult res;
  res.diff = diff_boxes(q1.state, q2.state);
  for (auto b : res.diff)
    if (b == all) throw Error(ErrorCode::FullBoxConflict, "the box of all processes has different values at the endpoints");
  Plan plan;
  plan.add(&s, 0, Sigma{x}, std::nullopt);
  plan.nodes.back().pins = choice_pins(q1.choices);
  std::set<Box> sw(res.diff.begin(), res.diff.end());
  append_one_round(plan, &s, 0, spec, x, y, sw, n);
  if (!(plan.nodes.back().sigma == canonical_sigma({y}, n)))
    throw Error(ErrorCode::ConstructionFailed, "plan does not end at sigma<Y>");
  for (const auto& [o, v] : choice_pins(q2.choices)) plan.nodes.back().pins[o] = v;
  res.path = loop_erase(realize(plan, p));
  if (!res.path.states.front().same_locals(q1.state) || !res.path.states.back().same_locals(q2.state))
    throw Error(ErrorCode::ConstructionFailed, "endpoints do not match the requested successors");
  int deg = res.path.degree();
  if (res.diff.empty()) {
    res.property_a = deg >= n - 2;
  } else {
    int bound = n;
    for (auto b : res.diff) bound = std::min(bound, n - b.size());
    res.property_b = deg >= bound;
    for (auto l : res.path.labels) {
      if (l.size() >= n - 2) continue;
      int hits = 0;
      for (auto b : res.diff)
        if (l == all - b) ++hits;
      if (hits != 1) res.property_b = false;
    }
  }
  return res;
}

Path extend_path_ladder(const Path& path, const ProtocolAutomaton& p) {
  require_model(p, Model::WOR);
  if (path.states.empty()) throw Error(ErrorCode::InvalidArgument, "path without states");
  const int n = path.n();
  Plan plan;
  const auto q = path.labels.size();
  if (q == 0) {
    plan.add(&path.states[0], 0, Sigma{}, std::nullopt);
    return realize(plan, p);
  }
  plan.add(&path.states[0], 0, Sigma{path.labels[0]}, std::nullopt);
  for (std::size_t l = 1; l <= q; ++l) {
    const GlobalState* sl = &path.states[l];
    plan.add(sl, static_cast<long>(l), Sigma{path.labels[l - 1]}, path.labels[l - 1]);
    if (l < q && !(path.labels[l] == path.labels[l - 1])) {
      append_one_round(plan, sl, static_cast<long>(l), successor_boxes(*sl, p), path.labels[l - 1], path.labels[l], {}, n);
    }
  }
  return loop_erase(realize(plan, p));
}

const char* valency_name(Valency v) {
  switch (v) {
    case Valency::Zero:
      return "0-valent";
    case Valency::One:
      return "1-valent";
    case Valency::Bivalent:
      return "bivalent";
    case Valency::Undecided:
      return "undecided";
    case Valency::Other:
      return "other";
  }
  return "?";
}

nlohmann::json ValencyResult::to_json() const {
  auto d = nlohmann::json::array();
  for (const auto& v : decided) d.push_back(v.to_json());
  return {{"valency", valency_name(valency)}, {"decided", d}, {"final_states", final_states}, {"partial", partial}};
}

ValencyResult bounded_valency(const GlobalState& s, const ProtocolAutomaton& p, int horizon, Family family,
                              bool enumerate, std::uint64_t samples, std::uint64_t seed) {
  if (horizon <= 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  ValencyResult res;
  bool undecided = false;
  auto account = [&](const GlobalState& f) {
    ++res.final_states;
    bool some = false;
    for (const auto& l : f.locals)
      if (!l.dec.is_bottom()) {
        res.decided.insert(l.dec);
        some = true;
      }
    if (!some) undecided = true;
  };
  if (enumerate) {
    ExploreOptions opt;
    opt.family = family;
    opt.rounds = horizon;
    opt.max_states_per_round = 200000;
    auto ex = explore(p, {s}, opt);
    res.partial = ex.partial;
    for (const auto& nd : ex.final_layer()) account(nd.state);
  } else {
    std::mt19937_64 rng(seed);
    RandomAdversary adv(mix64(seed));
    for (std::uint64_t t = 0; t < samples; ++t) {
      GlobalState cur = s;
      for (int r = 0; r < horizon; ++r) cur = apply_round(cur, random_schedule(s.n, p.model, family, rng), adv, p);
      account(cur);
    }
    res.partial = true;
  }
  if (undecided)
    res.valency = Valency::Undecided;
  else if (res.decided.size() >= 2)
    res.valency = Valency::Bivalent;
  else if (res.decided.size() == 1 && *res.decided.begin() == Value::integer(0))
    res.valency = Valency::Zero;
  else if (res.decided.size() == 1 && *res.decided.begin() == Value::integer(1))
    res.valency = Valency::One;
  else
    res.valency = Valency::Other;
  return res;
}

Path staircase_initial_path(const ProtocolAutomaton& p, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need n >= 2");
  Path path;
  for (int k = 0; k <= n; ++k) {
    std::vector<int> in(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < k; ++i) in[static_cast<std::size_t>(i)] = 1;
    path.states.push_back(initial_state(p, in));
    path.parents.push_back(-1);
    if (k > 0) path.labels.push_back(ProcessSet::full(n) - ProcessSet::single(k));
  }
  return path;
}

namespace {

struct RoundLog {
  nlohmann::json rounds = nlohmann::json::array();
  bool ok = true;
};

// Checks one extension step and appends its summary to the log.
void log_round(RoundLog& log, int r, const Path& prev, const Path& next, int min_deg, bool check_b_regular) {
  auto chk = verify_path(next);
  bool anc = !next.parents.empty() && next.parents.front() == 0 &&
             next.parents.back() == static_cast<long>(prev.size()) - 1;
  int deg = next.degree();
  nlohmann::json j = {{"round", r},          {"states", next.size()},         {"degree", deg},
                      {"labels_ok", chk.ok}, {"ancestry_ok", anc},            {"min_degree", min_deg}};
  if (!chk.ok) j["label_error"] = chk.detail;
  bool round_ok = chk.ok && anc && deg >= min_deg;
  if (check_b_regular) {
    bool br = is_b_regular(next);
    j["b_regular"] = br;
    round_ok = round_ok && br;
  }
  auto is = nlohmann::json::array();
  for (auto l : next.isets()) is.push_back(l.to_json());
  j["isets"] = is;
  j["ok"] = round_ok;
  log.ok = log.ok && round_ok;
  log.rounds.push_back(j);
}

nlohmann::json endpoint_json(const GlobalState& s) {
  auto d = nlohmann::json::array();
  for (const auto& l : s.locals) d.push_back(l.dec.to_json());
  return {{"digest", s.digest()}, {"dec", d}};
}

}  // namespace

DemoReport lower_bound_demo(const ProtocolAutomaton& p, int rounds) {
  require_model(p, Model::WOR);
  if (rounds < 1) throw Error(ErrorCode::InvalidArgument, "need at least one round");
  const int n = 3;
  DemoReport rep;
  GammaBudget gb;
  gb.rounds = rounds;
  gb.max_states_per_round = 20000;
  auto gamma = collect_gamma(p, n, gb);
  int nu2 = gamma.nu.count(2) ? gamma.nu.at(2) : 0;
  int nu3 = gamma.nu.count(3) ? gamma.nu.at(3) : 0;
  nlohmann::json j = {{"automaton", p.name}, {"n", n}, {"rounds", rounds}, {"gamma", gamma.to_json()}};
  Path path;
  std::function<Path(const Path&)> step;
  if (nu2 <= 1) {
    rep.engine = "partition";
    std::vector<ProcessSet> v2;
    if (gamma.gamma.count(2)) v2.assign(gamma.gamma.at(2).begin(), gamma.gamma.at(2).end());
    auto [a, b] = partition_two_blocks(VertexSet(n, 2, v2));
    j["A"] = a.to_json();
    j["B"] = b.to_json();
    std::vector<int> ou(n, 0);
    for (int i : b.members()) ou[static_cast<std::size_t>(i - 1)] = 1;
    path.states = {initial_state(p, std::vector<int>(n, 0)), initial_state(p, ou), initial_state(p, std::vector<int>(n, 1))};
    path.labels = {a, b};
    path.parents = {-1, -1, -1};
    step = [&p, a = a, b = b](const Path& x) { return extend_path_partition(x, a, b, p); };
  } else if (nu3 == 0) {
    rep.engine = "no3box";
    path = staircase_initial_path(p, n);
    step = [&p](const Path& x) { return extend_path_no3box(x, p); };
  } else {
    throw Error(ErrorCode::PreconditionViolation, "automaton has two 2-boxes and a 3-box; no construction applies");
  }
  j["engine"] = rep.engine;
  j["initial_path"] = path.to_json();
  RoundLog log;
  try {
    for (int r = 1; r <= rounds; ++r) {
      auto next = step(path);
      log_round(log, r, path, next, 1, false);
      path = std::move(next);
    }
  } catch (const Error& e) {
    log.ok = false;
    j["construction_error"] = e.what();
  }
  j["per_round"] = log.rounds;
  int horizon = std::max(1, p.round_budget);
  auto v0 = bounded_valency(initial_state(p, std::vector<int>(n, 0)), p, horizon);
  auto v1 = bounded_valency(initial_state(p, std::vector<int>(n, 1)), p, horizon);
  j["valency_all_zero"] = v0.to_json();
  j["valency_all_one"] = v1.to_json();
  bool val_ok = v0.valency == Valency::Zero && v1.valency == Valency::One;
  if (log.ok) {
    auto e0 = bounded_valency(path.states.front(), p, 1);
    auto e1 = bounded_valency(path.states.back(), p, 1);
    j["final_first"] = endpoint_json(path.states.front());
    j["final_last"] = endpoint_json(path.states.back());
    j["final_first_valency"] = e0.to_json();
    j["final_last_valency"] = e1.to_json();
    val_ok = val_ok && e0.valency == Valency::Zero && e1.valency == Valency::One;
    // consecutive states share a process with equal decision, so some state must break agreement or termination
    long witness = -1;
    for (std::size_t k = 0; k < path.size() && witness < 0; ++k) {
      std::set<Value> d;
      bool undecided = false;
      for (const auto& l : path.states[k].locals) {
        if (l.dec.is_bottom())
          undecided = true;
        else
          d.insert(l.dec);
      }
      if (d.size() >= 2 || undecided) witness = static_cast<long>(k);
    }
    j["violation_index"] = witness;
    if (witness >= 0) j["violation_state"] = endpoint_json(path.states[static_cast<std::size_t>(witness)]);
    rep.ok = val_ok && witness >= 0;
    j["final_path"] = path.to_json();
  } else {
    rep.ok = false;
  }
  j["ok"] = rep.ok;
  rep.json = j;
  return rep;
}

namespace {

// l_1..l_{n-1} lists the ids other than i with j last.
Steps wro_basic_steps(int n, int i, int j) {
  ProcessSet all = ProcessSet::full(n);
  std::vector<int> l;
  for (int k = 1; k <= n; ++k)
    if (k != i && k != j) l.push_back(k);
  l.push_back(j);
  const int m = n - 1;  // l has m entries, l[m-1] = j
  Steps out;
  auto single = [](int k) { return ProcessSet::single(k); };
  // T_k = <l1..lk, rest, i>
  for (int k = 1; k <= m - 1; ++k) {
    Sigma sg;
    ProcessSet rest = all - single(i);
    for (int t = 0; t < k; ++t) {
      sg.push_back(single(l[static_cast<std::size_t>(t)]));
      rest = rest - single(l[static_cast<std::size_t>(t)]);
    }
    sg.push_back(rest);
    out.push_back({sg, all - single(l[static_cast<std::size_t>(k - 1)])});
  }
  Sigma head;
  for (int t = 0; t < m - 1; ++t) head.push_back(single(l[static_cast<std::size_t>(t)]));
  out.push_back({head, all - single(j)});
  Sigma with_i = head;
  with_i.push_back(single(i));
  out.push_back({with_i, all - single(i)});
  // U_k = <l1..l_{k-1}, {l_k..l_{m-1}, i}, j>
  for (int k = m - 1; k >= 1; --k) {
    Sigma sg;
    ProcessSet mid = single(i);
    for (int t = 0; t < k - 1; ++t) sg.push_back(single(l[static_cast<std::size_t>(t)]));
    for (int t = k - 1; t < m - 1; ++t) mid.insert(l[static_cast<std::size_t>(t)]);
    sg.push_back(mid);
    out.push_back({sg, all - single(l[static_cast<std::size_t>(k - 1)])});
  }
  return out;
}

}  // namespace

Path wro_basic_path(const GlobalState& s, int i, int j, const ProtocolAutomaton& p) {
  require_model(p, Model::WRO);
  const int n = s.n;
  if (i < 1 || i > n || j < 1 || j > n) throw Error(ErrorCode::InvalidArgument, "process id outside 1..n");
  ProcessSet all = ProcessSet::full(n);
  Plan plan;
  plan.add(&s, 0, Sigma{all - ProcessSet::single(i)}, std::nullopt);
  if (i != j) add_steps(plan, &s, 0, wro_basic_steps(n, i, j));
  return realize(plan, p);
}

Path wro_extend_path(const Path& path, const ProtocolAutomaton& p) {
  require_model(p, Model::WRO);
  if (path.states.empty()) throw Error(ErrorCode::InvalidArgument, "path without states");
  const int n = path.n();
  ProcessSet all = ProcessSet::full(n);
  std::vector<ProcessSet> xs;
  for (auto l : path.labels) {
    if (l.size() < n - 1) throw Error(ErrorCode::PreconditionViolation, "label " + l.str() + " smaller than n-1");
    xs.push_back(normalized_label(l, n - 1));
  }
  Plan plan;
  if (xs.empty()) {
    plan.add(&path.states[0], 0, Sigma{}, std::nullopt);
    return realize(plan, p);
  }
  plan.add(&path.states[0], 0, Sigma{xs[0]}, std::nullopt);
  for (std::size_t l = 1; l <= xs.size(); ++l) {
    const GlobalState* sl = &path.states[l];
    plan.add(sl, static_cast<long>(l), Sigma{xs[l - 1]}, xs[l - 1]);
    if (l < xs.size() && !(xs[l] == xs[l - 1]))
      add_steps(plan, sl, static_cast<long>(l), wro_basic_steps(n, (all - xs[l - 1]).min(), (all - xs[l]).min()));
  }
  return loop_erase(realize(plan, p));
}

DemoReport wro_obstruction_demo(const ProtocolAutomaton& p, int rounds) {
  require_model(p, Model::WRO);
  if (rounds < 1) throw Error(ErrorCode::InvalidArgument, "need at least one round");
  const int n = 3;
  DemoReport rep;
  rep.engine = "wro-staircase";
  Path path = staircase_initial_path(p, n);
  nlohmann::json j = {{"automaton", p.name}, {"n", n}, {"rounds", rounds}, {"engine", rep.engine}};
  j["initial_path"] = path.to_json();
  RoundLog log;
  for (int r = 1; r <= rounds; ++r) {
    std::optional<Path> next;
    std::string engine = "construction";
    try {
      next = wro_extend_path(path, p);
    } catch (const Error& e) {
      if (!j.contains("construction_error")) j["construction_error"] = std::string(e.what()) + " (round " + std::to_string(r) + ")";
      engine = "search";
      next = search_extend_path(path, p, n - 1);
    }
    if (!next) {
      log.ok = false;
      j["search_failure"] = "no path of degree " + std::to_string(n - 1) + " among successors in round " + std::to_string(r);
      break;
    }
    log_round(log, r, path, *next, n - 1, true);
    log.rounds.back()["engine"] = engine;
    path = std::move(*next);
  }
  j["per_round"] = log.rounds;
  j["final_first"] = endpoint_json(path.states.front());
  j["final_last"] = endpoint_json(path.states.back());
  rep.ok = log.ok;
  j["ok"] = rep.ok;
  rep.json = j;
  return rep;
}

}  // namespace itersc

namespace itersc {

std::optional<Path> search_extend_path(const Path& path, const ProtocolAutomaton& p, int min_degree,
                                       const std::optional<InvocationSpec>& spec, Family family) {
  const int n = path.n();
  if (min_degree < 1 || min_degree > n) throw Error(ErrorCode::InvalidArgument, "min degree outside 1..n");
  std::vector<std::pair<Sigma, RoundSchedule>> scheds;
  if (family == Family::Sigma) {
    for (auto& sg : enumerate_sigmas(n)) scheds.push_back({sg, sigma_schedule(sg, n, p.model)});
  } else {
    for (auto& rs : enumerate_round_schedules(n, p.model, family)) scheds.push_back({Sigma{}, rs});
  }
  struct Node {
    std::size_t layer;
    GlobalState state;
    Sigma sigma;
  };
  std::vector<Node> nodes;
  std::vector<std::vector<std::size_t>> by_layer(path.size());
  for (std::size_t l = 0; l < path.size(); ++l) {
    std::vector<GlobalState> seen;
    for (const auto& [sg, rs] : scheds)
      for (auto& rr : round_successors(path.states[l], rs, p)) {
        if (spec && !(invocation_spec(rr.state) == *spec)) continue;
        bool dup = false;
        for (auto i : by_layer[l])
          if (nodes[i].state.same_locals(rr.state)) dup = true;
        if (dup) continue;
        by_layer[l].push_back(nodes.size());
        nodes.push_back({l, std::move(rr.state), sg});
      }
  }
  // every min_degree-subset of processes keys a bucket of nodes agreeing on it
  std::vector<ProcessSet> keys;
  for (std::uint32_t m = 0; m < (1u << n); ++m)
    if (std::popcount(m) == min_degree) keys.emplace_back(m << 1);
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> bucket;
  auto key_of = [&](std::size_t v, ProcessSet k) {
    std::uint64_t h = k.bits();
    for (int i : k.members()) h = hash_combine(h, nodes[v].state.local(i).hash());
    return h;
  };
  for (std::size_t v = 0; v < nodes.size(); ++v)
    for (auto k : keys) bucket[key_of(v, k)].push_back(v);
  std::vector<long> prev(nodes.size(), -2);
  std::deque<std::size_t> queue;
  for (auto v : by_layer.front()) {
    prev[v] = -1;
    queue.push_back(v);
  }
  long goal = -1;
  while (!queue.empty() && goal < 0) {
    auto x = queue.front();
    queue.pop_front();
    if (nodes[x].layer + 1 == path.size()) {
      goal = static_cast<long>(x);
      break;
    }
    for (auto k : keys)
      for (auto y : bucket[key_of(x, k)]) {
        if (prev[y] != -2) continue;
        auto lx = nodes[x].layer, ly = nodes[y].layer;
        if (ly + 1 < lx || ly > lx + 1) continue;
        if (indistinguishability_set(nodes[x].state, nodes[y].state).size() < min_degree) continue;
        prev[y] = static_cast<long>(x);
        queue.push_back(y);
      }
  }
  if (goal < 0) return std::nullopt;
  std::vector<std::size_t> order;
  for (long x = goal; x >= 0; x = prev[static_cast<std::size_t>(x)]) order.push_back(static_cast<std::size_t>(x));
  std::reverse(order.begin(), order.end());
  Path out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& nd = nodes[order[k]];
    out.states.push_back(nd.state);
    out.parents.push_back(static_cast<long>(nd.layer));
    out.sigmas.push_back(nd.sigma);
    if (k > 0) out.labels.push_back(indistinguishability_set(nodes[order[k - 1]].state, nd.state));
  }
  return out;
}

}  // namespace itersc
