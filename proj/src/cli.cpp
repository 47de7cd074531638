// SPDX-License-Identifier: Apache-2.0
#include "itersc/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "itersc/connectivity.hpp"
#include "itersc/johnson.hpp"

namespace itersc {

namespace {

enum class Kind { Int, UInt, Str };

struct OptSpec {
  const char* name;
  Kind kind;
  const char* help;
};

const std::vector<OptSpec>& option_specs() {
  static const std::vector<OptSpec> specs = {
      {"n", Kind::Int, "number of processes"},
      {"model", Kind::Str, "wor, wro or owr (checked against the protocol)"},
      {"family", Kind::Str, "schedule family: sigma or partition"},
      {"adversary", Kind::Str, "enumerate, random or script:FILE"},
      {"seed", Kind::UInt, "random seed"},
      {"horizon", Kind::Int, "rounds to run (0 = protocol's round budget)"},
      {"jobs", Kind::Int, "worker threads"},
      {"samples", Kind::Int, "random samples"},
      {"protocol", Kind::Str, "consensus, 2cc or a sample automaton name"},
      {"inputs", Kind::Str, "comma separated inputs, e.g. 0,1,1"},
      {"g", Kind::Int, "2coalitions group size"},
      {"m", Kind::Int, "Johnson level"},
      {"iter", Kind::Int, "zeta iterations (default 1)"},
      {"mode", Kind::Str, "exhaustive or sampled"},
      {"sets", Kind::Str, "vertex list, e.g. 1,2;2,3"},
      {"x", Kind::Str, "process set X, e.g. 1,2"},
      {"y", Kind::Str, "process set Y"},
      {"a", Kind::Str, "partition block A"},
      {"b", Kind::Str, "partition block B"},
      {"box", Kind::Str, "step box of a ladder"},
      {"rounds", Kind::Int, "rounds for connectivity demos"},
      {"trace", Kind::Str, "write the execution trace (JSON lines) to FILE"},
      {"dot", Kind::Str, "write the path as Graphviz to FILE"},
      {"out", Kind::Str, "write the JSON report to FILE"},
  };
  return specs;
}

nlohmann::json default_config() {
  return {{"n", 3},          {"model", ""},       {"family", "sigma"}, {"adversary", "enumerate"},
          {"seed", 1},       {"horizon", 0},      {"jobs", 1},         {"samples", 10000},
          {"protocol", ""},  {"inputs", ""},      {"g", 0},            {"m", 2},
          {"iter", 1},       {"mode", "exhaustive"}, {"sets", ""},     {"x", ""},
          {"y", ""},         {"a", ""},           {"b", ""},           {"box", ""},
          {"rounds", 5},     {"trace", ""},       {"dot", ""},         {"out", ""}};
}

nlohmann::json parse_value(Kind k, const std::string& s, const std::string& name) {
  try {
    std::size_t pos = 0;
    switch (k) {
      case Kind::Int: {
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) break;
        return v;
      }
      case Kind::UInt: {
        if (!s.empty() && s[0] == '-') break;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) break;
        return v;
      }
      case Kind::Str:
        return s;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidConfiguration, "--" + name + " expects a number, got '" + s + "'");
}

struct Ctx {
  nlohmann::json cfg;
  std::ostream& err;
  int verbosity = 1;

  int i(const char* k) const { return cfg.at(k).get<int>(); }
  std::uint64_t u(const char* k) const { return cfg.at(k).get<std::uint64_t>(); }
  std::string s(const char* k) const { return cfg.at(k).get<std::string>(); }
  void log(const std::string& line) const {
    if (verbosity > 0) err << line << "\n";
  }
};

struct Outcome {
  bool ok = true;
  nlohmann::json result;
};

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(static_cast<int>(parse_value(Kind::Int, tok, "inputs").get<long long>()));
  }
  return out;
}

ProtocolAutomaton load_protocol(const Ctx& c, const std::string& fallback) {
  std::string name = c.s("protocol").empty() ? fallback : c.s("protocol");
  auto p = automaton_by_name(name, c.i("n"));
  if (!c.s("model").empty() && parse_model(c.s("model")) != p.model)
    throw Error(ErrorCode::InvalidConfiguration,
                "protocol " + name + " is a " + model_name(p.model) + " protocol, not " + c.s("model"));
  return p;
}

void require_n(const Ctx& c) {
  if (c.i("n") < 2) throw Error(ErrorCode::InvalidConfiguration, "--n must be at least 2");
}

std::vector<Value> state_inputs(const Ctx& c, int n) {
  auto in = parse_ints(c.s("inputs"));
  if (in.empty()) in.assign(static_cast<std::size_t>(n), 0);
  if (static_cast<int>(in.size()) != n)
    throw Error(ErrorCode::InvalidConfiguration, "--inputs needs " + std::to_string(n) + " values");
  return int_values(in);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidConfiguration, "cannot write " + path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::InvalidConfiguration, "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome cmd_simulate(const Ctx& c) {
  require_n(c);
  auto p = load_protocol(c, "consensus");
  const int n = c.i("n");
  std::vector<Value> inputs;
  std::optional<CoalitionsTuple> tuple;
  if (p.name.rfind("2cc", 0) == 0) {
    auto all = all_coalitions_tuples(n);
    tuple = all[c.u("seed") % all.size()];
    inputs = coalitions_inputs(*tuple);
  } else {
    inputs = state_inputs(c, n);
    if (c.s("inputs").empty())
      for (int k = 0; k < n; ++k) inputs[static_cast<std::size_t>(k)] = Value::integer(k % 2);
  }
  int rounds = c.i("horizon") > 0 ? c.i("horizon") : std::max(1, p.round_budget);
  Family f = parse_family(c.s("family"));
  std::mt19937_64 rng(c.u("seed"));
  std::vector<RoundSchedule> scheds;
  for (int r = 0; r < rounds; ++r) scheds.push_back(random_schedule(n, p.model, f, rng));
  std::string adv_mode = c.s("adversary");
  std::unique_ptr<AdversaryPolicy> adv;
  if (adv_mode.rfind("script:", 0) == 0) {
    auto j = nlohmann::json::parse(read_file(adv_mode.substr(7)));
    adv = std::make_unique<ScriptedAdversary>(ScriptedAdversary::from_json(j));
  } else if (adv_mode == "random" || adv_mode == "enumerate") {
    adv = std::make_unique<RandomAdversary>(mix64(c.u("seed") ^ 0xadadadadULL));
  } else {
    throw Error(ErrorCode::InvalidConfiguration, "unknown adversary mode " + adv_mode);
  }
  auto e = run_execution(p, inputs, scheds, *adv);
  auto trace = trace_jsonl(p, e);
  if (!c.s("trace").empty()) write_file(c.s("trace"), trace);
  Outcome o;
  auto lines = nlohmann::json::array();
  std::stringstream ts(trace);
  for (std::string line; std::getline(ts, line);)
    if (!line.empty()) lines.push_back(nlohmann::json::parse(line));
  o.result["trace"] = lines;
  auto decs = nlohmann::json::array();
  for (const auto& d : decisions_of(e.final_state())) decs.push_back(d.to_json());
  o.result["decisions"] = decs;
  o.result["adversary_mode"] = adv->mode();
  if (p.name.rfind("consensus", 0) == 0) {
    auto v = check_consensus(e, inputs);
    o.ok = v.ok;
    o.result["verdict"] = v.to_json();
  } else if (tuple) {
    auto v = check_2cc(e, *tuple);
    o.ok = v.ok;
    o.result["verdict"] = v.to_json();
  }
  c.log("simulate: " + p.name + " n=" + std::to_string(n) + " rounds=" + std::to_string(rounds) +
        " decisions=" + decs.dump() + (o.ok ? "" : " VIOLATION"));
  return o;
}

Outcome cmd_verify_consensus(const Ctx& c) {
  require_n(c);
  auto p = load_protocol(c, "consensus");
  ConsensusOptions opt;
  opt.family = parse_family(c.s("family"));
  std::string adv = c.s("adversary");
  if (adv != "enumerate" && adv != "random")
    throw Error(ErrorCode::InvalidConfiguration, "verify-consensus supports --adversary enumerate or random");
  opt.exhaustive = adv == "enumerate";
  opt.samples = static_cast<std::uint64_t>(c.i("samples"));
  opt.seed = c.u("seed");
  opt.jobs = std::max(1, c.i("jobs"));
  auto rep = verify_consensus(p, c.i("n"), opt);
  c.log("verify-consensus: " + p.name + " n=" + std::to_string(c.i("n")) + " executions=" +
        std::to_string(rep.executions) + (rep.ok ? " PASS" : " FAIL"));
  return {rep.ok, rep.to_json()};
}

Outcome cmd_verify_2cc(const Ctx& c) {
  int g = c.i("g") > 0 ? c.i("g") : c.i("n");
  if (g < 1) throw Error(ErrorCode::InvalidConfiguration, "--g must be positive");
  auto rep = verify_2cc(g, parse_family(c.s("family")));
  c.log("verify-2cc: g=" + std::to_string(g) + " tuples=" + std::to_string(rep.tuples) +
        " executions=" + std::to_string(rep.executions) + (rep.ok ? " PASS" : " FAIL"));
  return {rep.ok, rep.to_json()};
}

Outcome cmd_count_objects(const Ctx& c) {
  require_n(c);
  auto p = load_protocol(c, "consensus");
  GammaBudget b;
  b.family = parse_family(c.s("family"));
  b.rounds = c.i("horizon");
  auto rep = collect_gamma(p, c.i("n"), b);
  std::string line = "count-objects: " + p.name;
  for (auto [m, v] : rep.nu) line += " nu(" + std::to_string(c.i("n")) + "," + std::to_string(m) + ")=" + std::to_string(v);
  line += " total=" + std::to_string(rep.total);
  c.log(line);
  return {true, rep.to_json()};
}

Outcome cmd_transform(const Ctx& c) {
  require_n(c);
  auto p = load_protocol(c, "");
  ProtocolAutomaton t;
  if (p.model == Model::WRO)
    t = transform_wro_to_owr(p);
  else if (p.model == Model::OWR)
    t = transform_owr_to_wro(p);
  else
    throw Error(ErrorCode::InvalidConfiguration, "transform needs a WRO or OWR protocol");
  c.log(std::string("transform: ") + model_name(p.model) + " -> " + model_name(t.model));
  return {true, {{"source", p.describe()}, {"target", t.describe()}}};
}

Outcome cmd_describe(const Ctx& c) {
  require_n(c);
  auto p = load_protocol(c, "consensus");
  c.log("describe: " + p.name);
  return {true, p.describe()};
}

std::vector<ProtocolAutomaton> pick_samples(const Ctx& c, const std::vector<NamedAutomaton>& all) {
  std::vector<ProtocolAutomaton> out;
  std::string want = c.s("protocol");
  for (const auto& na : all)
    if (want.empty() || want == "all" || want == na.name) out.push_back(na.automaton);
  if (out.empty()) throw Error(ErrorCode::InvalidConfiguration, "unknown sample automaton " + want);
  return out;
}

Outcome run_demos(const Ctx& c, const std::vector<ProtocolAutomaton>& ps, bool wro) {
  Outcome o;
  o.result = nlohmann::json::array();
  for (const auto& p : ps) {
    auto rep = wro ? wro_obstruction_demo(p, c.i("rounds")) : lower_bound_demo(p, c.i("rounds"));
    o.ok = o.ok && rep.ok;
    o.result.push_back(rep.json);
    c.log(std::string(wro ? "wro-obstruction: " : "lower-bound: ") + p.name + " engine=" + rep.engine +
          (rep.ok ? " PASS" : " FAIL"));
  }
  return o;
}

Outcome path_outcome(const Ctx& c, const Path& path, const std::string& what) {
  auto chk = verify_path(path);
  if (!c.s("dot").empty()) write_file(c.s("dot"), path.to_dot());
  Outcome o;
  o.ok = chk.ok;
  o.result = {{"path", path.to_json()}, {"labels_verified", chk.ok}};
  if (!chk.ok) o.result["label_error"] = chk.detail;
  c.log(what + ": states=" + std::to_string(path.size()) + " degree=" + std::to_string(path.degree()) +
        (chk.ok ? " verified" : " LABEL ERROR"));
  return o;
}

Outcome cmd_partition_round(const Ctx& c) {
  require_n(c);
  auto p = load_protocol(c, "lb-solo");
  auto s = initial_state(p, state_inputs(c, c.i("n")));
  auto path = connect_partition_round(s, parse_process_set(c.s("a")), parse_process_set(c.s("b")), p);
  return path_outcome(c, path, "partition-round");
}

Outcome cmd_ladder(const Ctx& c) {
  require_n(c);
  auto p = load_protocol(c, "consensus");
  auto s = initial_state(p, state_inputs(c, c.i("n")));
  ProcessSet x = parse_process_set(c.s("x"));
  Box b = parse_process_set(c.s("box"));
  auto [l, path] = build_ladder_path(s, x, b, p);
  auto o = path_outcome(c, path, "ladder");
  bool ladder_ok = is_ladder_state(l, x, successor_boxes(s, p), s.n);
  o.result["ladder"] = l.to_json();
  o.result["ladder_conditions"] = ladder_ok;
  o.ok = o.ok && ladder_ok;
  return o;
}

Outcome cmd_one_round(const Ctx& c) {
  require_n(c);
  auto p = load_protocol(c, "consensus");
  auto s = initial_state(p, state_inputs(c, c.i("n")));
  auto r = connect_one_round_successors(s, parse_process_set(c.s("x")), parse_process_set(c.s("y")), p);
  auto o = path_outcome(c, r.path, "one-round");
  auto diff = nlohmann::json::array();
  for (auto b : r.diff) diff.push_back(b.to_json());
  o.result["diff"] = diff;
  o.result["property_a"] = r.property_a;
  o.result["property_b"] = r.property_b;
  o.ok = o.ok && r.property_a && r.property_b;
  return o;
}

VertexSet vertex_set(const Ctx& c) {
  return VertexSet(c.i("n"), c.i("m"), parse_set_list(c.s("sets")));
}

Outcome cmd_johnson_zeta(const Ctx& c) {
  auto u = vertex_set(c);
  auto z = zeta_iter(u, c.i("iter"));
  auto comps = nlohmann::json::array();
  for (const auto& k : components(u)) comps.push_back(k.to_json());
  c.log("johnson zeta: |U|=" + std::to_string(u.size()) + " |zeta^" + std::to_string(c.i("iter")) + "(U)|=" +
        std::to_string(z.size()));
  return {true, {{"input", u.to_json()}, {"iterations", c.i("iter")}, {"zeta", z.to_json()}, {"components", comps}}};
}

Outcome cmd_johnson_vanish(const Ctx& c) {
  std::string mode = c.s("mode");
  if (mode != "exhaustive" && mode != "sampled") throw Error(ErrorCode::InvalidConfiguration, "--mode is exhaustive or sampled");
  auto rep = verify_zeta_vanishing(c.i("n"), c.i("m"), mode == "exhaustive" ? SampleMode::Exhaustive : SampleMode::Sampled,
                                   static_cast<std::uint64_t>(c.i("samples")), c.u("seed"));
  bool ok = rep.counterexamples.empty();
  c.log("johnson vanish: n=" + std::to_string(rep.n) + " m=" + std::to_string(rep.m) +
        " checked=" + std::to_string(rep.checked) + (ok ? " PASS" : " FAIL"));
  return {ok, rep.to_json()};
}

Outcome cmd_johnson_partition(const Ctx& c) {
  VertexSet u(c.i("n"), 2, parse_set_list(c.s("sets")));
  auto [a, b] = partition_two_blocks(u);
  bool ok = check_partition(u, a, b);
  c.log("johnson partition: A=" + a.str() + " B=" + b.str() + (ok ? " PASS" : " FAIL"));
  return {ok, {{"input", u.to_json()}, {"A", a.to_json()}, {"B", b.to_json()}, {"checked", ok}}};
}

int error_exit(std::ostream& err, const std::string& code, const std::string& msg) {
  err << nlohmann::json({{"error", code}, {"message", msg}}).dump() << "\n";
  return 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Iterated shared-memory models with safe-consensus objects"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> opts;
  for (const auto& sp : option_specs()) opts[sp.name] = app.add_option(std::string("--") + sp.name, raw[sp.name], sp.help);
  std::string config_file;
  app.add_option("--config", config_file, "JSON config file (a report's config block also works)");

  std::map<std::string, std::function<Outcome(const Ctx&)>> handlers;
  std::string command;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& full, const std::string& help,
                  std::function<Outcome(const Ctx&)> h) {
    auto* sub = parent->add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&command, full] { command = full; });
    handlers[full] = std::move(h);
    return sub;
  };
  leaf(&app, "simulate", "simulate", "run one execution and dump its trace", cmd_simulate);
  leaf(&app, "verify-consensus", "verify-consensus", "check agreement, validity, termination", cmd_verify_consensus);
  leaf(&app, "verify-2cc", "verify-2cc", "check the 2coalitions-consensus protocol", cmd_verify_2cc);
  leaf(&app, "count-objects", "count-objects", "boxes and their counts per size", cmd_count_objects);
  leaf(&app, "transform", "transform", "WRO <-> OWR simulation transform", cmd_transform);
  leaf(&app, "describe", "describe", "protocol descriptor", cmd_describe);
  auto* conn = app.add_subcommand("connectivity", "path constructions");
  conn->fallthrough();
  conn->require_subcommand(1);
  leaf(conn, "lower-bound", "connectivity lower-bound", "n=3 lower-bound demo on deficient automata",
       [](const Ctx& c) { return run_demos(c, pick_samples(c, wor_deficient_samples()), false); });
  leaf(conn, "wro-obstruction", "connectivity wro-obstruction", "n=3 WRO high-degree paths",
       [](const Ctx& c) { return run_demos(c, pick_samples(c, wro_samples(3)), true); });
  leaf(conn, "partition-round", "connectivity partition-round", "one round bridge for a partition A,B",
       cmd_partition_round);
  leaf(conn, "ladder", "connectivity ladder", "path to a ladder state", cmd_ladder);
  leaf(conn, "one-round", "connectivity one-round", "connect S.sigma<X> and S.sigma<Y>", cmd_one_round);
  auto* john = app.add_subcommand("johnson", "Johnson graph combinatorics");
  john->fallthrough();
  john->require_subcommand(1);
  leaf(john, "zeta", "johnson zeta", "iterate the zeta operator", cmd_johnson_zeta);
  leaf(john, "vanish", "johnson vanish", "check that zeta^(n-m) vanishes on small sets", cmd_johnson_vanish);
  leaf(john, "partition", "johnson partition", "two-block partition of 2-subsets", cmd_johnson_partition);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    return error_exit(err, "usage", e.what());
  }

  Ctx ctx{default_config(), err};
  if (const char* lv = std::getenv("ITERSC_LOG")) {
    std::string v = lv;
    if (v == "quiet" || v == "0" || v == "off") ctx.verbosity = 0;
    if (v == "debug" || v == "2") ctx.verbosity = 2;
  }
  auto t0 = std::chrono::steady_clock::now();
  try {
    if (!config_file.empty()) {
      auto j = nlohmann::json::parse(read_file(config_file));
      if (j.contains("config")) j = j["config"];
      if (!j.is_object()) throw Error(ErrorCode::InvalidConfiguration, "config file must hold a JSON object");
      for (auto& [k, v] : j.items()) {
        if (k == "command") continue;
        if (!ctx.cfg.contains(k)) throw Error(ErrorCode::InvalidConfiguration, "unknown config key " + k);
        ctx.cfg[k] = v;
      }
    }
    for (const auto& sp : option_specs())
      if (opts[sp.name]->count() > 0) ctx.cfg[sp.name] = parse_value(sp.kind, raw[sp.name], sp.name);
    ctx.cfg["command"] = command;
    if (ctx.verbosity >= 2) err << "config " << ctx.cfg.dump() << "\n";

    auto outcome = handlers.at(command)(ctx);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json report = {{"tool", "itersc"},        {"version", kVersion},    {"command", command},
                             {"config", ctx.cfg},       {"seed", ctx.cfg["seed"]}, {"wall_time_s", wall},
                             {"ok", outcome.ok},        {"result", outcome.result}};
    std::string text = report.dump(2) + "\n";
    if (!ctx.s("out").empty())
      write_file(ctx.s("out"), text);
    else
      out << text;
    return outcome.ok ? 0 : 1;
  } catch (const Error& e) {
    return error_exit(err, error_code_name(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_exit(err, "invalid-configuration", e.what());
  } catch (const std::exception& e) {
    return error_exit(err, "invalid-configuration", e.what());
  }
}

}  // namespace itersc
