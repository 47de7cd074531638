// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "itersc/cli.hpp"
#include "itersc/executor.hpp"

using namespace itersc;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
  nlohmann::json report() const { return nlohmann::json::parse(out); }
  nlohmann::json error() const { return nlohmann::json::parse(err.substr(err.rfind('{'))); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "itersc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / ("itersc_test_" + name); }

}  // namespace

TEST(Cli, CountObjectsConsensusFour) {
  auto r = cli({"count-objects", "--protocol", "consensus", "--n", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.report();
  EXPECT_EQ(j["result"]["nu"]["2"], 3);
  EXPECT_EQ(j["result"]["nu"]["3"], 2);
  EXPECT_EQ(j["result"]["nu"]["4"], 1);
  EXPECT_EQ(j["result"]["nu_total"], 6);
}

TEST(Cli, JohnsonVanish) {
  auto r = cli({"johnson", "vanish", "--n", "4", "--m", "2", "--mode", "exhaustive"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto res = r.report()["result"];
  EXPECT_EQ(res["checked"], 22);
  EXPECT_TRUE(res["counterexamples"].empty());
}

TEST(Cli, JohnsonPartitionAndZeta) {
  auto p = cli({"johnson", "partition", "--n", "4", "--sets", "1,2;3,4"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(p.report()["result"]["A"], (nlohmann::json{1, 2}));
  auto bad = cli({"johnson", "partition", "--n", "4", "--sets", "1,2;2,3;3,4"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(bad.error()["error"], "precondition-violation");
  auto z = cli({"johnson", "zeta", "--n", "4", "--m", "2", "--sets", "1,2;2,3;3,4", "--iter", "2"});
  ASSERT_EQ(z.code, 0) << z.err;
  EXPECT_NE(z.out.find("[\n"), std::string::npos);
}

TEST(Cli, ExhaustiveBudgetExitsTwo) {
  auto r = cli({"verify-consensus", "--protocol", "consensus", "--n", "7"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.error()["error"], "budget-exceeded");
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({"no-such-command"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"simulate", "--n", "abc"}).code, 2);
  EXPECT_EQ(cli({"simulate", "--protocol", "nope", "--n", "3"}).code, 2);
  EXPECT_EQ(cli({"connectivity"}).code, 2);
}

TEST(Cli, ViolationExitsOne) {
  auto r = cli({"verify-consensus", "--protocol", "lb-solo", "--n", "3"});
  EXPECT_EQ(r.code, 1) << r.err;
  auto j = r.report();
  EXPECT_FALSE(j["ok"].get<bool>());
  EXPECT_TRUE(j["result"].contains("counterexample_trace"));
}

TEST(Cli, PassExitsZero) {
  auto r = cli({"verify-consensus", "--protocol", "consensus", "--n", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = r.report();
  for (const char* k : {"tool", "version", "command", "config", "seed", "wall_time_s", "ok", "result"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["version"], kVersion);
}

TEST(Cli, ConfigReplayReproducesVerdict) {
  auto first = cli({"simulate", "--protocol", "consensus", "--n", "4", "--inputs", "0,1,1,0", "--adversary", "random",
                    "--family", "partition", "--seed", "99"});
  ASSERT_EQ(first.code, 0) << first.err;
  auto rep = first.report();
  auto path = temp_file("replay.json");
  {
    std::ofstream f(path);
    f << rep.dump();
  }
  auto again = cli({"simulate", "--config", path.string()});
  ASSERT_EQ(again.code, 0) << again.err;
  auto rep2 = again.report();
  EXPECT_EQ(rep2["result"], rep["result"]);
  EXPECT_EQ(rep2["config"], rep["config"]);
  std::filesystem::remove(path);
}

TEST(Cli, FlagsOverrideConfig) {
  auto path = temp_file("cfg.json");
  {
    std::ofstream f(path);
    f << R"({"n": 3, "protocol": "consensus", "seed": 5})";
  }
  auto r = cli({"describe", "--config", path.string(), "--n", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.report();
  EXPECT_EQ(j["config"]["n"], 4);
  EXPECT_EQ(j["config"]["seed"], 5);
  std::filesystem::remove(path);
  auto bad = temp_file("bad.json");
  {
    std::ofstream f(bad);
    f << R"({"nonsense": 1})";
  }
  EXPECT_EQ(cli({"describe", "--config", bad.string()}).code, 2);
  std::filesystem::remove(bad);
}

TEST(Cli, TraceFileReplays) {
  auto trace = temp_file("trace.jsonl");
  auto r = cli({"simulate", "--protocol", "consensus", "--n", "3", "--inputs", "1,0,1", "--adversary", "random", "--seed",
                "3", "--trace", trace.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(trace);
  std::stringstream ss;
  ss << f.rdbuf();
  auto p = protocol_consensus_wor(3);
  auto e = replay_trace(p, ss.str());
  EXPECT_EQ(trace_jsonl(p, e), ss.str());
  std::filesystem::remove(trace);
}

TEST(Cli, OutFileAndScriptAdversary) {
  auto script = temp_file("adv.json");
  {
    std::ofstream f(script);
    f << "[[1, 0, 2]]";
  }
  auto out = temp_file("out.json");
  auto r = cli({"simulate", "--protocol", "2cc", "--n", "2", "--inputs", "0,1", "--adversary", "script:" + script.string(),
                "--out", out.string()});
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(out);
  auto j = nlohmann::json::parse(f);
  EXPECT_EQ(j["command"], "simulate");
  EXPECT_EQ(r.code, j["ok"].get<bool>() ? 0 : 1);
  std::filesystem::remove(script);
  std::filesystem::remove(out);
}

TEST(Cli, TransformAndConnectivityCommands) {
  auto t = cli({"transform", "--protocol", "wro-shared-min", "--n", "3", "--samples", "50"});
  EXPECT_EQ(t.code, 0) << t.err;
  auto pr = cli({"connectivity", "partition-round", "--protocol", "consensus", "--n", "3", "--inputs", "0,1,1", "--a", "1,2",
                 "--b", "3"});
  EXPECT_EQ(pr.code, 0) << pr.err;
  auto lb = cli({"connectivity", "lower-bound", "--protocol", "lb-solo", "--rounds", "2"});
  EXPECT_EQ(lb.code, 0) << lb.err;
  auto one = cli({"connectivity", "one-round", "--protocol", "consensus", "--n", "3", "--inputs", "0,1,1", "--x", "1,2",
                  "--y", "3"});
  EXPECT_EQ(one.code, 0) << one.err;
}

TEST(Cli, JobsDoNotChangeReport) {
  auto a = cli({"verify-consensus", "--protocol", "consensus", "--n", "4", "--adversary", "random", "--samples", "300"});
  auto b = cli({"verify-consensus", "--protocol", "consensus", "--n", "4", "--adversary", "random", "--samples", "300", "--jobs",
                "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.report()["result"], b.report()["result"]);
}
