/* Copyright 2026 the parplan authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "parplan/parplan.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace parplan;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl =
        (fs::temp_directory_path() / "parplan_cli_XXXXXX").string();
    path = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run(const TempDir &dir, const std::string &args) {
  const fs::path out = dir.path / "stdout.txt";
  const fs::path err = dir.path / "stderr.txt";
  const std::string cmd = std::string("\"") + PARPLAN_BIN + "\" " + args +
                          " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

} // namespace

TEST_CASE("plan emits a strategy document") {
  TempDir dir;
  auto r = run(dir, "plan --model vgg16 --devices 4 --json");
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(r.out);
  CHECK(doc["final_graph_nodes"] == 2);
  CHECK(doc["layers"].size() == 21);
  CHECK(doc["cost_seconds"].get<double>() > 0.0);
  CHECK(doc["eliminations"] == 19);
}

TEST_CASE("plan on one device returns the all-ones strategy") {
  TempDir dir;
  auto r = run(dir, "plan --model lenet5 --devices 1 --json");
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(r.out);
  for (const auto &[id, cfg] : doc["layers"].items()) {
    (void)id;
    CHECK(cfg == json({{"sample", 1}, {"channel", 1}, {"height", 1},
                       {"width", 1}}));
  }
}

TEST_CASE("plan and brute agree on lenet5") {
  TempDir dir;
  auto p = run(dir, "plan --model lenet5 --devices 4 --json");
  auto b = run(dir, "brute --model lenet5 --devices 4 --json");
  REQUIRE(p.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  json pd = json::parse(p.out), bd = json::parse(b.out);
  CHECK(pd["cost_seconds"].get<double>() == bd["cost_seconds"].get<double>());
  CHECK(bd["strategies_visited"].get<u64>() > 0);
}

TEST_CASE("brute refuses vgg16's strategy space") {
  TempDir dir;
  auto r = run(dir, "brute --model vgg16 --devices 4 --json");
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("budget") != std::string::npos);
}

TEST_CASE("planned strategies round-trip through eval") {
  TempDir dir;
  const fs::path strat = dir.path / "strategy.json";
  auto p = run(dir, "plan --model alexnet --devices 4 --out " + strat.string() +
                        " --json");
  REQUIRE(p.exit_code == 0);
  json planned = json::parse(p.out);
  auto e = run(dir, "eval --model alexnet --devices 4 --strategy " +
                        strat.string() + " --json");
  REQUIRE(e.exit_code == 0);
  json evaluated = json::parse(e.out);
  CHECK(evaluated["cost_seconds"].get<double>() ==
        planned["cost_seconds"].get<double>());
}

TEST_CASE("eval rejects strategies with invalid configs") {
  TempDir dir;
  const fs::path strat = dir.path / "bad.json";
  auto g = models::lenet5(32);
  Strategy s(static_cast<size_t>(g.layer_count()), Config{});
  s[2] = {3, 1, 1, 1}; // 3 does not divide batch 32
  {
    std::ofstream f(strat);
    f << strategy_json(g, s, 0, 0, 0).dump();
  }
  auto e = run(dir, "eval --model lenet5 --devices 4 --strategy " +
                        strat.string());
  CHECK(e.exit_code == 2);
  CHECK(e.err.find("pool1") != std::string::npos);
}

TEST_CASE("compare lists baselines and the optimum dominates") {
  TempDir dir;
  auto r = run(dir, "compare --model lenet5 --devices 2 --json --bytes");
  REQUIRE(r.exit_code == 0);
  json rows = json::parse(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0]["strategy"] == "data");
  CHECK(rows[1]["strategy"] == "model");
  CHECK(rows[2]["strategy"] == "owt");
  CHECK(rows[3]["strategy"] == "optimal");
  const double best = rows[3]["cost_seconds"].get<double>();
  for (const auto &row : rows) {
    CHECK(best <= row["cost_seconds"].get<double>());
    CHECK(row.contains("communication_bytes"));
  }
}

TEST_CASE("compare on one device yields identical rows") {
  TempDir dir;
  auto r = run(dir, "compare --model lenet5 --devices 1 --json");
  REQUIRE(r.exit_code == 0);
  json rows = json::parse(r.out);
  const double c0 = rows[0]["cost_seconds"].get<double>();
  for (const auto &row : rows)
    CHECK(row["cost_seconds"].get<double>() == c0);
}

TEST_CASE("emit-model output feeds back into plan") {
  TempDir dir;
  const fs::path net = dir.path / "net.json";
  auto e = run(dir, "emit-model --model lenet5 --out " + net.string());
  REQUIRE(e.exit_code == 0);
  auto file_plan =
      run(dir, "plan --network " + net.string() + " --devices 2 --json");
  auto builtin_plan = run(dir, "plan --model lenet5 --devices 2 --json");
  REQUIRE(file_plan.exit_code == 0);
  CHECK(json::parse(file_plan.out) == json::parse(builtin_plan.out));
}

TEST_CASE("device files shape the chosen strategy inputs") {
  TempDir dir;
  const fs::path devf = dir.path / "devices.json";
  {
    std::ofstream f(devf);
    f << R"({
      "devices": [{"id": 0, "flops": 1e13}, {"id": 1, "flops": 1e13}],
      "links": [{"src": 1, "dst": 0, "bandwidth": 2e10}],
      "default_bandwidth": 1e10
    })";
  }
  auto r = run(dir, "plan --model lenet5 --device-file " + devf.string() +
                        " --json");
  CHECK(r.exit_code == 0);
}

TEST_CASE("measured cost files override the analytic backend") {
  TempDir dir;
  const fs::path net = dir.path / "net.json";
  const fs::path costs = dir.path / "costs.json";

  auto g = ComputationGraph::create({{"in", Input{4, 1, 1}}, {"s", Softmax{}}},
                                    {{}, {"in"}}, 8);
  {
    std::ofstream f(net);
    f << emit_network(g).dump();
  }
  auto d = DeviceGraph::uniform(2);
  auto t = build_cost_tables(g, d);
  json cj;
  cj["node_costs"]["in"] = std::vector<double>(t.node[0].size(), 0.25);
  cj["node_costs"]["s"] = std::vector<double>(t.node[1].size(), 0.5);
  {
    std::ofstream f(costs);
    f << cj.dump();
  }
  auto r = run(dir, "plan --network " + net.string() +
                        " --devices 2 --cost-file " + costs.string() +
                        " --json");
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(r.out);
  // all node configs now cost the same, so the total is 0.75 plus zero xfer
  CHECK(doc["cost_seconds"].get<double>() == 0.75);
}

TEST_CASE("input errors exit with code 2") {
  TempDir dir;
  CHECK(run(dir, "plan --model resnet50 --devices 2").exit_code == 2);
  CHECK(run(dir, "plan --devices 2").exit_code == 2);
  CHECK(run(dir, "eval --model lenet5").exit_code == 2);
  CHECK(run(dir, "plan --model lenet5 --devices 2 --network x.json")
            .exit_code == 2);
  CHECK(run(dir, "plan --network " + (dir.path / "nope.json").string())
            .exit_code == 2);
}

TEST_CASE("k-bound violations exit with code 3") {
  TempDir dir;
  const fs::path net = dir.path / "wide.json";
  // 6 sources feeding 6 two-input joins: irreducible 12-node graph.
  json nj;
  nj["batch"] = 4;
  nj["layers"] = json::array();
  for (int i = 0; i < 6; ++i)
    nj["layers"].push_back({{"id", "s" + std::to_string(i)},
                            {"kind", "input"},
                            {"channel", 2},
                            {"height", 1},
                            {"width", 1}});
  for (int i = 0; i < 6; ++i)
    nj["layers"].push_back(
        {{"id", "j" + std::to_string(i)},
         {"kind", "concat"},
         {"inputs", {"s" + std::to_string(i), "s" + std::to_string((i + 1) % 6)}}});
  {
    std::ofstream f(net);
    f << nj.dump();
  }
  auto r = run(dir, "plan --network " + net.string() + " --devices 2");
  CHECK(r.exit_code == 3);
  auto ok = run(dir, "plan --network " + net.string() +
                         " --devices 2 --k-bound 12 --json");
  CHECK(ok.exit_code == 0);
}

TEST_CASE("human-readable report prints without --json") {
  TempDir dir;
  auto r = run(dir, "plan --model lenet5 --devices 2");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("strategy: optimal") != std::string::npos);
  CHECK(r.out.find("final graph nodes: 2") != std::string::npos);
  CHECK(r.out.find("conv1") != std::string::npos);
}

TEST_CASE("batch flag reshapes builtin models") {
  TempDir dir;
  auto a = run(dir, "plan --model lenet5 --devices 2 --batch 16 --json");
  auto b = run(dir, "plan --model lenet5 --devices 2 --batch 32 --json");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(json::parse(a.out)["cost_seconds"].get<double>() <
        json::parse(b.out)["cost_seconds"].get<double>());
}
