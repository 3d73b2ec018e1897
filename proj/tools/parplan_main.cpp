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

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

namespace {

using namespace parplan;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

struct CommonOptions {
  std::string model;
  std::string network_file;
  int devices = 1;
  std::string device_file;
  i64 batch = 32;
  bool batch_set = false;
  std::string cost_file;
  std::string out_file;
  bool json = false;
  bool bytes = false;
};

void add_common(CLI::App *cmd, CommonOptions &o, bool needs_graph = true) {
  auto *model = cmd->add_option("--model", o.model,
                                "builtin model name (lenet5, alexnet, vgg16, "
                                "inception_chain or inception_chain(K))");
  auto *network =
      cmd->add_option("--network", o.network_file, "network JSON file");
  if (needs_graph) {
    model->excludes(network);
    network->excludes(model);
  }
  auto *dev_n = cmd->add_option(
      "--devices", o.devices, "number of identical modeled devices");
  auto *dev_f =
      cmd->add_option("--device-file", o.device_file, "device JSON file");
  dev_n->excludes(dev_f);
  dev_f->excludes(dev_n);
  cmd->add_option("--batch", o.batch, "batch size (default 32)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cost-file", o.cost_file,
                  "measured cost JSON overriding the analytic tables");
  cmd->add_option("--out", o.out_file, "write the strategy JSON to this file");
  cmd->add_flag("--json", o.json, "machine-readable output on stdout");
  cmd->add_flag("--bytes", o.bytes, "also report raw cross-device bytes");
}

ComputationGraph load_graph(const CLI::App *cmd, const CommonOptions &o) {
  const bool batch_set = cmd->count("--batch") > 0;
  if (!o.network_file.empty())
    return parse_network_file(o.network_file, batch_set ? o.batch : 0);
  if (!o.model.empty())
    return builtin_model(o.model, o.batch);
  throw InputError("one of --model or --network is required");
}

DeviceGraph load_devices(const CommonOptions &o) {
  if (!o.device_file.empty())
    return parse_device_file(o.device_file);
  return DeviceGraph::uniform(o.devices);
}

CostTables load_tables(const ComputationGraph &g, const DeviceGraph &d,
                       const CommonOptions &o) {
  CostTables t = build_cost_tables(g, d);
  if (!o.cost_file.empty())
    apply_measured_costs_file(o.cost_file, g, t);
  return t;
}

void emit_strategy(const CommonOptions &o, const json &doc) {
  if (!o.out_file.empty()) {
    std::ofstream out(o.out_file);
    if (!out)
      throw InputError("cannot write '" + o.out_file + "'");
    out << doc.dump(2) << "\n";
  }
  if (o.json)
    std::cout << doc.dump(2) << "\n";
}

int run_plan_like(const CLI::App *cmd, const CommonOptions &o, bool brute,
                  int k_bound, u64 budget) {
  const ComputationGraph g = load_graph(cmd, o);
  const DeviceGraph d = load_devices(o);
  const CostTables t = load_tables(g, d, o);

  const auto start = Clock::now();
  Strategy strategy;
  double cost = 0.0;
  int eliminations = 0, final_nodes = 0;
  u64 visited = 0;
  if (brute) {
    BruteForceResult r = brute_force_plan(g, t, budget);
    strategy = std::move(r.strategy);
    cost = r.cost;
    visited = r.visited;
    eliminations = 0;
    final_nodes = g.layer_count();
  } else {
    PlanResult r = plan_with_tables(g, t, k_bound);
    strategy = std::move(r.strategy);
    cost = r.cost;
    eliminations = r.eliminations();
    final_nodes = r.final_graph_nodes;
  }
  const double elapsed_ms = ms_since(start);

  Report rep = make_report(brute ? "brute-force optimal" : "optimal", g, t,
                           strategy, d, o.bytes);
  rep.planning_ms = elapsed_ms;
  rep.final_graph_nodes = final_nodes;
  rep.eliminations = eliminations;

  json doc = strategy_json(g, strategy, cost, eliminations, final_nodes);
  if (brute)
    doc["strategies_visited"] = visited;
  emit_strategy(o, doc);
  if (!o.json)
    render_report(std::cout, rep);
  return 0;
}

int run_eval(const CLI::App *cmd, const CommonOptions &o,
             const std::string &strategy_file) {
  const ComputationGraph g = load_graph(cmd, o);
  const DeviceGraph d = load_devices(o);
  const CostTables t = load_tables(g, d, o);
  const Strategy s = parse_strategy_file(strategy_file, g);
  for (int l = 0; l < g.layer_count(); ++l)
    if (t.config_index(l, s[static_cast<size_t>(l)]) < 0)
      throw InputError("config " + to_string(s[static_cast<size_t>(l)]) +
                       " is not valid for layer '" + g.layer(l).id + "'");
  const Report rep = make_report(strategy_file, g, t, s, d, o.bytes);
  if (o.json)
    std::cout << report_json(rep).dump(2) << "\n";
  else
    render_report(std::cout, rep);
  return 0;
}

int run_compare(const CLI::App *cmd, const CommonOptions &o, int k_bound) {
  const ComputationGraph g = load_graph(cmd, o);
  const DeviceGraph d = load_devices(o);
  const CostTables t = load_tables(g, d, o);

  struct Row {
    std::string name;
    Strategy strategy;
  };
  std::vector<Row> rows;
  for (BaselineKind k :
       {BaselineKind::Data, BaselineKind::Model, BaselineKind::Owt})
    rows.push_back({baseline_name(k), baseline_strategy(k, g, d)});
  PlanResult pr = plan_with_tables(g, t, k_bound);
  rows.push_back({"optimal", std::move(pr.strategy)});

  json out = json::array();
  std::vector<Report> reps;
  for (const Row &row : rows) {
    Report rep = make_report(row.name, g, t, row.strategy, d, o.bytes);
    json rj;
    rj["strategy"] = row.name;
    rj["cost_seconds"] = rep.total;
    rj["node_seconds"] = rep.node_total;
    rj["transfer_seconds"] = rep.xfer_total;
    if (rep.has_split) {
      rj["compute_seconds"] = rep.compute_total;
      rj["sync_seconds"] = rep.sync_total;
      rj["communication_seconds"] = rep.sync_total + rep.xfer_total;
    }
    if (o.bytes) {
      rj["transfer_bytes"] = rep.xfer_bytes;
      rj["sync_bytes"] = rep.sync_bytes;
      rj["communication_bytes"] = rep.xfer_bytes + rep.sync_bytes;
    }
    out.push_back(rj);
    reps.push_back(std::move(rep));
  }

  if (o.json) {
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << std::left << std::setw(10) << "strategy" << std::right
            << std::setw(16) << "total s" << std::setw(16) << "node s"
            << std::setw(16) << "transfer s";
  if (reps.front().has_split)
    std::cout << std::setw(16) << "comm s";
  if (o.bytes)
    std::cout << std::setw(18) << "comm bytes";
  std::cout << "\n" << std::scientific << std::setprecision(6);
  for (const Report &rep : reps) {
    std::cout << std::left << std::setw(10) << rep.label << std::right
              << std::setw(16) << rep.total << std::setw(16) << rep.node_total
              << std::setw(16) << rep.xfer_total;
    if (rep.has_split)
      std::cout << std::setw(16) << rep.sync_total + rep.xfer_total;
    if (o.bytes)
      std::cout << std::setw(18) << rep.xfer_bytes + rep.sync_bytes;
    std::cout << "\n";
  }
  return 0;
}

int run_emit_model(const CLI::App *cmd, const CommonOptions &o) {
  if (o.model.empty())
    throw InputError("emit-model requires --model");
  const ComputationGraph g = load_graph(cmd, o);
  const json doc = emit_network(g);
  if (!o.out_file.empty()) {
    std::ofstream out(o.out_file);
    if (!out)
      throw InputError("cannot write '" + o.out_file + "'");
    out << doc.dump(2) << "\n";
  } else {
    std::cout << doc.dump(2) << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"layer-wise parallelization planner for CNN computation "
               "graphs on modeled device clusters"};
  app.require_subcommand(1);

  CommonOptions plan_o, brute_o, eval_o, compare_o, emit_o;
  int plan_k_bound = kDefaultFinalGraphBound;
  int compare_k_bound = kDefaultFinalGraphBound;
  u64 brute_budget = kDefaultBruteForceBudget;
  std::string eval_strategy_file;

  CLI::App *plan = app.add_subcommand(
      "plan", "find the minimum-cost parallelization strategy");
  add_common(plan, plan_o);
  plan->add_option("--k-bound", plan_k_bound,
                   "maximum final-graph size to enumerate (default 8)");

  CLI::App *brute = app.add_subcommand(
      "brute", "exhaustive search over all joint configurations");
  add_common(brute, brute_o);
  brute->add_option("--budget", brute_budget,
                    "largest strategy space to scan (default 10^7)");

  CLI::App *eval =
      app.add_subcommand("eval", "evaluate a strategy file's cost");
  add_common(eval, eval_o);
  eval->add_option("--strategy", eval_strategy_file, "strategy JSON file")
      ->required();

  CLI::App *compare = app.add_subcommand(
      "compare", "cost table over data/model/owt baselines and the optimum");
  add_common(compare, compare_o);
  compare->add_option("--k-bound", compare_k_bound,
                      "maximum final-graph size to enumerate (default 8)");

  CLI::App *emit =
      app.add_subcommand("emit-model", "write a builtin model as network JSON");
  add_common(emit, emit_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (plan->parsed())
      return run_plan_like(plan, plan_o, false, plan_k_bound, 0);
    if (brute->parsed())
      return run_plan_like(brute, brute_o, true, 0, brute_budget);
    if (eval->parsed())
      return run_eval(eval, eval_o, eval_strategy_file);
    if (compare->parsed())
      return run_compare(compare, compare_o, compare_k_bound);
    if (emit->parsed())
      return run_emit_model(emit, emit_o);
  } catch (const LimitError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
