#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "polyrlt/errors.hpp"
#include "polyrlt/harness.hpp"
#include "polyrlt/instance_io.hpp"

namespace {

using namespace polyrlt;

constexpr int kExitUsage = 64;

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return 0;
    case SolveStatus::infeasible:
      return 1;
    case SolveStatus::time_limit:
      return 2;
  }
  return 2;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

void print_report(const Problem& problem, const SolveReport& report) {
  const auto j = report_to_json(problem, report);
  auto show = [&](const char* key) { return j[key].is_string() ? j[key].get<std::string>() : j[key].dump(); };
  std::cout << "instance   " << problem.name << '\n'
            << "status     " << to_string(report.status) << '\n'
            << "objective  " << show("objective") << '\n'
            << "bound      " << show("bound") << '\n'
            << "rel_gap    " << show("rel_gap") << '\n'
            << "nodes      " << report.nodes << '\n'
            << "time       " << std::fixed << std::setprecision(3) << report.wall_time << "s\n";
  std::cout.unsetf(std::ios::floatfield);
  if (report.incumbent) {
    std::cout << "source     " << to_string(report.incumbent->source) << '\n';
    std::cout << std::setprecision(10);
    for (std::size_t k = 0; k < problem.num_vars(); ++k) {
      std::cout << "  " << problem.variables[k].name << " = " << report.incumbent->point[k] << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global solver for mixed-integer polynomial programs"};
  app.require_subcommand(1);

  SolverConfig config;
  std::string instance_path, json_path, log_path;
  std::string branching_rule, integer_mode, obbt, nlp_strategy;
  bool no_fbbt = false, no_minlp_end = false, no_minlp_stuck = false;
  std::optional<long> node_limit;

  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance");
  solve_cmd->add_option("FILE", instance_path, "Instance file")->required();
  solve_cmd->add_option("--time-limit", config.time_limit, "Seconds");
  solve_cmd->add_option("--rel-gap", config.rel_gap);
  solve_cmd->add_option("--abs-gap", config.abs_gap);
  solve_cmd->add_option("--branching-rule", branching_rule, "sum|range|dual");
  solve_cmd->add_option("--integer-mode", integer_mode, "milp|rlt-first|int-first");
  solve_cmd->add_option("--milp-depth", config.milp_depth);
  solve_cmd->add_option("--obbt", obbt, "lp|milp|off");
  solve_cmd->add_flag("--no-fbbt", no_fbbt);
  solve_cmd->add_option("--nlp-strategy", nlp_strategy, "round|fix|round-fix|off");
  solve_cmd->add_flag("--no-minlp-end", no_minlp_end);
  solve_cmd->add_flag("--no-minlp-stuck", no_minlp_stuck);
  solve_cmd->add_option("--node-limit", node_limit);
  solve_cmd->add_option("--threads", config.obbt_threads, "OBBT worker threads");
  solve_cmd->add_option("--json", json_path, "Write a JSON report");
  solve_cmd->add_option("--log", log_path, "Write the node event log (JSON lines)");

  std::string bench_dir, configs_path, records_path = "records.csv";
  int workers = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Run configs over a directory of instances");
  bench_cmd->add_option("DIR", bench_dir)->required();
  bench_cmd->add_option("--configs", configs_path, "JSON array of named configs")->required();
  bench_cmd->add_option("--workers", workers);
  bench_cmd->add_option("--records", records_path, "Records CSV output");

  std::string profile_records, metric = "time", profile_out;
  auto* profile_cmd = app.add_subcommand("profile", "Performance profile from a records CSV");
  profile_cmd->add_option("RECORDS", profile_records)->required();
  profile_cmd->add_option("--metric", metric, "time|gap");
  profile_cmd->add_option("--out", profile_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) {
      if (!branching_rule.empty()) config.branching_rule = branching_rule_from_string(branching_rule);
      if (!integer_mode.empty()) config.integer_mode = integer_mode_from_string(integer_mode);
      if (!obbt.empty()) config.obbt = obbt_setting_from_string(obbt);
      if (!nlp_strategy.empty()) config.nlp_strategy = nlp_strategy_from_string(nlp_strategy);
      config.fbbt = !no_fbbt;
      config.minlp_end = !no_minlp_end;
      config.minlp_on_stuck = !no_minlp_stuck;
      if (node_limit) config.node_limit = *node_limit;
      config.validate();

      const Problem problem = load_instance(instance_path);
      const SolveReport report = solve(problem, config);
      print_report(problem, report);
      if (!json_path.empty()) open_output(json_path) << report_to_json(problem, report).dump(2) << '\n';
      if (!log_path.empty()) {
        auto out = open_output(log_path);
        for (const auto& event : events_to_json(report)) out << event.dump() << '\n';
      }
      return exit_code(report.status);
    }
    if (bench_cmd->parsed()) {
      const auto configs = load_configs(configs_path);
      const auto instances = list_instances(bench_dir);
      if (instances.empty()) throw UsageError("no .poly files in " + bench_dir);
      const auto records = run_bench(instances, configs, workers);
      auto out = open_output(records_path);
      write_records_csv(out, records);
      std::cout << render_summary(summarize(records));
      return 0;
    }
    if (profile_cmd->parsed()) {
      ProfileMetric m;
      if (metric == "time") m = ProfileMetric::time;
      else if (metric == "gap") m = ProfileMetric::gap;
      else throw UsageError("--metric must be time or gap");
      std::ifstream in(profile_records);
      if (!in) throw UsageError("cannot open " + profile_records);
      const auto points = performance_profile(read_records_csv(in), m);
      if (profile_out.empty()) {
        write_profile_csv(std::cout, points);
      } else {
        auto out = open_output(profile_out);
        write_profile_csv(out, points);
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
