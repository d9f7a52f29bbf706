#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "polyrlt/driver.hpp"
#include "polyrlt/problem.hpp"

namespace polyrlt {

struct RunRecord {
  std::string instance;
  std::string config;
  std::string status;  // optimal, time_limit, infeasible
  double lb = 0.0;
  double ub = 0.0;
  double rel_gap = 0.0;
  double wall_time = 0.0;
  long nodes = 0;

  bool solved() const { return status == "optimal" || status == "infeasible"; }
};

RunRecord make_record(const std::string& instance, const std::string& config,
                      const SolveReport& report);

// CSV with header instance,config,status,lb,ub,rel_gap,wall_time,nodes.
// Infinite values are written as inf / -inf.
void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(std::istream& in);

struct ConfigSummary {
  std::string config;
  int unsolved = 0;
  int gap_infinite = 0;
  int ub_infinite = 0;
  int lb_infinite = 0;
  // Geometric means; nullopt when no instance qualifies.
  std::optional<double> gap;
  std::optional<double> time;
  std::optional<double> nodes;
};

struct Summary {
  int instances = 0;
  int unsolved_by_all = 0;
  int gap_infinite_for_all = 0;
  int ub_infinite_for_all = 0;
  int lb_infinite_for_all = 0;
  int gap_instances = 0;
  int time_instances = 0;
  int node_instances = 0;
  // First config is the baseline.
  std::vector<ConfigSummary> configs;
};

struct SummaryOptions {
  // Instances solved by every config in less than this many seconds are left
  // out of the time mean.
  double easy_time = 5.0;
  // Gaps below this floor are raised to it before taking logs.
  double gap_floor = 1e-6;
};

// Configs appear in order of first occurrence; every config must cover the
// same instance set (UsageError otherwise).
Summary summarize(const std::vector<RunRecord>& records, const SummaryOptions& options = {});

// Percentage change of `value` against `baseline`.
double percent_delta(double value, double baseline);

// Table with the baseline column in absolute values and the other columns as
// percentage deltas for Gap, Time and Nodes.
std::string render_summary(const Summary& summary);

enum class ProfileMetric { time, gap };

struct ProfilePoint {
  std::string config;
  double ratio = 0.0;
  double fraction = 0.0;
};

// Per-instance ratio of each config's metric to the best config's; unsolved
// runs (time) or missing gaps (gap) count as infinite ratios. Emits one point
// per distinct finite ratio per config.
std::vector<ProfilePoint> performance_profile(const std::vector<RunRecord>& records,
                                              ProfileMetric metric,
                                              const SummaryOptions& options = {});
void write_profile_csv(std::ostream& out, const std::vector<ProfilePoint>& points);

// Named solver configuration read from the bench configs file.
struct NamedConfig {
  std::string name;
  SolverConfig config;
};

IntegerMode integer_mode_from_string(const std::string& text);
BranchingRule branching_rule_from_string(const std::string& text);
ObbtSetting obbt_setting_from_string(const std::string& text);
NlpStrategy nlp_strategy_from_string(const std::string& text);

SolverConfig config_from_json(const nlohmann::json& j, SolverConfig base = {});
nlohmann::json config_to_json(const SolverConfig& config);
// Accepts a JSON array of objects with a "name" key plus solver settings.
std::vector<NamedConfig> load_configs(const std::filesystem::path& path);

// Structured solve report in the problem's own sense. Timing fields are
// wall_time, obbt_time, nlp_ls_time and minlp_ls_time.
nlohmann::json report_to_json(const Problem& problem, const SolveReport& report);
nlohmann::json events_to_json(const SolveReport& report);

// Sorted list of *.poly files under `dir`.
std::vector<std::filesystem::path> list_instances(const std::filesystem::path& dir);

// Solves every (instance, config) pair on up to `workers` threads. Records
// come back ordered by instance then config regardless of completion order.
std::vector<RunRecord> run_bench(const std::vector<std::filesystem::path>& instances,
                                 const std::vector<NamedConfig>& configs, int workers);

}  // namespace polyrlt
