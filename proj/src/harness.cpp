#include "polyrlt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "polyrlt/errors.hpp"
#include "polyrlt/instance_io.hpp"

namespace polyrlt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

double parse_number(const std::string& text, int line) {
  if (text == "inf" || text == "+inf") return kInf;
  if (text == "-inf") return -kInf;
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(line, "bad number '" + text + "'");
  }
  return v;
}

nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

double geometric_mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += std::log(v);
  return std::exp(sum / static_cast<double>(values.size()));
}

// records[instance][config], with configs and instances in first-occurrence order.
struct Table {
  std::vector<std::string> configs;
  std::vector<std::string> instances;
  std::vector<std::vector<const RunRecord*>> runs;
};

Table tabulate(const std::vector<RunRecord>& records) {
  Table table;
  std::map<std::string, std::size_t> config_index;
  std::map<std::string, std::size_t> instance_index;
  for (const auto& r : records) {
    if (config_index.emplace(r.config, table.configs.size()).second) table.configs.push_back(r.config);
    if (instance_index.emplace(r.instance, table.instances.size()).second) {
      table.instances.push_back(r.instance);
    }
  }
  table.runs.assign(table.instances.size(),
                    std::vector<const RunRecord*>(table.configs.size(), nullptr));
  for (const auto& r : records) {
    auto& slot = table.runs[instance_index[r.instance]][config_index[r.config]];
    if (slot) throw UsageError("duplicate record for " + r.instance + " / " + r.config);
    slot = &r;
  }
  for (std::size_t i = 0; i < table.instances.size(); ++i) {
    for (std::size_t c = 0; c < table.configs.size(); ++c) {
      if (!table.runs[i][c]) {
        throw UsageError("config " + table.configs[c] + " has no record for " + table.instances[i]);
      }
    }
  }
  return table;
}

std::string cell(double v, int precision) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

std::string delta_cell(std::optional<double> value, std::optional<double> baseline) {
  if (!value || !baseline) return "-";
  const double d = percent_delta(*value, *baseline);
  std::ostringstream out;
  out << std::showpos << std::fixed << std::setprecision(2) << d << "%";
  return out.str();
}

template <class Enum, std::size_t N>
Enum enum_from_string(const std::string& text, const std::pair<const char*, Enum> (&table)[N],
                      const char* what) {
  for (const auto& [name, value] : table) {
    if (text == name) return value;
  }
  throw UsageError(std::string("unknown ") + what + " '" + text + "'");
}

const char* stuck_window_name(StuckWindow w) {
  return w == StuckWindow::radical_plus_one ? "radical-plus-one" : "radical-of-sum";
}

}  // namespace

RunRecord make_record(const std::string& instance, const std::string& config,
                      const SolveReport& report) {
  return RunRecord{instance, config, to_string(report.status), report.lb, report.ub,
                   report.rel_gap, report.wall_time, report.nodes};
}

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "instance,config,status,lb,ub,rel_gap,wall_time,nodes\n";
  for (const auto& r : records) {
    out << r.instance << ',' << r.config << ',' << r.status << ',' << format_number(r.lb) << ','
        << format_number(r.ub) << ',' << format_number(r.rel_gap) << ','
        << format_number(r.wall_time) << ',' << r.nodes << '\n';
  }
}

std::vector<RunRecord> read_records_csv(std::istream& in) {
  std::vector<RunRecord> records;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (number == 1 && line.rfind("instance,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 8) throw ParseError(number, "expected 8 fields");
    RunRecord r;
    r.instance = fields[0];
    r.config = fields[1];
    r.status = fields[2];
    if (r.status != "optimal" && r.status != "time_limit" && r.status != "infeasible") {
      throw ParseError(number, "unknown status '" + r.status + "'");
    }
    r.lb = parse_number(fields[3], number);
    r.ub = parse_number(fields[4], number);
    r.rel_gap = parse_number(fields[5], number);
    r.wall_time = parse_number(fields[6], number);
    r.nodes = static_cast<long>(parse_number(fields[7], number));
    records.push_back(std::move(r));
  }
  return records;
}

Summary summarize(const std::vector<RunRecord>& records, const SummaryOptions& options) {
  const Table table = tabulate(records);
  const std::size_t nc = table.configs.size();
  Summary s;
  s.instances = static_cast<int>(table.instances.size());
  for (const auto& name : table.configs) {
    ConfigSummary cs;
    cs.config = name;
    s.configs.push_back(cs);
  }

  std::vector<std::vector<double>> gaps(nc), times(nc), nodes(nc);
  for (const auto& runs : table.runs) {
    int solved = 0, gap_inf = 0, ub_inf = 0, lb_inf = 0;
    bool easy = true;
    for (std::size_t c = 0; c < nc; ++c) {
      const RunRecord& r = *runs[c];
      ConfigSummary& cs = s.configs[c];
      // A proven-infeasible run has no incumbent by nature; it is not counted
      // as missing a bound.
      const bool proven_infeasible = r.status == "infeasible";
      const bool no_gap = !proven_infeasible && !std::isfinite(r.rel_gap);
      const bool no_ub = !proven_infeasible && !std::isfinite(r.ub);
      const bool no_lb = !proven_infeasible && r.lb == -kInf;
      if (r.solved()) ++solved; else ++cs.unsolved;
      if (no_gap) { ++gap_inf; ++cs.gap_infinite; }
      if (no_ub) { ++ub_inf; ++cs.ub_infinite; }
      if (no_lb) { ++lb_inf; ++cs.lb_infinite; }
      if (!r.solved() || r.wall_time >= options.easy_time) easy = false;
    }
    const int all = static_cast<int>(nc);
    if (solved == 0) ++s.unsolved_by_all;
    if (gap_inf == all) ++s.gap_infinite_for_all;
    if (ub_inf == all) ++s.ub_infinite_for_all;
    if (lb_inf == all) ++s.lb_infinite_for_all;

    if (solved < all && gap_inf == 0) {
      ++s.gap_instances;
      for (std::size_t c = 0; c < nc; ++c) {
        gaps[c].push_back(std::max(runs[c]->rel_gap, options.gap_floor));
      }
    }
    if (solved > 0 && !(solved == all && easy)) {
      ++s.time_instances;
      for (std::size_t c = 0; c < nc; ++c) {
        times[c].push_back(std::max(runs[c]->wall_time, options.gap_floor));
      }
    }
    if (solved == all) {
      ++s.node_instances;
      for (std::size_t c = 0; c < nc; ++c) {
        nodes[c].push_back(std::max(static_cast<double>(runs[c]->nodes), 1.0));
      }
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    if (!gaps[c].empty()) s.configs[c].gap = geometric_mean(gaps[c]);
    if (!times[c].empty()) s.configs[c].time = geometric_mean(times[c]);
    if (!nodes[c].empty()) s.configs[c].nodes = geometric_mean(nodes[c]);
  }
  return s;
}

double percent_delta(double value, double baseline) {
  if (baseline == 0.0) return value == 0.0 ? 0.0 : kInf;
  return 100.0 * (value / baseline - 1.0);
}

std::string render_summary(const Summary& s) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"metric"};
  for (const auto& c : s.configs) header.push_back(c.config);
  rows.push_back(header);

  auto count_row = [&](const std::string& label, int for_all, auto field) {
    std::vector<std::string> row{label + " (" + std::to_string(for_all) + ")"};
    for (const auto& c : s.configs) row.push_back(std::to_string(c.*field));
    rows.push_back(row);
  };
  count_row("Unsolved", s.unsolved_by_all, &ConfigSummary::unsolved);
  count_row("Gap=inf", s.gap_infinite_for_all, &ConfigSummary::gap_infinite);
  count_row("UB=inf", s.ub_infinite_for_all, &ConfigSummary::ub_infinite);
  count_row("LB=-inf", s.lb_infinite_for_all, &ConfigSummary::lb_infinite);

  auto mean_row = [&](const std::string& label, int n, auto field, int precision) {
    std::vector<std::string> row{label + " (" + std::to_string(n) + ")"};
    for (std::size_t i = 0; i < s.configs.size(); ++i) {
      const std::optional<double>& v = s.configs[i].*field;
      if (i == 0) {
        row.push_back(v ? cell(*v, precision) : "-");
      } else {
        row.push_back(delta_cell(v, s.configs[0].*field));
      }
    }
    rows.push_back(row);
  };
  mean_row("Gap", s.gap_instances, &ConfigSummary::gap, 4);
  mean_row("Time", s.time_instances, &ConfigSummary::time, 4);
  mean_row("Nodes", s.node_instances, &ConfigSummary::nodes, 6);

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::ostringstream out;
  out << "instances: " << s.instances << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << "  ";
      out << std::left << std::setw(static_cast<int>(widths[i])) << row[i];
    }
    out << '\n';
  }
  return out.str();
}

std::vector<ProfilePoint> performance_profile(const std::vector<RunRecord>& records,
                                              ProfileMetric metric,
                                              const SummaryOptions& options) {
  const Table table = tabulate(records);
  const std::size_t nc = table.configs.size();
  const double total = static_cast<double>(table.instances.size());
  std::vector<std::vector<double>> ratios(nc);
  for (const auto& runs : table.runs) {
    std::vector<double> values(nc);
    double best = kInf;
    for (std::size_t c = 0; c < nc; ++c) {
      const RunRecord& r = *runs[c];
      double v = kInf;
      if (metric == ProfileMetric::time) {
        if (r.solved()) v = std::max(r.wall_time, options.gap_floor);
      } else if (std::isfinite(r.rel_gap)) {
        v = std::max(r.rel_gap, options.gap_floor);
      }
      values[c] = v;
      best = std::min(best, v);
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (std::isfinite(values[c])) ratios[c].push_back(values[c] / best);
    }
  }
  std::vector<ProfilePoint> points;
  for (std::size_t c = 0; c < nc; ++c) {
    auto& rs = ratios[c];
    std::sort(rs.begin(), rs.end());
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (i + 1 < rs.size() && rs[i + 1] == rs[i]) continue;
      points.push_back({table.configs[c], rs[i], static_cast<double>(i + 1) / total});
    }
  }
  return points;
}

void write_profile_csv(std::ostream& out, const std::vector<ProfilePoint>& points) {
  out << "config,ratio,fraction\n";
  for (const auto& p : points) {
    out << p.config << ',' << format_number(p.ratio) << ',' << format_number(p.fraction) << '\n';
  }
}

IntegerMode integer_mode_from_string(const std::string& text) {
  static const std::pair<const char*, IntegerMode> table[] = {
      {"milp", IntegerMode::milp_at_depth},
      {"rlt-first", IntegerMode::rlt_first},
      {"int-first", IntegerMode::integrality_first}};
  return enum_from_string(text, table, "integer mode");
}

BranchingRule branching_rule_from_string(const std::string& text) {
  static const std::pair<const char*, BranchingRule> table[] = {
      {"sum", BranchingRule::sum}, {"range", BranchingRule::range}, {"dual", BranchingRule::dual}};
  return enum_from_string(text, table, "branching rule");
}

ObbtSetting obbt_setting_from_string(const std::string& text) {
  static const std::pair<const char*, ObbtSetting> table[] = {
      {"lp", ObbtSetting::lp}, {"milp", ObbtSetting::milp}, {"off", ObbtSetting::off}};
  return enum_from_string(text, table, "obbt setting");
}

NlpStrategy nlp_strategy_from_string(const std::string& text) {
  static const std::pair<const char*, NlpStrategy> table[] = {
      {"round", NlpStrategy::round},
      {"fix", NlpStrategy::fix},
      {"round-fix", NlpStrategy::round_fix},
      {"off", NlpStrategy::off}};
  return enum_from_string(text, table, "nlp strategy");
}

SolverConfig config_from_json(const nlohmann::json& j, SolverConfig base) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  auto number = [](const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v == "inf" || v == "-inf")) return v == "inf" ? kInf : -kInf;
    throw UsageError("config key '" + key + "' must be a number");
  };
  auto boolean = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_boolean()) throw UsageError("config key '" + key + "' must be true or false");
    return v.get<bool>();
  };
  auto text = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw UsageError("config key '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto whole = [&](const nlohmann::json& v, const std::string& key) {
    const double d = number(v, key);
    if (std::isinf(d) && d > 0) return std::numeric_limits<long>::max();
    if (d != std::floor(d)) throw UsageError("config key '" + key + "' must be an integer");
    return static_cast<long>(d);
  };

  SolverConfig c = base;
  for (const auto& [key, v] : j.items()) {
    if (key == "name") continue;
    if (key == "rel_gap") c.rel_gap = number(v, key);
    else if (key == "abs_gap") c.abs_gap = number(v, key);
    else if (key == "time_limit") c.time_limit = number(v, key);
    else if (key == "integer_mode") c.integer_mode = integer_mode_from_string(text(v, key));
    else if (key == "milp_depth") c.milp_depth = static_cast<int>(whole(v, key));
    else if (key == "branching_rule") c.branching_rule = branching_rule_from_string(text(v, key));
    else if (key == "branch_convex_coeff") c.branch_convex_coeff = number(v, key);
    else if (key == "min_width_frac") c.min_width_frac = number(v, key);
    else if (key == "obbt") c.obbt = obbt_setting_from_string(text(v, key));
    else if (key == "obbt_threads") c.obbt_threads = static_cast<int>(whole(v, key));
    else if (key == "fbbt") c.fbbt = boolean(v, key);
    else if (key == "fbbt_max_passes") c.fbbt_max_passes = static_cast<int>(whole(v, key));
    else if (key == "nlp_strategy") c.nlp_strategy = nlp_strategy_from_string(text(v, key));
    else if (key == "nlp_call_base") c.nlp_call_base = number(v, key);
    else if (key == "nlp_time_cap") c.nlp_time_cap = number(v, key);
    else if (key == "minlp_end") c.minlp_end = boolean(v, key);
    else if (key == "minlp_end_reserve") c.minlp_end_reserve = number(v, key);
    else if (key == "minlp_stuck") c.minlp_on_stuck = boolean(v, key);
    else if (key == "stuck_rel_tol") c.stuck_rel_tol = number(v, key);
    else if (key == "stuck_window") {
      const std::string w = text(v, key);
      if (w == "radical-plus-one") c.stuck_window = StuckWindow::radical_plus_one;
      else if (w == "radical-of-sum") c.stuck_window = StuckWindow::radical_of_sum;
      else throw UsageError("unknown stuck window '" + w + "'");
    }
    else if (key == "minlp_stuck_budget") c.minlp_stuck_budget = number(v, key);
    else if (key == "root_lp") c.root_lp = boolean(v, key);
    else if (key == "node_limit") c.node_limit = whole(v, key);
    else if (key == "milp_node_limit") c.milp_node_limit = whole(v, key);
    else if (key == "milp_time_limit") c.milp_time_limit = number(v, key);
    else throw UsageError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const SolverConfig& c) {
  auto whole = [](long v) -> nlohmann::json {
    if (v == std::numeric_limits<long>::max()) return "inf";
    return v;
  };
  return nlohmann::json{
      {"rel_gap", c.rel_gap},
      {"abs_gap", c.abs_gap},
      {"time_limit", number_json(c.time_limit)},
      {"integer_mode", to_string(c.integer_mode)},
      {"milp_depth", c.milp_depth},
      {"branching_rule", to_string(c.branching_rule)},
      {"branch_convex_coeff", c.branch_convex_coeff},
      {"min_width_frac", c.min_width_frac},
      {"obbt", to_string(c.obbt)},
      {"obbt_threads", c.obbt_threads},
      {"fbbt", c.fbbt},
      {"fbbt_max_passes", c.fbbt_max_passes},
      {"nlp_strategy", to_string(c.nlp_strategy)},
      {"nlp_call_base", c.nlp_call_base},
      {"nlp_time_cap", c.nlp_time_cap},
      {"minlp_end", c.minlp_end},
      {"minlp_end_reserve", c.minlp_end_reserve},
      {"minlp_stuck", c.minlp_on_stuck},
      {"stuck_rel_tol", c.stuck_rel_tol},
      {"stuck_window", stuck_window_name(c.stuck_window)},
      {"minlp_stuck_budget", c.minlp_stuck_budget},
      {"root_lp", c.root_lp},
      {"node_limit", whole(c.node_limit)},
      {"milp_node_limit", whole(c.milp_node_limit)},
      {"milp_time_limit", number_json(c.milp_time_limit)},
  };
}

std::vector<NamedConfig> load_configs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  if (!j.is_array() || j.empty()) throw UsageError(path.string() + ": expected a nonempty array");
  std::vector<NamedConfig> configs;
  std::set<std::string> names;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string()) {
      throw UsageError(path.string() + ": every config needs a string \"name\"");
    }
    const std::string name = entry["name"];
    if (name.empty() || name.find(',') != std::string::npos) {
      throw UsageError("bad config name '" + name + "'");
    }
    if (!names.insert(name).second) throw UsageError("duplicate config name '" + name + "'");
    configs.push_back({name, config_from_json(entry)});
  }
  return configs;
}

nlohmann::json report_to_json(const Problem& problem, const SolveReport& report) {
  const bool max = problem.sense == Sense::maximize;
  nlohmann::json j;
  j["instance"] = problem.name;
  j["status"] = to_string(report.status);
  j["sense"] = max ? "max" : "min";
  j["objective"] = report.incumbent ? number_json(problem.external_objective(report.incumbent->value))
                                    : nlohmann::json(nullptr);
  j["bound"] = number_json(problem.external_objective(report.lb));
  j["lb"] = number_json(report.lb);
  j["ub"] = number_json(report.ub);
  j["rel_gap"] = number_json(report.rel_gap);
  j["abs_gap"] = number_json(report.abs_gap);
  j["root_lb"] = number_json(report.root_lb);
  j["nodes"] = report.nodes;
  if (report.incumbent) {
    nlohmann::json values = nlohmann::json::object();
    for (std::size_t k = 0; k < problem.num_vars(); ++k) {
      values[problem.variables[k].name] = report.incumbent->point[k];
    }
    j["incumbent"] = {{"source", to_string(report.incumbent->source)}, {"values", values}};
  } else {
    j["incumbent"] = nullptr;
  }
  j["minlp_end_calls"] = report.minlp_end_calls;
  j["minlp_stuck_calls"] = report.minlp_stuck_calls;
  j["wall_time"] = report.wall_time;
  j["obbt_time"] = report.obbt_time;
  j["nlp_ls_time"] = report.nlp_ls_time;
  j["minlp_ls_time"] = report.minlp_ls_time;
  return j;
}

nlohmann::json events_to_json(const SolveReport& report) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : report.events) {
    out.push_back({{"id", e.id},
                   {"depth", e.depth},
                   {"kind", e.kind},
                   {"outcome", e.outcome},
                   {"potential", number_json(e.potential)},
                   {"bound", number_json(e.bound)},
                   {"lb", number_json(e.lb)},
                   {"ub", number_json(e.ub)},
                   {"branch_var", e.branch_var},
                   {"beta", number_json(e.beta)},
                   {"time", e.time}});
  }
  return out;
}

std::vector<std::filesystem::path> list_instances(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw UsageError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".poly") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<RunRecord> run_bench(const std::vector<std::filesystem::path>& instances,
                                 const std::vector<NamedConfig>& configs, int workers) {
  if (workers < 1) throw UsageError("workers must be at least 1");
  std::vector<Problem> problems;
  for (const auto& path : instances) problems.push_back(load_instance(path));

  const std::size_t total = problems.size() * configs.size();
  std::vector<RunRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      const Problem& p = problems[t / configs.size()];
      const NamedConfig& c = configs[t % configs.size()];
      try {
        records[t] = make_record(p.name, c.name, solve(p, c.config));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = static_cast<int>(std::min<std::size_t>(workers, std::max<std::size_t>(total, 1)));
    for (int k = 0; k < n; ++k) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

}  // namespace polyrlt
