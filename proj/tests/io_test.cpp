#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "polyrlt/errors.hpp"
#include "polyrlt/harness.hpp"
#include "polyrlt/instance_io.hpp"

namespace polyrlt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Polynomial poly(std::initializer_list<std::pair<std::vector<int>, double>> terms) {
  Polynomial p;
  for (const auto& [idx, c] : terms) p.add_term(Monomial(idx), c);
  return p;
}

TEST(ParseTest, SingleVariableQuadratic) {
  const Problem p = parse_instance("var x >= 0 <= 1\nmin x^2 - x");
  ASSERT_EQ(p.num_vars(), 1u);
  EXPECT_EQ(problem_degree(p), 2);
  EXPECT_EQ(p.objective, poly({{{0, 0}, 1.0}, {{0}, -1.0}}));
  EXPECT_EQ(p.sense, Sense::minimize);
}

TEST(ParseTest, IntegerVariableAndRow) {
  const Problem p = parse_instance("var y >= 0 <= 3 integer\nmin y\nst c1: y >= 1.5");
  ASSERT_EQ(p.num_vars(), 1u);
  EXPECT_TRUE(p.is_integer(0));
  ASSERT_EQ(p.inequalities.size(), 1u);
  EXPECT_EQ(p.inequalities[0].name, "c1");
  EXPECT_DOUBLE_EQ(p.inequalities[0].rhs, 1.5);
  EXPECT_TRUE(p.equalities.empty());
}

TEST(ParseTest, MaxIsNegatedAndReportedBack) {
  const Problem p = parse_instance("var x >= 0 <= 1\nmax x", "m");
  EXPECT_EQ(p.sense, Sense::maximize);
  EXPECT_EQ(p.objective, poly({{{0}, -1.0}}));
  SolverConfig config;
  config.time_limit = 10;
  const SolveReport report = solve(p, config);
  ASSERT_EQ(report.status, SolveStatus::optimal);
  const auto j = report_to_json(p, report);
  EXPECT_NEAR(j["objective"].get<double>(), 1.0, 1e-6);
  EXPECT_EQ(j["sense"], "max");
  EXPECT_EQ(j["instance"], "m");
}

TEST(ParseTest, LessEqualIsFlipped) {
  const Problem p = parse_instance("var x >= -2 <= 2\nvar y >= -2 <= 2\nmin x\nst c: 2*x*y - y <= 3");
  ASSERT_EQ(p.inequalities.size(), 1u);
  EXPECT_EQ(p.inequalities[0].body, poly({{{0, 1}, -2.0}, {{1}, 1.0}}));
  EXPECT_DOUBLE_EQ(p.inequalities[0].rhs, -3.0);
}

TEST(ParseTest, BinaryCommentsAndEquality) {
  const Problem p = parse_instance(
      "# header\n"
      "var b binary   # trailing\n"
      "var x >= -1.5e0 <= 2.5\n"
      "\n"
      "min -x*b + 3*x^3\n"
      "st e: x + b = 1\n");
  EXPECT_TRUE(p.is_integer(0));
  EXPECT_EQ(p.variables[0].lower, 0.0);
  EXPECT_EQ(p.variables[0].upper, 1.0);
  EXPECT_EQ(p.variables[1].lower, -1.5);
  ASSERT_EQ(p.equalities.size(), 1u);
  EXPECT_EQ(p.equalities[0].body, poly({{{1}, 1.0}, {{0}, 1.0}}));
  EXPECT_EQ(problem_degree(p), 3);
}

int error_line(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

TEST(ParseTest, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("var x >= 0 <= 1\nmin z"), 2);
  EXPECT_EQ(error_line("var x >= 0 <= 1\nvar x >= 0 <= 2\nmin x"), 2);
  EXPECT_EQ(error_line("var x >= 0 <= inf\nmin x"), 1);
  EXPECT_EQ(error_line("var x >= 0\nmin x"), 1);
  EXPECT_EQ(error_line("var x >= 0 <= 1\nmin x\nst c: x >> 1"), 3);
  EXPECT_EQ(error_line("var x >= 0 <= 1\nmin x\nst c: x >= 1\nst c: x >= 0"), 4);
  EXPECT_EQ(error_line("var x >= 0 <= 1\nmin x^0"), 2);
  EXPECT_EQ(error_line("var x >= 2 <= 1\nmin x"), 1);
  EXPECT_EQ(error_line("var x >= 0 <= 1\nminimize x"), 2);
  EXPECT_THROW(parse_instance("var x >= 0 <= 1\n"), ParseError);
}

TEST(ParseTest, RoundTripIsIdentical) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coeff(-5.0, 5.0);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    Problem p;
    p.name = "rt";
    for (int j = 0; j < 4; ++j) {
      const double lo = std::round(coeff(rng) * 10) / 10 - 6;
      p.variables.push_back({"v" + std::to_string(j), lo, lo + 3.0 + std::abs(coeff(rng)), j % 2 == 0});
    }
    auto random_poly = [&] {
      Polynomial q;
      for (int k = 0; k < 5; ++k) {
        std::vector<int> idx;
        for (int d = 1 + pick(rng); d > 0; --d) idx.push_back(pick(rng));
        q.add_term(Monomial(idx), coeff(rng));
      }
      return q;
    };
    p.objective = random_poly();
    p.sense = trial % 2 ? Sense::maximize : Sense::minimize;
    p.inequalities.push_back({"g", random_poly(), coeff(rng)});
    p.equalities.push_back({"h", random_poly(), coeff(rng)});
    const std::string text = serialize_instance(p);
    const Problem back = parse_instance(text, "rt");
    EXPECT_EQ(back, p) << text;
    EXPECT_EQ(serialize_instance(back), text);
  }
}

RunRecord rec(std::string instance, std::string config, std::string status, double lb, double ub,
              double gap, double time, long nodes) {
  return RunRecord{std::move(instance), std::move(config), std::move(status), lb, ub, gap, time, nodes};
}

TEST(SummaryTest, TimeMeanOfTwoInstances) {
  const std::vector<RunRecord> records{rec("i1", "A", "optimal", 0, 0, 0, 2.0, 3),
                                       rec("i2", "A", "optimal", 0, 0, 0, 8.0, 12)};
  const Summary s = summarize(records, {.easy_time = 1.0});
  ASSERT_EQ(s.configs.size(), 1u);
  EXPECT_EQ(s.time_instances, 2);
  EXPECT_NEAR(*s.configs[0].time, 4.0, 1e-9);
  EXPECT_NEAR(*s.configs[0].nodes, 6.0, 1e-9);
  EXPECT_EQ(s.configs[0].unsolved, 0);
  EXPECT_FALSE(s.configs[0].gap.has_value());
}

TEST(SummaryTest, SymmetricGapsGiveZeroDelta) {
  const std::vector<RunRecord> records{rec("i1", "A", "time_limit", 0, 1, 0.1, 10, 5),
                                       rec("i1", "B", "time_limit", 0, 1, 0.2, 10, 5),
                                       rec("i2", "A", "time_limit", 0, 1, 0.2, 10, 5),
                                       rec("i2", "B", "time_limit", 0, 1, 0.1, 10, 5)};
  const Summary s = summarize(records);
  EXPECT_EQ(s.gap_instances, 2);
  EXPECT_NEAR(*s.configs[0].gap, std::sqrt(0.02), 1e-12);
  EXPECT_NEAR(*s.configs[1].gap, *s.configs[0].gap, 1e-12);
  EXPECT_NEAR(percent_delta(*s.configs[1].gap, *s.configs[0].gap), 0.0, 1e-9);
  EXPECT_NE(render_summary(s).find("+0.00%"), std::string::npos);
  EXPECT_EQ(s.unsolved_by_all, 2);
}

TEST(SummaryTest, HandComputedTable) {
  // i1: both solve fast.  i2: A solves in 10s, B hits the limit with a gap.
  // i3: nobody solves; A has no incumbent.  i4: both solve, B slowly.
  const std::vector<RunRecord> records{
      rec("i1", "A", "optimal", 1, 1, 0, 1.0, 1), rec("i1", "B", "optimal", 1, 1, 0, 2.0, 4),
      rec("i2", "A", "optimal", 1, 1, 0, 10.0, 9), rec("i2", "B", "time_limit", 0.5, 1, 0.5, 100.0, 50),
      rec("i3", "A", "time_limit", -kInf, kInf, kInf, 100.0, 70),
      rec("i3", "B", "time_limit", 0, 2, 1.0, 100.0, 80),
      rec("i4", "A", "optimal", 2, 2, 0, 4.0, 0), rec("i4", "B", "optimal", 2, 2, 0, 16.0, 25)};
  const Summary s = summarize(records);
  EXPECT_EQ(s.instances, 4);
  EXPECT_EQ(s.configs[0].unsolved, 1);
  EXPECT_EQ(s.configs[1].unsolved, 2);
  EXPECT_EQ(s.unsolved_by_all, 1);
  EXPECT_EQ(s.configs[0].gap_infinite, 1);
  EXPECT_EQ(s.configs[1].gap_infinite, 0);
  EXPECT_EQ(s.configs[0].ub_infinite, 1);
  EXPECT_EQ(s.configs[0].lb_infinite, 1);
  EXPECT_EQ(s.gap_infinite_for_all, 0);
  // Gap: only i2 qualifies (i3 has an infinite gap, i1/i4 solved by all).
  EXPECT_EQ(s.gap_instances, 1);
  EXPECT_NEAR(*s.configs[0].gap, 1e-6, 1e-15);
  EXPECT_NEAR(*s.configs[1].gap, 0.5, 1e-12);
  // Time: i2 and i4 (i1 easy for all, i3 solved by none).
  EXPECT_EQ(s.time_instances, 2);
  EXPECT_NEAR(*s.configs[0].time, std::sqrt(40.0), 1e-9);
  EXPECT_NEAR(*s.configs[1].time, 40.0, 1e-9);
  // Nodes: i1 and i4, zero clamped to one.
  EXPECT_EQ(s.node_instances, 2);
  EXPECT_NEAR(*s.configs[0].nodes, 1.0, 1e-12);
  EXPECT_NEAR(*s.configs[1].nodes, 10.0, 1e-9);
}

TEST(SummaryTest, InfeasibleRunsAreNotMissingBounds) {
  const std::vector<RunRecord> records{rec("i", "A", "infeasible", kInf, kInf, 0, 1, 1)};
  const Summary s = summarize(records);
  EXPECT_EQ(s.configs[0].unsolved, 0);
  EXPECT_EQ(s.configs[0].ub_infinite, 0);
  EXPECT_EQ(s.configs[0].gap_infinite, 0);
}

TEST(SummaryTest, MismatchedInstanceSets) {
  const std::vector<RunRecord> records{rec("i1", "A", "optimal", 0, 0, 0, 1, 1),
                                       rec("i2", "B", "optimal", 0, 0, 0, 1, 1)};
  EXPECT_THROW(summarize(records), UsageError);
  const std::vector<RunRecord> dup{rec("i1", "A", "optimal", 0, 0, 0, 1, 1),
                                   rec("i1", "A", "optimal", 0, 0, 0, 1, 1)};
  EXPECT_THROW(summarize(dup), UsageError);
}

TEST(SummaryTest, PercentDelta) {
  EXPECT_NEAR(percent_delta(150, 100), 50.0, 1e-12);
  EXPECT_NEAR(percent_delta(50, 100), -50.0, 1e-12);
  EXPECT_EQ(percent_delta(0, 0), 0.0);
}

std::vector<ProfilePoint> points_of(const std::vector<ProfilePoint>& all, const std::string& config) {
  std::vector<ProfilePoint> out;
  for (const auto& p : all) {
    if (p.config == config) out.push_back(p);
  }
  return out;
}

TEST(ProfileTest, RatiosAgainstBest) {
  const std::vector<RunRecord> records{rec("i1", "A", "optimal", 0, 0, 0, 1, 1),
                                       rec("i1", "B", "optimal", 0, 0, 0, 2, 1),
                                       rec("i2", "A", "optimal", 0, 0, 0, 4, 1),
                                       rec("i2", "B", "optimal", 0, 0, 0, 2, 1)};
  const auto points = performance_profile(records, ProfileMetric::time);
  for (const std::string config : {"A", "B"}) {
    const auto pts = points_of(points, config);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_NEAR(pts[0].ratio, 1.0, 1e-12);
    EXPECT_NEAR(pts[0].fraction, 0.5, 1e-12);
    EXPECT_NEAR(pts[1].ratio, 2.0, 1e-12);
    EXPECT_NEAR(pts[1].fraction, 1.0, 1e-12);
  }
}

TEST(ProfileTest, IdenticalTimesJumpToOne) {
  const std::vector<RunRecord> records{rec("i1", "A", "optimal", 0, 0, 0, 3, 1),
                                       rec("i1", "B", "optimal", 0, 0, 0, 3, 1),
                                       rec("i2", "A", "optimal", 0, 0, 0, 5, 1),
                                       rec("i2", "B", "optimal", 0, 0, 0, 5, 1)};
  const auto points = performance_profile(records, ProfileMetric::time);
  ASSERT_EQ(points.size(), 2u);
  for (const auto& p : points) {
    EXPECT_EQ(p.ratio, 1.0);
    EXPECT_EQ(p.fraction, 1.0);
  }
}

TEST(ProfileTest, FailureNeverReachesOne) {
  const std::vector<RunRecord> records{rec("i1", "A", "optimal", 0, 0, 0, 3, 1),
                                       rec("i1", "B", "time_limit", 0, 1, 0.5, 9, 1),
                                       rec("i2", "A", "optimal", 0, 0, 0, 5, 1),
                                       rec("i2", "B", "optimal", 0, 0, 0, 1, 1)};
  const auto points = performance_profile(records, ProfileMetric::time);
  for (const auto& p : points_of(points, "B")) EXPECT_LT(p.fraction, 1.0);
  const auto gap_points = performance_profile(records, ProfileMetric::gap);
  // A has gap 0 on both (floored), B has 0.5 on i1: ratio 5e5.
  const auto b = points_of(gap_points, "B");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_NEAR(b[1].ratio, 0.5 / 1e-6, 1e-6);
}

TEST(ProfileTest, CurvesAreMonotoneInUnitInterval) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> time(0.1, 50.0);
  std::vector<RunRecord> records;
  for (int i = 0; i < 30; ++i) {
    for (const std::string config : {"A", "B", "C"}) {
      const bool fail = time(rng) > 40.0;
      records.push_back(rec("i" + std::to_string(i), config, fail ? "time_limit" : "optimal", 0, 1,
                            fail ? kInf : 0.0, time(rng), 1));
    }
  }
  const auto points = performance_profile(records, ProfileMetric::time);
  for (const std::string config : {"A", "B", "C"}) {
    double last_ratio = 0.0, last_fraction = 0.0;
    for (const auto& p : points_of(points, config)) {
      EXPECT_GT(p.ratio, last_ratio);
      EXPECT_GE(p.ratio, 1.0);
      EXPECT_GT(p.fraction, last_fraction);
      EXPECT_LE(p.fraction, 1.0);
      last_ratio = p.ratio;
      last_fraction = p.fraction;
    }
  }
}

TEST(RecordsTest, CsvRoundTrip) {
  const std::vector<RunRecord> records{rec("i1", "A", "time_limit", -kInf, kInf, kInf, 1.25, 7),
                                       rec("i1", "B", "optimal", -0.1, 0.30000000000000004, 1e-7, 0.5, 0)};
  std::stringstream io;
  write_records_csv(io, records);
  const auto back = read_records_csv(io);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].instance, records[k].instance);
    EXPECT_EQ(back[k].config, records[k].config);
    EXPECT_EQ(back[k].status, records[k].status);
    EXPECT_EQ(back[k].lb, records[k].lb);
    EXPECT_EQ(back[k].ub, records[k].ub);
    EXPECT_EQ(back[k].rel_gap, records[k].rel_gap);
    EXPECT_EQ(back[k].wall_time, records[k].wall_time);
    EXPECT_EQ(back[k].nodes, records[k].nodes);
  }
  std::stringstream bad("instance,config,status,lb,ub,rel_gap,wall_time,nodes\na,b,optimal,1,2\n");
  EXPECT_THROW(read_records_csv(bad), ParseError);
}

TEST(ConfigTest, JsonRoundTrip) {
  SolverConfig c;
  c.integer_mode = IntegerMode::rlt_first;
  c.milp_depth = 5;
  c.branching_rule = BranchingRule::range;
  c.obbt = ObbtSetting::off;
  c.fbbt = false;
  c.nlp_strategy = NlpStrategy::fix;
  c.minlp_end = false;
  c.stuck_window = StuckWindow::radical_of_sum;
  c.node_limit = 12;
  const SolverConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(back.integer_mode, IntegerMode::rlt_first);
  EXPECT_EQ(back.node_limit, 12);
  EXPECT_EQ(back.milp_time_limit, kInf);
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"frobnicate", 1}}), UsageError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"integer_mode", "sideways"}}), UsageError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"fbbt", 1}}), UsageError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"rel_gap", -1}}), UsageError);
}

}  // namespace
}  // namespace polyrlt
