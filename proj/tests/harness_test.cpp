#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mecsec/harness/experiment.hpp"

using namespace mecsec;
using namespace mecsec::harness;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mecsec_harness_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ExperimentConfig small(Scenario s, AgentKind a, std::uint64_t slots = 1500, std::uint64_t runs = 3) {
  ExperimentConfig c = default_config(s);
  c.agent = a;
  c.slots = slots;
  c.runs = runs;
  return c;
}

std::vector<MetricsRow> rows_of_run(const std::vector<MetricsRow>& rows, std::uint64_t run) {
  std::vector<MetricsRow> out;
  for (const auto& r : rows)
    if (r.run == run) out.push_back(r);
  return out;
}

}  // namespace

TEST(Harness, SameSeedGivesByteIdenticalFiles) {
  for (AgentKind a : {AgentKind::qlearn, AgentKind::dynaq, AgentKind::pds, AgentKind::dqn}) {
    auto c = small(Scenario::offload, a, a == AgentKind::dqn ? 300 : 1500, 2);
    c.output_dir = scratch("a").string();
    run_experiment(c);
    const std::string csv1 = slurp(output_stem(c, to_string(a)) + ".csv");
    const std::string sum1 = slurp(output_stem(c, to_string(a)) + ".summary.txt");
    c.output_dir = scratch("b").string();
    run_experiment(c);
    EXPECT_EQ(csv1, slurp(output_stem(c, to_string(a)) + ".csv")) << to_string(a);
    EXPECT_EQ(sum1, slurp(output_stem(c, to_string(a)) + ".summary.txt")) << to_string(a);
    EXPECT_FALSE(csv1.empty());
  }
}

TEST(Harness, ThreadCountDoesNotChangeResults) {
  for (Scenario s : {Scenario::offload, Scenario::auth}) {
    auto c = small(s, AgentKind::dynaq, 1000, 5);
    c.threads = 1;
    const auto one = run_experiment(c, false);
    c.threads = 4;
    const auto four = run_experiment(c, false);
    std::ostringstream a, b;
    write_csv(a, s, one.rows);
    write_csv(b, s, four.rows);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(one.summary, four.summary);
  }
}

TEST(Harness, RunsAreIndependentOfRunCount) {
  auto c = small(Scenario::offload, AgentKind::qlearn, 800, 4);
  const auto four = run_experiment(c, false);
  const auto alone = run_single(c, 2, nullptr);
  std::ostringstream a, b;
  write_csv(a, c.scenario, rows_of_run(four.rows, 2));
  write_csv(b, c.scenario, alone);
  EXPECT_EQ(a.str(), b.str());
  c.runs = 2;
  const auto two = run_experiment(c, false);
  std::ostringstream x, y;
  write_csv(x, c.scenario, rows_of_run(four.rows, 1));
  write_csv(y, c.scenario, rows_of_run(two.rows, 1));
  EXPECT_EQ(x.str(), y.str());
}

TEST(Harness, DifferentSeedsDiffer) {
  auto c = small(Scenario::offload, AgentKind::qlearn, 500, 1);
  const auto a = run_experiment(c, false);
  c.base_seed = 2;
  const auto b = run_experiment(c, false);
  std::ostringstream x, y;
  write_csv(x, c.scenario, a.rows);
  write_csv(y, c.scenario, b.rows);
  EXPECT_NE(x.str(), y.str());
}

TEST(Harness, ZeroSlotsReportsNoData) {
  auto c = small(Scenario::offload, AgentKind::qlearn, 0, 3);
  c.output_dir = scratch("empty").string();
  const auto res = run_experiment(c);
  EXPECT_TRUE(res.rows.empty());
  EXPECT_FALSE(res.summary.has_data());
  const std::string sum = slurp(output_stem(c, "qlearn") + ".summary.txt");
  EXPECT_NE(sum.find("status = no-data"), std::string::npos) << sum;
  Scenario s{};
  std::istringstream csv(slurp(output_stem(c, "qlearn") + ".csv"));
  EXPECT_TRUE(read_csv(csv, s).empty());
  EXPECT_EQ(s, Scenario::offload);
}

TEST(Harness, SummaryIsRecomputableFromCsv) {
  for (Scenario s : {Scenario::offload, Scenario::auth}) {
    auto c = small(s, AgentKind::qlearn, 1200, 3);
    c.output_dir = scratch("recompute").string();
    const auto res = run_experiment(c);
    std::ifstream is(output_stem(c, "qlearn") + ".csv", std::ios::binary);
    Scenario read_as{};
    const auto rows = read_csv(is, read_as);
    EXPECT_EQ(read_as, s);
    ASSERT_EQ(rows.size(), 3600u);
    EXPECT_EQ(summarize(s, "qlearn", 3, 1200, rows), res.summary);
  }
}

TEST(Harness, RowsCarryConsistentFields) {
  auto c = small(Scenario::auth, AgentKind::qlearn, 2000, 1);
  const auto res = run_experiment(c, false);
  ASSERT_EQ(res.rows.size(), 2000u);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    ASSERT_EQ(r.slot, i);
    ASSERT_EQ(r.theta, c.auth.threshold_grid[r.theta_index]);
    ASSERT_EQ(r.rejected, r.statistic > r.theta);
    ASSERT_GE(r.epsilon, c.hp.epsilon_min);
  }
  const auto off = run_experiment(small(Scenario::offload, AgentKind::random, 500, 1), false);
  for (const auto& r : off.rows) {
    ASSERT_LT(r.edge, 3u);
    ASSERT_LT(r.rate_level, 4u);
    ASSERT_GT(r.energy_j, 0.0);
  }
}

TEST(Harness, FixedAgentPicksBestActionInHindsight) {
  auto c = small(Scenario::offload, AgentKind::fixed, 1000, 1);
  const auto best = run_experiment(c, false).summary.per_run[0].mean_utility;
  for (long long a = 0; a < 12; ++a) {
    c.fixed_action = a;
    EXPECT_GE(best, run_experiment(c, false).summary.per_run[0].mean_utility) << a;
  }
}

TEST(Harness, CompareIdenticalConfigsTies) {
  const auto c = small(Scenario::offload, AgentKind::qlearn, 1000, 3);
  const auto rep = compare({c, c}, 0.8, false);
  ASSERT_EQ(rep.summaries.size(), 2u);
  EXPECT_EQ(rep.summaries[0].agent, "qlearn#0");
  EXPECT_EQ(rep.summaries[1].agent, "qlearn#1");
  ASSERT_EQ(rep.checks.size(), 2u);  // one asymptote and one convergence ordering
  for (const auto& ch : rep.checks) {
    EXPECT_TRUE(ch.holds) << ch.description;
    EXPECT_EQ(ch.seeds_holding, 3u);
  }
  EXPECT_TRUE(rep.all_hold());
  std::ostringstream os;
  write_compare(os, rep);
  EXPECT_NE(os.str().find("all_orderings_hold = true"), std::string::npos);
}

TEST(Harness, CompareRejectsMismatchedInputs) {
  const auto off = small(Scenario::offload, AgentKind::qlearn);
  const auto au = small(Scenario::auth, AgentKind::qlearn);
  EXPECT_THROW(compare({off, au}, 0.8, false), std::invalid_argument);
  EXPECT_THROW(compare({off}, 0.8, false), std::invalid_argument);
  auto other = off;
  other.base_seed = 9;
  EXPECT_THROW(compare({off, other}, 0.8, false), std::invalid_argument);
}

TEST(Harness, LearnerBeatsRandom) {
  const auto rep = compare({small(Scenario::offload, AgentKind::qlearn, 4000, 5),
                            small(Scenario::offload, AgentKind::random, 4000, 5)},
                           0.8, false);
  EXPECT_GT(rep.summaries[0].median.asymptote, rep.summaries[1].median.asymptote);
  EXPECT_TRUE(rep.checks.at(0).holds);
  ASSERT_EQ(rep.checks.size(), 1u);  // random is not a learner
}

TEST(Harness, OracleCheckOnTinyGame) {
  ExperimentConfig c = small(Scenario::offload, AgentKind::pds, 5000, 3);
  c.offload = offload::frozen_offload_config();
  c.offload.num_edges = 2;
  c.offload.num_rate_levels = 2;
  c.offload.gain_levels = {0.05, 0.2};
  c.offload.edge_gain_scale = {1.0, 0.8};
  c.offload.jammer.distance_to_edge = {10, 14};
  c.offload.jammer.sweep_period_slots = 1;
  const auto rep = oracle_check(c);
  EXPECT_EQ(rep.states, 8u);
  EXPECT_EQ(rep.actions, 4u);
  EXPECT_GE(rep.reachable, 1u);
  for (const auto& r : rep.runs) {
    EXPECT_EQ(r.match, 1.0);
    EXPECT_LE(r.regret, 1e-9);
  }
  c.agent = AgentKind::random;
  for (const auto& r : oracle_check(c).runs) {
    EXPECT_GE(r.match, 0.0);
    EXPECT_LE(r.match, 1.0);
    EXPECT_GE(r.regret, -1e-9);
  }
}

TEST(Harness, OracleCheckRejections) {
  ExperimentConfig c = small(Scenario::offload, AgentKind::dqn, 100, 1);
  c.offload = offload::frozen_offload_config();
  EXPECT_THROW(oracle_check(c), ConfigError);
  c.agent = AgentKind::qlearn;
  c.offload.frozen = false;
  EXPECT_THROW(oracle_check(c), ConfigError);
  EXPECT_THROW(oracle_check(small(Scenario::auth, AgentKind::qlearn)), ConfigError);
}

TEST(Harness, ParallelForPropagatesErrors) {
  EXPECT_THROW(parallel_for(8, 3, [](std::size_t i) {
                 if (i == 5) throw std::runtime_error("boom");
               }),
               std::runtime_error);
  std::vector<int> hit(100, 0);
  parallel_for(100, 7, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
}
