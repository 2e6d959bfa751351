#include <gtest/gtest.h>

#include <string>

#include "mecsec/harness/config.hpp"

using namespace mecsec;
using namespace mecsec::harness;

namespace {

std::string parse_error(const std::string& text, std::size_t* line = nullptr) {
  try {
    parse_config_string(text);
  } catch (const ConfigParseError& e) {
    if (line) *line = e.line();
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  EXPECT_EQ(parse_config_string(""), ExperimentConfig{});
  EXPECT_EQ(parse_config_string("# only a comment\n\n   \n"), ExperimentConfig{});
}

TEST(Config, RoundTripBothScenarios) {
  for (Scenario s : {Scenario::offload, Scenario::auth}) {
    ExperimentConfig c = default_config(s);
    c.hp.epsilon_decay = 0.1 + 0.2;  // not exactly representable in short decimal
    c.base_seed = 18446744073709551615ULL;
    c.dqn.learning_rate = 1.0 / 3;
    c.fixed_action = 2;
    if (s == Scenario::offload) {
      c.agent = AgentKind::pds;
      c.offload.gain_levels = {0.01, 0.03, 0.07};
      c.offload.jammer.kind = offload::JammerKind::smart;
    } else {
      c.agent = AgentKind::dynaq;
      c.auth.spoof_prob_schedule = {{0, 0.2}, {500, 0.7}, {900, 0.4}};
    }
    const ExperimentConfig back = parse_config_string(format_config(c));
    EXPECT_EQ(back, c) << format_config(c);
    EXPECT_EQ(format_config(back), format_config(c));
  }
}

TEST(Config, FormatIsScenarioScoped) {
  const std::string off = format_config(default_config(Scenario::offload));
  const std::string au = format_config(default_config(Scenario::auth));
  EXPECT_NE(off.find("offload.num_edges = 3"), std::string::npos);
  EXPECT_EQ(off.find("auth."), std::string::npos);
  EXPECT_NE(au.find("auth.threshold_grid"), std::string::npos);
  EXPECT_EQ(au.find("offload."), std::string::npos);
  EXPECT_NE(off.find("agent.gamma = 0.1"), std::string::npos);
}

TEST(Config, ZeroEdgesNamesField) {
  try {
    parse_config_string("offload.num_edges = 0\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "offload.num_edges");
  }
}

TEST(Config, UnknownKeyReportsLineAndKey) {
  std::size_t line = 0;
  const std::string msg = parse_error("experiment.slots = 5\n\noffload.num_eges = 3\n", &line);
  EXPECT_EQ(line, 3u);
  EXPECT_NE(msg.find("unknown key 'offload.num_eges'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, DuplicateKeyNamesBothLines) {
  std::size_t line = 0;
  const std::string msg = parse_error("agent.alpha = 0.5\n# c\nagent.alpha = 0.6\n", &line);
  EXPECT_EQ(line, 3u);
  EXPECT_NE(msg.find("duplicate key 'agent.alpha'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
}

TEST(Config, MalformedLinesAndValues) {
  std::size_t line = 0;
  EXPECT_NE(parse_error("experiment.slots 5\n", &line).find("expected 'key = value'"), std::string::npos);
  EXPECT_EQ(line, 1u);
  EXPECT_FALSE(parse_error("\nexperiment.slots = ten\n", &line).empty());
  EXPECT_EQ(line, 2u);
  EXPECT_FALSE(parse_error("experiment.slots = -3\n").empty());
  EXPECT_FALSE(parse_error("agent.gamma = 0.1x\n").empty());
  EXPECT_FALSE(parse_error("experiment.agent = sarsa\n").empty());
  EXPECT_FALSE(parse_error("experiment.scenario = games\n").empty());
  EXPECT_FALSE(parse_error("= 3\n").empty());
}

TEST(Config, CommentsAndWhitespace) {
  const auto c = parse_config_string("  experiment.slots   =   123   # trailing\n\tagent.alpha=0.25\n");
  EXPECT_EQ(c.slots, 123u);
  EXPECT_EQ(c.hp.alpha, 0.25);
}

TEST(Config, CrossFieldValidation) {
  EXPECT_THROW(parse_config_string("experiment.scenario = auth\nexperiment.agent = pds\n"), ConfigError);
  EXPECT_THROW(parse_config_string("experiment.scenario = auth\nexperiment.agent = dqn-hotboot\n"), ConfigError);
  EXPECT_THROW(parse_config_string("agent.fixed_action = 12\n"), ConfigError);  // 3 edges x 4 rates
  EXPECT_NO_THROW(parse_config_string("agent.fixed_action = 11\n"));
  EXPECT_THROW(parse_config_string("hotboot.weights = /nonexistent/w.txt\n"), ConfigError);
  EXPECT_THROW(parse_config_string("experiment.runs = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_string("agent.epsilon_min = 0.5\nhotboot.epsilon0 = 0.1\n"), ConfigError);
  EXPECT_NO_THROW(parse_config_string("agent.fixed_action = 99\n", false));
}

TEST(Config, EveryKeyIsSettable) {
  for (const auto& key : config_keys()) {
    const auto text = format_config(default_config(key.rfind("auth.", 0) == 0 ? Scenario::auth : Scenario::offload));
    const auto pos = text.find(key + " = ");
    ASSERT_NE(pos, std::string::npos) << key;
    const auto end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    const std::string prefix = key.rfind("auth.", 0) == 0 ? "experiment.scenario = auth\n" : "";
    if (key == "experiment.scenario") continue;
    EXPECT_NO_THROW(parse_config_string(prefix + line + "\n")) << line;
  }
}
