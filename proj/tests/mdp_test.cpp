#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "mecsec/offload/mdp.hpp"
#include "mecsec/oracle/value_iteration.hpp"

using namespace mecsec;
using namespace mecsec::offload;

namespace {

OffloadConfig tiny() {
  OffloadConfig c = frozen_offload_config();
  c.num_edges = 2;
  c.num_rate_levels = 2;
  c.gain_levels = {0.05, 0.2};
  c.edge_gain_scale = {1.0, 0.8};
  c.jammer.distance_to_edge = {10, 14};
  c.jammer.sweep_period_slots = 1;
  return c;
}

}  // namespace

TEST(EnumerateMdp, RejectsNonFrozen) {
  OffloadConfig c;
  try {
    enumerate_mdp(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "offload.frozen");
  }
  c = frozen_offload_config();
  c.obs_noise_sigma = 0.1;
  EXPECT_THROW(enumerate_mdp(c), ConfigError);
  c = frozen_offload_config();
  c.jammer.kind = JammerKind::smart;
  EXPECT_THROW(enumerate_mdp(c), ConfigError);
  c = frozen_offload_config();
  c.max_enumerated_states = 100;
  EXPECT_THROW(enumerate_mdp(c), ConfigError);
}

TEST(EnumerateMdp, DefaultFrozenShapeAndNormalization) {
  const auto c = frozen_offload_config();
  const auto mdp = enumerate_mdp(c);
  EXPECT_EQ(mdp.num_states, 64u * 6u);
  EXPECT_EQ(mdp.num_actions, 9u);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      const auto r = mdp.row(s, a);
      ASSERT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 1.0, 1e-9);
    }
  EXPECT_EQ(mdp.initial_states.size(), 64u);
}

TEST(EnumerateMdp, SingleLevelChainsAreDeterministic) {
  OffloadConfig c = frozen_offload_config();
  c.gain_levels = {0.1};
  const auto mdp = enumerate_mdp(c);
  EXPECT_EQ(mdp.num_states, 6u);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      const auto r = mdp.row(s, a);
      std::size_t ones = 0;
      for (double p : r) {
        ASSERT_TRUE(p == 0.0 || p == 1.0);
        ones += p == 1.0;
      }
      ASSERT_EQ(ones, 1u);
      ASSERT_EQ(mdp.p(s, a, (s + 1) % 6), 1.0);  // phase is the only field left
    }
}

TEST(EnumerateMdp, RewardsMatchSimulator) {
  const auto c = frozen_offload_config();
  const auto mdp = enumerate_mdp(c);
  OffloadEnv env(c, 99);
  SeededRng pick(3);
  for (int t = 0; t < 3000; ++t) {
    const std::size_t s = env.truth_state_index();
    const std::size_t a = pick.uniform_index(mdp.num_actions);
    const auto r = env.step(action_at(c, a));
    ASSERT_EQ(r.reward.utility, mdp.r(s, a));
  }
}

// Sampling oracle: empirical next-state frequencies against the analytic tensor.
TEST(EnumerateMdp, MonteCarloTransitionFrequencies) {
  const auto c = tiny();
  const auto mdp = enumerate_mdp(c);
  ASSERT_EQ(mdp.num_states, 8u);
  OffloadEnv env(c, 2026);
  SeededRng pick(17);
  std::map<std::pair<std::size_t, std::size_t>, std::map<std::size_t, int>> counts;
  std::map<std::pair<std::size_t, std::size_t>, int> visits;
  for (int t = 0; t < 100000; ++t) {
    const std::size_t s = env.truth_state_index();
    const std::size_t a = pick.uniform_index(mdp.num_actions);
    env.step(action_at(c, a));
    ++counts[{s, a}][env.truth_state_index()];
    ++visits[{s, a}];
  }
  int cells = 0;
  for (const auto& [sa, n] : visits) {
    ASSERT_GE(n, 500);
    for (std::size_t sn = 0; sn < mdp.num_states; ++sn) {
      const double p = mdp.p(sa.first, sa.second, sn);
      const double k = counts[sa].count(sn) ? counts[sa][sn] : 0;
      if (p == 0.0) {
        ASSERT_EQ(k, 0) << "impossible transition observed";
        continue;
      }
      ++cells;
      // 4 sigma keeps the family-wise false-failure rate low over ~128 cells.
      ASSERT_LE(std::abs(k - n * p), 4.0 * std::sqrt(n * p * (1 - p))) << sa.first << "," << sa.second << "->" << sn;
    }
  }
  EXPECT_GT(cells, 64);
}

TEST(EnumerateMdp, StartsAreThePhaseZeroStates) {
  const auto c = frozen_offload_config();
  const auto mdp = enumerate_mdp(c);
  const auto radices = truth_radices(c);
  for (auto s : mdp.initial_states) EXPECT_EQ(decode_state_index(radices, s).back(), 0u);
  OffloadEnv env(c, 4);
  EXPECT_NE(std::find(mdp.initial_states.begin(), mdp.initial_states.end(), env.truth_state_index()),
            mdp.initial_states.end());
}

TEST(PdsStructures, TruthSplitKnowsUtilityAndAdvancesPhase) {
  const auto c = frozen_offload_config();
  const auto mdp = enumerate_mdp(c);
  const auto st = truth_pds_structure(c);
  // The continuation depends on (s, a) only through post(s, a), which ignores a.
  for (std::size_t s = 0; s < mdp.num_states; s += 7)
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      ASSERT_EQ(st.known_reward(s, a), mdp.r(s, a));
      const std::size_t p = st.post_state(s, a);
      ASSERT_EQ(p, st.post_state(s, 0));
      ASSERT_EQ(decode_state_index(truth_radices(c), p).back(), (decode_state_index(truth_radices(c), s).back() + 1) % 6);
    }
}

TEST(PdsStructures, ObservedSplitKnownPartIsLocalCost) {
  OffloadConfig c;
  const auto st = observed_pds_structure(c);
  EXPECT_EQ(st.states, 256u);
  EXPECT_EQ(st.post_states, 256u * 12u);
  const double local_e = 1e5 * 100 * 5e-8, local_t = 1e5 * 100 / 1e7;
  EXPECT_DOUBLE_EQ(st.known_reward(5, 0), utility(0, 0.5, local_e, local_t, c.weights));
  EXPECT_DOUBLE_EQ(st.known_reward(5, 3), 0.0);
  EXPECT_DOUBLE_EQ(st.known_reward(5, 1), -(0.5 * (2.0 / 3.0) * local_e + 0.5 * (2.0 / 3.0) * local_t));
}
