#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mecsec/agents/pds.hpp"
#include "mecsec/core/error.hpp"
#include "mecsec/core/quantizer.hpp"
#include "mecsec/offload/env.hpp"
#include "mecsec/oracle/mdp.hpp"

namespace mecsec::offload {

// Throws ConfigError explaining why cfg cannot be enumerated exactly.
inline void require_frozen(const OffloadConfig& cfg) {
  cfg.validate();
  require(cfg.frozen, "offload.frozen", "MDP enumeration needs frozen mode (battery dynamics make the state continuous)");
  require(cfg.obs_noise_sigma == 0.0, "offload.obs_noise_sigma", "must be 0 in frozen mode");
  require(cfg.obs_delay_slots == 0, "offload.obs_delay_slots", "must be 0 in frozen mode");
  require(cfg.jammer.kind != JammerKind::smart, "offload.jammer.kind",
          "a learning jammer is not a fixed Markov environment; use none or sweep");
  const auto radices = truth_radices(cfg);
  const std::size_t n = state_count(radices);
  require(n <= cfg.max_enumerated_states, "offload.max_enumerated_states",
          std::to_string(n) + " ground-truth states exceed the ceiling of " + std::to_string(cfg.max_enumerated_states));
}

inline WorldState decode_world(const OffloadConfig& cfg, std::size_t index) {
  const auto radices = truth_radices(cfg);
  const auto f = decode_state_index(radices, index);
  const std::size_t e = cfg.num_edges;
  WorldState w;
  w.device_gain_bin.assign(f.begin(), f.begin() + e);
  w.jam_gain_bin.assign(f.begin() + e, f.begin() + 2 * e);
  w.bandwidth_bin = f[2 * e];
  w.density_bin = f[2 * e + 1];
  w.slot = f[2 * e + 2];
  w.battery_j = cfg.battery_capacity_j;
  return w;
}

inline std::optional<std::size_t> frozen_target(const OffloadConfig& cfg, std::uint64_t phase) {
  if (cfg.jammer.kind == JammerKind::sweep && cfg.jammer.jam_power_mw > 0.0) return sweep_target(cfg, phase);
  return std::nullopt;
}

// Exact transition tensor and reward matrix of a frozen scenario. Rewards are
// those of the slot in which the action is taken; the chains then advance
// independently and the sweep phase moves forward by one.
inline oracle::ExplicitMdp enumerate_mdp(const OffloadConfig& cfg, double gamma = 0.1) {
  require_frozen(cfg);
  const ScenarioChains ch(cfg);
  const auto radices = truth_radices(cfg);
  const std::size_t S = state_count(radices);
  const std::size_t A = cfg.num_actions();
  const std::size_t fields = radices.size();
  const std::size_t phase_field = fields - 1;
  oracle::ExplicitMdp mdp(S, A, gamma);

  std::vector<const ChannelModel*> chain_of(fields, nullptr);
  for (std::size_t e = 0; e < cfg.num_edges; ++e) {
    chain_of[e] = &ch.device;
    chain_of[cfg.num_edges + e] = &ch.jammer;
  }
  chain_of[2 * cfg.num_edges] = &ch.bandwidth;
  chain_of[2 * cfg.num_edges + 1] = &ch.density;

  std::vector<double> row(S);
  for (std::size_t s = 0; s < S; ++s) {
    const auto f = decode_state_index(radices, s);
    // Product of independent chain transitions, phase advanced deterministically.
    std::fill(row.begin(), row.end(), 0.0);
    std::vector<std::size_t> g(fields, 0);
    g[phase_field] = (f[phase_field] + 1) % radices[phase_field];
    std::function<void(std::size_t, double)> expand = [&](std::size_t k, double prob) {
      if (k == phase_field) {
        row[state_index(radices, g)] += prob;
        return;
      }
      const auto r = chain_of[k]->row(f[k]);
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] == 0.0) continue;
        g[k] = j;
        expand(k + 1, prob * r[j]);
      }
    };
    expand(0, 1.0);

    const WorldState w = decode_world(cfg, s);
    const auto target = frozen_target(cfg, w.slot);
    for (std::size_t a = 0; a < A; ++a) {
      std::copy(row.begin(), row.end(), mdp.transition.begin() + static_cast<std::ptrdiff_t>((s * A + a) * S));
      mdp.r(s, a) = evaluate_slot(cfg, ch, w, target, action_at(cfg, a)).reward.utility;
    }
  }
  for (std::size_t s = 0; s < S; ++s)
    if (decode_state_index(radices, s)[phase_field] == 0) mdp.initial_states.push_back(s);
  mdp.validate();
  return mdp;
}

// Known-dynamics split over ground-truth states: the whole slot utility is a
// known function of (s, a), the sweep phase advances deterministically and
// only the fading/bandwidth/density chains are learned. The post-decision
// state is s with its phase advanced.
inline agents::PdsStructure truth_pds_structure(const OffloadConfig& cfg) {
  require_frozen(cfg);
  const auto radices = truth_radices(cfg);
  const std::size_t S = state_count(radices);
  const std::size_t A = cfg.num_actions();
  const ScenarioChains ch(cfg);
  std::vector<double> known(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    const WorldState w = decode_world(cfg, s);
    const auto target = frozen_target(cfg, w.slot);
    for (std::size_t a = 0; a < A; ++a) known[s * A + a] = evaluate_slot(cfg, ch, w, target, action_at(cfg, a)).reward.utility;
  }
  agents::PdsStructure st;
  st.states = S;
  st.actions = A;
  st.post_states = S;
  st.post_state = [radices](std::size_t s, std::size_t) {
    auto f = decode_state_index(radices, s);
    f.back() = (f.back() + 1) % radices.back();
    return state_index(radices, f);
  };
  st.known_reward = [known = std::move(known), A](std::size_t s, std::size_t a) { return known[s * A + a]; };
  return st;
}

// Known-dynamics split over quantised observations: only the local share of
// the compute cost is known; the post-decision state is the (s, a) pair.
inline agents::PdsStructure observed_pds_structure(const OffloadConfig& cfg) {
  cfg.validate();
  const std::size_t S = observation_state_count(cfg);
  const std::size_t A = cfg.num_actions();
  std::vector<double> known(A);
  for (std::size_t a = 0; a < A; ++a) known[a] = known_utility(cfg, action_at(cfg, a));
  agents::PdsStructure st;
  st.states = S;
  st.actions = A;
  st.post_states = S * A;
  st.post_state = [A](std::size_t s, std::size_t a) { return s * A + a; };
  st.known_reward = [known = std::move(known)](std::size_t, std::size_t a) { return known[a]; };
  return st;
}

}  // namespace mecsec::offload
