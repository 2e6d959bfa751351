#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mecsec/core/error.hpp"
#include "mecsec/core/hyperparams.hpp"

namespace mecsec::offload {

enum class JammerKind { none, sweep, smart };

inline const char* to_string(JammerKind k) {
  switch (k) {
    case JammerKind::none: return "none";
    case JammerKind::sweep: return "sweep";
    case JammerKind::smart: return "smart";
  }
  return "?";
}

struct JammerConfig {
  JammerKind kind = JammerKind::sweep;
  double jam_power_mw = 2000.0;
  std::uint64_t sweep_period_slots = 8;
  // Received jamming power at edge e is jam_power_mw * gain * distance_e^-path_loss_exp.
  std::vector<double> distance_to_edge = {10.0, 14.0, 20.0};
  double path_loss_exp = 2.0;
  // Jammer -> edge fading.
  std::vector<double> gain_levels = {0.5, 1.0, 1.5, 2.0};
  double gain_stay_prob = 0.6;
  // Smart jammer only: per-slot cost of jamming (idle is free) and its learner.
  double jam_cost = 0.2;
  AgentHyperparams smart{};

  bool operator==(const JammerConfig&) const = default;
};

struct OffloadConfig {
  std::size_t num_edges = 3;
  std::size_t num_rate_levels = 4;
  double tx_power_mw = 100.0;
  double noise_mw = 1.0;
  std::uint64_t task_bits = 100000;
  std::uint64_t cpu_cycles_per_bit = 100;
  double local_cpu_hz = 1.0e7;
  double edge_cpu_hz = 1.0e9;
  double link_rate_bps_per_hz = 1.0;
  std::vector<double> bandwidth_levels_mhz = {0.1, 0.15, 0.2, 0.25};
  double bandwidth_stay_prob = 0.8;
  double energy_per_cycle_j = 5.0e-8;
  double battery_capacity_j = 5000.0;
  std::vector<double> user_density_levels = {0.0, 1.0, 2.0, 3.0};
  double density_stay_prob = 0.8;
  // Device -> edge fading; each edge scales the common levels by edge_gain_scale[e].
  std::vector<double> gain_levels = {0.02, 0.05, 0.1, 0.2};
  double gain_stay_prob = 0.6;
  std::vector<double> edge_gain_scale = {1.0, 0.8, 0.65};
  RewardWeights weights{};
  JammerConfig jammer{};
  double obs_noise_sigma = 0.0;
  std::uint64_t obs_delay_slots = 0;
  std::size_t obs_bins = 4;
  // A failed transmission waits timeout_factor * (full local compute time) before recomputing locally.
  double timeout_factor = 2.0;
  // Frozen mode: battery held full; required (with no noise/delay, no smart jammer) for MDP enumeration.
  bool frozen = false;
  std::size_t max_enumerated_states = 100000;

  bool operator==(const OffloadConfig&) const = default;

  std::size_t num_actions() const { return num_edges * num_rate_levels; }

  double local_compute_time_s() const {
    return static_cast<double>(task_bits) * static_cast<double>(cpu_cycles_per_bit) / local_cpu_hz;
  }

  void validate() const {
    const std::string p = "offload.";
    require(num_edges > 0, p + "num_edges", "must be positive");
    require(num_rate_levels >= 2, p + "num_rate_levels", "must be >= 2");
    require(tx_power_mw > 0, p + "tx_power_mw", "must be > 0");
    require(noise_mw > 0, p + "noise_mw", "must be > 0");
    require(task_bits > 0, p + "task_bits", "must be positive");
    require(cpu_cycles_per_bit > 0, p + "cpu_cycles_per_bit", "must be positive");
    require(local_cpu_hz > 0, p + "local_cpu_hz", "must be > 0");
    require(edge_cpu_hz > 0, p + "edge_cpu_hz", "must be > 0");
    require(link_rate_bps_per_hz > 0, p + "link_rate_bps_per_hz", "must be > 0");
    require_levels(bandwidth_levels_mhz, p + "bandwidth_levels_mhz", true);
    require_prob(bandwidth_stay_prob, p + "bandwidth_stay_prob");
    require(energy_per_cycle_j >= 0, p + "energy_per_cycle_j", "must be >= 0");
    require(battery_capacity_j > 0, p + "battery_capacity_j", "must be > 0");
    require_levels(user_density_levels, p + "user_density_levels", false);
    require_prob(density_stay_prob, p + "density_stay_prob");
    require_levels(gain_levels, p + "gain_levels", true);
    require_prob(gain_stay_prob, p + "gain_stay_prob");
    require(edge_gain_scale.size() == num_edges, p + "edge_gain_scale", "needs one entry per edge");
    for (double s : edge_gain_scale) require(s > 0 && std::isfinite(s), p + "edge_gain_scale", "entries must be > 0");
    weights.validate(p + "weights");
    require(obs_noise_sigma >= 0, p + "obs_noise_sigma", "must be >= 0");
    require(obs_bins > 0, p + "obs_bins", "must be positive");
    require(timeout_factor >= 0, p + "timeout_factor", "must be >= 0");
    require(max_enumerated_states > 0, p + "max_enumerated_states", "must be positive");

    const std::string j = p + "jammer.";
    require(jammer.jam_power_mw >= 0, j + "jam_power_mw", "must be >= 0");
    require(jammer.sweep_period_slots > 0, j + "sweep_period_slots", "must be positive");
    require(jammer.distance_to_edge.size() == num_edges, j + "distance_to_edge", "needs one entry per edge");
    for (double d : jammer.distance_to_edge) require(d > 0, j + "distance_to_edge", "entries must be > 0");
    require(jammer.path_loss_exp >= 0, j + "path_loss_exp", "must be >= 0");
    require_levels(jammer.gain_levels, j + "gain_levels", true);
    require_prob(jammer.gain_stay_prob, j + "gain_stay_prob");
    require(jammer.jam_cost >= 0, j + "jam_cost", "must be >= 0");
    jammer.smart.validate(j + "smart");
  }

 private:
  static void require_prob(double v, const std::string& f) { require(v >= 0 && v <= 1, f, "must lie in [0, 1]"); }

  static void require_levels(const std::vector<double>& v, const std::string& f, bool strictly_positive) {
    require(!v.empty(), f, "must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      require(std::isfinite(v[i]), f, "entries must be finite");
      require(strictly_positive ? v[i] > 0 : v[i] >= 0, f, strictly_positive ? "entries must be > 0" : "entries must be >= 0");
      if (i > 0) require(v[i] > v[i - 1], f, "entries must be strictly increasing");
    }
  }
};

// Small enumerable scenario for the value-iteration oracle: 3 edges, 4-level
// device fading, deterministic jammer link, sweep jammer, 9 actions.
inline OffloadConfig frozen_offload_config() {
  OffloadConfig c;
  c.num_rate_levels = 3;
  c.bandwidth_levels_mhz = {0.15};
  c.user_density_levels = {1.0};
  c.jammer.gain_levels = {1.0};
  c.jammer.sweep_period_slots = 2;
  c.frozen = true;
  return c;
}

}  // namespace mecsec::offload
