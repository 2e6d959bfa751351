#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mecsec/core/hyperparams.hpp"
#include "mecsec/offload/config.hpp"

namespace mecsec::offload {

struct OffloadAction {
  std::size_t edge_index = 0;
  std::size_t rate_level = 0;  // 0 = fully local

  bool operator==(const OffloadAction&) const = default;
};

// Edge-major, rate-minor enumeration.
inline std::size_t action_index(const OffloadConfig& cfg, const OffloadAction& a) {
  return a.edge_index * cfg.num_rate_levels + a.rate_level;
}

inline OffloadAction action_at(const OffloadConfig& cfg, std::size_t index) {
  expects(index < cfg.num_actions(), "action_at: index out of range");
  return {index / cfg.num_rate_levels, index % cfg.num_rate_levels};
}

inline double offload_fraction(const OffloadConfig& cfg, const OffloadAction& a) {
  return static_cast<double>(a.rate_level) / static_cast<double>(cfg.num_rate_levels - 1);
}

struct RewardBreakdown {
  double sinr = 0.0;
  double ber = 0.5;
  double energy_j = 0.0;
  double delay_s = 0.0;
  double utility = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

inline double sinr(double tx_mw, double gain, double noise_mw, double jam_mw, double jam_gain) {
  return tx_mw * gain / (noise_mw + jam_mw * jam_gain);
}

// Noncoherent DPSK bit error probability.
inline double ber(double sinr_linear) { return 0.5 * std::exp(-sinr_linear / 2.0); }

struct EnergyDelay {
  double energy_j = 0.0;
  double delay_s = 0.0;
};

inline EnergyDelay energy_and_delay(const OffloadConfig& cfg, const OffloadAction& a, double sinr_linear,
                                    double bandwidth_mhz, double user_density) {
  const double f = offload_fraction(cfg, a);
  const double bits = static_cast<double>(cfg.task_bits);
  const double cycles_per_bit = static_cast<double>(cfg.cpu_cycles_per_bit);
  const double local_time_all = cfg.local_compute_time_s();
  const double local_energy_all = bits * cycles_per_bit * cfg.energy_per_cycle_j;

  if (f == 0.0) return {local_energy_all, local_time_all};

  const double rate_bps =
      bandwidth_mhz * 1.0e6 * cfg.link_rate_bps_per_hz * std::log2(1.0 + sinr_linear) / (1.0 + user_density);
  if (!(rate_bps > 0.0)) {
    // Offloaded part never arrives: wait out the timeout, then compute everything locally.
    return {local_energy_all, cfg.timeout_factor * local_time_all + local_time_all};
  }
  const double tx_time = f * bits / rate_bps;
  const double energy = tx_time * (cfg.tx_power_mw / 1000.0) + (1.0 - f) * local_energy_all;
  const double remote = tx_time + f * bits * cycles_per_bit / cfg.edge_cpu_hz;
  const double local = (1.0 - f) * local_time_all;
  return {energy, std::max(remote, local)};
}

inline double utility(double sinr_linear, double ber_value, double energy_j, double delay_s, const RewardWeights& w) {
  return w.w_sinr * std::log2(1.0 + sinr_linear) - w.w_ber * ber_value - w.w_energy * energy_j - w.w_delay * delay_s;
}

inline double utility(const RewardBreakdown& rb, const RewardWeights& w) {
  return utility(rb.sinr, rb.ber, rb.energy_j, rb.delay_s, w);
}

}  // namespace mecsec::offload
