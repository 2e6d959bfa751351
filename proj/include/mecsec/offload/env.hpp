#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "mecsec/agents/qtable.hpp"
#include "mecsec/core/error.hpp"
#include "mecsec/core/quantizer.hpp"
#include "mecsec/core/rng.hpp"
#include "mecsec/offload/channel.hpp"
#include "mecsec/offload/config.hpp"
#include "mecsec/offload/formulas.hpp"

namespace mecsec::offload {

struct SlotObservation {
  double jam_power_mw = 0.0;  // received at the edge chosen last slot
  double bandwidth_mhz = 0.0;
  double battery_frac = 1.0;
  double user_density = 0.0;

  bool operator==(const SlotObservation&) const = default;
};

struct StepResult {
  SlotObservation observation;
  RewardBreakdown reward;
  OffloadAction applied;  // differs from the request when an empty battery forces local compute
};

// Ground-truth world state. The sweep phase lives here and is never exposed
// through SlotObservation.
struct WorldState {
  std::vector<std::size_t> device_gain_bin;
  std::vector<std::size_t> jam_gain_bin;
  std::size_t bandwidth_bin = 0;
  std::size_t density_bin = 0;
  std::uint64_t slot = 0;
  double battery_j = 0.0;
};

// Chains shared by the simulator and the MDP enumeration.
struct ScenarioChains {
  ChannelModel device;
  ChannelModel jammer;
  ChannelModel bandwidth;
  ChannelModel density;

  explicit ScenarioChains(const OffloadConfig& cfg)
      : device(ChannelModel::birth_death(cfg.gain_levels, cfg.gain_stay_prob)),
        jammer(ChannelModel::birth_death(cfg.jammer.gain_levels, cfg.jammer.gain_stay_prob)),
        bandwidth(ChannelModel::birth_death(cfg.bandwidth_levels_mhz, cfg.bandwidth_stay_prob)),
        density(ChannelModel::birth_death(cfg.user_density_levels, cfg.density_stay_prob)) {}
};

inline std::uint64_t sweep_cycle_length(const OffloadConfig& cfg) {
  return cfg.jammer.kind == JammerKind::sweep ? cfg.jammer.sweep_period_slots * cfg.num_edges : 1;
}

inline std::size_t sweep_target(const OffloadConfig& cfg, std::uint64_t slot) {
  return static_cast<std::size_t>((slot / cfg.jammer.sweep_period_slots) % cfg.num_edges);
}

// Received jamming power (mW) at `edge` when the jammer targets it.
inline double received_jam_mw(const OffloadConfig& cfg, const ScenarioChains& ch, const WorldState& w,
                              std::size_t edge) {
  const double d = cfg.jammer.distance_to_edge[edge];
  return cfg.jammer.jam_power_mw * std::pow(d, -cfg.jammer.path_loss_exp) * ch.jammer.level(w.jam_gain_bin[edge]);
}

struct SlotOutcome {
  RewardBreakdown reward;
  double jam_at_chosen_mw = 0.0;
};

// One slot of the game given the world state, the jammer's target (nullopt = idle)
// and the device action.
inline SlotOutcome evaluate_slot(const OffloadConfig& cfg, const ScenarioChains& ch, const WorldState& w,
                                 std::optional<std::size_t> jam_target, const OffloadAction& a) {
  SlotOutcome out;
  const std::size_t e = a.edge_index;
  const double d = cfg.jammer.distance_to_edge[e];
  const double jam_mw = cfg.jammer.jam_power_mw * std::pow(d, -cfg.jammer.path_loss_exp);
  const bool jammed = jam_target.has_value() && *jam_target == e;
  const double jam_gain = jammed ? ch.jammer.level(w.jam_gain_bin[e]) : 0.0;
  out.jam_at_chosen_mw = jam_mw * jam_gain;

  const double bw = ch.bandwidth.level(w.bandwidth_bin);
  const double density = ch.density.level(w.density_bin);
  RewardBreakdown& rb = out.reward;
  if (a.rate_level == 0) {
    rb.sinr = 0.0;
  } else {
    const double gain = ch.device.level(w.device_gain_bin[e]) * cfg.edge_gain_scale[e];
    rb.sinr = sinr(cfg.tx_power_mw, gain, cfg.noise_mw, jam_mw, jam_gain);
  }
  rb.ber = ber(rb.sinr);
  const auto ed = energy_and_delay(cfg, a, rb.sinr, bw, density);
  rb.energy_j = ed.energy_j;
  rb.delay_s = ed.delay_s;
  rb.utility = utility(rb, cfg.weights);
  return out;
}

// Utility component computable from the action alone: the local share of the
// compute cost (and, for fully local actions, the whole utility).
inline double known_utility(const OffloadConfig& cfg, const OffloadAction& a) {
  const double f = offload_fraction(cfg, a);
  const double local_energy_all = static_cast<double>(cfg.task_bits) * static_cast<double>(cfg.cpu_cycles_per_bit) *
                                  cfg.energy_per_cycle_j;
  const double local_time_all = cfg.local_compute_time_s();
  if (a.rate_level == 0) return utility(0.0, ber(0.0), local_energy_all, local_time_all, cfg.weights);
  return -cfg.weights.w_energy * (1.0 - f) * local_energy_all - cfg.weights.w_delay * (1.0 - f) * local_time_all;
}

// Field order of the ground-truth index: device gains (per edge), jammer gains
// (per edge), bandwidth, density, sweep phase.
inline std::vector<std::size_t> truth_radices(const OffloadConfig& cfg) {
  std::vector<std::size_t> r;
  for (std::size_t e = 0; e < cfg.num_edges; ++e) r.push_back(cfg.gain_levels.size());
  for (std::size_t e = 0; e < cfg.num_edges; ++e) r.push_back(cfg.jammer.gain_levels.size());
  r.push_back(cfg.bandwidth_levels_mhz.size());
  r.push_back(cfg.user_density_levels.size());
  r.push_back(static_cast<std::size_t>(sweep_cycle_length(cfg)));
  return r;
}

// Observation quantizers, field order: jam power, bandwidth, battery, density.
inline std::vector<Quantizer> observation_quantizers(const OffloadConfig& cfg) {
  const auto span_of = [](const std::vector<double>& v) {
    const double lo = v.front();
    const double hi = v.back() > lo ? v.back() : lo + 1.0;
    return std::pair{lo, hi};
  };
  const double dmin = *std::min_element(cfg.jammer.distance_to_edge.begin(), cfg.jammer.distance_to_edge.end());
  double jam_hi = cfg.jammer.jam_power_mw * std::pow(dmin, -cfg.jammer.path_loss_exp) * cfg.jammer.gain_levels.back();
  if (!(jam_hi > 0.0)) jam_hi = 1.0;
  const auto [blo, bhi] = span_of(cfg.bandwidth_levels_mhz);
  const auto [dlo, dhi] = span_of(cfg.user_density_levels);
  return {Quantizer(0.0, jam_hi, cfg.obs_bins), Quantizer(blo, bhi, cfg.obs_bins), Quantizer(0.0, 1.0, cfg.obs_bins),
          Quantizer(dlo, dhi, cfg.obs_bins)};
}

inline std::size_t observation_state_count(const OffloadConfig& cfg) {
  const std::size_t b = cfg.obs_bins;
  return b * b * b * b;
}

inline std::size_t observation_state_index(const std::vector<Quantizer>& q, const SlotObservation& o) {
  const std::size_t bins[4] = {q[0].bins(), q[1].bins(), q[2].bins(), q[3].bins()};
  const std::size_t fields[4] = {q[0](o.jam_power_mw), q[1](o.bandwidth_mhz), q[2](o.battery_frac), q[3](o.user_density)};
  return state_index(bins, fields);
}

// Features in [0, 1] for the neural agent.
inline std::vector<double> observation_features(const std::vector<Quantizer>& q, const SlotObservation& o) {
  const auto scale = [](const Quantizer& qq, double x) { return std::clamp((x - qq.lo()) / (qq.hi() - qq.lo()), 0.0, 1.0); };
  return {scale(q[0], o.jam_power_mw), scale(q[1], o.bandwidth_mhz), std::clamp(o.battery_frac, 0.0, 1.0),
          scale(q[3], o.user_density)};
}

class OffloadEnv {
 public:
  OffloadEnv(OffloadConfig cfg, std::uint64_t seed)
      : cfg_((cfg.validate(), std::move(cfg))),
        chains_(cfg_),
        channel_rng_(SeededRng(seed).child(stream::kChannel)),
        jammer_rng_(SeededRng(seed).child(stream::kJammer)),
        obs_rng_(SeededRng(seed).child(stream::kObservation)),
        quantizers_(observation_quantizers(cfg_)) {
    if (cfg_.jammer.kind == JammerKind::smart) {
      smart_.emplace(cfg_.num_edges + 1, cfg_.num_edges + 1);
      smart_state_ = cfg_.num_edges;
    }
    world_.device_gain_bin.resize(cfg_.num_edges);
    world_.jam_gain_bin.resize(cfg_.num_edges);
    for (auto& b : world_.device_gain_bin) b = channel_rng_.uniform_index(chains_.device.size());
    for (auto& b : world_.jam_gain_bin) b = channel_rng_.uniform_index(chains_.jammer.size());
    world_.bandwidth_bin = channel_rng_.uniform_index(chains_.bandwidth.size());
    world_.density_bin = channel_rng_.uniform_index(chains_.density.size());
    world_.slot = 0;
    world_.battery_j = cfg_.battery_capacity_j;
    const SlotObservation first = truth_observation(0.0);
    history_.push_back(first);
    current_ = first;
  }

  const OffloadConfig& config() const noexcept { return cfg_; }
  const WorldState& world() const noexcept { return world_; }
  const ScenarioChains& chains() const noexcept { return chains_; }
  const std::vector<Quantizer>& quantizers() const noexcept { return quantizers_; }
  const SlotObservation& observation() const noexcept { return current_; }
  std::size_t num_actions() const { return cfg_.num_actions(); }
  bool closed() const noexcept { return closed_; }
  void close() noexcept { closed_ = true; }

  // Jammer target for the current slot under the sweep schedule, if any.
  std::optional<std::size_t> scheduled_target() const {
    if (cfg_.jammer.kind == JammerKind::sweep && cfg_.jammer.jam_power_mw > 0.0) return sweep_target(cfg_, world_.slot);
    return std::nullopt;
  }

  std::size_t truth_state_index() const {
    std::vector<std::size_t> fields;
    fields.insert(fields.end(), world_.device_gain_bin.begin(), world_.device_gain_bin.end());
    fields.insert(fields.end(), world_.jam_gain_bin.begin(), world_.jam_gain_bin.end());
    fields.push_back(world_.bandwidth_bin);
    fields.push_back(world_.density_bin);
    fields.push_back(static_cast<std::size_t>(world_.slot % sweep_cycle_length(cfg_)));
    return state_index(truth_radices(cfg_), fields);
  }

  StepResult step(const OffloadAction& requested) {
    if (closed_) throw ContractViolation("OffloadEnv::step on a closed handle");
    if (requested.edge_index >= cfg_.num_edges || requested.rate_level >= cfg_.num_rate_levels)
      throw ContractViolation("OffloadEnv::step: action out of range");

    OffloadAction a = requested;
    if (!cfg_.frozen && world_.battery_j <= 0.0) a.rate_level = 0;

    std::optional<std::size_t> target;
    std::size_t smart_action = 0;
    if (cfg_.jammer.kind == JammerKind::sweep) {
      target = scheduled_target();
    } else if (cfg_.jammer.kind == JammerKind::smart) {
      const double eps = EpsilonSchedule(cfg_.jammer.smart).at(world_.slot);
      smart_action = agents::epsilon_greedy(smart_->row(smart_state_), eps, jammer_rng_);
      if (smart_action > 0 && cfg_.jammer.jam_power_mw > 0.0) target = smart_action - 1;
    }

    const SlotOutcome out = evaluate_slot(cfg_, chains_, world_, target, a);

    if (smart_) {
      const double cost = smart_action > 0 ? cfg_.jammer.jam_cost : 0.0;
      const std::size_t next_state = a.rate_level > 0 ? a.edge_index : cfg_.num_edges;
      agents::q_update(*smart_, smart_state_, smart_action, -out.reward.utility - cost, next_state, cfg_.jammer.smart);
      smart_state_ = next_state;
    }

    if (!cfg_.frozen) world_.battery_j = std::max(0.0, world_.battery_j - out.reward.energy_j);

    for (auto& b : world_.device_gain_bin) b = chains_.device.next(b, channel_rng_);
    for (auto& b : world_.jam_gain_bin) b = chains_.jammer.next(b, channel_rng_);
    world_.bandwidth_bin = chains_.bandwidth.next(world_.bandwidth_bin, channel_rng_);
    world_.density_bin = chains_.density.next(world_.density_bin, channel_rng_);
    ++world_.slot;

    history_.push_back(truth_observation(out.jam_at_chosen_mw));
    while (history_.size() > cfg_.obs_delay_slots + 1) history_.pop_front();
    current_ = perturb(history_.front());
    return {current_, out.reward, a};
  }

 private:
  SlotObservation truth_observation(double jam_mw) const {
    return {jam_mw, chains_.bandwidth.level(world_.bandwidth_bin), world_.battery_j / cfg_.battery_capacity_j,
            chains_.density.level(world_.density_bin)};
  }

  SlotObservation perturb(SlotObservation o) {
    const double s = cfg_.obs_noise_sigma;
    if (s <= 0.0) return o;
    o.jam_power_mw = std::max(0.0, o.jam_power_mw * (1.0 + s * obs_rng_.normal()));
    o.bandwidth_mhz = std::max(1e-9, o.bandwidth_mhz * (1.0 + s * obs_rng_.normal()));
    o.battery_frac = std::clamp(o.battery_frac * (1.0 + s * obs_rng_.normal()), 0.0, 1.0);
    o.user_density = std::max(0.0, o.user_density * (1.0 + s * obs_rng_.normal()));
    return o;
  }

  OffloadConfig cfg_;
  ScenarioChains chains_;
  SeededRng channel_rng_;
  SeededRng jammer_rng_;
  SeededRng obs_rng_;
  std::vector<Quantizer> quantizers_;
  WorldState world_;
  std::deque<SlotObservation> history_;
  SlotObservation current_;
  std::optional<agents::QTable> smart_;
  std::size_t smart_state_ = 0;
  bool closed_ = false;
};

}  // namespace mecsec::offload
