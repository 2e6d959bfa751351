#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mecsec/core/error.hpp"
#include "mecsec/core/quantizer.hpp"
#include "mecsec/core/rng.hpp"

namespace mecsec::auth {

struct SpoofPhase {
  std::uint64_t start_slot = 0;
  double probability = 0.0;

  bool operator==(const SpoofPhase&) const = default;
};

inline std::vector<double> even_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

struct AuthConfig {
  std::size_t vec_len = 8;
  double legit_noise_sigma = 0.05;
  double spoof_offset = 0.4;
  std::vector<SpoofPhase> spoof_prob_schedule = {{0, 0.1}, {10000, 0.5}};
  std::vector<double> threshold_grid = even_grid(0.0, 0.5, 16);
  std::size_t window = 50;
  double g_correct = 1.0;
  double c_false_alarm = 1.0;
  double c_miss = 2.0;
  std::size_t obs_bins = 4;

  bool operator==(const AuthConfig&) const = default;

  void validate() const {
    const std::string p = "auth.";
    require(vec_len > 0, p + "vec_len", "must be positive");
    require(legit_noise_sigma > 0, p + "legit_noise_sigma", "must be > 0");
    require(spoof_offset > 0, p + "spoof_offset", "must be > 0");
    require(!spoof_prob_schedule.empty(), p + "spoof_prob_schedule", "must not be empty");
    require(spoof_prob_schedule.front().start_slot == 0, p + "spoof_prob_schedule", "first entry must start at slot 0");
    for (std::size_t i = 0; i < spoof_prob_schedule.size(); ++i) {
      const auto& ph = spoof_prob_schedule[i];
      require(ph.probability >= 0 && ph.probability <= 1, p + "spoof_prob_schedule", "probabilities must lie in [0, 1]");
      if (i > 0) require(ph.start_slot > spoof_prob_schedule[i - 1].start_slot, p + "spoof_prob_schedule",
                         "start slots must be strictly increasing");
    }
    require(!threshold_grid.empty(), p + "threshold_grid", "must not be empty");
    for (std::size_t i = 0; i < threshold_grid.size(); ++i) {
      require(threshold_grid[i] >= 0 && std::isfinite(threshold_grid[i]), p + "threshold_grid", "entries must be finite and >= 0");
      if (i > 0) require(threshold_grid[i] > threshold_grid[i - 1], p + "threshold_grid", "must be strictly increasing");
    }
    require(window > 0, p + "window", "must be positive");
    require(g_correct >= 0, p + "g_correct", "must be >= 0");
    require(c_false_alarm >= 0, p + "c_false_alarm", "must be >= 0");
    require(c_miss >= 0, p + "c_miss", "must be >= 0");
    require(obs_bins > 0, p + "obs_bins", "must be positive");
  }

  double spoof_probability(std::uint64_t slot) const {
    double prob = spoof_prob_schedule.front().probability;
    for (const auto& ph : spoof_prob_schedule)
      if (ph.start_slot <= slot) prob = ph.probability;
    return prob;
  }
};

enum class Decision { accept, reject };
enum class Truth { legit, spoof };
enum class Classification { true_accept, false_alarm, miss, true_reject };

inline Classification classify(Decision d, Truth t) {
  if (t == Truth::legit) return d == Decision::accept ? Classification::true_accept : Classification::false_alarm;
  return d == Decision::accept ? Classification::miss : Classification::true_reject;
}

struct AuthOutcome {
  double statistic = 0.0;
  Decision decision = Decision::accept;
  Truth truth = Truth::legit;
  Classification classification = Classification::true_accept;

  bool operator==(const AuthOutcome&) const = default;
};

struct AuthObservation {
  double recent_false_alarm_rate = 0.0;
  double recent_miss_rate = 0.0;
  double recent_spoof_freq = 0.0;

  bool operator==(const AuthObservation&) const = default;
};

// ||h_est - h_rec||^2 / ||h_rec||^2
inline double test_statistic(std::span<const double> h_est, std::span<const double> h_rec) {
  expects(h_est.size() == h_rec.size(), "test_statistic: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < h_rec.size(); ++i) {
    const double d = h_est[i] - h_rec[i];
    num += d * d;
    den += h_rec[i] * h_rec[i];
  }
  expects(den > 0.0, "test_statistic: zero channel record");
  return num / den;
}

// Ties accept.
inline Decision decide(double statistic, double theta) { return statistic <= theta ? Decision::accept : Decision::reject; }

struct ErrorRates {
  double false_alarm_rate = 0.0;
  double miss_rate = 0.0;
};

// Empty denominators give 0.
template <class Range>
ErrorRates rates(const Range& outcomes) {
  std::size_t legit = 0, spoof = 0, fa = 0, miss = 0;
  for (const AuthOutcome& o : outcomes) {
    if (o.truth == Truth::legit) {
      ++legit;
      if (o.classification == Classification::false_alarm) ++fa;
    } else {
      ++spoof;
      if (o.classification == Classification::miss) ++miss;
    }
  }
  return {legit ? static_cast<double>(fa) / static_cast<double>(legit) : 0.0,
          spoof ? static_cast<double>(miss) / static_cast<double>(spoof) : 0.0};
}

struct AuthStep {
  AuthObservation observation;
  double reward = 0.0;
  AuthOutcome outcome;
};

inline double auth_reward(const AuthConfig& cfg, Classification c) {
  switch (c) {
    case Classification::true_accept:
    case Classification::true_reject: return cfg.g_correct;
    case Classification::false_alarm: return -cfg.c_false_alarm;
    case Classification::miss: return -cfg.c_miss;
  }
  return 0.0;
}

class AuthEnv {
 public:
  AuthEnv(AuthConfig cfg, std::uint64_t seed) : cfg_((cfg.validate(), std::move(cfg))), rng_(SeededRng(seed).child(stream::kAuth)) {
    record_.resize(cfg_.vec_len);
    sign_.resize(cfg_.vec_len);
    for (auto& h : record_) h = 0.5 + rng_.uniform();
    for (auto& s : sign_) s = rng_.bernoulli(0.5) ? 1.0 : -1.0;
  }

  const AuthConfig& config() const noexcept { return cfg_; }
  std::size_t num_actions() const noexcept { return cfg_.threshold_grid.size(); }
  std::uint64_t slot() const noexcept { return slot_; }
  const std::vector<double>& channel_record() const noexcept { return record_; }
  const AuthObservation& observation() const noexcept { return obs_; }

  AuthStep step(std::size_t theta_index) {
    if (theta_index >= cfg_.threshold_grid.size()) throw ContractViolation("AuthEnv::step: threshold index out of range");
    const Truth truth = rng_.bernoulli(cfg_.spoof_probability(slot_)) ? Truth::spoof : Truth::legit;
    std::vector<double> h(cfg_.vec_len);
    for (std::size_t i = 0; i < cfg_.vec_len; ++i) {
      double base = record_[i];
      if (truth == Truth::spoof) base *= 1.0 + cfg_.spoof_offset * sign_[i];
      h[i] = base * (1.0 + cfg_.legit_noise_sigma * rng_.normal());
    }
    AuthOutcome out;
    out.statistic = test_statistic(h, record_);
    out.decision = decide(out.statistic, cfg_.threshold_grid[theta_index]);
    out.truth = truth;
    out.classification = classify(out.decision, truth);

    window_.push_back(out);
    if (window_.size() > cfg_.window) window_.pop_front();
    const ErrorRates er = rates(window_);
    std::size_t spoofs = 0;
    for (const auto& o : window_) spoofs += o.truth == Truth::spoof;
    obs_ = {er.false_alarm_rate, er.miss_rate, static_cast<double>(spoofs) / static_cast<double>(window_.size())};
    ++slot_;
    return {obs_, auth_reward(cfg_, out.classification), out};
  }

 private:
  AuthConfig cfg_;
  SeededRng rng_;
  std::vector<double> record_;
  std::vector<double> sign_;
  std::deque<AuthOutcome> window_;
  AuthObservation obs_{};
  std::uint64_t slot_ = 0;
};

inline std::vector<Quantizer> auth_quantizers(const AuthConfig& cfg) {
  return {Quantizer(0.0, 1.0, cfg.obs_bins), Quantizer(0.0, 1.0, cfg.obs_bins), Quantizer(0.0, 1.0, cfg.obs_bins)};
}

inline std::size_t auth_state_count(const AuthConfig& cfg) { return cfg.obs_bins * cfg.obs_bins * cfg.obs_bins; }

inline std::size_t auth_state_index(const std::vector<Quantizer>& q, const AuthObservation& o) {
  const std::size_t bins[3] = {q[0].bins(), q[1].bins(), q[2].bins()};
  const std::size_t f[3] = {q[0](o.recent_false_alarm_rate), q[1](o.recent_miss_rate), q[2](o.recent_spoof_freq)};
  return state_index(bins, f);
}

}  // namespace mecsec::auth
