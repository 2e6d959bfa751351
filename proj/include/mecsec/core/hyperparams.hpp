#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "mecsec/core/error.hpp"

namespace mecsec {

enum class AlphaMode { fixed, visit_decay };

inline const char* to_string(AlphaMode m) { return m == AlphaMode::fixed ? "fixed" : "visit_decay"; }

struct AgentHyperparams {
  double alpha = 0.7;
  double gamma = 0.1;
  double epsilon0 = 0.9;
  double epsilon_min = 0.01;
  double epsilon_decay = 0.995;
  // visit_decay: alpha_n = 1 / (1 + n)^alpha_decay_exponent, n = prior visits of (s, a).
  AlphaMode alpha_mode = AlphaMode::fixed;
  double alpha_decay_exponent = 0.6;

  bool operator==(const AgentHyperparams&) const = default;

  void validate(const std::string& prefix = "agent") const {
    require(alpha > 0.0 && alpha <= 1.0, prefix + ".alpha", "must lie in (0, 1]");
    require(gamma >= 0.0 && gamma < 1.0, prefix + ".gamma", "must lie in [0, 1)");
    require(epsilon0 >= 0.0 && epsilon0 <= 1.0, prefix + ".epsilon0", "must lie in [0, 1]");
    require(epsilon_min >= 0.0 && epsilon_min <= epsilon0, prefix + ".epsilon_min", "must lie in [0, epsilon0]");
    require(epsilon_decay > 0.0 && epsilon_decay <= 1.0, prefix + ".epsilon_decay", "must lie in (0, 1]");
    require(alpha_decay_exponent > 0.5 && alpha_decay_exponent <= 1.0, prefix + ".alpha_decay_exponent",
            "must lie in (0.5, 1]");
  }

  double learning_rate(std::uint64_t prior_visits) const {
    if (alpha_mode == AlphaMode::fixed) return alpha;
    return 1.0 / std::pow(1.0 + static_cast<double>(prior_visits), alpha_decay_exponent);
  }
};

// epsilon(t) = max(epsilon_min, epsilon0 * epsilon_decay^t)
struct EpsilonSchedule {
  double epsilon0 = 0.9;
  double epsilon_min = 0.01;
  double epsilon_decay = 0.995;

  EpsilonSchedule() = default;
  explicit EpsilonSchedule(const AgentHyperparams& hp)
      : epsilon0(hp.epsilon0), epsilon_min(hp.epsilon_min), epsilon_decay(hp.epsilon_decay) {}

  double at(std::uint64_t t) const {
    return std::max(epsilon_min, epsilon0 * std::pow(epsilon_decay, static_cast<double>(t)));
  }
};

struct RewardWeights {
  double w_sinr = 1.0;
  double w_ber = 1.0;
  double w_energy = 0.5;
  double w_delay = 0.5;

  bool operator==(const RewardWeights&) const = default;

  void validate(const std::string& prefix = "offload.weights") const {
    require(w_sinr >= 0, prefix + ".w_sinr", "must be >= 0");
    require(w_ber >= 0, prefix + ".w_ber", "must be >= 0");
    require(w_energy >= 0, prefix + ".w_energy", "must be >= 0");
    require(w_delay >= 0, prefix + ".w_delay", "must be >= 0");
    require(w_sinr > 0 || w_ber > 0 || w_energy > 0 || w_delay > 0, prefix,
            "at least one weight must be strictly positive");
  }
};

}  // namespace mecsec
