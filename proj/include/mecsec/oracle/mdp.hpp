#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mecsec/core/error.hpp"

namespace mecsec::oracle {

inline constexpr std::size_t kMaxDenseEntries = 100'000'000;

// Enumerated finite MDP. transition is S x A x S row-major, reward is S x A.
struct ExplicitMdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> transition;
  std::vector<double> reward;
  double gamma = 0.1;
  std::vector<std::size_t> initial_states;  // start support; empty means state 0

  ExplicitMdp() = default;
  ExplicitMdp(std::size_t s, std::size_t a, double g) : num_states(s), num_actions(a), gamma(g) {
    if (s == 0 || a == 0) throw ContractViolation("ExplicitMdp: empty state or action set");
    if (s * a * s > kMaxDenseEntries) throw ContractViolation("ExplicitMdp: dense tensor exceeds 1e8 entries");
    transition.assign(s * a * s, 0.0);
    reward.assign(s * a, 0.0);
  }

  double& p(std::size_t s, std::size_t a, std::size_t sn) { return transition[(s * num_actions + a) * num_states + sn]; }
  double p(std::size_t s, std::size_t a, std::size_t sn) const {
    return transition[(s * num_actions + a) * num_states + sn];
  }
  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {transition.data() + (s * num_actions + a) * num_states, num_states};
  }
  double& r(std::size_t s, std::size_t a) { return reward[s * num_actions + a]; }
  double r(std::size_t s, std::size_t a) const { return reward[s * num_actions + a]; }

  std::vector<std::size_t> starts() const {
    return initial_states.empty() ? std::vector<std::size_t>{0} : initial_states;
  }

  void validate(double row_tol = 1e-9) const {
    if (num_states == 0 || num_actions == 0) throw ContractViolation("ExplicitMdp: empty state or action set");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractViolation("ExplicitMdp: gamma must lie in [0, 1)");
    if (transition.size() != num_states * num_actions * num_states || reward.size() != num_states * num_actions)
      throw ContractViolation("ExplicitMdp: tensor sizes do not match S and A");
    for (std::size_t s = 0; s < num_states; ++s)
      for (std::size_t a = 0; a < num_actions; ++a) {
        if (!std::isfinite(r(s, a)))
          throw ContractViolation("ExplicitMdp: non-finite reward at (" + std::to_string(s) + "," + std::to_string(a) + ")");
        double sum = 0.0;
        for (double v : row(s, a)) {
          if (!(v >= 0.0)) throw ContractViolation("ExplicitMdp: negative transition probability");
          sum += v;
        }
        if (std::abs(sum - 1.0) > row_tol)
          throw ContractViolation("ExplicitMdp: P row (" + std::to_string(s) + "," + std::to_string(a) +
                                  ") sums to " + std::to_string(sum));
      }
    for (auto s0 : initial_states)
      if (s0 >= num_states) throw ContractViolation("ExplicitMdp: initial state out of range");
  }
};

}  // namespace mecsec::oracle
