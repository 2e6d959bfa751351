#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "mecsec/agents/qtable.hpp"

namespace mecsec::agents {

// The analytically known factor of an environment: where each (s, a) lands
// before the unknown dynamics act, and the reward share that is known in
// advance.
struct PdsStructure {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::size_t post_states = 0;
  std::function<std::size_t(std::size_t, std::size_t)> post_state;
  std::function<double(std::size_t, std::size_t)> known_reward;
};

// Post-decision state learner. Action values are reconstructed as
// Q(s, a) = known_reward(s, a) + V(post_state(s, a)).
class PdsModel {
 public:
  explicit PdsModel(PdsStructure structure)
      : st_(std::move(structure)), value_(st_.post_states, 0.0), visits_(st_.post_states, 0), row_(st_.actions) {
    expects(st_.states > 0 && st_.actions > 0 && st_.post_states > 0, "PdsModel: empty structure");
    expects(static_cast<bool>(st_.post_state) && static_cast<bool>(st_.known_reward), "PdsModel: incomplete structure");
  }

  const PdsStructure& structure() const noexcept { return st_; }
  double post_value(std::size_t p) const { return value_.at(p); }
  const std::vector<double>& post_values() const noexcept { return value_; }

  double q(std::size_t s, std::size_t a) const { return st_.known_reward(s, a) + value_.at(st_.post_state(s, a)); }

  std::span<const double> row(std::size_t s) const {
    expects(s < st_.states, "PdsModel: state index out of range");
    for (std::size_t a = 0; a < st_.actions; ++a) row_[a] = q(s, a);
    return row_;
  }

  double max_q(std::size_t s) const {
    const auto r = row(s);
    return *std::max_element(r.begin(), r.end());
  }

  // V(p) <- (1 - alpha) V(p) + alpha (u_unknown + gamma max_a' Q(s', a')), p = post_state(s, a).
  void update(std::size_t s, std::size_t a, double u_unknown, std::size_t s_next, const AgentHyperparams& hp) {
    expects(s < st_.states && a < st_.actions && s_next < st_.states, "pds_update: index out of range");
    const std::size_t p = st_.post_state(s, a);
    const double target = u_unknown + hp.gamma * max_q(s_next);
    const double alpha = hp.learning_rate(visits_[p]);
    ++visits_[p];
    value_[p] = (1.0 - alpha) * value_[p] + alpha * target;
  }

 private:
  PdsStructure st_;
  std::vector<double> value_;
  std::vector<std::uint64_t> visits_;
  mutable std::vector<double> row_;
};

inline void pds_update(PdsModel& model, std::size_t s, std::size_t a, double u_unknown, std::size_t s_next,
                       const AgentHyperparams& hp) {
  model.update(s, a, u_unknown, s_next, hp);
}

}  // namespace mecsec::agents
