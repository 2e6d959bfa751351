#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mecsec/core/error.hpp"
#include "mecsec/core/hyperparams.hpp"
#include "mecsec/core/rng.hpp"

namespace mecsec::agents {

// Dense state x action value table, zero-initialised, with per-entry visit counts.
class QTable {
 public:
  QTable(std::size_t states, std::size_t actions)
      : states_(states), actions_(actions), values_(states * actions, 0.0), visits_(states * actions, 0) {
    expects(states > 0 && actions > 0, "QTable: dimensions must be positive");
  }

  std::size_t states() const noexcept { return states_; }
  std::size_t actions() const noexcept { return actions_; }

  double& at(std::size_t s, std::size_t a) { return values_[offset(s, a)]; }
  double at(std::size_t s, std::size_t a) const { return values_[offset(s, a)]; }
  std::uint64_t visits(std::size_t s, std::size_t a) const { return visits_[offset(s, a)]; }
  std::uint64_t& visits(std::size_t s, std::size_t a) { return visits_[offset(s, a)]; }

  std::span<const double> row(std::size_t s) const {
    check_state(s);
    return {values_.data() + s * actions_, actions_};
  }

  double max_value(std::size_t s) const {
    const auto r = row(s);
    return *std::max_element(r.begin(), r.end());
  }

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  void check_state(std::size_t s) const {
    if (s >= states_) throw ContractViolation("QTable: state index out of range");
  }
  std::size_t offset(std::size_t s, std::size_t a) const {
    check_state(s);
    if (a >= actions_) throw ContractViolation("QTable: action index out of range");
    return s * actions_ + a;
  }

  std::size_t states_;
  std::size_t actions_;
  std::vector<double> values_;
  std::vector<std::uint64_t> visits_;
};

// Lowest index wins ties.
inline std::size_t argmax(std::span<const double> row) {
  expects(!row.empty(), "argmax: empty row");
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

// With probability eps a uniform index, otherwise the greedy one. Always
// consumes one uniform, plus one index draw when exploring.
inline std::size_t epsilon_greedy(std::span<const double> row, double eps, SeededRng& rng) {
  expects(!row.empty(), "epsilon_greedy: empty row");
  if (rng.uniform() < eps) return static_cast<std::size_t>(rng.uniform_index(row.size()));
  return argmax(row);
}

// Q(s,a) <- (1 - alpha) Q(s,a) + alpha (u + gamma max_a' Q(s',a')). Returns the new entry.
inline double q_update(QTable& q, std::size_t s, std::size_t a, double u, std::size_t s_next,
                       const AgentHyperparams& hp) {
  const double target = u + hp.gamma * q.max_value(s_next);
  auto& n = q.visits(s, a);
  const double alpha = hp.learning_rate(n);
  ++n;
  double& v = q.at(s, a);
  v = (1.0 - alpha) * v + alpha * target;
  return v;
}

}  // namespace mecsec::agents
