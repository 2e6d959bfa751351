#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mecsec/core/error.hpp"
#include "mecsec/core/rng.hpp"

namespace mecsec::offload {

// Finite-state Markov chain over strictly increasing levels. Used for link
// fading gains, and reused for the bandwidth and user-density processes.
class ChannelModel {
 public:
  ChannelModel(std::vector<double> levels, std::vector<std::vector<double>> transition)
      : levels_(std::move(levels)), transition_(std::move(transition)) {
    validate();
  }

  // Reflecting birth-death chain: stay with probability `stay`, move one level
  // up or down with (1 - stay) / 2 each; mass that would leave the ends stays.
  static ChannelModel birth_death(std::vector<double> levels, double stay) {
    if (!(stay >= 0.0 && stay <= 1.0)) throw ContractViolation("birth_death: stay probability outside [0, 1]");
    const std::size_t n = levels.size();
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    const double move = (1.0 - stay) / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
      t[i][i] = stay;
      if (i > 0) t[i][i - 1] += move; else t[i][i] += move;
      if (i + 1 < n) t[i][i + 1] += move; else t[i][i] += move;
    }
    return ChannelModel(std::move(levels), std::move(t));
  }

  std::size_t size() const noexcept { return levels_.size(); }
  double level(std::size_t bin) const { return levels_.at(bin); }
  const std::vector<double>& levels() const noexcept { return levels_; }
  double probability(std::size_t from, std::size_t to) const { return transition_.at(from).at(to); }
  std::span<const double> row(std::size_t from) const { return transition_.at(from); }

  // Inverse-CDF draw; consumes exactly one uniform.
  std::size_t next(std::size_t from, SeededRng& rng) const {
    const auto& r = transition_.at(from);
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last_positive = from;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[j] <= 0.0) continue;
      acc += r[j];
      last_positive = j;
      if (u < acc) return j;
    }
    return last_positive;
  }

 private:
  void validate() const {
    if (levels_.empty()) throw ContractViolation("ChannelModel: no levels");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      if (!(levels_[i] > 0.0) && !(levels_[i] == 0.0 && i == 0))
        throw ContractViolation("ChannelModel: levels must be non-negative");
      if (i > 0 && !(levels_[i] > levels_[i - 1]))
        throw ContractViolation("ChannelModel: levels must be strictly increasing");
    }
    if (transition_.size() != levels_.size()) throw ContractViolation("ChannelModel: transition must be square");
    for (const auto& r : transition_) {
      if (r.size() != levels_.size()) throw ContractViolation("ChannelModel: transition must be square");
      double sum = 0.0;
      for (double p : r) {
        if (!(p >= 0.0)) throw ContractViolation("ChannelModel: negative transition probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw ContractViolation("ChannelModel: row does not sum to 1");
    }
  }

  std::vector<double> levels_;
  std::vector<std::vector<double>> transition_;
};

}  // namespace mecsec::offload
