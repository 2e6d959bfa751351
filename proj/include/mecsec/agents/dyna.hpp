#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "mecsec/agents/qtable.hpp"

namespace mecsec::agents {

// Empirical model of the environment built from real transitions:
// per (s, a) visit count, next-state counts and reward sum.
class DynaModel {
 public:
  DynaModel(std::size_t states, std::size_t actions) : states_(states), actions_(actions) {}

  void record(std::size_t s, std::size_t a, double u, std::size_t s_next) {
    expects(s < states_ && a < actions_ && s_next < states_, "DynaModel::record: index out of range");
    const std::size_t key = s * actions_ + a;
    auto [it, inserted] = entries_.try_emplace(key);
    if (inserted) visited_.push_back(key);
    Entry& e = it->second;
    ++e.visits;
    e.reward_sum += u;
    ++e.next_counts[s_next];
  }

  bool empty() const noexcept { return visited_.empty(); }
  std::size_t visited_pairs() const noexcept { return visited_.size(); }

  std::uint64_t visits(std::size_t s, std::size_t a) const {
    const auto it = entries_.find(s * actions_ + a);
    return it == entries_.end() ? 0 : it->second.visits;
  }

  double mean_reward(std::size_t s, std::size_t a) const {
    const auto& e = entries_.at(s * actions_ + a);
    return e.reward_sum / static_cast<double>(e.visits);
  }

  // Empirical P(s' | s, a) over visited successors.
  std::vector<std::pair<std::size_t, double>> next_distribution(std::size_t s, std::size_t a) const {
    const auto& e = entries_.at(s * actions_ + a);
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& [sn, c] : e.next_counts) out.emplace_back(sn, static_cast<double>(c) / static_cast<double>(e.visits));
    return out;
  }

  struct Sample {
    std::size_t state;
    std::size_t action;
    double reward;
    std::size_t next_state;
  };

  // Uniform over visited pairs, then s' from the empirical distribution.
  Sample sample(SeededRng& rng) const {
    expects(!empty(), "DynaModel::sample: empty model");
    const std::size_t key = visited_[rng.uniform_index(visited_.size())];
    const Entry& e = entries_.at(key);
    std::uint64_t pick = rng.uniform_index(e.visits);
    std::size_t next = e.next_counts.begin()->first;
    for (const auto& [sn, c] : e.next_counts) {
      if (pick < c) {
        next = sn;
        break;
      }
      pick -= c;
    }
    return {key / actions_, key % actions_, e.reward_sum / static_cast<double>(e.visits), next};
  }

 private:
  struct Entry {
    std::uint64_t visits = 0;
    double reward_sum = 0.0;
    std::map<std::size_t, std::uint64_t> next_counts;
  };

  std::size_t states_;
  std::size_t actions_;
  std::map<std::size_t, Entry> entries_;
  std::vector<std::size_t> visited_;  // insertion order, for reproducible sampling
};

// K simulated Bellman updates from the learned model; no-op on an empty model.
inline void dyna_plan(const DynaModel& model, QTable& q, std::size_t planning_steps, const AgentHyperparams& hp,
                      SeededRng& rng) {
  if (model.empty()) return;
  for (std::size_t k = 0; k < planning_steps; ++k) {
    const auto smp = model.sample(rng);
    q_update(q, smp.state, smp.action, smp.reward, smp.next_state, hp);
  }
}

}  // namespace mecsec::agents
