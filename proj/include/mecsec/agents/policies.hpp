#pragma once

// Uniform driving interface over the learning agents: the harness feeds each
// agent a tabular state index and a feature vector per slot and the agent
// picks among a fixed number of actions.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mecsec/agents/dqn.hpp"
#include "mecsec/agents/dyna.hpp"
#include "mecsec/agents/pds.hpp"
#include "mecsec/agents/qtable.hpp"
#include "mecsec/core/hyperparams.hpp"
#include "mecsec/core/rng.hpp"

namespace mecsec::agents {

struct AgentInput {
  std::size_t state = 0;
  std::vector<double> features;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual void begin(const AgentInput& first) = 0;
  virtual std::size_t act(std::uint64_t slot) = 0;
  virtual void learn(std::size_t action, double reward, const AgentInput& next) = 0;
  // Exploration probability used by the last act(); 0 for non-learning agents.
  virtual double last_epsilon() const { return 0.0; }
  // Greedy action per tabular state, where the agent has one.
  virtual std::optional<std::vector<std::size_t>> greedy_policy() const { return std::nullopt; }
};

class RandomAgent final : public Agent {
 public:
  RandomAgent(std::size_t actions, SeededRng rng) : actions_(actions), rng_(rng) {}
  void begin(const AgentInput&) override {}
  std::size_t act(std::uint64_t) override { return static_cast<std::size_t>(rng_.uniform_index(actions_)); }
  void learn(std::size_t, double, const AgentInput&) override {}

 private:
  std::size_t actions_;
  SeededRng rng_;
};

class FixedAgent final : public Agent {
 public:
  explicit FixedAgent(std::size_t action) : action_(action) {}
  void begin(const AgentInput&) override {}
  std::size_t act(std::uint64_t) override { return action_; }
  void learn(std::size_t, double, const AgentInput&) override {}

 private:
  std::size_t action_;
};

class QLearningAgent : public Agent {
 public:
  QLearningAgent(std::size_t states, std::size_t actions, AgentHyperparams hp, SeededRng rng)
      : q_(states, actions), hp_(hp), schedule_(hp), rng_(rng) {}

  void begin(const AgentInput& first) override { state_ = first.state; }

  std::size_t act(std::uint64_t slot) override {
    eps_ = schedule_.at(slot);
    return epsilon_greedy(q_.row(state_), eps_, rng_);
  }

  void learn(std::size_t action, double reward, const AgentInput& next) override {
    q_update(q_, state_, action, reward, next.state, hp_);
    after_update(state_, action, reward, next.state);
    state_ = next.state;
  }

  double last_epsilon() const override { return eps_; }

  std::optional<std::vector<std::size_t>> greedy_policy() const override {
    std::vector<std::size_t> pi(q_.states());
    for (std::size_t s = 0; s < q_.states(); ++s) pi[s] = argmax(q_.row(s));
    return pi;
  }

  const QTable& table() const noexcept { return q_; }

 protected:
  virtual void after_update(std::size_t, std::size_t, double, std::size_t) {}

  QTable q_;
  AgentHyperparams hp_;
  EpsilonSchedule schedule_;
  SeededRng rng_;
  std::size_t state_ = 0;
  double eps_ = 0.0;
};

class DynaQAgent final : public QLearningAgent {
 public:
  DynaQAgent(std::size_t states, std::size_t actions, AgentHyperparams hp, std::size_t planning_steps, SeededRng rng)
      : QLearningAgent(states, actions, hp, rng), model_(states, actions), planning_steps_(planning_steps),
        plan_rng_(rng.child(0x44796e61ULL)) {}

  const DynaModel& model() const noexcept { return model_; }

 protected:
  void after_update(std::size_t s, std::size_t a, double u, std::size_t s_next) override {
    model_.record(s, a, u, s_next);
    dyna_plan(model_, q_, planning_steps_, hp_, plan_rng_);
  }

 private:
  DynaModel model_;
  std::size_t planning_steps_;
  SeededRng plan_rng_;
};

class PdsAgent final : public Agent {
 public:
  PdsAgent(PdsStructure structure, AgentHyperparams hp, SeededRng rng)
      : model_(std::move(structure)), hp_(hp), schedule_(hp), rng_(rng) {}

  void begin(const AgentInput& first) override { state_ = first.state; }

  std::size_t act(std::uint64_t slot) override {
    eps_ = schedule_.at(slot);
    return epsilon_greedy(model_.row(state_), eps_, rng_);
  }

  void learn(std::size_t action, double reward, const AgentInput& next) override {
    const double unknown = reward - model_.structure().known_reward(state_, action);
    pds_update(model_, state_, action, unknown, next.state, hp_);
    state_ = next.state;
  }

  double last_epsilon() const override { return eps_; }

  std::optional<std::vector<std::size_t>> greedy_policy() const override {
    std::vector<std::size_t> pi(model_.structure().states);
    for (std::size_t s = 0; s < pi.size(); ++s) pi[s] = argmax(model_.row(s));
    return pi;
  }

  const PdsModel& model() const noexcept { return model_; }

 private:
  PdsModel model_;
  AgentHyperparams hp_;
  EpsilonSchedule schedule_;
  SeededRng rng_;
  std::size_t state_ = 0;
  double eps_ = 0.0;
};

class DqnAgent final : public Agent {
 public:
  DqnAgent(std::size_t state_dim, std::size_t actions, DqnParams params, AgentHyperparams hp, SeededRng rng)
      : window_(params.history, state_dim, actions),
        learner_(params.net_spec(state_dim, actions), params, hp, rng.child(stream::kNetworkInit),
                 rng.child(stream::kReplay)),
        schedule_(hp),
        rng_(rng) {}

  DqnLearner& learner() noexcept { return learner_; }
  const DqnLearner& learner() const noexcept { return learner_; }

  void begin(const AgentInput& first) override {
    window_.reset(first.features);
    current_ = window_.flat();
  }

  std::size_t act(std::uint64_t slot) override {
    eps_ = schedule_.at(slot);
    return learner_.act(current_, eps_, rng_);
  }

  void learn(std::size_t action, double reward, const AgentInput& next) override {
    window_.push(next.features, action);
    std::vector<double> next_window = window_.flat();
    last_loss_ = learner_.step({current_, action, reward, next_window});
    current_ = std::move(next_window);
  }

  double last_epsilon() const override { return eps_; }
  double last_loss() const noexcept { return last_loss_; }

 private:
  HistoryWindow window_;
  DqnLearner learner_;
  EpsilonSchedule schedule_;
  SeededRng rng_;
  std::vector<double> current_;
  double eps_ = 0.0;
  double last_loss_ = 0.0;
};

}  // namespace mecsec::agents
