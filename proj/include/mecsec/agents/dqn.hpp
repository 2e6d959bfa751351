#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "mecsec/agents/qnetwork.hpp"
#include "mecsec/agents/qtable.hpp"
#include "mecsec/agents/replay.hpp"
#include "mecsec/core/hyperparams.hpp"

namespace mecsec::agents {

struct DqnParams {
  std::size_t history = 8;
  std::size_t conv1_filters = 8;
  std::size_t conv1_kernel = 3;
  std::size_t conv2_filters = 8;
  std::size_t conv2_kernel = 3;
  std::size_t hidden = 32;
  std::size_t replay_capacity = 2048;
  std::size_t batch_size = 32;
  std::size_t target_sync_period = 100;
  double learning_rate = 0.01;

  bool operator==(const DqnParams&) const = default;

  NetSpec net_spec(std::size_t state_dim, std::size_t actions) const {
    return {history, state_dim + 1, conv1_filters, conv1_kernel, conv2_filters, conv2_kernel, hidden, actions};
  }
};

// Sliding window of the last W (observation, preceding action) rows. The
// action is folded into one column as index / (|A| - 1).
class HistoryWindow {
 public:
  HistoryWindow(std::size_t window, std::size_t state_dim, std::size_t actions)
      : window_(window), state_dim_(state_dim), actions_(actions) {
    expects(window > 0 && state_dim > 0 && actions > 0, "HistoryWindow: sizes must be positive");
  }

  // Fills the whole window with the initial observation and a zero action column.
  void reset(std::span<const double> features) {
    rows_.clear();
    for (std::size_t i = 0; i < window_; ++i) rows_.push_back(make_row(features, 0.0));
  }

  void push(std::span<const double> features, std::size_t preceding_action) {
    const double col = actions_ > 1 ? static_cast<double>(preceding_action) / static_cast<double>(actions_ - 1) : 0.0;
    rows_.push_back(make_row(features, col));
    while (rows_.size() > window_) rows_.pop_front();
  }

  std::vector<double> flat() const {
    expects(rows_.size() == window_, "HistoryWindow: reset() not called");
    std::vector<double> out;
    out.reserve(window_ * (state_dim_ + 1));
    for (const auto& r : rows_) out.insert(out.end(), r.begin(), r.end());
    return out;
  }

 private:
  std::vector<double> make_row(std::span<const double> features, double action_col) const {
    expects(features.size() == state_dim_, "HistoryWindow: feature length mismatch");
    std::vector<double> r(features.begin(), features.end());
    r.push_back(action_col);
    return r;
  }

  std::size_t window_;
  std::size_t state_dim_;
  std::size_t actions_;
  std::deque<std::vector<double>> rows_;
};

// Online network, target network and replay pool trained by plain SGD on the
// mean squared Bellman error.
class DqnLearner {
 public:
  DqnLearner(NetSpec spec, DqnParams params, AgentHyperparams hp, SeededRng init_rng, SeededRng replay_rng)
      : params_(params), hp_(hp), net_(spec), target_(spec), pool_(params.replay_capacity), replay_rng_(replay_rng) {
    expects(params.batch_size > 0 && params.target_sync_period > 0, "DqnLearner: batch and sync period must be positive");
    net_.initialize(init_rng);
    target_ = net_;
  }

  QNetwork& network() noexcept { return net_; }
  const QNetwork& network() const noexcept { return net_; }
  const QNetwork& target_network() const noexcept { return target_; }
  const ReplayPool& pool() const noexcept { return pool_; }
  std::uint64_t updates() const noexcept { return updates_; }

  // Replaces both networks, e.g. with hotbooted weights.
  void load_network(const QNetwork& net) {
    expects(net.spec() == net_.spec(), "DqnLearner::load_network: spec mismatch");
    net_ = net;
    target_ = net;
  }

  std::size_t act(std::span<const double> window, double eps, SeededRng& rng) {
    const auto& q = net_.forward(window, act_cache_);
    return epsilon_greedy(q, eps, rng);
  }

  // Insert, sample B with replacement, one SGD step on the batch MSE, sync the
  // target every C updates. Returns the batch loss before the step.
  double step(Transition t) {
    pool_.push(std::move(t));
    const std::size_t B = params_.batch_size;
    grad_.assign(net_.parameter_count(), 0.0);
    std::vector<double> dout(net_.spec().actions, 0.0);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const Transition& tr = pool_.sample(replay_rng_);
      const auto& qn = target_.forward(tr.next_state, target_cache_);
      const double y = tr.reward + hp_.gamma * *std::max_element(qn.begin(), qn.end());
      const auto& q = net_.forward(tr.state, train_cache_);
      const double err = q[tr.action] - y;
      loss += err * err;
      std::fill(dout.begin(), dout.end(), 0.0);
      dout[tr.action] = 2.0 * err / static_cast<double>(B);
      net_.backward(train_cache_, dout, grad_);
    }
    net_.sgd_step(grad_, params_.learning_rate);
    ++updates_;
    if (updates_ % params_.target_sync_period == 0) target_ = net_;
    return loss / static_cast<double>(B);
  }

 private:
  DqnParams params_;
  AgentHyperparams hp_;
  QNetwork net_;
  QNetwork target_;
  ReplayPool pool_;
  SeededRng replay_rng_;
  std::vector<double> grad_;
  QNetwork::Cache act_cache_, train_cache_, target_cache_;
  std::uint64_t updates_ = 0;
};

inline double dqn_step(DqnLearner& learner, Transition t) { return learner.step(std::move(t)); }

}  // namespace mecsec::agents
