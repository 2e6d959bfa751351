#pragma once

#include <cstddef>
#include <vector>

#include "mecsec/core/error.hpp"
#include "mecsec/core/rng.hpp"

namespace mecsec::agents {

// Replay unit for the neural agent; states are flattened history windows.
struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
};

// Bounded FIFO; once full, each push overwrites the oldest entry.
class ReplayPool {
 public:
  explicit ReplayPool(std::size_t capacity) : capacity_(capacity) {
    expects(capacity > 0, "ReplayPool: capacity must be positive");
    items_.reserve(capacity);
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const {
    expects(i < items_.size(), "ReplayPool::at: index out of range");
    return items_[(head_ + i) % items_.size()];
  }

  // Uniform with replacement over current contents.
  const Transition& sample(SeededRng& rng) const {
    expects(!items_.empty(), "ReplayPool::sample: empty pool");
    return items_[rng.uniform_index(items_.size())];
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> items_;
};

}  // namespace mecsec::agents
