#pragma once

#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "taskcore/space.hpp"

namespace taskred::advest {

struct Transition {
  core::Point state;
  core::Point observation;
  core::Point action;
  double reward = 0.0;
  core::Point next_state;
  core::Point next_observation;
  bool done = false;  // next_state is terminal
};

// Fixed-capacity ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigurationError("replay capacity must be >= 1");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  // B indices drawn uniformly with replacement.
  std::vector<std::size_t> sample(std::size_t batch, Rng& rng) const {
    if (items_.empty()) throw UsageError("cannot sample from an empty replay buffer");
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = uniform_index(rng, items_.size());
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

}  // namespace taskred::advest
