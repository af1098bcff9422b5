#include "advest/game.hpp"

#include <cmath>

namespace taskred::advest {

EnvCursor::EnvCursor(const core::TaskSpec& task, std::uint64_t seed) : task_(&task), rng_(seed) { reset(); }

void EnvCursor::reset() {
  const auto& dyn = task_->dynamics();
  state_ = dyn.sample_initial(rng_);
  observation_ = dyn.sample_observation(state_, rng_);
  t_ = 0;
}

void EnvCursor::step(const core::Point& action, ReplayBuffer& buffer) {
  const auto& dyn = task_->dynamics();
  Transition tr;
  tr.reward = dyn.reward(state_, action);
  tr.next_state = dyn.sample_next(state_, action, rng_);
  tr.next_observation = dyn.sample_observation(tr.next_state, rng_);
  tr.done = dyn.terminal(tr.next_state);
  tr.state = state_;
  tr.observation = observation_;
  tr.action = action;
  ++t_;
  const bool restart = tr.done || t_ >= task_->horizon();
  state_ = tr.next_state;
  observation_ = tr.next_observation;
  buffer.push(std::move(tr));
  if (restart || dyn.terminal(state_)) reset();
}

Batch gather(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx, const core::TaskSpec& task) {
  Batch b;
  std::vector<const core::Point*> states, next_states;
  b.rewards.resize(static_cast<Eigen::Index>(idx.size()));
  b.not_done.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Transition& t = buffer[idx[k]];
    states.push_back(&t.state);
    next_states.push_back(&t.next_state);
    b.observation_points.push_back(&t.observation);
    b.next_observation_points.push_back(&t.next_observation);
    b.actions.push_back(&t.action);
    b.rewards[static_cast<Eigen::Index>(k)] = t.reward;
    b.not_done[static_cast<Eigen::Index>(k)] = t.done ? 0.0 : 1.0;
  }
  b.states = feature_batch(task.states(), states);
  b.next_states = feature_batch(task.states(), next_states);
  b.observations = feature_batch(task.observations(), b.observation_points);
  b.next_observations = feature_batch(task.observations(), b.next_observation_points);
  return b;
}

double q_learning_loss(const Matrix& probs, const Matrix& q, const std::vector<std::size_t>& actions) {
  const double n = static_cast<double>(actions.size());
  double loss = 0.0;
  for (std::size_t b = 0; b < actions.size(); ++b) {
    const auto j = static_cast<Eigen::Index>(b);
    const auto a = static_cast<Eigen::Index>(actions[b]);
    loss -= q(a, j) * std::log(std::max(probs(a, j), kLogFloor));
  }
  return loss / n;
}

double expected_q_learning_loss(const Matrix& probs, const Matrix& q, Matrix* grad) {
  const double n = static_cast<double>(probs.cols());
  const Matrix logp = probs.array().max(kLogFloor).log().matrix();
  const double loss = -(probs.cwiseProduct(q).cwiseProduct(logp)).sum() / n;
  if (grad) {
    *grad = (-q / n).eval();
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        if (probs(i, j) < kLogFloor) (*grad)(i, j) = 0.0;
      }
    }
  }
  return loss;
}

}  // namespace taskred::advest
