#pragma once

#include <memory>
#include <string>
#include <vector>

#include "advest/config.hpp"
#include "advest/maps.hpp"
#include "advest/replay.hpp"
#include "taskcore/evaluate.hpp"

namespace taskred::advest {

// One running episode on a task, feeding a replay buffer.
class EnvCursor {
 public:
  EnvCursor(const core::TaskSpec& task, std::uint64_t seed);

  const core::Point& observation() const { return observation_; }
  void step(const core::Point& action, ReplayBuffer& buffer);

 private:
  void reset();

  const core::TaskSpec* task_;
  Rng rng_;
  core::Point state_;
  core::Point observation_;
  std::size_t t_ = 0;
};

struct Batch {
  Matrix states;
  Matrix observations;
  Matrix next_states;
  Matrix next_observations;
  std::vector<const core::Point*> observation_points;
  std::vector<const core::Point*> next_observation_points;
  std::vector<const core::Point*> actions;
  Vector rewards;
  Vector not_done;
};

Batch gather(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx, const core::TaskSpec& task);

// The alternating two-player game behind both estimators. Step 1 touches only
// the inner policy pi2; Step 2 only the encoder/decoder pair [h, g].
class Game {
 public:
  virtual ~Game() = default;

  // While single-task, only tau2 is simulated and Step 1 drops the tau1 term.
  virtual void set_single_task(bool single) = 0;
  virtual void collect(double epsilon) = 0;
  virtual double update_critics() = 0;
  virtual double step1() = 0;
  virtual double step2() = 0;

  virtual core::Policy inner_policy() const = 0;
  virtual core::Policy composed_policy() const = 0;
  virtual nlohmann::json checkpoint() const = 0;

  virtual Vector policy_parameters() const = 0;
  virtual Vector map_parameters() const = 0;
};

// L = -(1/B) sum_b Q(s_b, a_b) log p(a_b) with log p floored at log(1e-8).
// probs and q are |A| x B; actions holds a_b.
double q_learning_loss(const Matrix& probs, const Matrix& q, const std::vector<std::size_t>& actions);

// Expected form over a_b ~ p: -(1/B) sum_b sum_a p(a|o_b) Q(s_b, a) log p(a|o_b)
// with p treated as a constant weight. Returns the loss; writes dL/dp into grad.
double expected_q_learning_loss(const Matrix& probs, const Matrix& q, Matrix* grad);

inline constexpr double kLogFloor = 1e-8;

}  // namespace taskred::advest
