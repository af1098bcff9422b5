#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common/rng.hpp"
#include "taskcore/space.hpp"

namespace taskred::core {

struct Outcome {
  std::size_t index = 0;
  double probability = 0.0;
};

// Tabular kernels of a finite task. Rows are indexed [s * actions + a] for
// transition and reward, [s] for sensor and terminal.
struct FiniteModel {
  std::size_t state_count = 0;
  std::size_t action_count = 0;
  std::size_t observation_count = 0;
  std::vector<std::vector<Outcome>> transition;
  std::vector<std::vector<Outcome>> sensor;
  std::vector<double> reward;
  std::vector<Outcome> init;
  std::vector<bool> terminal;

  const std::vector<Outcome>& next(std::size_t s, std::size_t a) const { return transition[s * action_count + a]; }
  double reward_of(std::size_t s, std::size_t a) const { return reward[s * action_count + a]; }
};

// Sampling interface shared by finite and continuous tasks. Implementations
// are immutable; all randomness comes from the caller's generator.
class Dynamics {
 public:
  virtual ~Dynamics() = default;
  virtual Point sample_initial(Rng& rng) const = 0;
  virtual Point sample_next(const Point& state, const Point& action, Rng& rng) const = 0;
  virtual Point sample_observation(const Point& state, Rng& rng) const = 0;
  virtual double reward(const Point& state, const Point& action) const = 0;
  virtual bool terminal(const Point& state) const = 0;
  virtual const FiniteModel* finite_model() const { return nullptr; }
};

class FiniteDynamics final : public Dynamics {
 public:
  explicit FiniteDynamics(FiniteModel model);

  Point sample_initial(Rng& rng) const override;
  Point sample_next(const Point& state, const Point& action, Rng& rng) const override;
  Point sample_observation(const Point& state, Rng& rng) const override;
  double reward(const Point& state, const Point& action) const override;
  bool terminal(const Point& state) const override;
  const FiniteModel* finite_model() const override { return &model_; }

 private:
  FiniteModel model_;
};

// The task tuple (S, A, O, p, sigma, r, p0, R*) plus a finite horizon.
class TaskSpec {
 public:
  TaskSpec(std::string name, Space states, Space actions, Space observations,
           std::shared_ptr<const Dynamics> dynamics, std::size_t horizon, double success_threshold,
           nlohmann::json parameters = nlohmann::json::object());

  // Validates kernels (rows sum to 1 within 1e-12, rewards >= 0) and builds the task.
  static TaskSpec finite(std::string name, FiniteModel model, std::size_t horizon, double success_threshold,
                         nlohmann::json parameters = nlohmann::json::object());

  const std::string& name() const { return name_; }
  const Space& states() const { return states_; }
  const Space& actions() const { return actions_; }
  const Space& observations() const { return observations_; }
  std::size_t horizon() const { return horizon_; }
  double success_threshold() const { return success_threshold_; }
  const Dynamics& dynamics() const { return *dynamics_; }
  bool is_finite() const { return dynamics_->finite_model() != nullptr; }
  const FiniteModel& finite_model() const;
  const nlohmann::json& parameters() const { return parameters_; }

  // Canonical digest of the generating parameters and threshold.
  std::string digest() const;

  TaskSpec with_success_threshold(double r_star) const;

 private:
  std::string name_;
  Space states_;
  Space actions_;
  Space observations_;
  std::shared_ptr<const Dynamics> dynamics_;
  std::size_t horizon_;
  double success_threshold_;
  nlohmann::json parameters_;
};

// Explicit finite task document: {"env":"finite", "states", "actions",
// "observations", "transition", "sensor", "reward", "init", "terminal",
// "horizon", "success_threshold"}.
TaskSpec finite_task_from_json(const nlohmann::json& doc);
nlohmann::json finite_task_to_json(const TaskSpec& task);

}  // namespace taskred::core
