#pragma once

#include "taskcore/task.hpp"

namespace taskred::envs {

// 1-D point mass asked to hold a target speed. Action is a force in [-1, 1]
// scaled by max_force; observation is the velocity alone.
struct SpeedTrackParams {
  double target_speed = 1.0;
  double max_force = 2.0;
  double drag = 0.1;
  double mass = 1.0;
  double dt = 0.05;
  double action_penalty = 0.001;
  double speed_limit = 3.0;
  double init_noise = 0.05;
  std::size_t horizon = 1000;
  double success_threshold = 0.0;  // 0 until calibrated
};

SpeedTrackParams speed_params_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SpeedTrackParams& p);

class SpeedTrackDynamics final : public core::Dynamics {
 public:
  explicit SpeedTrackDynamics(SpeedTrackParams params) : p_(params) {}

  core::Point sample_initial(Rng& rng) const override;
  core::Point sample_next(const core::Point& state, const core::Point& action, Rng& rng) const override;
  core::Point sample_observation(const core::Point& state, Rng&) const override { return {state[1]}; }
  double reward(const core::Point& state, const core::Point& action) const override;
  bool terminal(const core::Point& state) const override;

  const SpeedTrackParams& params() const { return p_; }

 private:
  SpeedTrackParams p_;
};

// max(0, 1 - |v_t - v| - penalty * a^2).
double speed_reward(double velocity, double action, const SpeedTrackParams& p);

// Uncalibrated tasks carry R* = horizon until calibrate_success_threshold runs.
core::TaskSpec make_speed_tracker(const SpeedTrackParams& params);
core::TaskSpec make_speed_tracker(double v);

}  // namespace taskred::envs
