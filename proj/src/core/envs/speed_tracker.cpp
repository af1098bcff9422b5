#include "envs/speed_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "common/error.hpp"

namespace taskred::envs {

SpeedTrackParams speed_params_from_json(const nlohmann::json& doc) {
  SpeedTrackParams p;
  for (const auto& [key, value] : doc.items()) {
    if (key == "env") continue;
    if (key == "target_speed") p.target_speed = value.get<double>();
    else if (key == "max_force") p.max_force = value.get<double>();
    else if (key == "drag") p.drag = value.get<double>();
    else if (key == "mass") p.mass = value.get<double>();
    else if (key == "dt") p.dt = value.get<double>();
    else if (key == "action_penalty") p.action_penalty = value.get<double>();
    else if (key == "speed_limit") p.speed_limit = value.get<double>();
    else if (key == "init_noise") p.init_noise = value.get<double>();
    else if (key == "horizon") p.horizon = value.get<std::size_t>();
    else if (key == "success_threshold") p.success_threshold = value.get<double>();
    else throw ConfigurationError("unknown speed tracker key '" + key + "'");
  }
  if (p.target_speed < 0.3 || p.target_speed > 2.0) {
    throw ConfigurationError("speed tracker target_speed must lie in [0.3, 2.0]");
  }
  if (p.mass <= 0 || p.dt <= 0 || p.max_force <= 0 || p.horizon == 0) {
    throw ConfigurationError("speed tracker mass, dt, max_force and horizon must be positive");
  }
  return p;
}

nlohmann::json to_json(const SpeedTrackParams& p) {
  return {{"env", "speed_tracker"}, {"target_speed", p.target_speed}, {"max_force", p.max_force},
          {"drag", p.drag},          {"mass", p.mass},                 {"dt", p.dt},
          {"action_penalty", p.action_penalty}, {"speed_limit", p.speed_limit},
          {"init_noise", p.init_noise}, {"horizon", p.horizon},     {"success_threshold", p.success_threshold}};
}

double speed_reward(double velocity, double action, const SpeedTrackParams& p) {
  return std::max(0.0, 1.0 - std::abs(velocity - p.target_speed) - p.action_penalty * action * action);
}

core::Point SpeedTrackDynamics::sample_initial(Rng& rng) const {
  return {0.0, uniform(rng, -p_.init_noise, p_.init_noise)};
}

core::Point SpeedTrackDynamics::sample_next(const core::Point& s, const core::Point& action, Rng&) const {
  const double a = std::clamp(action.at(0), -1.0, 1.0);
  const double acc = (a * p_.max_force - p_.drag * s[1]) / p_.mass;
  return {s[0] + p_.dt * s[1], s[1] + p_.dt * acc};
}

double SpeedTrackDynamics::reward(const core::Point& s, const core::Point& action) const {
  return speed_reward(s[1], std::clamp(action.at(0), -1.0, 1.0), p_);
}

bool SpeedTrackDynamics::terminal(const core::Point& s) const { return std::abs(s[1]) > p_.speed_limit; }

core::TaskSpec make_speed_tracker(const SpeedTrackParams& p) {
  const double big = 1e6;
  const double r_star = p.success_threshold > 0 ? p.success_threshold : static_cast<double>(p.horizon);
  auto states = core::Space::box({-big, -2 * p.speed_limit}, {big, 2 * p.speed_limit});
  auto observations = core::Space::box({-2 * p.speed_limit}, {2 * p.speed_limit});
  auto actions = core::Space::box({-1.0}, {1.0});
  char name[48];
  std::snprintf(name, sizeof name, "speed-%.2f", p.target_speed);
  return core::TaskSpec(name, states, actions, observations, std::make_shared<SpeedTrackDynamics>(p), p.horizon, r_star,
                        to_json(p));
}

core::TaskSpec make_speed_tracker(double v) {
  SpeedTrackParams p;
  p.target_speed = v;
  if (v < 0.3 || v > 2.0) throw ConfigurationError("speed tracker target_speed must lie in [0.3, 2.0]");
  return make_speed_tracker(p);
}

}  // namespace taskred::envs
