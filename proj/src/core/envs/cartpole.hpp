#pragma once

#include <string>

#include "taskcore/task.hpp"

namespace taskred::envs {

enum class GravityDir { kUp, kDown };

GravityDir gravity_from_string(const std::string& s);
std::string to_string(GravityDir g);

// Frictionless cart-pole. The up task balances against gravity (unstable
// equilibrium); the down task flips gravity so theta = 0 is stable.
struct CartpoleParams {
  GravityDir direction = GravityDir::kUp;
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force = 10.0;
  double dt = 0.02;
  double angle_limit_deg = 24.0;
  double position_limit = 2.4;
  double init_noise = 0.05;
  std::size_t horizon = 200;
  double success_threshold = 200.0;
};

CartpoleParams cartpole_params_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const CartpoleParams& p);

// Actions: 0 no force, 1 push left, 2 push right.
// State and observation: (x, x_dot, theta, theta_dot).
class CartpoleDynamics final : public core::Dynamics {
 public:
  explicit CartpoleDynamics(CartpoleParams params) : p_(params) {}

  core::Point sample_initial(Rng& rng) const override;
  core::Point sample_next(const core::Point& state, const core::Point& action, Rng& rng) const override;
  core::Point sample_observation(const core::Point& state, Rng&) const override { return state; }
  double reward(const core::Point& state, const core::Point& action) const override;
  bool terminal(const core::Point& state) const override { return !in_bounds(state); }

  // Deterministic Euler step.
  core::Point step(const core::Point& state, std::size_t action) const;
  bool in_bounds(const core::Point& state) const;
  const CartpoleParams& params() const { return p_; }

 private:
  CartpoleParams p_;
};

// |wrap(theta - theta_eq)| < limit and |x| < position limit.
bool cartpole_in_bounds(const core::Point& state, double theta_eq, const CartpoleParams& p);

core::TaskSpec make_cartpole(const CartpoleParams& params);
core::TaskSpec make_cartpole(GravityDir direction);

}  // namespace taskred::envs
