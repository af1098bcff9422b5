#include "envs/cartpole.hpp"

#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace taskred::envs {

GravityDir gravity_from_string(const std::string& s) {
  if (s == "up") return GravityDir::kUp;
  if (s == "down") return GravityDir::kDown;
  throw ConfigurationError("unknown cartpole direction '" + s + "' (expected up or down)");
}

std::string to_string(GravityDir g) { return g == GravityDir::kUp ? "up" : "down"; }

CartpoleParams cartpole_params_from_json(const nlohmann::json& doc) {
  CartpoleParams p;
  for (const auto& [key, value] : doc.items()) {
    if (key == "env") continue;
    if (key == "direction") p.direction = gravity_from_string(value.get<std::string>());
    else if (key == "gravity") p.gravity = value.get<double>();
    else if (key == "cart_mass") p.cart_mass = value.get<double>();
    else if (key == "pole_mass") p.pole_mass = value.get<double>();
    else if (key == "half_length") p.half_length = value.get<double>();
    else if (key == "force") p.force = value.get<double>();
    else if (key == "dt") p.dt = value.get<double>();
    else if (key == "angle_limit_deg") p.angle_limit_deg = value.get<double>();
    else if (key == "position_limit") p.position_limit = value.get<double>();
    else if (key == "init_noise") p.init_noise = value.get<double>();
    else if (key == "horizon") p.horizon = value.get<std::size_t>();
    else if (key == "success_threshold") p.success_threshold = value.get<double>();
    else throw ConfigurationError("unknown cartpole key '" + key + "'");
  }
  if (p.cart_mass <= 0 || p.pole_mass <= 0 || p.half_length <= 0 || p.dt <= 0 || p.horizon == 0) {
    throw ConfigurationError("cartpole masses, length, dt and horizon must be positive");
  }
  return p;
}

nlohmann::json to_json(const CartpoleParams& p) {
  return {{"env", "cartpole"},          {"direction", to_string(p.direction)},
          {"gravity", p.gravity},       {"cart_mass", p.cart_mass},
          {"pole_mass", p.pole_mass},   {"half_length", p.half_length},
          {"force", p.force},           {"dt", p.dt},
          {"angle_limit_deg", p.angle_limit_deg}, {"position_limit", p.position_limit},
          {"init_noise", p.init_noise}, {"horizon", p.horizon},
          {"success_threshold", p.success_threshold}};
}

bool cartpole_in_bounds(const core::Point& s, double theta_eq, const CartpoleParams& p) {
  const double limit = p.angle_limit_deg * std::numbers::pi / 180.0;
  const double d = std::remainder(s[2] - theta_eq, 2.0 * std::numbers::pi);
  return std::abs(d) < limit && std::abs(s[0]) < p.position_limit;
}

core::Point CartpoleDynamics::sample_initial(Rng& rng) const {
  core::Point s(4);
  for (auto& v : s) v = uniform(rng, -p_.init_noise, p_.init_noise);
  return s;
}

core::Point CartpoleDynamics::step(const core::Point& s, std::size_t action) const {
  const double f = action == 1 ? -p_.force : (action == 2 ? p_.force : 0.0);
  const double g = p_.direction == GravityDir::kUp ? p_.gravity : -p_.gravity;
  const double total = p_.cart_mass + p_.pole_mass;
  const double pml = p_.pole_mass * p_.half_length;
  const double x = s[0], x_dot = s[1], th = s[2], th_dot = s[3];
  const double c = std::cos(th), sn = std::sin(th);
  const double temp = (f + pml * th_dot * th_dot * sn) / total;
  const double th_acc = (g * sn - c * temp) / (p_.half_length * (4.0 / 3.0 - p_.pole_mass * c * c / total));
  const double x_acc = temp - pml * th_acc * c / total;
  return {x + p_.dt * x_dot, x_dot + p_.dt * x_acc, th + p_.dt * th_dot, th_dot + p_.dt * th_acc};
}

core::Point CartpoleDynamics::sample_next(const core::Point& state, const core::Point& action, Rng&) const {
  return step(state, core::point_index(action));
}

bool CartpoleDynamics::in_bounds(const core::Point& s) const { return cartpole_in_bounds(s, 0.0, p_); }

double CartpoleDynamics::reward(const core::Point& state, const core::Point&) const { return in_bounds(state) ? 1.0 : 0.0; }

core::TaskSpec make_cartpole(const CartpoleParams& p) {
  const double big = 1e3;
  auto states = core::Space::box({-2 * p.position_limit, -big, -std::numbers::pi, -big},
                                 {2 * p.position_limit, big, std::numbers::pi, big});
  return core::TaskSpec("cartpole-" + to_string(p.direction), states, core::Space::finite(3), states,
                        std::make_shared<CartpoleDynamics>(p), p.horizon, p.success_threshold, to_json(p));
}

core::TaskSpec make_cartpole(GravityDir direction) {
  CartpoleParams p;
  p.direction = direction;
  return make_cartpole(p);
}

}  // namespace taskred::envs
