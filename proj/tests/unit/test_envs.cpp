#include <doctest.h>

#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "envs/cartpole.hpp"
#include "envs/gridworld.hpp"
#include "envs/speed_tracker.hpp"
#include "taskcore/evaluate.hpp"

using namespace taskred;
using namespace taskred::envs;

namespace {

GridUniverse universe(int n, int m) {
  GridWorldParams p;
  p.n = n;
  p.m = m;
  return GridUniverse::build(p, 0);
}

double constant_action_return(const core::TaskSpec& t, std::size_t action, std::uint64_t seed) {
  Rng rng(seed);
  const auto& dyn = t.dynamics();
  auto s = dyn.sample_initial(rng);
  double total = 0.0;
  for (std::size_t k = 0; k < t.horizon(); ++k) {
    total += dyn.reward(s, core::index_point(action));
    s = dyn.sample_next(s, core::index_point(action), rng);
    if (dyn.terminal(s)) break;
  }
  return total;
}

}  // namespace

TEST_CASE("directions parse and print") {
  CHECK(direction_from_string("E") == Direction::kEast);
  CHECK(direction_from_string("west") == Direction::kWest);
  CHECK(to_string(Direction::kSouth) == "S");
  CHECK_THROWS_AS(direction_from_string("up"), ConfigurationError);
}

TEST_CASE("quarter turn takes the east goal to the north goal") {
  CHECK(rotate_location(goal_location(Direction::kEast, 2), 1) == goal_location(Direction::kNorth, 2));
  CHECK(rotate_location(goal_location(Direction::kNorth, 2), 1) == goal_location(Direction::kWest, 2));
  CHECK(rotate_location({1, 2}, 4) == Location{1, 2});
  // An east move, turned, is a north move.
  CHECK(rotate_location(move({0, 0}, 1, 1), 1) == move({0, 0}, 0, 1));
}

TEST_CASE("empty world universe") {
  const auto u = universe(2, 0);
  CHECK(u.layout_count() == 1);
  CHECK(u.size() == 4 * 25);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u.observation_index(u.observation_map(i)) == i);
}

TEST_CASE("one-obstacle universe is closed under rotation") {
  const auto u = universe(2, 1);
  CHECK(u.layout_count() == 21);
  for (std::size_t l = 0; l < u.layout_count(); ++l) {
    std::vector<Location> turned;
    for (auto c : u.layout(l)) turned.push_back(rotate_location(c, 1));
    std::sort(turned.begin(), turned.end());
    CHECK_NOTHROW(u.layout_index(turned));
  }
  for (std::size_t i = 0; i < u.size(); ++i) CHECK_FALSE(u.blocked(u.entry(i).layout, u.entry(i).robot));
}

TEST_CASE("sampled layouts respect the retry cap") {
  GridWorldParams p;
  p.n = 1;
  p.m = 4;
  p.layout_samples = 3;
  p.retry_cap = 50;
  CHECK_THROWS_AS(GridUniverse::build(p, 0), ConfigurationError);
}

TEST_CASE("gridworld task basics") {
  const auto u = universe(2, 0);
  const auto t = make_gridworld(u, Direction::kEast);
  CHECK(t.horizon() == 25);
  CHECK(t.success_threshold() == 1.0);
  const auto& m = t.finite_model();
  for (double r : m.reward) CHECK(r >= 0.0);
  // Starts sit on the task's own goal maps, never on the goal cell.
  for (const auto& o : m.init) {
    CHECK(u.entry(o.index).goal == static_cast<int>(Direction::kEast));
    CHECK(u.entry(o.index).robot != goal_location(Direction::kEast, 2));
  }
}

TEST_CASE("rotation maps are bijections and form a cyclic group") {
  const auto u = universe(2, 1);
  for (int k = 0; k < 4; ++k) {
    const auto h = rotation_observation_map(u, k);
    std::vector<bool> hit(u.size(), false);
    for (auto y : h.table) hit[y] = true;
    CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
    for (int j = 0; j < 4; ++j) {
      CHECK(h.then(rotation_observation_map(u, j)) == rotation_observation_map(u, (k + j) % 4));
      CHECK(rotation_action_map(k).then(rotation_action_map(j)) == rotation_action_map((k + j) % 4));
    }
  }
  CHECK(rotation_observation_map(u, 0).is_identity());
  CHECK(rotation_action_map(0).is_identity());
}

TEST_CASE("admissible family covers tie-breaks and random variants") {
  const auto u = universe(2, 1);
  const auto fam = gridworld_admissible_family(u, Direction::kNorth, 40, 3);
  CHECK(fam.size() >= 50);
  const auto t = make_gridworld(u, Direction::kNorth);
  for (std::size_t i = 0; i < fam.size(); i += 7) CHECK(core::exact_return(t, fam[i]) == doctest::Approx(1.0).epsilon(1e-10));
  const auto again = gridworld_admissible_family(u, Direction::kNorth, 40, 3);
  for (std::size_t i = 0; i < fam.size(); ++i) CHECK(fam[i].action_table() == again[i].action_table());
}

TEST_CASE("cartpole params validate") {
  CHECK(cartpole_params_from_json({{"direction", "down"}}).direction == GravityDir::kDown);
  CHECK_THROWS_AS(cartpole_params_from_json({{"gravty", 9.8}}), ConfigurationError);
  const auto p = cartpole_params_from_json(to_json(CartpoleParams{}));
  CHECK(p.force == 10.0);
}

TEST_CASE("cartpole equilibria") {
  CartpoleParams up;
  CartpoleParams down;
  down.direction = GravityDir::kDown;
  const CartpoleDynamics du(up), dd(down);
  // Small tilt grows when balancing upright and is restored when hanging.
  const core::Point tilt{0, 0, 0.05, 0};
  CHECK(std::abs(du.step(du.step(tilt, 0), 0)[2]) > 0.05);
  CHECK(std::abs(dd.step(dd.step(tilt, 0), 0)[2]) < 0.05);
  // Pushing right accelerates the cart right.
  CHECK(du.step({0, 0, 0, 0}, 2)[1] > 0.0);
  CHECK(du.step({0, 0, 0, 0}, 1)[1] < 0.0);
}

TEST_CASE("cartpole success sets agree across tasks up to the equilibrium shift") {
  const CartpoleParams p;
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const core::Point s{uniform(rng, -3, 3), 0.0, uniform(rng, -4, 4), 0.0};
    core::Point shifted = s;
    shifted[2] += std::numbers::pi;
    CHECK(cartpole_in_bounds(s, 0.0, p) == cartpole_in_bounds(shifted, std::numbers::pi, p));
  }
  CHECK(cartpole_in_bounds({0, 0, 0.41, 0}, 0.0, p));
  CHECK_FALSE(cartpole_in_bounds({0, 0, 0.42, 0}, 0.0, p));
  CHECK_FALSE(cartpole_in_bounds({2.5, 0, 0, 0}, 0.0, p));
}

TEST_CASE("cartpole passive behavior") {
  const auto up = make_cartpole(GravityDir::kUp);
  const auto down = make_cartpole(GravityDir::kDown);
  CHECK(up.success_threshold() == 200.0);
  CHECK(constant_action_return(down, 0, 4) == 200.0);
  CHECK(constant_action_return(up, 0, 4) < 100.0);
  CHECK(constant_action_return(down, 2, 4) < 50.0);
}

TEST_CASE("speed tracker reward and limits") {
  SpeedTrackParams p;
  CHECK(speed_reward(1.0, 0.0, p) == 1.0);
  CHECK(speed_reward(1.5, 0.0, p) == doctest::Approx(0.5));
  CHECK(speed_reward(3.0, 1.0, p) == 0.0);
  CHECK(speed_reward(1.0, 1.0, p) == doctest::Approx(0.999));
  const auto t = make_speed_tracker(0.8);
  CHECK(t.success_threshold() == 1000.0);
  CHECK(t.observations().dims() == 1);
  CHECK(t.actions().dims() == 1);
  CHECK_THROWS_AS(speed_params_from_json({{"target_speed", 5.0}}), ConfigurationError);
  const SpeedTrackDynamics dyn(p);
  CHECK(dyn.terminal({0.0, 3.1}));
  CHECK_FALSE(dyn.terminal({0.0, 2.9}));
}

TEST_CASE("task digests separate parameter sets") {
  CHECK(make_cartpole(GravityDir::kUp).digest() != make_cartpole(GravityDir::kDown).digest());
  CHECK(make_speed_tracker(0.8).digest() != make_speed_tracker(1.2).digest());
  const auto u = universe(2, 0);
  CHECK(make_gridworld(u, Direction::kNorth).digest() != make_gridworld(u, Direction::kEast).digest());
}
