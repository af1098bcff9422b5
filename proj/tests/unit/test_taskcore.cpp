#include <doctest.h>

#include <cmath>

#include "common/error.hpp"
#include "envs/cartpole.hpp"
#include "envs/gridworld.hpp"
#include "fixtures.hpp"
#include "taskcore/evaluate.hpp"
#include "taskcore/policy.hpp"

using namespace taskred;
using namespace taskred::core;

namespace {

TaskSpec coin_flip() {
  auto m = fixtures::blank_model(3, 1);
  m.transition[0] = {{2, 1.0}};
  m.transition[1] = {{2, 1.0}};
  m.transition[2] = {{2, 1.0}};
  m.reward = {1.0, 0.0, 0.0};
  m.init = {{0, 0.5}, {1, 0.5}};
  m.terminal = {false, false, true};
  return TaskSpec::finite("coin", m, 1, 1.0);
}

// Per-rollout sums alternate between `low` and `high`.
TaskSpec alternating_sums(double low, double high, double r_star) {
  auto m = fixtures::blank_model(3, 1);
  m.transition = {{{2, 1.0}}, {{2, 1.0}}, {{2, 1.0}}};
  m.reward = {low, high, 0.0};
  m.init = {{0, 0.5}, {1, 0.5}};
  m.terminal = {false, false, true};
  return TaskSpec::finite("alt", m, 1, r_star);
}

}  // namespace

TEST_CASE("space features and membership") {
  const auto f = Space::finite(3);
  CHECK(f.feature_dim() == 3);
  CHECK(f.features(index_point(1)) == Eigen::Vector3d(0, 1, 0));
  CHECK(f.contains(index_point(2)));
  CHECK_FALSE(f.contains(index_point(3)));
  const auto b = Space::box({-1, 0}, {1, 2});
  CHECK(b.dims() == 2);
  CHECK(b.contains({0.5, 2.0}));
  CHECK_FALSE(b.contains({0.5, 2.5}));
  CHECK(space_from_json(to_json(b)) == b);
  CHECK_THROWS_AS(Space::finite(0), ConfigurationError);
  CHECK_THROWS_AS(Space::box({1}, {0}), ConfigurationError);
}

TEST_CASE("task construction validates kernels") {
  auto m = fixtures::blank_model(1, 1);
  m.transition[0] = {{0, 0.9}};
  m.init = {{0, 1.0}};
  CHECK_THROWS_AS(TaskSpec::finite("bad", m, 3, 1.0), ConfigurationError);
  m.transition[0] = {{0, 1.0}};
  m.reward[0] = -1.0;
  CHECK_THROWS_AS(TaskSpec::finite("bad", m, 3, 1.0), ConfigurationError);
  m.reward[0] = 1.0;
  CHECK_THROWS_AS(TaskSpec::finite("bad", m, 3, 0.0), ConfigurationError);
  CHECK_NOTHROW(TaskSpec::finite("ok", m, 3, 1.0));
}

TEST_CASE("finite task JSON round-trip keeps the digest") {
  const auto t = fixtures::bandit({{1, 0}, {0, 1}}, 1.0);
  const auto back = finite_task_from_json(finite_task_to_json(t));
  CHECK(back.digest() == t.digest());
  CHECK(fixtures::bandit({{1, 0}, {1, 0}}, 1.0).digest() != t.digest());
  CHECK(t.with_success_threshold(0.5).digest() != t.digest());
}

TEST_CASE("rollout on a unit-reward chain") {
  const auto t = fixtures::constant_chain(1.0, 3, 10.0);
  const auto traj = rollout(t, Policy::tabular({0}, 1), 0);
  REQUIRE(traj.size() == 3);
  for (const auto& s : traj) CHECK(s.reward == 1.0);
}

TEST_CASE("rollout rejects mismatched policies") {
  const auto t = fixtures::bandit({{1, 0}}, 1.0);
  CHECK_THROWS_AS(rollout(t, Policy::tabular({0}, 3), 0), ConfigurationError);
  CHECK_THROWS_AS(rollout(t, Policy::tabular({0, 0}, 2), 0), ConfigurationError);
}

TEST_CASE("cartpole rollout stops when the pole leaves the band") {
  const auto t = envs::make_cartpole(envs::GravityDir::kUp);
  // A zero net emits equal logits, so argmax picks action 0 (no force) throughout.
  const auto pol = Policy::neural(diffnet::Mlp({4, 3}, diffnet::Activation::kTanh), t.observations(), t.actions(),
                                  ActionDecode::kArgmax);
  const auto traj = rollout(t, pol, 3);
  CHECK(traj.size() < 200);
  const auto& last = traj.back().state;
  envs::CartpoleDynamics dyn(envs::CartpoleParams{});
  const auto after = dyn.step(last, 0);
  CHECK_FALSE(envs::cartpole_in_bounds(after, 0.0, envs::CartpoleParams{}));
}

TEST_CASE("gridworld rollouts replay identically under one seed") {
  envs::GridWorldParams p;
  p.n = 2;
  p.goal = envs::Direction::kEast;
  const auto t = envs::make_gridworld(p, 0);
  const auto pol = Policy::tabular(std::vector<std::size_t>(t.observations().size(), 1), 4);
  const auto a = rollout(t, pol, 7), b = rollout(t, pol, 7);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state == b[i].state);
    CHECK(a[i].action == b[i].action);
  }
}

TEST_CASE("estimate_return clips the mean, not the rollouts") {
  const auto exact = fixtures::constant_chain(1.0, 4, 4.0);
  CHECK(estimate_return(exact, Policy::tabular({0}, 1), 10, 0).value == 4.0);

  // Pick a seed whose two rollouts land in different start states: sums {180, 220}.
  const auto t = alternating_sums(180, 220, 200);
  const auto pol = Policy::tabular({0, 0, 0}, 1);
  std::uint64_t seed = 0;
  while (trajectory_return(rollout(t, pol, mix_seed(seed, 0))) == trajectory_return(rollout(t, pol, mix_seed(seed, 1)))) ++seed;
  const auto est = estimate_return(t, pol, 2, seed);
  CHECK(est.value == 200.0);
  CHECK(est.clipped_fraction == 0.5);
  CHECK(exact_return(t, Policy::tabular({0, 0, 0}, 1)) == doctest::Approx(200.0));
}

TEST_CASE("exact_return examples") {
  CHECK(exact_return(fixtures::constant_chain(1.0, 3, 10.0), Policy::tabular({0}, 1)) == doctest::Approx(3.0));
  CHECK(exact_return(coin_flip(), Policy::tabular({0, 0, 0}, 1)) == doctest::Approx(0.5));
  CHECK(exact_return(fixtures::constant_chain(1.0, 30, 10.0), Policy::tabular({0}, 1)) == 10.0);

  envs::GridWorldParams p;
  p.n = 2;
  p.goal = envs::Direction::kNorth;
  const auto u = envs::GridUniverse::build(p, 0);
  const auto t = envs::make_gridworld(u, envs::Direction::kNorth);
  const auto family = envs::gridworld_admissible_family(u, envs::Direction::kNorth, 0, 0);
  REQUIRE_FALSE(family.empty());
  CHECK(exact_return(t, family.front()) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("exact_return refuses continuous tasks") {
  const auto t = envs::make_cartpole(envs::GravityDir::kDown);
  diffnet::Mlp n({4, 3}, diffnet::Activation::kTanh);
  const auto pol = Policy::neural(n, t.observations(), t.actions(), ActionDecode::kArgmax);
  CHECK_THROWS_AS(exact_return(t, pol), UnsupportedOperation);
}

TEST_CASE("sampled return converges to the exact value") {
  auto m = fixtures::blank_model(3, 2);
  m.transition = {{{1, 0.3}, {2, 0.7}}, {{0, 1.0}}, {{2, 0.5}, {0, 0.5}}, {{2, 1.0}}, {{1, 0.5}, {0, 0.5}}, {{1, 1.0}}};
  m.reward = {0.2, 0.0, 0.5, 0.1, 1.0, 0.3};
  m.sensor = {{{0, 0.8}, {1, 0.2}}, {{1, 1.0}}, {{2, 1.0}}};
  m.init = {{0, 0.5}, {1, 0.5}};
  const auto t = TaskSpec::finite("noisy", m, 6, 100.0);
  const auto pol = Policy::tabular({0, 1, 0}, 2);
  const double truth = exact_return(t, pol);
  const auto est = estimate_return(t, pol, 10000, 11);
  CHECK(std::abs(est.value - truth) <= 3 * est.standard_error);
}

TEST_CASE("admissibility rule") {
  const auto t = fixtures::bandit({{1, 0}}, 1.0);
  CHECK(is_admissible(t, Policy::tabular({0}, 2), ExactEvaluation{}));
  CHECK_FALSE(is_admissible(t, Policy::tabular({1}, 2), ExactEvaluation{}));

  const auto t191 = fixtures::constant_chain(191.0, 1, 200.0);
  const auto t150 = fixtures::constant_chain(150.0, 1, 200.0);
  const SampledEvaluation eval{20, 0.05, 0};
  CHECK(is_admissible(t191, Policy::tabular({0}, 1), eval));
  CHECK_FALSE(is_admissible(t150, Policy::tabular({0}, 1), eval));
  CHECK_THROWS_AS(is_admissible(t191, Policy::tabular({0}, 1), SampledEvaluation{20, -0.1, 0}), ConfigurationError);
}

TEST_CASE("enumerate_admissible") {
  const auto only0 = fixtures::bandit({{1, 0}}, 1.0);
  auto found = enumerate_admissible(only0);
  REQUIRE(found.size() == 1);
  CHECK(found[0].action_table() == std::vector<std::size_t>{0});

  CHECK(enumerate_admissible(fixtures::bandit({{1, 1}}, 1.0)).size() == 2);

  const auto two = fixtures::bandit({{1, 1}, {0, 1}}, 1.0);
  std::vector<std::vector<std::size_t>> brute;
  for (std::size_t a0 = 0; a0 < 2; ++a0) {
    for (std::size_t a1 = 0; a1 < 2; ++a1) {
      if (exact_return_for_table(two, std::vector<std::size_t>{a0, a1}) >= 1.0 - 1e-10) brute.push_back({a0, a1});
    }
  }
  const auto listed = enumerate_admissible(two);
  REQUIRE(listed.size() == brute.size());
  for (std::size_t i = 0; i < brute.size(); ++i) CHECK(listed[i].action_table() == brute[i]);

  const std::vector<Policy> explicit_family{Policy::tabular({1, 0}, 2), Policy::tabular({0, 1}, 2)};
  const auto filtered = enumerate_admissible(two, explicit_family);
  REQUIRE(filtered.size() == 1);
  CHECK(filtered[0].action_table() == std::vector<std::size_t>{0, 1});
}

TEST_CASE("full enumeration refuses above the cap") {
  CHECK(tabular_policy_count(4, 4) == 256);
  CHECK(tabular_policy_count(4, 20) == kEnumerationCap + 1);
  envs::GridWorldParams p;
  p.n = 2;
  const auto t = envs::make_gridworld(p, 0);
  CHECK_THROWS_AS(enumerate_admissible(t), PreconditionViolation);
}

TEST_CASE("argmax ties resolve to the lowest index") {
  const double v[] = {1.0, 3.0, 3.0, 2.0};
  CHECK(argmax_lowest(v, 4) == 1);
}

TEST_CASE("policy JSON round-trip") {
  const auto t = Policy::tabular({2, 0, 1}, 3);
  CHECK(policy_from_json(to_json(t)).action_table() == t.action_table());
  const auto net = diffnet::Mlp::initialized({2, 4, 3}, diffnet::Activation::kTanh, 1);
  const auto n = Policy::neural(net, Space::finite(2), Space::finite(3), ActionDecode::kArgmax);
  CHECK(policy_from_json(to_json(n)).action_table() == n.action_table());
  CHECK_THROWS_AS(Policy::tabular({3}, 3), ConfigurationError);
}
