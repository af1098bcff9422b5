#include <doctest.h>

#include <cmath>

#include "advest/estimator.hpp"
#include "advest/game.hpp"
#include "advest/maps.hpp"
#include "common/error.hpp"
#include "complexity/handcrafted.hpp"
#include "envs/cartpole.hpp"

using namespace taskred;
using namespace taskred::advest;

namespace {

EstimatorConfig small_config(std::uint64_t seed) {
  EstimatorConfig c;
  c.batch_size = 64;
  c.max_iters = 300;
  c.steps_per_iter = 20;
  c.eval_rollouts = 400;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("q-learning loss worked examples") {
  Matrix p(2, 1), q = Matrix::Zero(2, 1);
  p << 0.3, 0.7;
  CHECK(q_learning_loss(p, q, {1}) == 0.0);

  Matrix p1(2, 1), q1(2, 1);
  p1 << std::exp(-1.0), 1.0 - std::exp(-1.0);
  q1 << 2.0, 0.0;
  CHECK(q_learning_loss(p1, q1, {0}) == doctest::Approx(2.0));

  const Matrix uniform = Matrix::Constant(3, 3, 1.0 / 3.0), ones = Matrix::Ones(3, 3);
  CHECK(q_learning_loss(uniform, ones, {0, 1, 2}) == doctest::Approx(1.0986).epsilon(1e-4));
}

TEST_CASE("q-learning loss floors zero probabilities") {
  Matrix p(2, 1), q(2, 1);
  p << 1.0, 0.0;
  q << 0.0, 1.0;
  CHECK(q_learning_loss(p, q, {1}) == doctest::Approx(-std::log(kLogFloor)));
}

TEST_CASE("expected loss and its gradient") {
  Matrix p(2, 2), q(2, 2), grad;
  p << 0.25, 0.5, 0.75, 0.5;
  q << 1.0, 2.0, 3.0, 4.0;
  const double loss = expected_q_learning_loss(p, q, &grad);
  const double want = -0.5 * (0.25 * 1.0 * std::log(0.25) + 0.75 * 3.0 * std::log(0.75) + 0.5 * 2.0 * std::log(0.5) +
                              0.5 * 4.0 * std::log(0.5));
  CHECK(loss == doctest::Approx(want));
  CHECK(grad(0, 0) == doctest::Approx(-0.5));
  CHECK(grad(1, 1) == doctest::Approx(-2.0));
  CHECK(expected_q_learning_loss(p, Matrix::Zero(2, 2), &grad) == 0.0);
}

TEST_CASE("soft maps start at the identity") {
  SoftMap m(4, 4, ArchSpec::mlp(1, 8), 3.0, 1);
  for (std::size_t x = 0; x < 4; ++x) CHECK(m.greedy(x) == x);
  const Matrix p = m.probabilities();
  CHECK(p.colwise().sum().isApprox(Matrix::Ones(1, 4)));
  SoftMap frozen(3, 3, ArchSpec::identity_only(), 3.0, 1);
  CHECK_FALSE(frozen.trainable());
  const auto back = SoftMap::from_json(m.to_json());
  CHECK(back.probabilities().isApprox(p, 0.0));
}

TEST_CASE("soft map gradient matches finite differences") {
  SoftMap m(3, 2, ArchSpec::mlp(1, 5), 0.0, 2);
  m.params().setRandom();
  const Matrix w = Matrix::Random(2, 3);
  const auto tape = m.record();
  const Vector g = m.backward(tape, w);
  for (Eigen::Index i = 0; i < g.size(); i += 3) {
    SoftMap a = m, b = m;
    a.params()[i] += 1e-6;
    b.params()[i] -= 1e-6;
    const double fd = ((a.probabilities() - b.probabilities()).cwiseProduct(w)).sum() / 2e-6;
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("replay buffer overwrites the oldest entry") {
  ReplayBuffer buf(2);
  for (int i = 0; i < 3; ++i) buf.push(Transition{{double(i)}, {}, {}, 0.0, {}, {}, false});
  CHECK(buf.size() == 2);
  CHECK(buf[0].state[0] == 2.0);
  CHECK(buf[1].state[0] == 1.0);
  Rng rng(0);
  CHECK(buf.sample(5, rng).size() == 5);
  CHECK_THROWS_AS(ReplayBuffer(0), ConfigurationError);
}

TEST_CASE("step 1 moves only pi2, step 2 only [h, g]") {
  const auto pair = complexity::estimator_oracle_pair();
  for (auto tau : {std::pair{pair.tau1, pair.tau2}, std::pair{envs::make_cartpole(envs::GravityDir::kUp),
                                                              envs::make_cartpole(envs::GravityDir::kDown)}}) {
    auto c = small_config(0);
    c.batch_size = 16;
    c.steps_per_iter = 16;
    auto game = make_game(tau.first, tau.second, c);
    for (int k = 0; k < 3; ++k) {
      game->collect(0.5);
      game->update_critics();
      const Vector pi0 = game->policy_parameters(), map0 = game->map_parameters();
      game->step1();
      CHECK(game->map_parameters() == map0);
      CHECK_FALSE(game->policy_parameters() == pi0);
      const Vector pi1 = game->policy_parameters();
      game->step2();
      CHECK(game->policy_parameters() == pi1);
    }
  }
}

TEST_CASE("estimator tracks the exact value on the designated pair") {
  const auto pair = complexity::estimator_oracle_pair();
  const auto fam = core::enumerate_admissible(pair.tau2);
  const double exact = complexity::exact_relative_complexity(pair.tau1, pair.tau2, pair.h_large, pair.g_large, fam).value;
  CHECK(exact == doctest::Approx(0.5));
  int close = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto out = estimate(pair.tau1, pair.tau2, small_config(s));
    CHECK(out.result.value >= 0.0);
    CHECK(out.result.value <= 1.0);
    CHECK(out.result.inner_admissible);
    if (std::abs(out.result.value - exact) <= 0.1) ++close;
  }
  CHECK(close >= 4);
}

TEST_CASE("self-pair without an adversary stays near zero") {
  const auto t = complexity::contextual_bandit("match", {{1, 0}, {0, 1}}, 1.0);
  auto c = small_config(3);
  c.alpha = 0.0;
  const auto out = estimate(t, t, c);
  CHECK(out.result.value <= 0.1);
}

TEST_CASE("identical seeds give identical records") {
  const auto pair = complexity::estimator_oracle_pair();
  auto c = small_config(7);
  c.max_iters = 60;
  const auto a = estimate(pair.tau1, pair.tau2, c), b = estimate(pair.tau1, pair.tau2, c);
  CHECK(complexity::to_json(a.result).dump() == complexity::to_json(b.result).dump());
  CHECK(curve_csv(a.curve) == curve_csv(b.curve));
  CHECK(a.checkpoint == b.checkpoint);
}

TEST_CASE("checkpoint recomputation reproduces the value") {
  const auto pair = complexity::estimator_oracle_pair();
  const auto c = small_config(1);
  const auto out = estimate(pair.tau1, pair.tau2, c);
  const auto re = recompute_from_checkpoint(pair.tau1, out.checkpoint, 4000, 99);
  const double value = 1.0 - re.value / pair.tau1.success_threshold();
  CHECK(std::abs(value - out.result.value) <= 2.0 * (*out.result.composed_stderr + re.standard_error));
}

TEST_CASE("alpha selection picks the largest all-admissible alpha") {
  std::vector<SweepEntry> entries(3);
  entries[0].alpha = 0.1;
  entries[0].all_admissible = true;
  entries[1].alpha = 1.0;
  entries[1].all_admissible = true;
  entries[2].alpha = 10.0;
  entries[2].all_admissible = false;
  CHECK(select_alpha(entries) == 1u);
  entries[0].all_admissible = entries[1].all_admissible = false;
  CHECK_FALSE(select_alpha(entries).has_value());

  const auto pair = complexity::estimator_oracle_pair();
  auto c = small_config(0);
  c.max_iters = 40;
  const auto sweep = alpha_sweep(pair.tau1, pair.tau2, {2.0}, c, 1);
  REQUIRE(sweep.entries.size() == 1);
  CHECK(sweep.selected.has_value() == sweep.entries[0].all_admissible);
  CHECK_THROWS_AS(alpha_sweep(pair.tau1, pair.tau2, {2.0, 1.0}, c, 1), ConfigurationError);
}

TEST_CASE("config validation names the field") {
  try {
    estimator_config_from_json({{"lr_policy", -1.0}});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("/estimator/lr_policy") != std::string::npos);
  }
  CHECK_THROWS_AS(estimator_config_from_json({{"lr_polcy", 1.0}}), ValidationError);
  CHECK_THROWS_AS(estimator_config_from_json({{"batch_size", 10}, {"replay_capacity", 5}}), ValidationError);
  const auto c = estimator_config_from_json(to_json(small_config(4)));
  CHECK(to_json(c) == to_json(small_config(4)));
}

TEST_CASE("calibration scales the trained return") {
  const auto t = complexity::contextual_bandit("match", {{1, 0}, {0, 1}}, 1.0);
  auto c = small_config(2);
  c.max_iters = 200;
  const auto a = calibrate_success_threshold(t, c, 0.5);
  CHECK(a.r_star == doctest::Approx(kCalibrationFactor * a.trained_return));
  CHECK(a.r_star <= static_cast<double>(t.horizon()));
  CHECK(a.task.success_threshold() == a.r_star);
  const auto b = calibrate_success_threshold(t, c, 0.5);
  CHECK(a.r_star == b.r_star);
  CHECK_THROWS_AS(calibrate_success_threshold(t, c, 2.0), TrainingError);
}

TEST_CASE("mean and sample deviation") {
  const auto [m, s] = mean_std({1.0, 3.0});
  CHECK(m == 2.0);
  CHECK(s == doctest::Approx(std::sqrt(2.0)));
  CHECK(mean_std({5.0}).second == 0.0);
}
