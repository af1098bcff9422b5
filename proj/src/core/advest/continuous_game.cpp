#include "advest/continuous_game.hpp"

#include <cmath>

#include "common/error.hpp"

namespace taskred::advest {

namespace {

enum Stream : std::uint64_t { kPolicy = 1, kEncoder, kDecoder, kCritic1, kCritic2, kEnv1, kEnv2, kTrainer };

diffnet::Adam adam_for(std::size_t n, double lr) { return diffnet::Adam(n, diffnet::AdamHyper{lr, 0.9, 0.999, 1e-8}); }

Matrix points_matrix(const std::vector<const core::Point*>& points, std::size_t dims) {
  Matrix m(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    for (std::size_t i = 0; i < dims; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*points[j])[i];
  }
  return m;
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix m(top.rows() + bottom.rows(), top.cols());
  m << top, bottom;
  return m;
}

}  // namespace

ContinuousGame::ContinuousGame(core::TaskSpec tau1, core::TaskSpec tau2, EstimatorConfig config)
    : tau1_(std::move(tau1)), tau2_(std::move(tau2)), cfg_(std::move(config)), rng_(mix_seed(cfg_.seed, kTrainer)),
      buf1_(cfg_.replay_capacity), buf2_(cfg_.replay_capacity), env1_(tau1_, mix_seed(cfg_.seed, kEnv1)),
      env2_(tau2_, mix_seed(cfg_.seed, kEnv2)) {
  validate(cfg_);
  if (tau1_.actions().is_finite() || tau2_.actions().is_finite()) {
    throw ConfigurationError("the actor-critic estimator needs box action spaces on both tasks");
  }
  if (tau1_.observations().is_finite() || tau2_.observations().is_finite()) {
    throw ConfigurationError("the actor-critic estimator needs box observation spaces on both tasks");
  }
  const std::size_t o1 = tau1_.observations().dims(), o2 = tau2_.observations().dims();
  const std::size_t a1 = tau1_.actions().dims(), a2 = tau2_.actions().dims();
  pi_ = diffnet::Mlp::initialized(cfg_.policy.dims(o2, a2), cfg_.policy.activation, mix_seed(cfg_.seed, kPolicy));
  log_std_ = Vector::Constant(static_cast<Eigen::Index>(a2), cfg_.init_log_std);
  pi_opt_ = adam_for(pi_.param_count(), cfg_.lr_policy);
  log_std_opt_ = adam_for(a2, cfg_.lr_policy);
  enc_ = VectorMap(o1, o2, cfg_.encoder, mix_seed(cfg_.seed, kEncoder));
  if (enc_.trainable()) enc_opt_ = adam_for(enc_.params().size(), cfg_.lr_enc_dec);
  dec_ = VectorMap(a2, a1, cfg_.decoder, mix_seed(cfg_.seed, kDecoder));
  if (dec_.trainable()) dec_opt_ = adam_for(dec_.params().size(), cfg_.lr_enc_dec);
  auto make_critic = [&](const core::TaskSpec& t, std::uint64_t stream) {
    auto net = diffnet::Mlp::initialized(cfg_.critic.dims(t.states().feature_dim() + t.actions().dims(), 1),
                                         cfg_.critic.activation, mix_seed(cfg_.seed, stream));
    return Critic{net, net, adam_for(net.param_count(), cfg_.lr_critic)};
  };
  q1_ = make_critic(tau1_, kCritic1);
  q2_ = make_critic(tau2_, kCritic2);
}

Vector ContinuousGame::policy_parameters() const {
  Vector all(pi_.params().size() + log_std_.size());
  all << pi_.params(), log_std_;
  return all;
}

Vector ContinuousGame::map_parameters() const {
  Vector enc = enc_.trainable() ? enc_.params() : Vector();
  Vector dec = dec_.trainable() ? dec_.params() : Vector();
  Vector all(enc.size() + dec.size());
  all << enc, dec;
  return all;
}

Matrix ContinuousGame::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = standard_normal(rng_);
  }
  return m;
}

Matrix ContinuousGame::mean_action2(const Matrix& observations) const {
  return squash(tau2_.actions(), pi_.forward_batch(observations));
}

Matrix ContinuousGame::mean_action1(const Matrix& observations) const {
  return squash(tau1_.actions(), dec_.forward(pi_.forward_batch(enc_.forward(observations))));
}

void ContinuousGame::collect(double) {
  const Vector sigma = log_std_.array().exp();
  for (std::size_t k = 0; k < cfg_.steps_per_iter; ++k) {
    const Matrix o = tau2_.observations().features(env2_.observation());
    Matrix u = pi_.forward_batch(o);
    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, 0) += sigma[i] * standard_normal(rng_);
    const Matrix a = squash(tau2_.actions(), u);
    env2_.step(core::Point(a.data(), a.data() + a.size()), buf2_);
  }
  if (single_) return;
  for (std::size_t k = 0; k < cfg_.steps_per_iter; ++k) {
    const Matrix o = tau1_.observations().features(env1_.observation());
    Matrix u = pi_.forward_batch(enc_.forward(o));
    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, 0) += sigma[i] * standard_normal(rng_);
    const Matrix a = squash(tau1_.actions(), dec_.forward(u));
    env1_.step(core::Point(a.data(), a.data() + a.size()), buf1_);
  }
}

void ContinuousGame::sample_batches() {
  if (buf2_.size() == 0) throw UsageError("collect() must run before training steps");
  batch2_ = gather(buf2_, buf2_.sample(cfg_.batch_size, rng_), tau2_);
  if (!single_) {
    if (buf1_.size() == 0) throw UsageError("collect() must run before training steps");
    batch1_ = gather(buf1_, buf1_.sample(cfg_.batch_size, rng_), tau1_);
  }
  have_batch_ = true;
}

double ContinuousGame::critic_step(Critic& critic, const Batch& batch, const Matrix& next_actions, std::size_t action_dims,
                                   const char* which) {
  const Matrix q_next = critic.target.forward_batch(stack(batch.next_states, next_actions));
  const Vector y = batch.rewards + cfg_.gamma * batch.not_done.cwiseProduct(q_next.row(0).transpose());
  const Matrix actions = points_matrix(batch.actions, action_dims);
  const auto tape = critic.net.record(stack(batch.states, actions));
  const double n = static_cast<double>(y.size());
  const Vector err = tape.output().row(0).transpose() - y;
  const double loss = err.squaredNorm() / n;
  if (!std::isfinite(loss) || loss > cfg_.critic_divergence) {
    throw TrainingError(std::string("critic for ") + which + " diverged: TD loss " + std::to_string(loss) + " after " +
                        std::to_string(critic_updates_) + " updates");
  }
  const Matrix dq = (2.0 / n) * err.transpose();
  apply(critic.opt, critic.net.params(), critic.net.backward(tape, dq).params, "critic gradient");
  return loss;
}

double ContinuousGame::update_critics() {
  sample_batches();
  double loss = critic_step(q2_, batch2_, mean_action2(batch2_.next_observations), tau2_.actions().dims(), "tau2");
  if (!single_) {
    loss += critic_step(q1_, batch1_, mean_action1(batch1_.next_observations), tau1_.actions().dims(), "tau1");
  }
  if (++critic_updates_ % cfg_.target_update == 0) {
    q1_.target = q1_.net;
    q2_.target = q2_.net;
  }
  return loss;
}

Matrix ContinuousGame::action_gradient(const diffnet::Mlp& q, const Matrix& states, const Matrix& actions,
                                       double* value) const {
  const auto tape = q.record(stack(states, actions));
  const double n = static_cast<double>(actions.cols());
  if (value) *value = tape.output().sum() / n;
  const Matrix up = Matrix::Constant(1, actions.cols(), 1.0 / n);
  const Matrix din = q.backward(tape, up).inputs;
  return din.bottomRows(actions.rows());
}

ContinuousGame::Composed ContinuousGame::forward_composed(const Matrix& observations, bool stochastic) {
  Composed f;
  f.enc = enc_.record(observations);
  f.pi_tape = pi_.record(f.enc.output);
  const Eigen::Index rows = f.pi_tape.output().rows(), cols = f.pi_tape.output().cols();
  f.noise = stochastic ? normal_matrix(rows, cols) : Matrix::Zero(rows, cols);
  const Vector sigma = log_std_.array().exp();
  f.u = f.pi_tape.output() + sigma.asDiagonal() * f.noise;
  f.dec = dec_.record(f.u);
  f.action = squash(tau1_.actions(), f.dec.output);
  return f;
}

ContinuousGame::Grads ContinuousGame::composed_value_gradient(const Composed& f, const Matrix& states, double* value) const {
  Grads g;
  const Matrix da = action_gradient(q1_.net, states, f.action, value);
  const Matrix dv = da.cwiseProduct(squash_derivative(tau1_.actions(), f.dec.output));
  const auto dg = dec_.backward(f.dec, dv);
  g.dec = dg.params;
  const Matrix& du = dg.inputs;
  const Vector sigma = log_std_.array().exp();
  g.log_std = du.cwiseProduct(f.noise).rowwise().sum().cwiseProduct(sigma);
  const auto pg = pi_.backward(f.pi_tape, du);
  g.pi = pg.params;
  g.enc = enc_.backward(f.enc, pg.inputs).params;
  return g;
}

void ContinuousGame::apply(diffnet::Adam& opt, Vector& params, Vector grad, const char* what) {
  if (grad.size() == 0) return;
  diffnet::check_finite(grad, what);
  diffnet::clip_norm(grad, cfg_.grad_clip);
  opt.step(params, grad);
}

double ContinuousGame::step1() {
  if (!have_batch_) sample_batches();
  // Ascent on Q2(s, pi2(o)) - alpha Q1(s, g(pi2(h(o)))) plus the entropy bonus.
  const auto tape = pi_.record(batch2_.observations);
  const Matrix noise = normal_matrix(tape.output().rows(), tape.output().cols());
  const Vector sigma = log_std_.array().exp();
  const Matrix u = tape.output() + sigma.asDiagonal() * noise;
  double q2 = 0.0;
  const Matrix da = action_gradient(q2_.net, batch2_.states, squash(tau2_.actions(), u), &q2);
  const Matrix du = da.cwiseProduct(squash_derivative(tau2_.actions(), u));
  Vector ascent_pi = pi_.backward(tape, du).params;
  Vector ascent_ls = du.cwiseProduct(noise).rowwise().sum().cwiseProduct(sigma);
  ascent_ls.array() += cfg_.entropy_weight;
  double objective = q2 + cfg_.entropy_weight * log_std_.sum();
  if (!single_ && cfg_.alpha > 0.0) {
    const Composed f = forward_composed(batch1_.observations, true);
    double q1 = 0.0;
    const Grads g = composed_value_gradient(f, batch1_.states, &q1);
    ascent_pi -= cfg_.alpha * g.pi;
    ascent_ls -= cfg_.alpha * g.log_std;
    objective -= cfg_.alpha * q1;
  }
  apply(pi_opt_, pi_.params(), -ascent_pi, "policy gradient");
  apply(log_std_opt_, log_std_, -ascent_ls, "log-std gradient");
  log_std_ = log_std_.cwiseMax(-5.0).cwiseMin(1.0);
  return objective;
}

double ContinuousGame::step2() {
  if (single_) {
    have_batch_ = false;
    return 0.0;
  }
  if (!have_batch_) sample_batches();
  const Composed f = forward_composed(batch1_.observations, true);
  double q1 = 0.0;
  const Grads g = composed_value_gradient(f, batch1_.states, &q1);
  if (enc_.trainable()) apply(enc_opt_, enc_.params(), -g.enc, "encoder gradient");
  if (dec_.trainable()) apply(dec_opt_, dec_.params(), -g.dec, "decoder gradient");
  have_batch_ = false;
  return q1;
}

core::Policy ContinuousGame::inner_policy() const {
  return core::Policy::neural(pi_, tau2_.observations(), tau2_.actions(), core::ActionDecode::kTanhScaled);
}

std::shared_ptr<const ContinuousComposition> ContinuousGame::composition() const {
  return std::make_shared<ContinuousComposition>(tau1_.observations(), tau2_.observations(), tau1_.actions(),
                                                 tau2_.actions(), enc_, pi_, log_std_, dec_);
}

core::Policy ContinuousGame::composed_policy() const { return core::Policy::mapped(composition()); }

nlohmann::json ContinuousGame::checkpoint() const {
  return {{"composition", composition()->describe()},
          {"critic1", diffnet::to_json(q1_.net)},
          {"critic2", diffnet::to_json(q2_.net)}};
}

}  // namespace taskred::advest
