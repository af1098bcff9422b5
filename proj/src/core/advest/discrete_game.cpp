#include "advest/discrete_game.hpp"

#include <cmath>

#include "advest/composition.hpp"
#include "common/error.hpp"

namespace taskred::advest {

namespace {

enum Stream : std::uint64_t { kPolicy = 1, kEncoder, kDecoder, kCritic1, kCritic2, kEnv1, kEnv2, kTrainer };

diffnet::Adam adam_for(std::size_t n, double lr) { return diffnet::Adam(n, diffnet::AdamHyper{lr, 0.9, 0.999, 1e-8}); }

}  // namespace

DiscreteGame::DiscreteGame(core::TaskSpec tau1, core::TaskSpec tau2, EstimatorConfig config)
    : tau1_(std::move(tau1)), tau2_(std::move(tau2)), cfg_(std::move(config)), rng_(mix_seed(cfg_.seed, kTrainer)),
      buf1_(cfg_.replay_capacity), buf2_(cfg_.replay_capacity), env1_(tau1_, mix_seed(cfg_.seed, kEnv1)),
      env2_(tau2_, mix_seed(cfg_.seed, kEnv2)) {
  validate(cfg_);
  if (!tau1_.actions().is_finite() || !tau2_.actions().is_finite()) {
    throw ConfigurationError("the Q-learning estimator needs finite action spaces on both tasks");
  }
  const auto& o1 = tau1_.observations();
  const auto& o2 = tau2_.observations();
  if (o1.is_finite() != o2.is_finite()) {
    throw ConfigurationError("encoder between a finite and a continuous observation space is not supported");
  }
  finite_obs_ = o1.is_finite();
  const std::size_t a1 = tau1_.actions().size(), a2 = tau2_.actions().size();

  pi_ = diffnet::Mlp::initialized(cfg_.policy.dims(o2.feature_dim(), a2), cfg_.policy.activation, mix_seed(cfg_.seed, kPolicy));
  pi_opt_ = adam_for(pi_.param_count(), cfg_.lr_policy);
  if (finite_obs_) {
    enc_soft_ = SoftMap(o1.size(), o2.size(), cfg_.encoder, cfg_.identity_logit, mix_seed(cfg_.seed, kEncoder));
    if (enc_soft_.trainable()) enc_opt_ = adam_for(enc_soft_.params().size(), cfg_.lr_enc_dec);
  } else {
    enc_box_ = VectorMap(o1.dims(), o2.dims(), cfg_.encoder, mix_seed(cfg_.seed, kEncoder));
    if (enc_box_.trainable()) enc_opt_ = adam_for(enc_box_.params().size(), cfg_.lr_enc_dec);
  }
  dec_ = SoftMap(a2, a1, cfg_.decoder, cfg_.identity_logit, mix_seed(cfg_.seed, kDecoder));
  if (dec_.trainable()) dec_opt_ = adam_for(dec_.params().size(), cfg_.lr_enc_dec);

  auto make_critic = [&](const core::TaskSpec& t, std::uint64_t stream) {
    auto net = diffnet::Mlp::initialized(cfg_.critic.dims(t.states().feature_dim(), t.actions().size()),
                                         cfg_.critic.activation, mix_seed(cfg_.seed, stream));
    return Critic{net, net, adam_for(net.param_count(), cfg_.lr_critic)};
  };
  q1_ = make_critic(tau1_, kCritic1);
  q2_ = make_critic(tau2_, kCritic2);
}

Vector DiscreteGame::map_parameters() const {
  Vector enc = finite_obs_ ? (enc_soft_.trainable() ? enc_soft_.params() : Vector())
                           : (enc_box_.trainable() ? enc_box_.params() : Vector());
  Vector dec = dec_.trainable() ? dec_.params() : Vector();
  Vector all(enc.size() + dec.size());
  all << enc, dec;
  return all;
}

std::size_t DiscreteGame::greedy_inner(const core::Point& o2) const {
  const auto f = tau2_.observations().features(o2);
  const Vector z = pi_.forward({f.data(), static_cast<std::size_t>(f.size())});
  return core::argmax_lowest(z.data(), static_cast<std::size_t>(z.size()));
}

void DiscreteGame::collect(double epsilon) {
  const std::size_t a2n = tau2_.actions().size();
  for (std::size_t k = 0; k < cfg_.steps_per_iter; ++k) {
    const std::size_t a = uniform01(rng_) < epsilon ? uniform_index(rng_, a2n) : greedy_inner(env2_.observation());
    env2_.step(core::index_point(a), buf2_);
  }
  if (single_) return;
  const core::Policy composed = composed_policy();
  const std::size_t a1n = tau1_.actions().size();
  for (std::size_t k = 0; k < cfg_.steps_per_iter; ++k) {
    core::Point a = uniform01(rng_) < epsilon ? core::index_point(uniform_index(rng_, a1n)) : composed.act(env1_.observation());
    env1_.step(a, buf1_);
  }
}

DiscreteGame::Composed DiscreteGame::forward_composed(const std::vector<const core::Point*>& observations) const {
  Composed f;
  if (finite_obs_) {
    f.enc_soft = enc_soft_.record();
    const auto n2 = static_cast<Eigen::Index>(tau2_.observations().size());
    f.pi_tape = pi_.record(Matrix::Identity(n2, n2));
    f.pi_probs = softmax_columns(f.pi_tape.output());
    Matrix qsel(n2, static_cast<Eigen::Index>(observations.size()));
    for (std::size_t b = 0; b < observations.size(); ++b) {
      f.obs_index.push_back(core::point_index(*observations[b]));
      qsel.col(static_cast<Eigen::Index>(b)) = f.enc_soft.probs.col(static_cast<Eigen::Index>(f.obs_index.back()));
    }
    f.mix = f.pi_probs * qsel;
  } else {
    f.enc_box = enc_box_.record(feature_batch(tau1_.observations(), observations));
    f.pi_tape = pi_.record(f.enc_box.output);
    f.pi_probs = softmax_columns(f.pi_tape.output());
    f.mix = f.pi_probs;
  }
  f.dec = dec_.record();
  f.pc = f.dec.probs * f.mix;
  return f;
}

DiscreteGame::Grads DiscreteGame::backward_composed(const Composed& f, const Matrix& dpc) const {
  Grads g;
  g.dec = dec_.backward(f.dec, dpc * f.mix.transpose());
  const Matrix dmix = f.dec.probs.transpose() * dpc;
  if (finite_obs_) {
    const auto n1 = static_cast<Eigen::Index>(tau1_.observations().size());
    const auto n2 = static_cast<Eigen::Index>(tau2_.observations().size());
    Matrix qsel(n2, dmix.cols());
    for (Eigen::Index b = 0; b < dmix.cols(); ++b) {
      qsel.col(b) = f.enc_soft.probs.col(static_cast<Eigen::Index>(f.obs_index[static_cast<std::size_t>(b)]));
    }
    const Matrix dpi = dmix * qsel.transpose();
    const Matrix dqsel = f.pi_probs.transpose() * dmix;
    Matrix dq = Matrix::Zero(n2, n1);
    for (Eigen::Index b = 0; b < dmix.cols(); ++b) {
      dq.col(static_cast<Eigen::Index>(f.obs_index[static_cast<std::size_t>(b)])) += dqsel.col(b);
    }
    g.pi = pi_.backward(f.pi_tape, softmax_backward(f.pi_probs, dpi)).params;
    g.enc = enc_soft_.backward(f.enc_soft, dq);
  } else {
    const auto pg = pi_.backward(f.pi_tape, softmax_backward(f.pi_probs, dmix));
    g.pi = pg.params;
    g.enc = enc_box_.backward(f.enc_box, pg.inputs).params;
  }
  return g;
}

Matrix DiscreteGame::composed_probabilities(const std::vector<const core::Point*>& observations) const {
  return forward_composed(observations).pc;
}

void DiscreteGame::sample_batches() {
  if (buf2_.size() == 0) throw UsageError("collect() must run before training steps");
  batch2_ = gather(buf2_, buf2_.sample(cfg_.batch_size, rng_), tau2_);
  if (!single_) {
    if (buf1_.size() == 0) throw UsageError("collect() must run before training steps");
    batch1_ = gather(buf1_, buf1_.sample(cfg_.batch_size, rng_), tau1_);
  }
  have_batch_ = true;
}

double DiscreteGame::critic_step(Critic& critic, const Batch& batch, const Matrix& next_probs, std::size_t action_count,
                                 const char* which) {
  const Matrix q_next = critic.target.forward_batch(batch.next_states);
  Vector v_next(q_next.cols());
  for (Eigen::Index b = 0; b < q_next.cols(); ++b) {
    v_next[b] = cfg_.critic_target == CriticTarget::kMax ? q_next.col(b).maxCoeff() : next_probs.col(b).dot(q_next.col(b));
  }
  const Vector y = batch.rewards + cfg_.gamma * batch.not_done.cwiseProduct(v_next);
  const auto tape = critic.net.record(batch.states);
  const double n = static_cast<double>(y.size());
  Matrix dq = Matrix::Zero(static_cast<Eigen::Index>(action_count), tape.output().cols());
  double loss = 0.0;
  for (Eigen::Index b = 0; b < dq.cols(); ++b) {
    const auto a = static_cast<Eigen::Index>(core::point_index(*batch.actions[static_cast<std::size_t>(b)]));
    const double err = tape.output()(a, b) - y[b];
    loss += err * err / n;
    dq(a, b) = 2.0 * err / n;
  }
  if (!std::isfinite(loss) || loss > cfg_.critic_divergence) {
    throw TrainingError(std::string("critic for ") + which + " diverged: TD loss " + std::to_string(loss) + " after " +
                        std::to_string(critic_updates_) + " updates");
  }
  Vector grad = critic.net.backward(tape, dq).params;
  apply(critic.opt, critic.net.params(), std::move(grad), "critic gradient");
  return loss;
}

double DiscreteGame::update_critics() {
  sample_batches();
  Matrix next2;
  if (cfg_.critic_target == CriticTarget::kPolicy) next2 = softmax_columns(pi_.forward_batch(batch2_.next_observations));
  double loss = critic_step(q2_, batch2_, next2, tau2_.actions().size(), "tau2");
  if (!single_) {
    Matrix next1;
    if (cfg_.critic_target == CriticTarget::kPolicy) next1 = composed_probabilities(batch1_.next_observation_points);
    loss += critic_step(q1_, batch1_, next1, tau1_.actions().size(), "tau1");
  }
  if (++critic_updates_ % cfg_.target_update == 0) {
    q1_.target = q1_.net;
    q2_.target = q2_.net;
  }
  return loss;
}

void DiscreteGame::apply(diffnet::Adam& opt, Vector& params, Vector grad, const char* what) {
  if (grad.size() == 0) return;
  diffnet::check_finite(grad, what);
  diffnet::clip_norm(grad, cfg_.grad_clip);
  opt.step(params, grad);
}

double DiscreteGame::step1() {
  if (!have_batch_) sample_batches();
  const auto tape = pi_.record(batch2_.observations);
  const Matrix probs = softmax_columns(tape.output());
  Matrix dp;
  const double l2 = expected_q_learning_loss(probs, q2_.net.forward_batch(batch2_.states), &dp);
  Vector grad = pi_.backward(tape, softmax_backward(probs, dp)).params;
  double c1 = l2;
  if (!single_ && cfg_.alpha > 0.0) {
    const Composed f = forward_composed(batch1_.observation_points);
    Matrix dpc;
    const double l1 = expected_q_learning_loss(f.pc, q1_.net.forward_batch(batch1_.states), &dpc);
    grad -= cfg_.alpha * backward_composed(f, dpc).pi;
    c1 -= cfg_.alpha * l1;
  }
  apply(pi_opt_, pi_.params(), std::move(grad), "policy gradient");
  return c1;
}

double DiscreteGame::step2() {
  if (single_) {
    have_batch_ = false;
    return 0.0;
  }
  if (!have_batch_) sample_batches();
  const Composed f = forward_composed(batch1_.observation_points);
  Matrix dpc;
  const double l1 = expected_q_learning_loss(f.pc, q1_.net.forward_batch(batch1_.states), &dpc);
  const Grads g = backward_composed(f, dpc);
  if (finite_obs_) {
    if (enc_soft_.trainable()) apply(enc_opt_, enc_soft_.params(), g.enc, "encoder gradient");
  } else if (enc_box_.trainable()) {
    apply(enc_opt_, enc_box_.params(), g.enc, "encoder gradient");
  }
  if (dec_.trainable()) apply(dec_opt_, dec_.params(), g.dec, "decoder gradient");
  have_batch_ = false;
  return l1;
}

core::Policy DiscreteGame::inner_policy() const {
  return core::Policy::neural(pi_, tau2_.observations(), tau2_.actions(), core::ActionDecode::kArgmax);
}

std::shared_ptr<const DiscreteComposition> DiscreteGame::composition() const {
  DiscreteComposition::EncoderVariant enc =
      finite_obs_ ? DiscreteComposition::EncoderVariant(enc_soft_) : DiscreteComposition::EncoderVariant(enc_box_);
  return std::make_shared<DiscreteComposition>(tau1_.observations(), tau2_.observations(), tau1_.actions(),
                                               tau2_.actions(), std::move(enc), pi_, dec_);
}

core::Policy DiscreteGame::composed_policy() const { return core::Policy::mapped(composition()); }

nlohmann::json DiscreteGame::checkpoint() const {
  return {{"composition", composition()->describe()},
          {"critic1", diffnet::to_json(q1_.net)},
          {"critic2", diffnet::to_json(q2_.net)}};
}

}  // namespace taskred::advest
