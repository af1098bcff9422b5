#pragma once

#include "advest/composition.hpp"
#include "advest/game.hpp"
#include "diffnet/optim.hpp"

namespace taskred::advest {

// Continuous-action game: squashed-Gaussian pi2 with a learned state-independent
// log-std, box encoder h and pre-squash decoder g, and one Q(s, a) critic per
// task regressed on one-step TD targets that use the mean next action.
class ContinuousGame final : public Game {
 public:
  ContinuousGame(core::TaskSpec tau1, core::TaskSpec tau2, EstimatorConfig config);

  void set_single_task(bool single) override { single_ = single; }
  void collect(double epsilon) override;
  double update_critics() override;
  double step1() override;
  double step2() override;

  core::Policy inner_policy() const override;
  core::Policy composed_policy() const override;
  nlohmann::json checkpoint() const override;

  Vector policy_parameters() const override;
  Vector map_parameters() const override;

 private:
  struct Critic {
    diffnet::Mlp net;
    diffnet::Mlp target;
    diffnet::Adam opt;
  };
  // Reparameterized composed action for a tau1 batch.
  struct Composed {
    VectorMap::Tape enc;
    diffnet::GradTape pi_tape;
    Matrix noise;
    Matrix u;  // pre-squash pi2 output
    VectorMap::Tape dec;
    Matrix action;
  };
  struct Grads {
    Vector pi, log_std, enc, dec;
  };

  Composed forward_composed(const Matrix& observations, bool stochastic);
  // Ascent direction of mean Q1 through the composition.
  Grads composed_value_gradient(const Composed& f, const Matrix& states, double* value) const;
  // d mean Q / d action for a batch.
  Matrix action_gradient(const diffnet::Mlp& q, const Matrix& states, const Matrix& actions, double* value) const;
  double critic_step(Critic& critic, const Batch& batch, const Matrix& next_actions, std::size_t action_dims,
                     const char* which);
  Matrix mean_action2(const Matrix& observations) const;
  Matrix mean_action1(const Matrix& observations) const;
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);
  void sample_batches();
  void apply(diffnet::Adam& opt, Vector& params, Vector grad, const char* what);
  std::shared_ptr<const ContinuousComposition> composition() const;

  core::TaskSpec tau1_, tau2_;
  EstimatorConfig cfg_;
  bool single_ = false;
  Rng rng_;

  diffnet::Mlp pi_;
  Vector log_std_;
  diffnet::Adam pi_opt_, log_std_opt_;
  VectorMap enc_;
  diffnet::Adam enc_opt_;
  VectorMap dec_;
  diffnet::Adam dec_opt_;
  Critic q1_, q2_;
  std::size_t critic_updates_ = 0;

  ReplayBuffer buf1_, buf2_;
  EnvCursor env1_, env2_;
  Batch batch1_, batch2_;
  bool have_batch_ = false;
};

}  // namespace taskred::advest
