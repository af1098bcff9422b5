#pragma once

#include <variant>

#include "advest/game.hpp"
#include "advest/composition.hpp"
#include "diffnet/optim.hpp"

namespace taskred::advest {

// Discrete-action game with the Q-learning loss: softmax policy pi2, finite or box
// encoder h, finite decoder g, and one critic per task.
class DiscreteGame final : public Game {
 public:
  DiscreteGame(core::TaskSpec tau1, core::TaskSpec tau2, EstimatorConfig config);

  void set_single_task(bool single) override { single_ = single; }
  void collect(double epsilon) override;
  double update_critics() override;
  double step1() override;
  double step2() override;

  core::Policy inner_policy() const override;
  core::Policy composed_policy() const override;
  nlohmann::json checkpoint() const override;

  Vector policy_parameters() const override { return pi_.params(); }
  Vector map_parameters() const override;

  // Composed action distribution p(a1 | o1) for a batch of tau1 observations.
  Matrix composed_probabilities(const std::vector<const core::Point*>& observations) const;

 private:
  struct Critic {
    diffnet::Mlp net;
    diffnet::Mlp target;
    diffnet::Adam opt;
  };
  struct Composed {
    Matrix pc;
    Matrix mix;  // pi2 action distribution per sample (|A2| x B)
    VectorMap::Tape enc_box;
    SoftMap::Tape enc_soft;
    std::vector<std::size_t> obs_index;
    diffnet::GradTape pi_tape;
    Matrix pi_probs;
    SoftMap::Tape dec;
  };
  struct Grads {
    Vector pi, enc, dec;
  };

  Composed forward_composed(const std::vector<const core::Point*>& observations) const;
  Grads backward_composed(const Composed& f, const Matrix& dpc) const;
  double critic_step(Critic& critic, const Batch& batch, const Matrix& next_probs, std::size_t action_count,
                     const char* which);
  void sample_batches();
  void apply(diffnet::Adam& opt, Vector& params, Vector grad, const char* what);
  std::size_t greedy_inner(const core::Point& o2) const;
  std::shared_ptr<const DiscreteComposition> composition() const;

  core::TaskSpec tau1_, tau2_;
  EstimatorConfig cfg_;
  bool single_ = false;
  bool finite_obs_ = false;
  Rng rng_;

  diffnet::Mlp pi_;
  diffnet::Adam pi_opt_;
  VectorMap enc_box_;
  SoftMap enc_soft_;
  diffnet::Adam enc_opt_;
  SoftMap dec_;
  diffnet::Adam dec_opt_;
  Critic q1_, q2_;
  std::size_t critic_updates_ = 0;

  ReplayBuffer buf1_, buf2_;
  EnvCursor env1_, env2_;
  Batch batch1_, batch2_;
  bool have_batch_ = false;
};

}  // namespace taskred::advest
