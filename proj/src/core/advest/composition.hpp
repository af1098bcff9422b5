#pragma once

#include <variant>

#include "advest/maps.hpp"
#include "taskcore/policy.hpp"

namespace taskred::advest {

// Evaluation-time g o pi2 o h for discrete actions: every stage takes its
// greedy (argmax, lowest index on ties) choice.
class DiscreteComposition final : public core::PolicyMap {
 public:
  using EncoderVariant = std::variant<VectorMap, SoftMap>;

  DiscreteComposition(core::Space o1, core::Space o2, core::Space a1, core::Space a2, EncoderVariant encoder,
                      diffnet::Mlp policy, SoftMap decoder);

  core::Point act(const core::Point& observation) const override;
  const core::Space& observation_space() const override { return o1_; }
  const core::Space& action_space() const override { return a1_; }
  nlohmann::json describe() const override;

 private:
  core::Space o1_, o2_, a1_, a2_;
  EncoderVariant encoder_;
  diffnet::Mlp policy_;
  SoftMap decoder_;
  std::vector<std::size_t> decoder_table_;
  std::vector<std::size_t> encoder_table_;  // finite observations only
};

// Evaluation-time composition for box actions: the decoder acts on the
// pre-squash value, a1 = squash1(D(mu(h(o1)))).
class ContinuousComposition final : public core::PolicyMap {
 public:
  ContinuousComposition(core::Space o1, core::Space o2, core::Space a1, core::Space a2, VectorMap encoder,
                        diffnet::Mlp mean, Vector log_std, VectorMap decoder);

  core::Point act(const core::Point& observation) const override;
  const core::Space& observation_space() const override { return o1_; }
  const core::Space& action_space() const override { return a1_; }
  nlohmann::json describe() const override;

 private:
  core::Space o1_, o2_, a1_, a2_;
  VectorMap encoder_;
  diffnet::Mlp mean_;
  Vector log_std_;
  VectorMap decoder_;
};

// Rebuilds the evaluation policy from a checkpoint written by describe().
core::Policy composition_from_json(const nlohmann::json& doc);

// lo + (tanh(u) + 1) / 2 * (hi - lo), per coordinate, and its derivative.
Matrix squash(const core::Space& box, const Matrix& u);
Matrix squash_derivative(const core::Space& box, const Matrix& u);

}  // namespace taskred::advest
