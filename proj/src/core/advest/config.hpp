#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "diffnet/mlp.hpp"

namespace taskred::advest {

// Architecture of one trainable map. `identity` fixes the map to the identity
// (no parameters); otherwise an MLP with `hidden_layers` hidden layers
// (0 means a single linear layer).
struct ArchSpec {
  bool identity = false;
  std::size_t hidden_layers = 1;
  std::size_t width = 64;
  diffnet::Activation activation = diffnet::Activation::kTanh;

  static ArchSpec identity_only() { return {true, 0, 0, diffnet::Activation::kTanh}; }
  static ArchSpec mlp(std::size_t hidden, std::size_t width = 64) { return {false, hidden, width, diffnet::Activation::kTanh}; }

  // Hidden-layer count, or -1 for identity-only.
  int depth() const { return identity ? -1 : static_cast<int>(hidden_layers); }
  std::vector<std::size_t> dims(std::size_t in, std::size_t out) const;
};

nlohmann::json to_json(const ArchSpec& a);
// Accepts "identity" or {"hidden_layers", "width", "activation"}.
ArchSpec arch_from_json(const nlohmann::json& doc, const std::string& where);

enum class CriticTarget { kPolicy, kMax };

struct EstimatorConfig {
  double alpha = 1.0;
  double lr_policy = 1e-3;   // lambda_1
  double lr_enc_dec = 1e-3;  // lambda_2
  double lr_critic = 1e-3;
  std::size_t batch_size = 1000;
  std::size_t max_iters = 1000;
  std::size_t steps_per_iter = 200;  // environment steps per task per iteration
  std::size_t pretrain_iters = 0;    // single-task iterations on tau2 before the game
  std::size_t eval_rollouts = 20;
  std::size_t eval_every = 10;
  std::size_t convergence_window = 50;  // evaluations
  double convergence_threshold = 0.01;  // fraction of R*
  double admissibility_tolerance = 0.05;
  double gamma = 0.99;
  std::size_t replay_capacity = 100000;
  std::size_t target_update = 100;
  CriticTarget critic_target = CriticTarget::kPolicy;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_fraction = 1.0 / 3.0;
  double entropy_weight = 0.01;
  double init_log_std = -0.5;
  double identity_logit = 3.0;  // initial preference of finite maps for the identity
  double grad_clip = 10.0;
  double critic_divergence = 1e8;
  ArchSpec policy = ArchSpec::mlp(2);
  ArchSpec critic = ArchSpec::mlp(2);
  ArchSpec encoder = ArchSpec::mlp(2);
  ArchSpec decoder = ArchSpec::mlp(1);
  std::uint64_t seed = 0;
};

// Defaults for the actor-critic estimator (B = 200, 50000 iterations).
EstimatorConfig continuous_defaults();

nlohmann::json to_json(const EstimatorConfig& c);
// Overlays `doc` on `base`; unknown keys and out-of-range values raise
// ValidationError naming the field (prefixed by `where`).
EstimatorConfig estimator_config_from_json(const nlohmann::json& doc, const EstimatorConfig& base = {},
                                           const std::string& where = "/estimator");
void validate(const EstimatorConfig& c, const std::string& where = "/estimator");

}  // namespace taskred::advest
