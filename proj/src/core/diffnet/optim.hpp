#pragma once

#include "diffnet/mlp.hpp"

namespace taskred::diffnet {

// Throws TrainingError when the gradient carries a NaN or infinity.
void check_finite(const Vector& grad, const char* what);

void sgd_step(Vector& params, const Vector& grad, double learning_rate);

// Rescales grad in place so its L2 norm is at most max_norm.
void clip_norm(Vector& grad, double max_norm);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t param_count, AdamHyper hyper);

  // Descent step: params <- params - lr * m_hat / (sqrt(v_hat) + eps).
  void step(Vector& params, const Vector& grad);

  std::size_t steps_taken() const { return t_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  AdamHyper hyper_;
  Vector m_;
  Vector v_;
  std::size_t t_ = 0;
};

}  // namespace taskred::diffnet
