#include "diffnet/optim.hpp"

#include <cmath>

#include "common/error.hpp"

namespace taskred::diffnet {

void check_finite(const Vector& grad, const char* what) {
  if (!grad.allFinite()) throw TrainingError(std::string("non-finite gradient in ") + what);
}

void sgd_step(Vector& params, const Vector& grad, double learning_rate) {
  if (params.size() != grad.size()) throw ConfigurationError("sgd_step: parameter/gradient length mismatch");
  check_finite(grad, "sgd_step");
  params -= learning_rate * grad;
}

void clip_norm(Vector& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
}

Adam::Adam(std::size_t param_count, AdamHyper hyper)
    : hyper_(hyper),
      m_(Vector::Zero(static_cast<Eigen::Index>(param_count))),
      v_(Vector::Zero(static_cast<Eigen::Index>(param_count))) {}

void Adam::step(Vector& params, const Vector& grad) {
  if (params.size() != grad.size() || params.size() != m_.size()) {
    throw ConfigurationError("adam_step: parameter/gradient length mismatch");
  }
  check_finite(grad, "adam_step");
  ++t_;
  m_ = hyper_.beta1 * m_ + (1.0 - hyper_.beta1) * grad;
  v_ = hyper_.beta2 * v_ + (1.0 - hyper_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
  params.array() -= hyper_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + hyper_.epsilon);
}

}  // namespace taskred::diffnet
