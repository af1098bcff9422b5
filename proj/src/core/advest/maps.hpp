#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "advest/config.hpp"
#include "diffnet/mlp.hpp"
#include "taskcore/space.hpp"

namespace taskred::advest {

using diffnet::Matrix;
using diffnet::Vector;

// Column-wise softmax and its vector-Jacobian product.
Matrix softmax_columns(const Matrix& logits);
Matrix softmax_backward(const Matrix& probs, const Matrix& dprobs);

// Features of a batch of points, one column per point.
Matrix feature_batch(const core::Space& space, const std::vector<const core::Point*>& points);

// Finite X -> distributions over finite Y. logits(x) = c * e_x (square maps
// only) + MLP(e_x) with a zero-initialized output layer, so the map starts as
// a soft identity. Identity-only maps are the exact identity.
class SoftMap {
 public:
  SoftMap() = default;
  SoftMap(std::size_t in, std::size_t out, const ArchSpec& arch, double identity_logit, std::uint64_t seed);

  struct Tape {
    diffnet::GradTape tape;
    Matrix probs;  // out x in
  };

  bool trainable() const { return net_.has_value(); }
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  Matrix probabilities() const;
  Tape record() const;
  Vector backward(const Tape& tape, const Matrix& dprobs) const;
  std::size_t greedy(std::size_t x) const;
  Vector& params() { return net_->params(); }
  const Vector& params() const { return net_->params(); }

  nlohmann::json to_json() const;
  static SoftMap from_json(const nlohmann::json& doc);

 private:
  Matrix logits_offset() const;

  std::size_t in_ = 0;
  std::size_t out_ = 0;
  double identity_logit_ = 0.0;
  std::optional<diffnet::Mlp> net_;
};

// R^in -> R^out. y = x + MLP(x) when in == out (zero-initialized output
// layer, so it starts as the identity), plain MLP otherwise.
class VectorMap {
 public:
  VectorMap() = default;
  VectorMap(std::size_t in, std::size_t out, const ArchSpec& arch, std::uint64_t seed);

  struct Tape {
    diffnet::GradTape tape;
    Matrix output;
  };

  bool trainable() const { return net_.has_value(); }
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  Matrix forward(const Matrix& x) const;
  Tape record(const Matrix& x) const;
  diffnet::Gradients backward(const Tape& tape, const Matrix& dy) const;
  Vector& params() { return net_->params(); }
  const Vector& params() const { return net_->params(); }

  nlohmann::json to_json() const;
  static VectorMap from_json(const nlohmann::json& doc);

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  bool residual_ = false;
  std::optional<diffnet::Mlp> net_;
};

}  // namespace taskred::advest
