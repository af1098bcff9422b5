#include "advest/maps.hpp"

#include "common/error.hpp"
#include "taskcore/policy.hpp"

namespace taskred::advest {

Matrix softmax_columns(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    p.col(j) = (logits.col(j).array() - m).exp().matrix();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& dprobs) {
  Matrix out = probs.cwiseProduct(dprobs);
  const Eigen::RowVectorXd dots = out.colwise().sum();
  out -= probs * dots.asDiagonal();
  return out;
}

Matrix feature_batch(const core::Space& space, const std::vector<const core::Point*>& points) {
  Matrix m(static_cast<Eigen::Index>(space.feature_dim()), static_cast<Eigen::Index>(points.size()));
  if (space.is_finite()) m.setZero();
  for (std::size_t j = 0; j < points.size(); ++j) space.write_features(*points[j], m.col(static_cast<Eigen::Index>(j)).data());
  return m;
}

SoftMap::SoftMap(std::size_t in, std::size_t out, const ArchSpec& arch, double identity_logit, std::uint64_t seed)
    : in_(in), out_(out), identity_logit_(in == out ? identity_logit : 0.0) {
  if (arch.identity) {
    if (in != out) throw ConfigurationError("identity-only map needs equal domain and codomain sizes");
    return;
  }
  net_ = diffnet::Mlp::initialized(arch.dims(in, out), arch.activation, seed);
  net_->zero_output_layer();
}

Matrix SoftMap::logits_offset() const {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  if (in_ == out_) m.diagonal().setConstant(identity_logit_);
  return m;
}

Matrix SoftMap::probabilities() const {
  if (!net_) return Matrix::Identity(static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  const Matrix eye = Matrix::Identity(static_cast<Eigen::Index>(in_), static_cast<Eigen::Index>(in_));
  return softmax_columns(logits_offset() + net_->forward_batch(eye));
}

SoftMap::Tape SoftMap::record() const {
  Tape t;
  if (!net_) {
    t.probs = probabilities();
    return t;
  }
  const Matrix eye = Matrix::Identity(static_cast<Eigen::Index>(in_), static_cast<Eigen::Index>(in_));
  t.tape = net_->record(eye);
  t.probs = softmax_columns(logits_offset() + t.tape.output());
  return t;
}

Vector SoftMap::backward(const Tape& tape, const Matrix& dprobs) const {
  if (!net_) return Vector();
  return net_->backward(tape.tape, softmax_backward(tape.probs, dprobs)).params;
}

std::size_t SoftMap::greedy(std::size_t x) const {
  if (!net_) return x;
  const Matrix p = probabilities();
  return core::argmax_lowest(p.col(static_cast<Eigen::Index>(x)).data(), out_);
}

nlohmann::json SoftMap::to_json() const {
  nlohmann::json doc = {{"in", in_}, {"out", out_}, {"identity_logit", identity_logit_}};
  doc["net"] = net_ ? diffnet::to_json(*net_) : nlohmann::json();
  return doc;
}

SoftMap SoftMap::from_json(const nlohmann::json& doc) {
  SoftMap m;
  m.in_ = doc.at("in").get<std::size_t>();
  m.out_ = doc.at("out").get<std::size_t>();
  m.identity_logit_ = doc.at("identity_logit").get<double>();
  if (!doc.at("net").is_null()) m.net_ = diffnet::mlp_from_json(doc.at("net"));
  return m;
}

VectorMap::VectorMap(std::size_t in, std::size_t out, const ArchSpec& arch, std::uint64_t seed)
    : in_(in), out_(out), residual_(in == out) {
  if (arch.identity) {
    if (in != out) throw ConfigurationError("identity-only map needs equal input and output dimensions");
    return;
  }
  net_ = diffnet::Mlp::initialized(arch.dims(in, out), arch.activation, seed);
  if (residual_) net_->zero_output_layer();
}

Matrix VectorMap::forward(const Matrix& x) const {
  if (!net_) return x;
  Matrix y = net_->forward_batch(x);
  if (residual_) y += x;
  return y;
}

VectorMap::Tape VectorMap::record(const Matrix& x) const {
  Tape t;
  if (!net_) {
    t.output = x;
    return t;
  }
  t.tape = net_->record(x);
  t.output = t.tape.output();
  if (residual_) t.output += x;
  return t;
}

diffnet::Gradients VectorMap::backward(const Tape& tape, const Matrix& dy) const {
  if (!net_) return {Vector(), dy};
  auto g = net_->backward(tape.tape, dy);
  if (residual_) g.inputs += dy;
  return g;
}

nlohmann::json VectorMap::to_json() const {
  nlohmann::json doc = {{"in", in_}, {"out", out_}, {"residual", residual_}};
  doc["net"] = net_ ? diffnet::to_json(*net_) : nlohmann::json();
  return doc;
}

VectorMap VectorMap::from_json(const nlohmann::json& doc) {
  VectorMap m;
  m.in_ = doc.at("in").get<std::size_t>();
  m.out_ = doc.at("out").get<std::size_t>();
  m.residual_ = doc.at("residual").get<bool>();
  if (!doc.at("net").is_null()) m.net_ = diffnet::mlp_from_json(doc.at("net"));
  return m;
}

}  // namespace taskred::advest
