#include "diffnet/mlp.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace taskred::diffnet {

std::string to_string(Activation act) { return act == Activation::kTanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ConfigurationError("unknown activation '" + name + "' (expected tanh or relu)");
}

std::size_t param_count_for(const std::vector<std::size_t>& layer_dims) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) n += (layer_dims[i] + 1) * layer_dims[i + 1];
  return n;
}

Mlp::Mlp(std::vector<std::size_t> layer_dims, Activation activation)
    : dims_(std::move(layer_dims)), activation_(activation) {
  if (dims_.size() < 2) throw ConfigurationError("an MLP needs at least input and output dims");
  for (auto d : dims_) {
    if (d == 0) throw ConfigurationError("MLP layer dims must be positive");
  }
  offsets_.reserve(dims_.size() - 1);
  std::size_t off = 0;
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    offsets_.push_back(off);
    off += (dims_[i] + 1) * dims_[i + 1];
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(off));
}

Mlp Mlp::initialized(std::vector<std::size_t> layer_dims, Activation activation, std::uint64_t seed) {
  Mlp net(std::move(layer_dims), activation);
  Rng rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims_[l]));
    const std::size_t n = (net.dims_[l] + 1) * net.dims_[l + 1];
    for (std::size_t i = 0; i < n; ++i) {
      net.params_[static_cast<Eigen::Index>(net.offsets_[l] + i)] = uniform(rng, -bound, bound);
    }
  }
  return net;
}

void Mlp::set_params(const Vector& params) {
  if (params.size() != params_.size()) throw ConfigurationError("parameter vector length mismatch");
  params_ = params;
}

void Mlp::zero_output_layer() {
  const std::size_t last = layer_count() - 1;
  const std::size_t n = (dims_[last] + 1) * dims_[last + 1];
  params_.segment(static_cast<Eigen::Index>(offsets_[last]), static_cast<Eigen::Index>(n)).setZero();
}

Eigen::Map<const Matrix> Mlp::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(dims_[layer + 1]),
          static_cast<Eigen::Index>(dims_[layer])};
}

Eigen::Map<const Vector> Mlp::bias(std::size_t layer) const {
  return {params_.data() + offsets_[layer] + dims_[layer] * dims_[layer + 1],
          static_cast<Eigen::Index>(dims_[layer + 1])};
}

void Mlp::check_input_rows(Eigen::Index rows) const {
  if (dims_.empty()) throw UsageError("forward on an empty network");
  if (rows != static_cast<Eigen::Index>(dims_.front())) {
    throw ConfigurationError("input dimension " + std::to_string(rows) + " does not match network input " +
                             std::to_string(dims_.front()));
  }
}

namespace {

void activate(Matrix& z, Activation act) {
  if (act == Activation::kTanh) {
    z = z.array().tanh();
  } else {
    z = z.array().max(0.0);
  }
}

}  // namespace

Vector Mlp::forward(std::span<const double> input) const {
  check_input_rows(static_cast<Eigen::Index>(input.size()));
  Matrix x = Eigen::Map<const Matrix>(input.data(), static_cast<Eigen::Index>(input.size()), 1);
  return forward_batch(x).col(0);
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
  check_input_rows(inputs.rows());
  Matrix a = inputs;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Matrix z = weight(l) * a;
    z.colwise() += bias(l);
    if (l + 1 < layer_count()) activate(z, activation_);
    a = std::move(z);
  }
  return a;
}

GradTape Mlp::record(const Matrix& inputs) const {
  check_input_rows(inputs.rows());
  GradTape tape;
  tape.param_count = param_count();
  tape.activations.reserve(layer_count() + 1);
  tape.activations.push_back(inputs);
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Matrix z = weight(l) * tape.activations.back();
    z.colwise() += bias(l);
    if (l + 1 < layer_count()) activate(z, activation_);
    tape.activations.push_back(std::move(z));
  }
  return tape;
}

Gradients Mlp::backward(const GradTape& tape, const Matrix& upstream) const {
  if (tape.empty()) throw UsageError("backward called without a recorded forward pass");
  if (tape.param_count != param_count() || tape.activations.size() != layer_count() + 1) {
    throw UsageError("tape was recorded on a network of a different shape");
  }
  const Matrix& out = tape.output();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw ConfigurationError("upstream gradient shape does not match network output");
  }
  Gradients grads;
  grads.params = Vector::Zero(params_.size());
  Matrix delta = upstream;
  for (std::size_t l = layer_count(); l-- > 0;) {
    const Matrix& a_in = tape.activations[l];
    const auto rows = static_cast<Eigen::Index>(dims_[l + 1]);
    const auto cols = static_cast<Eigen::Index>(dims_[l]);
    Eigen::Map<Matrix> dw(grads.params.data() + offsets_[l], rows, cols);
    Eigen::Map<Vector> db(grads.params.data() + offsets_[l] + dims_[l] * dims_[l + 1], rows);
    dw.noalias() = delta * a_in.transpose();
    db = delta.rowwise().sum();
    Matrix prev = weight(l).transpose() * delta;
    if (l > 0) {
      if (activation_ == Activation::kTanh) {
        prev.array() *= 1.0 - a_in.array().square();
      } else {
        prev.array() *= (a_in.array() > 0.0).cast<double>();
      }
    }
    delta = std::move(prev);
  }
  grads.inputs = std::move(delta);
  return grads;
}

bool Mlp::operator==(const Mlp& other) const {
  return dims_ == other.dims_ && activation_ == other.activation_ && params_ == other.params_;
}

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json doc;
  doc["layer_dims"] = net.layer_dims();
  doc["activation"] = to_string(net.activation());
  doc["params"] = std::vector<double>(net.params().data(), net.params().data() + net.params().size());
  return doc;
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  try {
    Mlp net(doc.at("layer_dims").get<std::vector<std::size_t>>(),
            activation_from_string(doc.at("activation").get<std::string>()));
    const auto params = doc.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count()) {
      throw ConfigurationError("checkpoint has " + std::to_string(params.size()) + " params, architecture needs " +
                               std::to_string(net.param_count()));
    }
    net.set_params(Eigen::Map<const Vector>(params.data(), static_cast<Eigen::Index>(params.size())));
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed network checkpoint: ") + e.what());
  }
}

}  // namespace taskred::diffnet
