#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace taskred::diffnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { kTanh, kRelu };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

// Activations recorded by a batched forward pass. Columns are samples.
struct GradTape {
  std::vector<Matrix> activations;  // activations[0] is the input batch
  std::size_t param_count = 0;

  bool empty() const { return activations.empty(); }
  const Matrix& output() const { return activations.back(); }
};

struct Gradients {
  Vector params;  // d loss / d params, flat, same layout as Mlp::params()
  Matrix inputs;  // d loss / d input batch
};

// Fully connected chain: hidden layers use `activation`, the output layer is
// linear. Per layer the flat parameter vector holds W (out x in, column-major)
// followed by b (out).
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> layer_dims, Activation activation);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static Mlp initialized(std::vector<std::size_t> layer_dims, Activation activation, std::uint64_t seed);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  Activation activation() const { return activation_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::size_t param_count() const { return static_cast<std::size_t>(params_.size()); }
  std::size_t layer_count() const { return dims_.size() - 1; }

  const Vector& params() const { return params_; }
  Vector& params() { return params_; }
  void set_params(const Vector& params);

  // Zeroes the output layer so the net starts as the constant-zero map.
  void zero_output_layer();

  Vector forward(std::span<const double> input) const;
  Matrix forward_batch(const Matrix& inputs) const;
  GradTape record(const Matrix& inputs) const;
  Gradients backward(const GradTape& tape, const Matrix& upstream) const;

  bool operator==(const Mlp& other) const;

 private:
  Eigen::Map<const Matrix> weight(std::size_t layer) const;
  Eigen::Map<const Vector> bias(std::size_t layer) const;
  std::size_t offset(std::size_t layer) const { return offsets_[layer]; }
  void check_input_rows(Eigen::Index rows) const;

  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  Activation activation_ = Activation::kTanh;
  Vector params_;
};

std::size_t param_count_for(const std::vector<std::size_t>& layer_dims);

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

}  // namespace taskred::diffnet
