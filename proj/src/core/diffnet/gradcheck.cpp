#include "diffnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "common/rng.hpp"

namespace taskred::diffnet {

namespace {

double rel(double fd, double g, double floor) { return std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), floor}); }

// Sign pattern of the hidden pre-activations; relu is smooth only where it is unchanged.
std::vector<bool> pattern(const Mlp& net, const Matrix& x) {
  std::vector<bool> out;
  if (net.activation() != Activation::kRelu) return out;
  const GradTape tape = net.record(x);
  for (std::size_t l = 1; l + 1 < tape.activations.size(); ++l) {
    for (double v : tape.activations[l].reshaped()) out.push_back(v > 0.0);
  }
  return out;
}

}  // namespace

GradCheck gradient_check(const Mlp& net, const Matrix& x, const Matrix& upstream, double h, double floor) {
  const Gradients grad = net.backward(net.record(x), upstream);
  auto loss = [&](const Mlp& m, const Matrix& in) { return (m.forward_batch(in).array() * upstream.array()).sum(); };
  GradCheck out;
  const std::vector<bool> base = pattern(net, x);
  Mlp probe = net;
  for (Eigen::Index i = 0; i < grad.params.size(); ++i) {
    const double keep = probe.params()[i];
    probe.params()[i] = keep + h;
    const double up = loss(probe, x);
    const bool smooth_up = pattern(probe, x) == base;
    probe.params()[i] = keep - h;
    const double down = loss(probe, x);
    const bool smooth_down = pattern(probe, x) == base;
    probe.params()[i] = keep;
    if (!smooth_up || !smooth_down) {
      ++out.skipped;
      continue;
    }
    out.max_relative_error = std::max(out.max_relative_error, rel((up - down) / (2 * h), grad.params[i], floor));
    ++out.entries;
  }
  Matrix xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double keep = xp.data()[j];
    xp.data()[j] = keep + h;
    const double up = loss(net, xp);
    const bool smooth_up = pattern(net, xp) == base;
    xp.data()[j] = keep - h;
    const double down = loss(net, xp);
    const bool smooth_down = pattern(net, xp) == base;
    xp.data()[j] = keep;
    if (!smooth_up || !smooth_down) {
      ++out.skipped;
      continue;
    }
    out.max_relative_error = std::max(out.max_relative_error, rel((up - down) / (2 * h), grad.inputs.data()[j], floor));
    ++out.entries;
  }
  return out;
}

GradCheck random_gradient_checks(const std::vector<std::size_t>& layer_dims, Activation activation, std::size_t cases,
                                 std::uint64_t seed, std::size_t batch) {
  GradCheck total;
  for (std::size_t k = 0; k < cases; ++k) {
    const std::uint64_t s = mix_seed(seed, k);
    const Mlp net = Mlp::initialized(layer_dims, activation, s);
    Rng rng(mix_seed(s, 1));
    const auto rows = static_cast<Eigen::Index>(layer_dims.front()), outs = static_cast<Eigen::Index>(layer_dims.back());
    const auto cols = static_cast<Eigen::Index>(batch);
    Matrix x(rows, cols), up(outs, cols);
    for (auto& v : x.reshaped()) v = standard_normal(rng);
    for (auto& v : up.reshaped()) v = standard_normal(rng);
    const GradCheck c = gradient_check(net, x, up);
    total.max_relative_error = std::max(total.max_relative_error, c.max_relative_error);
    total.entries += c.entries;
    total.skipped += c.skipped;
  }
  return total;
}

}  // namespace taskred::diffnet
