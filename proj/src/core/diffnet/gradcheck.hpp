#pragma once

#include <cstdint>
#include <vector>

#include "diffnet/mlp.hpp"

namespace taskred::diffnet {

struct GradCheck {
  double max_relative_error = 0.0;  // over parameters and inputs
  std::size_t entries = 0;
  std::size_t skipped = 0;  // relu entries whose probes crossed a kink
};

// Central differences (step h) of <upstream, f(x)> against backward(). The
// relative error of each entry is |fd - g| / max(|fd|, |g|, floor). For relu
// nets, entries whose probes change any hidden unit's sign are skipped.
GradCheck gradient_check(const Mlp& net, const Matrix& x, const Matrix& upstream, double h = 1e-5, double floor = 1e-6);

// `cases` random nets (seeded init), inputs and upstream gradients.
GradCheck random_gradient_checks(const std::vector<std::size_t>& layer_dims, Activation activation, std::size_t cases,
                                 std::uint64_t seed, std::size_t batch = 3);

}  // namespace taskred::diffnet
