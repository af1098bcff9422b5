#pragma once

#include <string>
#include <vector>

#include "reduction/reduction.hpp"

namespace taskred::complexity {

// Every total function from a domain of `domain` points into `codomain`
// points, in lexicographic order of their tables (so the identity, when the
// sizes match, sits at a fixed position and constant maps come first).
std::vector<reduction::FiniteMap> all_functions(std::size_t domain, std::size_t codomain);

// A small finite pair with a nested choice of spaces: H_small is a subset of
// H_large and G_small of G_large.
struct HandcraftedPair {
  std::string name;
  core::TaskSpec tau1;
  core::TaskSpec tau2;
  reduction::EncoderSpace h_small;
  reduction::DecoderSpace g_small;
  reduction::EncoderSpace h_large;
  reduction::DecoderSpace g_large;
};

std::vector<HandcraftedPair> handcrafted_pairs();

// Two observations, two actions, one step. tau2 pays for either action,
// tau1 only for a = o, so a constant pi2 defeats every (h, g): C = 0.5 with
// all functions as H and G.
HandcraftedPair estimator_oracle_pair();

// One-step contextual bandit: start uniformly in one of rewards.size()
// contexts (observed exactly), act, stop. Reward rewards[c][a].
core::TaskSpec contextual_bandit(const std::string& name, const std::vector<std::vector<double>>& rewards, double r_star);

}  // namespace taskred::complexity
