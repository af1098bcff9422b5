#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "taskcore/policy.hpp"
#include "taskcore/task.hpp"

namespace taskred::core {

struct Step {
  Point state;
  Point observation;
  Point action;
  double reward = 0.0;
};

using Trajectory = std::vector<Step>;

struct ReturnEstimate {
  double value = 0.0;             // min(mean of per-rollout sums, R*)
  std::size_t rollouts = 0;
  double standard_error = 0.0;    // of the unclipped mean
  double clipped_fraction = 0.0;  // share of rollouts whose sum exceeded R*
};

inline constexpr std::size_t kEnumerationCap = 1'000'000;
inline constexpr double kExactTolerance = 1e-10;
inline constexpr double kDefaultAdmissibilityTolerance = 0.05;

// Throws ConfigurationError unless the policy's spaces match the task's.
void check_compatible(const TaskSpec& task, const Policy& policy);

// Runs at most T steps, stopping before the first terminal state.
Trajectory rollout(const TaskSpec& task, const Policy& policy, std::uint64_t seed);

double trajectory_return(const Trajectory& trajectory);

// Rollout i uses the stream mix_seed(seed, i).
ReturnEstimate estimate_return(const TaskSpec& task, const Policy& policy, std::size_t n_rollouts, std::uint64_t seed);

// Exact clipped expected return by backward induction over t = T-1 .. 0.
double exact_return(const TaskSpec& task, const Policy& policy);
double exact_return_for_table(const TaskSpec& task, std::span<const std::size_t> action_of_observation);

struct ExactEvaluation {};
struct SampledEvaluation {
  std::size_t rollouts = 20;
  double tolerance = kDefaultAdmissibilityTolerance;
  std::uint64_t seed = 0;
};
using Evaluation = std::variant<ExactEvaluation, SampledEvaluation>;

bool is_admissible(const TaskSpec& task, const Policy& policy, const Evaluation& eval);

// Filters an explicit family, preserving its order.
std::vector<Policy> enumerate_admissible(const TaskSpec& task, std::span<const Policy> candidates);

// Enumerates all |A|^|O| tables in lexicographic order (observation 0 most
// significant). Refuses above kEnumerationCap.
std::vector<Policy> enumerate_admissible(const TaskSpec& task);

// |A|^|O|, saturating at cap + 1.
std::size_t tabular_policy_count(std::size_t actions, std::size_t observations, std::size_t cap = kEnumerationCap);

}  // namespace taskred::core
