#include "taskcore/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace taskred::core {

void check_compatible(const TaskSpec& task, const Policy& policy) {
  if (!(policy.observation_space() == task.observations())) {
    throw ConfigurationError("policy observation space does not match task '" + task.name() + "'");
  }
  if (!(policy.action_space() == task.actions())) {
    throw ConfigurationError("policy action space does not match task '" + task.name() + "'");
  }
}

Trajectory rollout(const TaskSpec& task, const Policy& policy, std::uint64_t seed) {
  check_compatible(task, policy);
  Rng rng(seed);
  const Dynamics& dyn = task.dynamics();
  Trajectory traj;
  traj.reserve(task.horizon());
  Point s = dyn.sample_initial(rng);
  for (std::size_t t = 0; t < task.horizon(); ++t) {
    if (dyn.terminal(s)) break;
    Step step;
    step.observation = dyn.sample_observation(s, rng);
    step.action = policy.act(step.observation);
    step.reward = dyn.reward(s, step.action);
    Point next = dyn.sample_next(s, step.action, rng);
    step.state = std::move(s);
    traj.push_back(std::move(step));
    s = std::move(next);
  }
  return traj;
}

double trajectory_return(const Trajectory& trajectory) {
  double sum = 0.0;
  for (const auto& s : trajectory) sum += s.reward;
  return sum;
}

ReturnEstimate estimate_return(const TaskSpec& task, const Policy& policy, std::size_t n_rollouts, std::uint64_t seed) {
  if (n_rollouts < 1) throw ConfigurationError("estimate_return needs at least one rollout");
  check_compatible(task, policy);
  const double r_star = task.success_threshold();
  double sum = 0.0, sum_sq = 0.0;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < n_rollouts; ++i) {
    const double g = trajectory_return(rollout(task, policy, mix_seed(seed, i)));
    sum += g;
    sum_sq += g * g;
    if (g > r_star) ++clipped;
  }
  const double n = static_cast<double>(n_rollouts);
  const double mean = sum / n;
  ReturnEstimate est;
  est.rollouts = n_rollouts;
  est.value = std::min(mean, r_star);
  if (n_rollouts > 1) {
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    est.standard_error = std::sqrt(var / n);
  }
  est.clipped_fraction = static_cast<double>(clipped) / n;
  return est;
}

double exact_return_for_table(const TaskSpec& task, std::span<const std::size_t> action_of_observation) {
  if (!task.is_finite()) throw UnsupportedOperation("exact_return requires a finite task; '" + task.name() + "' is continuous");
  const FiniteModel& m = task.finite_model();
  if (action_of_observation.size() != m.observation_count) {
    throw ConfigurationError("policy table size does not match the task's observation count");
  }
  for (auto a : action_of_observation) {
    if (a >= m.action_count) throw ConfigurationError("policy emits an action outside the task's action space");
  }
  std::vector<double> next_value(m.state_count, 0.0), value(m.state_count, 0.0);
  for (std::size_t t = task.horizon(); t-- > 0;) {
    for (std::size_t s = 0; s < m.state_count; ++s) {
      if (m.terminal[s]) {
        value[s] = 0.0;
        continue;
      }
      double v = 0.0;
      for (const auto& obs : m.sensor[s]) {
        const std::size_t a = action_of_observation[obs.index];
        double q = m.reward_of(s, a);
        for (const auto& nx : m.next(s, a)) q += nx.probability * next_value[nx.index];
        v += obs.probability * q;
      }
      value[s] = v;
    }
    std::swap(value, next_value);
  }
  double expected = 0.0;
  for (const auto& init : m.init) expected += init.probability * next_value[init.index];
  return std::min(expected, task.success_threshold());
}

double exact_return(const TaskSpec& task, const Policy& policy) {
  if (!task.is_finite()) throw UnsupportedOperation("exact_return requires a finite task; '" + task.name() + "' is continuous");
  check_compatible(task, policy);
  const auto table = policy.action_table();
  return exact_return_for_table(task, table);
}

bool is_admissible(const TaskSpec& task, const Policy& policy, const Evaluation& eval) {
  if (const auto* s = std::get_if<SampledEvaluation>(&eval)) {
    if (s->tolerance < 0.0) throw ConfigurationError("admissibility tolerance must be >= 0");
    const auto est = estimate_return(task, policy, s->rollouts, s->seed);
    return est.value >= (1.0 - s->tolerance) * task.success_threshold();
  }
  return std::abs(exact_return(task, policy) - task.success_threshold()) <= kExactTolerance;
}

std::vector<Policy> enumerate_admissible(const TaskSpec& task, std::span<const Policy> candidates) {
  std::vector<Policy> out;
  for (const auto& p : candidates) {
    if (is_admissible(task, p, ExactEvaluation{})) out.push_back(p);
  }
  return out;
}

std::size_t tabular_policy_count(std::size_t actions, std::size_t observations, std::size_t cap) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < observations; ++i) {
    if (count > cap / actions) return cap + 1;
    count *= actions;
  }
  return count;
}

std::vector<Policy> enumerate_admissible(const TaskSpec& task) {
  if (!task.is_finite()) throw UnsupportedOperation("full policy enumeration requires a finite task");
  const FiniteModel& m = task.finite_model();
  const std::size_t count = tabular_policy_count(m.action_count, m.observation_count);
  if (count > kEnumerationCap) {
    throw PreconditionViolation("full enumeration of " + std::to_string(m.action_count) + "^" +
                                std::to_string(m.observation_count) + " tabular policies exceeds the cap of " +
                                std::to_string(kEnumerationCap) + "; supply an explicit policy family");
  }
  std::vector<Policy> out;
  std::vector<std::size_t> table(m.observation_count, 0);
  for (std::size_t k = 0; k < count; ++k) {
    if (std::abs(exact_return_for_table(task, table) - task.success_threshold()) <= kExactTolerance) {
      out.push_back(Policy::tabular(table, m.action_count));
    }
    // Odometer increment with the last observation least significant.
    for (std::size_t i = m.observation_count; i-- > 0;) {
      if (++table[i] < m.action_count) break;
      table[i] = 0;
    }
  }
  return out;
}

}  // namespace taskred::core
