#pragma once

#include <vector>

#include "taskcore/task.hpp"

namespace fixtures {

using taskred::core::FiniteModel;
using taskred::core::Outcome;
using taskred::core::TaskSpec;

// One observation per state, deterministic identity sensor, no terminals.
inline FiniteModel blank_model(std::size_t states, std::size_t actions) {
  FiniteModel m;
  m.state_count = states;
  m.action_count = actions;
  m.observation_count = states;
  m.transition.assign(states * actions, {});
  m.reward.assign(states * actions, 0.0);
  m.sensor.resize(states);
  for (std::size_t s = 0; s < states; ++s) m.sensor[s] = {{s, 1.0}};
  m.terminal.assign(states, false);
  return m;
}

// A single state looping on itself with reward r for every action.
inline TaskSpec constant_chain(double r, std::size_t horizon, double r_star) {
  auto m = blank_model(1, 1);
  m.transition[0] = {{0, 1.0}};
  m.reward[0] = r;
  m.init = {{0, 1.0}};
  return TaskSpec::finite("chain", m, horizon, r_star);
}

// One-step contextual bandit: start uniformly in one of `contexts` states
// (observed exactly), act, land in an absorbing terminal state. reward(c, a)
// is read from `rewards[c][a]`.
inline TaskSpec bandit(const std::vector<std::vector<double>>& rewards, double r_star, const char* name = "bandit") {
  const std::size_t contexts = rewards.size(), actions = rewards.front().size();
  auto m = blank_model(contexts + 1, actions);
  m.observation_count = contexts;
  for (std::size_t s = 0; s <= contexts; ++s) {
    m.sensor[s] = {{std::min(s, contexts - 1), 1.0}};
    for (std::size_t a = 0; a < actions; ++a) {
      m.transition[s * actions + a] = {{contexts, 1.0}};
      if (s < contexts) m.reward[s * actions + a] = rewards[s][a];
    }
  }
  m.terminal[contexts] = true;
  for (std::size_t c = 0; c < contexts; ++c) m.init.push_back({c, 1.0 / static_cast<double>(contexts)});
  return TaskSpec::finite(name, m, 1, r_star);
}

}  // namespace fixtures
