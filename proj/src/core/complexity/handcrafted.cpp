#include "complexity/handcrafted.hpp"

#include <algorithm>

namespace taskred::complexity {

using core::FiniteModel;
using core::TaskSpec;
using reduction::Decoder;
using reduction::DecoderSpace;
using reduction::Encoder;
using reduction::EncoderSpace;
using reduction::FiniteMap;

std::vector<FiniteMap> all_functions(std::size_t domain, std::size_t codomain) {
  std::vector<FiniteMap> out;
  std::vector<std::size_t> table(domain, 0);
  while (true) {
    out.push_back(FiniteMap::from_table(codomain, table));
    std::size_t i = domain;
    while (i > 0 && ++table[i - 1] == codomain) table[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

namespace {

EncoderSpace encoders(const std::vector<FiniteMap>& maps) {
  std::vector<Encoder> m;
  for (const auto& f : maps) m.push_back(Encoder::tabular(f));
  return EncoderSpace::explicit_list(std::move(m));
}

DecoderSpace decoders(const std::vector<FiniteMap>& maps) {
  std::vector<Decoder> m;
  for (const auto& f : maps) m.push_back(Decoder::tabular(f));
  return DecoderSpace::explicit_list(std::move(m));
}

FiniteModel blank(std::size_t states, std::size_t actions, std::size_t observations) {
  FiniteModel m;
  m.state_count = states;
  m.action_count = actions;
  m.observation_count = observations;
  m.transition.assign(states * actions, {});
  m.reward.assign(states * actions, 0.0);
  m.sensor.assign(states, {});
  m.terminal.assign(states, false);
  return m;
}

// Two-state flip chain over `horizon` steps; reward 1 when the action is in
// paid[s]. The state is observed through a channel that reports it correctly
// with probability `accuracy`.
TaskSpec flip_chain(const std::string& name, std::size_t actions, const std::vector<std::vector<std::size_t>>& paid,
                    std::size_t horizon, double accuracy) {
  auto m = blank(2, actions, 2);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t a = 0; a < actions; ++a) {
      m.transition[s * actions + a] = {{1 - s, 1.0}};
      if (std::find(paid[s].begin(), paid[s].end(), a) != paid[s].end()) m.reward[s * actions + a] = 1.0;
    }
    if (accuracy >= 1.0) {
      m.sensor[s] = {{s, 1.0}};
    } else {
      m.sensor[s] = {{s, accuracy}, {1 - s, 1.0 - accuracy}};
    }
  }
  m.init = {{0, 0.5}, {1, 0.5}};
  return TaskSpec::finite(name, m, horizon, static_cast<double>(horizon));
}

}  // namespace

TaskSpec contextual_bandit(const std::string& name, const std::vector<std::vector<double>>& rewards, double r_star) {
  const std::size_t contexts = rewards.size(), actions = rewards.front().size();
  auto m = blank(contexts + 1, actions, contexts);
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

HandcraftedPair estimator_oracle_pair() {
  const auto all = all_functions(2, 2);
  return {"match-vs-any",
          contextual_bandit("match", {{1, 0}, {0, 1}}, 1.0),
          contextual_bandit("any", {{1, 1}, {1, 1}}, 1.0),
          encoders({FiniteMap::identity(2)}),
          decoders({FiniteMap::identity(2)}),
          encoders(all),
          decoders(all)};
}

std::vector<HandcraftedPair> handcrafted_pairs() {
  std::vector<HandcraftedPair> pairs;
  const auto id1 = FiniteMap::identity(1), id2 = FiniteMap::identity(2), id3 = FiniteMap::identity(3);
  const auto swap2 = FiniteMap::from_table(2, {1, 0});

  {
    const auto t = contextual_bandit("match", {{1, 0}, {0, 1}}, 1.0);
    pairs.push_back({"self", t, t, encoders({id2}), decoders({id2}), encoders(all_functions(2, 2)), decoders(all_functions(2, 2))});
  }
  pairs.push_back({"opposite-actions", contextual_bandit("wants-1", {{0, 1}}, 1.0), contextual_bandit("wants-0", {{1, 0}}, 1.0),
                   encoders({id1}), decoders({id2}), encoders({id1}), decoders(all_functions(2, 2))});
  pairs.push_back(estimator_oracle_pair());
  pairs.push_back({"noisy-sensor", flip_chain("noisy", 2, {{0}, {1}}, 1, 0.8), flip_chain("clean", 2, {{0}, {1}}, 1, 1.0),
                   encoders({id2}), decoders({swap2}), encoders({id2}), decoders({swap2, id2})});
  pairs.push_back({"wildcard-action", flip_chain("two-action", 2, {{0}, {1}}, 3, 1.0),
                   flip_chain("wildcard", 3, {{0, 2}, {1, 2}}, 3, 1.0), encoders({id2}),
                   decoders({FiniteMap::from_table(2, {0, 1, 0})}), encoders(all_functions(2, 2)), decoders(all_functions(3, 2))});
  {
    auto shifted = [](std::size_t k) {
      std::vector<std::vector<double>> r(2, std::vector<double>(3, 0.0));
      for (std::size_t c = 0; c < 2; ++c) r[c][(c + k) % 3] = 1.0;
      return contextual_bandit("shift-" + std::to_string(k), r, 1.0);
    };
    std::vector<FiniteMap> shifts;
    for (std::size_t k = 0; k < 3; ++k) shifts.push_back(FiniteMap::from_table(3, {k % 3, (k + 1) % 3, (k + 2) % 3}));
    pairs.push_back({"relabeled-actions", shifted(0), shifted(1), encoders({id2}), decoders({id3}), encoders({id2}), decoders(shifts)});
  }
  return pairs;
}

}  // namespace taskred::complexity
