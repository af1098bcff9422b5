#include "taskcore/task.hpp"

#include <cmath>

#include "common/digest.hpp"
#include "common/error.hpp"

namespace taskred::core {

namespace {

constexpr double kRowTolerance = 1e-12;

std::size_t sample_outcome(const std::vector<Outcome>& row, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (const auto& o : row) {
    acc += o.probability;
    if (u < acc) return o.index;
  }
  // Rounding: fall back to the last outcome with positive mass.
  for (auto it = row.rbegin(); it != row.rend(); ++it) {
    if (it->probability > 0.0) return it->index;
  }
  return row.back().index;
}

void check_row(const std::vector<Outcome>& row, std::size_t bound, const std::string& what) {
  if (row.empty()) throw ConfigurationError(what + " is empty");
  double sum = 0.0;
  for (const auto& o : row) {
    if (o.index >= bound) throw ConfigurationError(what + " references index " + std::to_string(o.index) + " out of range");
    if (!(o.probability >= 0.0)) throw ConfigurationError(what + " has a negative probability");
    sum += o.probability;
  }
  if (std::abs(sum - 1.0) > kRowTolerance) {
    throw ConfigurationError(what + " sums to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

FiniteDynamics::FiniteDynamics(FiniteModel model) : model_(std::move(model)) {}

Point FiniteDynamics::sample_initial(Rng& rng) const { return index_point(sample_outcome(model_.init, rng)); }

Point FiniteDynamics::sample_next(const Point& state, const Point& action, Rng& rng) const {
  return index_point(sample_outcome(model_.next(point_index(state), point_index(action)), rng));
}

Point FiniteDynamics::sample_observation(const Point& state, Rng& rng) const {
  return index_point(sample_outcome(model_.sensor[point_index(state)], rng));
}

double FiniteDynamics::reward(const Point& state, const Point& action) const {
  return model_.reward_of(point_index(state), point_index(action));
}

bool FiniteDynamics::terminal(const Point& state) const { return model_.terminal[point_index(state)]; }

TaskSpec::TaskSpec(std::string name, Space states, Space actions, Space observations,
                   std::shared_ptr<const Dynamics> dynamics, std::size_t horizon, double success_threshold,
                   nlohmann::json parameters)
    : name_(std::move(name)),
      states_(std::move(states)),
      actions_(std::move(actions)),
      observations_(std::move(observations)),
      dynamics_(std::move(dynamics)),
      horizon_(horizon),
      success_threshold_(success_threshold),
      parameters_(std::move(parameters)) {
  if (!dynamics_) throw ConfigurationError("task '" + name_ + "' has no dynamics");
  if (horizon_ < 1) throw ConfigurationError("task horizon must be a positive integer");
  if (!(success_threshold_ > 0.0) || !std::isfinite(success_threshold_)) {
    throw ConfigurationError("success threshold R* must be finite and > 0");
  }
}

TaskSpec TaskSpec::finite(std::string name, FiniteModel model, std::size_t horizon, double success_threshold,
                          nlohmann::json parameters) {
  const std::size_t S = model.state_count, A = model.action_count, O = model.observation_count;
  if (S < 1 || A < 1 || O < 1) throw ConfigurationError("finite task spaces must be non-empty");
  if (model.transition.size() != S * A || model.reward.size() != S * A) {
    throw ConfigurationError("transition/reward tables must have states*actions rows");
  }
  if (model.sensor.size() != S || model.terminal.size() != S) {
    throw ConfigurationError("sensor/terminal tables must have one row per state");
  }
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      check_row(model.next(s, a), S, "transition row (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")");
      const double r = model.reward_of(s, a);
      if (!(r >= 0.0) || !std::isfinite(r)) {
        throw ConfigurationError("reward r(" + std::to_string(s) + ", " + std::to_string(a) + ") must be finite and >= 0");
      }
    }
    check_row(model.sensor[s], O, "sensor row (s=" + std::to_string(s) + ")");
  }
  check_row(model.init, S, "initial distribution");
  auto dyn = std::make_shared<FiniteDynamics>(std::move(model));
  return TaskSpec(std::move(name), Space::finite(S), Space::finite(A), Space::finite(O), std::move(dyn), horizon,
                  success_threshold, std::move(parameters));
}

const FiniteModel& TaskSpec::finite_model() const {
  const auto* m = dynamics_->finite_model();
  if (!m) throw UnsupportedOperation("task '" + name_ + "' is not finite");
  return *m;
}

std::string TaskSpec::digest() const {
  nlohmann::json doc = {{"name", name_},
                        {"parameters", parameters_},
                        {"horizon", horizon_},
                        {"success_threshold", success_threshold_}};
  if (is_finite() && parameters_.empty()) doc["model"] = finite_task_to_json(*this);
  return digest_of(doc);
}

TaskSpec TaskSpec::with_success_threshold(double r_star) const {
  TaskSpec copy = *this;
  if (!(r_star > 0.0) || !std::isfinite(r_star)) throw ConfigurationError("success threshold R* must be finite and > 0");
  copy.success_threshold_ = r_star;
  return copy;
}

namespace {

std::vector<Outcome> outcomes_from_json(const nlohmann::json& row) {
  std::vector<Outcome> out;
  for (const auto& pair : row) out.push_back({pair.at(0).get<std::size_t>(), pair.at(1).get<double>()});
  return out;
}

nlohmann::json outcomes_to_json(const std::vector<Outcome>& row) {
  auto out = nlohmann::json::array();
  for (const auto& o : row) out.push_back({o.index, o.probability});
  return out;
}

}  // namespace

TaskSpec finite_task_from_json(const nlohmann::json& doc) {
  try {
    FiniteModel m;
    m.state_count = doc.at("states").get<std::size_t>();
    m.action_count = doc.at("actions").get<std::size_t>();
    m.observation_count = doc.at("observations").get<std::size_t>();
    const auto& tr = doc.at("transition");
    const auto& rw = doc.at("reward");
    if (tr.size() != m.state_count || rw.size() != m.state_count) {
      throw ConfigurationError("transition and reward need one entry per state");
    }
    for (std::size_t s = 0; s < m.state_count; ++s) {
      if (tr[s].size() != m.action_count || rw[s].size() != m.action_count) {
        throw ConfigurationError("transition and reward need one entry per action for state " + std::to_string(s));
      }
      for (std::size_t a = 0; a < m.action_count; ++a) {
        m.transition.push_back(outcomes_from_json(tr[s][a]));
        m.reward.push_back(rw[s][a].get<double>());
      }
    }
    if (doc.contains("sensor")) {
      for (const auto& row : doc.at("sensor")) m.sensor.push_back(outcomes_from_json(row));
    } else {
      if (m.observation_count != m.state_count) throw ConfigurationError("identity sensor needs observations == states");
      for (std::size_t s = 0; s < m.state_count; ++s) m.sensor.push_back({{s, 1.0}});
    }
    m.init = outcomes_from_json(doc.at("init"));
    if (doc.contains("terminal")) {
      for (const auto& t : doc.at("terminal")) m.terminal.push_back(t.get<bool>());
    } else {
      m.terminal.assign(m.state_count, false);
    }
    const std::string name = doc.value("name", std::string("finite"));
    return TaskSpec::finite(name, std::move(m), doc.at("horizon").get<std::size_t>(),
                            doc.at("success_threshold").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed finite task: ") + e.what());
  }
}

nlohmann::json finite_task_to_json(const TaskSpec& task) {
  const auto& m = task.finite_model();
  nlohmann::json doc;
  doc["env"] = "finite";
  doc["name"] = task.name();
  doc["states"] = m.state_count;
  doc["actions"] = m.action_count;
  doc["observations"] = m.observation_count;
  auto tr = nlohmann::json::array();
  auto rw = nlohmann::json::array();
  for (std::size_t s = 0; s < m.state_count; ++s) {
    auto trow = nlohmann::json::array();
    auto rrow = nlohmann::json::array();
    for (std::size_t a = 0; a < m.action_count; ++a) {
      trow.push_back(outcomes_to_json(m.next(s, a)));
      rrow.push_back(m.reward_of(s, a));
    }
    tr.push_back(trow);
    rw.push_back(rrow);
  }
  doc["transition"] = tr;
  doc["reward"] = rw;
  auto sensor = nlohmann::json::array();
  for (const auto& row : m.sensor) sensor.push_back(outcomes_to_json(row));
  doc["sensor"] = sensor;
  doc["init"] = outcomes_to_json(m.init);
  doc["terminal"] = m.terminal;
  doc["horizon"] = task.horizon();
  doc["success_threshold"] = task.success_threshold();
  return doc;
}

}  // namespace taskred::core
