#include "taskcore/policy.hpp"

#include <cmath>

#include "common/error.hpp"

namespace taskred::core {

std::size_t argmax_lowest(const double* values, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Point decode_action(const Space& actions, ActionDecode decode, const Eigen::VectorXd& output) {
  if (decode == ActionDecode::kArgmax) {
    if (!actions.is_finite()) throw ConfigurationError("argmax decoding needs a finite action space");
    if (static_cast<std::size_t>(output.size()) != actions.size()) {
      throw ConfigurationError("argmax head must emit one logit per action");
    }
    return index_point(argmax_lowest(output.data(), actions.size()));
  }
  if (actions.is_finite()) throw ConfigurationError("tanh-scaled decoding needs a box action space");
  if (static_cast<std::size_t>(output.size()) != actions.dims()) {
    throw ConfigurationError("continuous head must emit one mean per action dimension");
  }
  Point a(actions.dims());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double lo = actions.lower()[i], hi = actions.upper()[i];
    a[i] = lo + 0.5 * (std::tanh(output[static_cast<Eigen::Index>(i)]) + 1.0) * (hi - lo);
  }
  return a;
}

Policy Policy::tabular(std::vector<std::size_t> table, std::size_t action_count) {
  if (table.empty()) throw ConfigurationError("tabular policy needs at least one observation");
  if (action_count < 1) throw ConfigurationError("tabular policy needs at least one action");
  for (auto a : table) {
    if (a >= action_count) throw ConfigurationError("tabular policy action " + std::to_string(a) + " out of range");
  }
  return Policy(Tabular{std::move(table), action_count});
}

Policy Policy::neural(diffnet::Mlp net, Space observations, Space actions, ActionDecode decode) {
  if (net.input_dim() != observations.feature_dim()) {
    throw ConfigurationError("policy net input does not match the observation encoding");
  }
  const std::size_t out = decode == ActionDecode::kArgmax ? actions.feature_dim() : actions.dims();
  if (net.output_dim() != out) throw ConfigurationError("policy net output does not match the action head");
  return Policy(Neural{std::move(net), std::move(observations), std::move(actions), decode});
}

Policy Policy::mapped(std::shared_ptr<const PolicyMap> map) {
  if (!map) throw ConfigurationError("null policy map");
  return Policy(std::move(map));
}

Point Policy::act(const Point& observation) const {
  if (const auto* t = as_tabular()) {
    const std::size_t o = point_index(observation);
    if (o >= t->table.size()) throw ConfigurationError("observation index out of range for tabular policy");
    return index_point(t->table[o]);
  }
  if (const auto* n = as_neural()) {
    const Eigen::VectorXd x = n->observations.features(observation);
    return decode_action(n->actions, n->decode, n->net.forward({x.data(), static_cast<std::size_t>(x.size())}));
  }
  return std::get<std::shared_ptr<const PolicyMap>>(kind_)->act(observation);
}

Space Policy::observation_space() const {
  if (const auto* t = as_tabular()) return Space::finite(t->table.size());
  if (const auto* n = as_neural()) return n->observations;
  return std::get<std::shared_ptr<const PolicyMap>>(kind_)->observation_space();
}

Space Policy::action_space() const {
  if (const auto* t = as_tabular()) return Space::finite(t->action_count);
  if (const auto* n = as_neural()) return n->actions;
  return std::get<std::shared_ptr<const PolicyMap>>(kind_)->action_space();
}

std::vector<std::size_t> Policy::action_table() const {
  if (const auto* t = as_tabular()) return t->table;
  const Space obs = observation_space();
  if (!obs.is_finite() || !action_space().is_finite()) {
    throw UnsupportedOperation("action table requires finite observation and action spaces");
  }
  std::vector<std::size_t> table(obs.size());
  for (std::size_t o = 0; o < table.size(); ++o) table[o] = point_index(act(index_point(o)));
  return table;
}

nlohmann::json to_json(const Policy& policy) {
  if (const auto* t = policy.as_tabular()) {
    return {{"kind", "tabular"}, {"table", t->table}, {"action_count", t->action_count}};
  }
  if (const auto* n = policy.as_neural()) {
    return {{"kind", "neural"},
            {"net", diffnet::to_json(n->net)},
            {"observations", to_json(n->observations)},
            {"actions", to_json(n->actions)},
            {"decode", n->decode == ActionDecode::kArgmax ? "argmax" : "tanh_scaled"}};
  }
  throw UnsupportedOperation("composed policies serialize through their parts, not as a single document");
}

Policy policy_from_json(const nlohmann::json& doc) {
  try {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "tabular") {
      return Policy::tabular(doc.at("table").get<std::vector<std::size_t>>(), doc.at("action_count").get<std::size_t>());
    }
    if (kind == "neural") {
      const auto decode = doc.at("decode").get<std::string>();
      if (decode != "argmax" && decode != "tanh_scaled") throw ConfigurationError("unknown action decode '" + decode + "'");
      return Policy::neural(diffnet::mlp_from_json(doc.at("net")), space_from_json(doc.at("observations")),
                            space_from_json(doc.at("actions")),
                            decode == "argmax" ? ActionDecode::kArgmax : ActionDecode::kTanhScaled);
    }
    throw ConfigurationError("unknown policy kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed policy: ") + e.what());
  }
}

}  // namespace taskred::core
