#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffnet/mlp.hpp"
#include "taskcore/space.hpp"

namespace taskred::core {

enum class ActionDecode { kArgmax, kTanhScaled };

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_lowest(const double* values, std::size_t n);

// Maps network outputs to an action point in `actions`.
Point decode_action(const Space& actions, ActionDecode decode, const Eigen::VectorXd& output);

// A deterministic observation -> action map implemented outside taskcore
// (e.g. an encoder/policy/decoder composition).
class PolicyMap {
 public:
  virtual ~PolicyMap() = default;
  virtual Point act(const Point& observation) const = 0;
  virtual const Space& observation_space() const = 0;
  virtual const Space& action_space() const = 0;
  virtual nlohmann::json describe() const = 0;
};

// Memoryless deterministic policy pi: O -> A.
class Policy {
 public:
  struct Tabular {
    std::vector<std::size_t> table;  // observation index -> action index
    std::size_t action_count = 0;
  };
  struct Neural {
    diffnet::Mlp net;
    Space observations;
    Space actions;
    ActionDecode decode = ActionDecode::kArgmax;
  };

  static Policy tabular(std::vector<std::size_t> table, std::size_t action_count);
  static Policy neural(diffnet::Mlp net, Space observations, Space actions, ActionDecode decode);
  static Policy mapped(std::shared_ptr<const PolicyMap> map);

  Point act(const Point& observation) const;
  Space observation_space() const;
  Space action_space() const;

  const Tabular* as_tabular() const { return std::get_if<Tabular>(&kind_); }
  const Neural* as_neural() const { return std::get_if<Neural>(&kind_); }

  // Action index for every observation of a finite observation space.
  std::vector<std::size_t> action_table() const;

  // Extensional equality on finite observation spaces (tabular comparison).
  bool same_table(const Policy& other) const { return action_table() == other.action_table(); }

 private:
  using Kind = std::variant<Tabular, Neural, std::shared_ptr<const PolicyMap>>;
  explicit Policy(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

nlohmann::json to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& doc);

}  // namespace taskred::core
