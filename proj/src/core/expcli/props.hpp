#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expcli/runner.hpp"

namespace taskred::expcli {

struct PropCheck {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct PropsReport {
  std::vector<PropCheck> checks;
  bool all_passed() const;
};

nlohmann::json to_json(const PropsReport& report);

// taskcore, gradients, space-axioms, gridworld-reduction, order-axioms,
// complexity-exact, envs, advest, expcli.
const std::vector<std::string>& props_suites();

// Runs the named suites (all when empty). Unknown names raise ValidationError.
PropsReport run_props(const std::vector<std::string>& suites, const Logger& log = {});

}  // namespace taskred::expcli
