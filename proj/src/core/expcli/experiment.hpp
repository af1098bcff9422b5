#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advest/config.hpp"
#include "common/error.hpp"
#include "envs/gridworld.hpp"
#include "reduction/reduction.hpp"

namespace taskred::expcli {

enum class Kind { kCheckReduction, kExactComplexity, kEstimate, kAlphaSweep, kModelStudy, kAudit, kCalibrate };

std::string to_string(Kind k);
std::optional<Kind> kind_from_string(const std::string& s);

struct Diagnostic {
  std::string pointer;  // JSON pointer of the offending field, "" for the whole file
  int line = 0;         // 1-based, 0 when unknown
  std::string message;
};

std::string format(const Diagnostic& d, const std::string& origin);

// Thrown by load/parse with every diagnostic found.
class ConfigInvalid : public ValidationError {
 public:
  ConfigInvalid(std::string origin, std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// A task block resolved into a task, plus the gridworld universe when there is one.
struct BuiltTask {
  core::TaskSpec task;
  std::optional<envs::GridUniverse> universe;
  nlohmann::json block;
};

struct Experiment {
  Kind kind = Kind::kEstimate;
  std::string name;
  std::string origin;
  nlohmann::json doc;  // after overrides
  std::string digest;
  std::vector<std::uint64_t> seeds;
  std::size_t workers = 1;
  std::filesystem::path output;
};

// "a.b.c=value": value is parsed as JSON when possible, else taken as a string.
// Dotted segments that are integers index into arrays.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Parses, applies overrides, and validates the whole file (including building
// every task block) before anything is computed. TASKRED_OUTPUT_DIR, when set,
// replaces the parent directory of the output path.
Experiment parse_experiment(const std::string& text, const std::string& origin, const std::vector<std::string>& overrides);
Experiment load_experiment(const std::filesystem::path& path, const std::vector<std::string>& overrides);

// Building blocks shared by the runner. `where` is the JSON pointer of the block.
BuiltTask build_task(const nlohmann::json& block, const std::string& where);
reduction::EncoderSpace build_encoders(const nlohmann::json& block, const BuiltTask& tau1, const BuiltTask& tau2,
                                       const std::string& where);
reduction::DecoderSpace build_decoders(const nlohmann::json& block, const BuiltTask& tau1, const BuiltTask& tau2,
                                       const std::string& where);
std::vector<core::Policy> build_family(const nlohmann::json& block, const BuiltTask& task, const std::string& where);
advest::EstimatorConfig build_estimator(const nlohmann::json& block, const BuiltTask& tau1, const BuiltTask& tau2,
                                        const std::string& where);

// Label for plots: the experiment's "label" key, else "<tau1>/<tau2>".
std::string direction_label(const Experiment& e, const BuiltTask& tau1, const BuiltTask& tau2);

}  // namespace taskred::expcli
