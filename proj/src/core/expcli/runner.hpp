#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "expcli/experiment.hpp"

namespace taskred::expcli {

using Logger = std::function<void(const std::string&)>;

struct RunReport {
  std::filesystem::path output;
  std::size_t records = 0;
  std::size_t failures = 0;  // error records
  nlohmann::json manifest;
};

// Executes every job of the experiment and writes, under e.output:
//   records.jsonl   one {"schema":1,...} record per result, in job order
//   manifest.json   config digest, config, seeds, version, wall times
//   curves/*.csv, checkpoints/*.json for estimator runs
//   sweep.csv       alpha sweeps only
// Compute errors become error records; the batch continues.
RunReport run_experiment(const Experiment& e, const Logger& log = {});

// Speed-tracker blocks with a "calibrate" entry are replaced by the calibrated
// task; other blocks are built as is.
BuiltTask resolve_task(const nlohmann::json& block, const std::string& where, nlohmann::json* calibration = nullptr);

// File-name-safe form of a label.
std::string file_token(const std::string& label);

}  // namespace taskred::expcli
