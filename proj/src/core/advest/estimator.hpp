#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advest/config.hpp"
#include "advest/game.hpp"
#include "complexity/complexity.hpp"

namespace taskred::advest {

struct CurvePoint {
  std::size_t iter = 0;
  double r2 = 0.0;           // R2(pi2)
  double r1_composed = 0.0;  // R1(g o pi2 o h)
  double c1 = 0.0;
  double c2 = 0.0;
};

// "iter,R2,R1_composed,c1,c2" header plus one row per evaluation.
std::string curve_csv(const std::vector<CurvePoint>& curve);

struct EstimateOutcome {
  complexity::ComplexityResult result;
  std::vector<CurvePoint> curve;
  nlohmann::json checkpoint;
  bool converged = false;
};

// Runs the alternating loop until converged with an admissible pi2, or max_iters.
EstimateOutcome run_game(Game& game, const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config);

// Discrete actions (Q-learning loss).
EstimateOutcome estimate_alg1(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config);
// Box actions (actor-critic).
EstimateOutcome estimate_alg2(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config);
// Picks alg1 or alg2 from the action spaces.
EstimateOutcome estimate(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config);

std::unique_ptr<Game> make_game(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config);

// C~ = 1 - R1(composition) / R1*, re-evaluated from a checkpoint.
core::ReturnEstimate recompute_from_checkpoint(const core::TaskSpec& tau1, const nlohmann::json& checkpoint,
                                              std::size_t rollouts, std::uint64_t seed);

std::string estimator_digest(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config);

struct SweepEntry {
  double alpha = 0.0;
  std::vector<complexity::ComplexityResult> runs;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
  bool all_admissible = false;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::optional<std::size_t> selected;  // index of the largest alpha with every seed admissible
  bool none_admissible() const { return !selected.has_value(); }
};

nlohmann::json to_json(const SweepResult& s);

// Seeds are config.seed + 0 .. seeds - 1. `on_run` sees every finished run.
using RunCallback = std::function<void(const EstimateOutcome&)>;
SweepResult alpha_sweep(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const std::vector<double>& alphas,
                        const EstimatorConfig& base, std::size_t seeds, const RunCallback& on_run = {});

// Selection rule alone, for replaying stored sweeps.
std::optional<std::size_t> select_alpha(const std::vector<SweepEntry>& entries);

struct StudyCell {
  std::string space;  // "H" or "G"
  int depth = 0;      // hidden layers, -1 for identity-only
  std::vector<complexity::ComplexityResult> runs;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t admissible = 0;
};

nlohmann::json to_json(const StudyCell& c);

// Varies H with G fixed at config.decoder, then G with H fixed at config.encoder.
std::vector<StudyCell> model_complexity_study(const core::TaskSpec& tau1, const core::TaskSpec& tau2,
                                              const std::vector<ArchSpec>& h_variants,
                                              const std::vector<ArchSpec>& g_variants, const EstimatorConfig& config,
                                              std::size_t seeds, const RunCallback& on_run = {});

struct TrainedPolicy {
  core::Policy policy;
  core::ReturnEstimate estimate;
};

// Trains pi on one task alone (the game with the tau1 player switched off).
TrainedPolicy train_single(const core::TaskSpec& task, const EstimatorConfig& config);

struct Calibration {
  core::TaskSpec task;
  double r_star = 0.0;
  double trained_return = 0.0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const Calibration& c);

// R* = 0.95 x the individually trained policy's return. Throws TrainingError
// when that return does not exceed `floor`.
Calibration calibrate_success_threshold(const core::TaskSpec& task, const EstimatorConfig& config, double floor);

inline constexpr double kCalibrationFactor = 0.95;

// mean and sample standard deviation (0 when n < 2).
std::pair<double, double> mean_std(const std::vector<double>& xs);

}  // namespace taskred::advest
