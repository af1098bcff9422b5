#include "advest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "advest/composition.hpp"
#include "advest/continuous_game.hpp"
#include "advest/discrete_game.hpp"
#include "common/digest.hpp"
#include "common/error.hpp"

namespace taskred::advest {

namespace {

enum Stream : std::uint64_t { kEval = 101, kFinal1, kFinal2, kCalibrate };

double epsilon_at(const EstimatorConfig& c, std::size_t it, std::size_t total) {
  const double span = std::max(1.0, c.eps_fraction * static_cast<double>(total));
  const double frac = std::min(1.0, static_cast<double>(it) / span);
  return c.eps_start + frac * (c.eps_end - c.eps_start);
}

double window_mean(const std::vector<double>& xs, std::size_t end, std::size_t window) {
  return std::accumulate(xs.begin() + static_cast<std::ptrdiff_t>(end - window), xs.begin() + static_cast<std::ptrdiff_t>(end),
                         0.0) /
         static_cast<double>(window);
}

bool settled(const std::vector<double>& xs, std::size_t window, double threshold) {
  if (xs.size() < 2 * window) return false;
  return std::abs(window_mean(xs, xs.size(), window) - window_mean(xs, xs.size() - window, window)) < threshold;
}

}  // namespace

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "iter,R2,R1_composed,c1,c2\n";
  for (const auto& p : curve) out << p.iter << ',' << p.r2 << ',' << p.r1_composed << ',' << p.c1 << ',' << p.c2 << '\n';
  return out.str();
}

std::string estimator_digest(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config) {
  return digest_of(nlohmann::json{{"tau1", tau1.digest()}, {"tau2", tau2.digest()}, {"estimator", to_json(config)}});
}

std::unique_ptr<Game> make_game(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config) {
  if (tau1.actions().is_finite() && tau2.actions().is_finite()) return std::make_unique<DiscreteGame>(tau1, tau2, config);
  if (!tau1.actions().is_finite() && !tau2.actions().is_finite()) {
    return std::make_unique<ContinuousGame>(tau1, tau2, config);
  }
  throw ConfigurationError("both tasks need finite actions (Q-learning) or box actions (actor-critic)");
}

EstimateOutcome run_game(Game& game, const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& c) {
  EstimateOutcome out;
  if (c.pretrain_iters > 0) {
    game.set_single_task(true);
    for (std::size_t it = 0; it < c.pretrain_iters; ++it) {
      game.collect(epsilon_at(c, it, c.pretrain_iters));
      game.update_critics();
      game.step1();
      game.step2();
    }
    game.set_single_task(false);
  }
  const double r1_star = tau1.success_threshold(), r2_star = tau2.success_threshold();
  std::vector<double> r1s, r2s;
  std::size_t it = 0;
  for (; it < c.max_iters; ++it) {
    game.collect(epsilon_at(c, it, c.max_iters));
    game.update_critics();
    const double c1 = game.step1();
    const double c2 = game.step2();
    if ((it + 1) % c.eval_every != 0) continue;
    const std::uint64_t s = mix_seed(mix_seed(c.seed, kEval), it);
    CurvePoint p{it + 1, core::estimate_return(tau2, game.inner_policy(), c.eval_rollouts, s).value,
                 core::estimate_return(tau1, game.composed_policy(), c.eval_rollouts, s).value, c1, c2};
    out.curve.push_back(p);
    r1s.push_back(p.r1_composed);
    r2s.push_back(p.r2);
    const bool admissible = p.r2 >= (1.0 - c.admissibility_tolerance) * r2_star;
    if (admissible && settled(r2s, c.convergence_window, c.convergence_threshold * r2_star) &&
        settled(r1s, c.convergence_window, c.convergence_threshold * r1_star)) {
      out.converged = true;
      ++it;
      break;
    }
  }
  const auto composed = core::estimate_return(tau1, game.composed_policy(), c.eval_rollouts, mix_seed(c.seed, kFinal1));
  const auto inner = core::estimate_return(tau2, game.inner_policy(), c.eval_rollouts, mix_seed(c.seed, kFinal2));
  auto& r = out.result;
  r.method = complexity::Method::kAdversarial;
  r.value = std::clamp(1.0 - composed.value / r1_star, 0.0, 1.0);
  r.alpha = c.alpha;
  r.seed = c.seed;
  r.inner_admissible = inner.value >= (1.0 - c.admissibility_tolerance) * r2_star;
  r.config_digest = estimator_digest(tau1, tau2, c);
  r.tau1_digest = tau1.digest();
  r.tau2_digest = tau2.digest();
  r.composed_return = composed.value;
  r.composed_stderr = composed.standard_error;
  r.inner_return = inner.value;
  r.iterations = it;
  out.checkpoint = game.checkpoint();
  r.attaining_policy = core::to_json(game.inner_policy());
  return out;
}

EstimateOutcome estimate_alg1(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config) {
  DiscreteGame game(tau1, tau2, config);
  return run_game(game, tau1, tau2, config);
}

EstimateOutcome estimate_alg2(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config) {
  ContinuousGame game(tau1, tau2, config);
  return run_game(game, tau1, tau2, config);
}

EstimateOutcome estimate(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EstimatorConfig& config) {
  auto game = make_game(tau1, tau2, config);
  return run_game(*game, tau1, tau2, config);
}

core::ReturnEstimate recompute_from_checkpoint(const core::TaskSpec& tau1, const nlohmann::json& checkpoint,
                                              std::size_t rollouts, std::uint64_t seed) {
  return core::estimate_return(tau1, composition_from_json(checkpoint.at("composition")), rollouts, seed);
}

std::optional<std::size_t> select_alpha(const std::vector<SweepEntry>& entries) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].all_admissible && (!best || entries[i].alpha >= entries[*best].alpha)) best = i;
  }
  return best;
}

nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json doc = {{"entries", nlohmann::json::array()}, {"none_admissible", s.none_admissible()}};
  for (const auto& e : s.entries) {
    doc["entries"].push_back({{"alpha", e.alpha}, {"mean_C", e.mean}, {"std_C", e.stddev}, {"all_admissible", e.all_admissible},
                              {"runs", e.runs.size()}});
  }
  if (s.selected) doc["selected_alpha"] = s.entries[*s.selected].alpha;
  return doc;
}

SweepResult alpha_sweep(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const std::vector<double>& alphas,
                        const EstimatorConfig& base, std::size_t seeds, const RunCallback& on_run) {
  if (alphas.empty()) throw ConfigurationError("alpha sweep needs at least one alpha");
  if (!std::is_sorted(alphas.begin(), alphas.end())) throw ConfigurationError("alpha sweep values must be sorted ascending");
  if (seeds == 0) throw ConfigurationError("alpha sweep needs at least one seed");
  SweepResult sweep;
  for (double alpha : alphas) {
    SweepEntry entry;
    entry.alpha = alpha;
    entry.all_admissible = true;
    std::vector<double> values;
    for (std::size_t k = 0; k < seeds; ++k) {
      EstimatorConfig c = base;
      c.alpha = alpha;
      c.seed = base.seed + k;
      auto outcome = estimate(tau1, tau2, c);
      if (on_run) on_run(outcome);
      entry.all_admissible = entry.all_admissible && outcome.result.inner_admissible;
      values.push_back(outcome.result.value);
      entry.runs.push_back(std::move(outcome.result));
    }
    std::tie(entry.mean, entry.stddev) = mean_std(values);
    sweep.entries.push_back(std::move(entry));
  }
  sweep.selected = select_alpha(sweep.entries);
  return sweep;
}

nlohmann::json to_json(const StudyCell& c) {
  return {{"space", c.space}, {"depth", c.depth}, {"mean_C", c.mean}, {"std_C", c.stddev}, {"n", c.runs.size()},
          {"admissible", c.admissible}};
}

std::vector<StudyCell> model_complexity_study(const core::TaskSpec& tau1, const core::TaskSpec& tau2,
                                              const std::vector<ArchSpec>& h_variants,
                                              const std::vector<ArchSpec>& g_variants, const EstimatorConfig& config,
                                              std::size_t seeds, const RunCallback& on_run) {
  std::vector<StudyCell> cells;
  auto run_cell = [&](const std::string& space, const ArchSpec& arch) {
    StudyCell cell;
    cell.space = space;
    cell.depth = arch.depth();
    std::vector<double> values;
    for (std::size_t k = 0; k < seeds; ++k) {
      EstimatorConfig c = config;
      (space == "H" ? c.encoder : c.decoder) = arch;
      c.seed = config.seed + k;
      auto outcome = estimate(tau1, tau2, c);
      if (on_run) on_run(outcome);
      if (outcome.result.inner_admissible) ++cell.admissible;
      values.push_back(outcome.result.value);
      cell.runs.push_back(std::move(outcome.result));
    }
    std::tie(cell.mean, cell.stddev) = mean_std(values);
    cells.push_back(std::move(cell));
  };
  for (const auto& a : h_variants) run_cell("H", a);
  for (const auto& a : g_variants) run_cell("G", a);
  return cells;
}

TrainedPolicy train_single(const core::TaskSpec& task, const EstimatorConfig& config) {
  auto game = make_game(task, task, config);
  game->set_single_task(true);
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    game->collect(epsilon_at(config, it, config.max_iters));
    game->update_critics();
    game->step1();
    game->step2();
  }
  auto policy = game->inner_policy();
  auto est = core::estimate_return(task, policy, config.eval_rollouts, mix_seed(config.seed, kCalibrate));
  return {std::move(policy), est};
}

nlohmann::json to_json(const Calibration& c) {
  return {{"task", c.task.name()}, {"digest", c.task.digest()}, {"r_star", c.r_star}, {"trained_return", c.trained_return},
          {"seed", c.seed}};
}

Calibration calibrate_success_threshold(const core::TaskSpec& task, const EstimatorConfig& config, double floor) {
  // Unclipped by any earlier threshold: per-step rewards are at most 1.
  const auto trained = train_single(task.with_success_threshold(static_cast<double>(task.horizon())), config);
  if (!(trained.estimate.value > floor)) {
    throw TrainingError("calibration failed on '" + task.name() + "': trained return " +
                        std::to_string(trained.estimate.value) + " does not exceed the floor " + std::to_string(floor));
  }
  const double r_star = kCalibrationFactor * trained.estimate.value;
  return {task.with_success_threshold(r_star), r_star, trained.estimate.value, config.seed};
}

}  // namespace taskred::advest
