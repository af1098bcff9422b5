#include "expcli/props.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "advest/estimator.hpp"
#include "common/rng.hpp"
#include "complexity/complexity.hpp"
#include "complexity/handcrafted.hpp"
#include "diffnet/gradcheck.hpp"
#include "envs/cartpole.hpp"
#include "envs/gridworld.hpp"
#include "envs/speed_tracker.hpp"
#include "expcli/experiment.hpp"
#include "expcli/plot_data.hpp"

namespace taskred::expcli {

using nlohmann::json;
using reduction::DecoderSpace;
using reduction::EncoderSpace;
using reduction::FiniteMap;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

Outcome fail(std::string detail) { return {false, std::move(detail)}; }
Outcome ok(std::string detail = {}) { return {true, std::move(detail)}; }

struct Suite {
  std::string name;
  std::vector<std::pair<std::string, std::function<Outcome()>>> checks;
};

// Independent oracle: every tabular pi2, kept when exactly admissible, then
// every (h, g) table of the given spaces.
double brute_force(const core::TaskSpec& tau1, const core::TaskSpec& tau2, const EncoderSpace& H, const DecoderSpace& G) {
  const auto& m2 = tau2.finite_model();
  double worst = -1.0;
  for (const auto& pi : complexity::all_functions(m2.observation_count, m2.action_count)) {
    if (core::exact_return_for_table(tau2, pi.table) < tau2.success_threshold()) continue;
    double best = 2.0;
    for (const auto& h : H.members()) {
      for (const auto& g : G.members()) {
        std::vector<std::size_t> t(h.table().domain_size);
        for (std::size_t o = 0; o < t.size(); ++o) t[o] = g.table()(pi(h.table()(o)));
        best = std::min(best, 1.0 - core::exact_return_for_table(tau1, t) / tau1.success_threshold());
      }
    }
    worst = std::max(worst, best);
  }
  return worst;
}

struct Grid {
  envs::GridUniverse universe;
  std::vector<core::TaskSpec> tasks;
  std::vector<std::vector<core::Policy>> families;
};

Grid grid(int m, std::size_t random_policies) {
  envs::GridWorldParams p;
  p.n = 2;
  p.m = m;
  Grid g{envs::GridUniverse::build(p, 0), {}, {}};
  for (int d = 0; d < 4; ++d) {
    const auto dir = static_cast<envs::Direction>(d);
    g.tasks.push_back(envs::make_gridworld(g.universe, dir));
    g.families.push_back(envs::gridworld_admissible_family(g.universe, dir, random_policies, 0));
  }
  return g;
}

EncoderSpace identity_h(std::size_t n) { return EncoderSpace::explicit_list({reduction::Encoder::identity(n)}); }
DecoderSpace identity_g(std::size_t n) { return DecoderSpace::explicit_list({reduction::Decoder::identity(n)}); }

DecoderSpace all_decoders(std::size_t n) {
  std::vector<reduction::Decoder> out;
  for (auto& f : complexity::all_functions(n, n)) out.push_back(reduction::Decoder::tabular(std::move(f)));
  return DecoderSpace::explicit_list(std::move(out));
}

EncoderSpace all_encoders(std::size_t n) {
  std::vector<reduction::Encoder> out;
  for (auto& f : complexity::all_functions(n, n)) out.push_back(reduction::Encoder::tabular(std::move(f)));
  return EncoderSpace::explicit_list(std::move(out));
}

Outcome audit_outcome(const reduction::AuditReport& r) {
  std::ostringstream s;
  bool passed = true;
  for (const auto& c : r.checks) {
    if (c.passed) continue;
    passed = false;
    s << c.property << " violated at (";
    for (std::size_t i = 0; i < c.violation.size(); ++i) s << (i ? "," : "") << c.violation[i];
    s << ") ";
  }
  if (passed) s << r.checks.size() << " checks over " << r.reduces.size() << " tasks";
  return {passed, s.str()};
}

class ConstantAction final : public core::PolicyMap {
 public:
  ConstantAction(core::Space obs, core::Space actions, std::size_t a) : obs_(std::move(obs)), actions_(std::move(actions)), a_(a) {}
  core::Point act(const core::Point&) const override { return core::index_point(a_); }
  const core::Space& observation_space() const override { return obs_; }
  const core::Space& action_space() const override { return actions_; }
  json describe() const override { return {{"kind", "constant"}, {"action", a_}}; }

 private:
  core::Space obs_, actions_;
  std::size_t a_;
};

advest::EstimatorConfig small_config(std::uint64_t seed) {
  advest::EstimatorConfig c;
  c.batch_size = 64;
  c.max_iters = 300;
  c.steps_per_iter = 20;
  c.eval_rollouts = 400;
  c.seed = seed;
  return c;
}

Suite taskcore_suite() {
  Suite s{"taskcore", {}};
  s.checks.push_back({"sampled returns agree with exact returns", [] {
    Rng rng(5);
    std::size_t n = 0;
    for (const auto& p : complexity::handcrafted_pairs()) {
      for (const auto* t : {&p.tau1, &p.tau2}) {
        for (const auto& f : complexity::all_functions(t->observations().size(), t->actions().size())) {
          const auto pol = core::Policy::tabular(f.table, t->actions().size());
          const double exact = core::exact_return(*t, pol);
          const auto est = core::estimate_return(*t, pol, 2000, rng());
          const double slack = 4.0 * est.standard_error + 1e-12;
          if (std::abs(est.value - exact) > slack && est.clipped_fraction == 0.0) {
            return fail(t->name() + ": sampled " + std::to_string(est.value) + " vs exact " + std::to_string(exact));
          }
          ++n;
        }
      }
    }
    return ok(std::to_string(n) + " policies");
  }});
  s.checks.push_back({"enumerate_admissible matches filtering every table", [] {
    for (const auto& p : complexity::handcrafted_pairs()) {
      const auto fam = core::enumerate_admissible(p.tau2);
      std::vector<std::vector<std::size_t>> brute;
      for (const auto& f : complexity::all_functions(p.tau2.observations().size(), p.tau2.actions().size())) {
        if (core::exact_return_for_table(p.tau2, f.table) >= p.tau2.success_threshold()) brute.push_back(f.table);
      }
      if (fam.size() != brute.size()) return fail(p.name + ": family sizes differ");
      for (std::size_t i = 0; i < fam.size(); ++i) {
        if (fam[i].action_table() != brute[i]) return fail(p.name + ": order or content differs at " + std::to_string(i));
      }
    }
    return ok();
  }});
  s.checks.push_back({"policies and finite tasks round-trip through JSON", [] {
    for (const auto& p : complexity::handcrafted_pairs()) {
      const auto doc = core::finite_task_to_json(p.tau1);
      if (core::finite_task_from_json(doc).digest() != p.tau1.digest()) return fail(p.name + ": task digest changed");
    }
    const auto net = diffnet::Mlp::initialized({4, 16, 3}, diffnet::Activation::kTanh, 3);
    const auto pol = core::Policy::neural(net, core::Space::box({-1, -1, -1, -1}, {1, 1, 1, 1}), core::Space::finite(3),
                                          core::ActionDecode::kArgmax);
    const auto back = core::policy_from_json(json::parse(core::to_json(pol).dump()));
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      core::Point o{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
      if (pol.act(o) != back.act(o)) return fail("neural policy acts differently after round trip");
    }
    return ok();
  }});
  return s;
}

Suite gradient_suite() {
  Suite s{"gradients", {}};
  const std::vector<std::pair<std::vector<std::size_t>, diffnet::Activation>> archs = {
      {{4, 64, 64, 3}, diffnet::Activation::kTanh}, {{4, 32, 32, 3}, diffnet::Activation::kTanh},
      {{2, 64, 1}, diffnet::Activation::kTanh},     {{6, 64, 64, 1}, diffnet::Activation::kTanh},
      {{4, 32, 32, 3}, diffnet::Activation::kRelu},
  };
  for (const auto& [dims, act] : archs) {
    std::string name = "backward matches central differences, 100 cases, " + diffnet::to_string(act);
    for (std::size_t i = 0; i < dims.size(); ++i) name += (i ? "x" : " ") + std::to_string(dims[i]);
    s.checks.push_back({name, [dims, act] {
      const auto r = diffnet::random_gradient_checks(dims, act, 100, 11);
      std::ostringstream d;
      d << "max relative error " << r.max_relative_error << " over " << r.entries << " entries";
      if (r.skipped) d << " (" << r.skipped << " kink crossings skipped)";
      return Outcome{r.max_relative_error <= 1e-4, d.str()};
    }});
  }
  s.checks.push_back({"checkpoints round-trip bit-exactly", [] {
    const auto net = diffnet::Mlp::initialized({5, 7, 3}, diffnet::Activation::kRelu, 9);
    const auto back = diffnet::mlp_from_json(json::parse(diffnet::to_json(net).dump()));
    return Outcome{back == net, {}};
  }});
  return s;
}

Suite space_suite() {
  Suite s{"space-axioms", {}};
  s.checks.push_back({"full function space on two points contains identity and is closed", [] {
    const auto r = reduction::verify_space_axioms(reduction::SpaceFamily::uniform(2, all_encoders(2), all_decoders(2)));
    return Outcome{r.hypotheses_hold(), std::to_string(r.entries.size()) + " entries"};
  }});
  s.checks.push_back({"rotation spaces contain identity and are closed", [] {
    const auto g = grid(0, 0);
    const auto r = reduction::verify_space_axioms(
        reduction::SpaceFamily::uniform(4, envs::rotation_encoder_space(g.universe), envs::rotation_decoder_space()));
    return Outcome{r.hypotheses_hold(), {}};
  }});
  s.checks.push_back({"a space without identity is flagged and the audit refuses", [] {
    const auto t = complexity::contextual_bandit("b", {{1, 0}}, 1.0);
    const auto G = DecoderSpace::explicit_list({reduction::Decoder::tabular(FiniteMap::from_table(2, {1, 0}))});
    const auto family = reduction::SpaceFamily::uniform(1, identity_h(1), G);
    if (reduction::verify_space_axioms(family).identity_ok) return fail("missing identity not reported");
    try {
      const std::vector<core::TaskSpec> tasks{t};
      reduction::partial_order_audit(tasks, family, {core::enumerate_admissible(t)});
    } catch (const PreconditionViolation&) {
      return ok();
    }
    return fail("audit ran without its hypotheses");
  }});
  s.checks.push_back({"nested and flat compositions agree on every observation", [] {
    const auto g = grid(1, 0);
    const auto h1 = envs::rotation_encoder(g.universe, 1), h2 = envs::rotation_encoder(g.universe, 2);
    const auto g1 = envs::rotation_decoder(1), g2 = envs::rotation_decoder(3);
    const auto& pi = g.families[0].front();
    const auto nested = reduction::compose_policy(g1, reduction::compose_policy(g2, pi, h2), h1);
    const auto flat = reduction::compose_policy(g1.after(g2), pi, h1.then(h2));
    for (std::size_t o = 0; o < g.universe.size(); ++o) {
      if (nested.act(core::index_point(o)) != flat.act(core::index_point(o))) return fail("differ at " + std::to_string(o));
    }
    return ok(std::to_string(g.universe.size()) + " observations");
  }});
  return s;
}

Suite gridworld_suite() {
  Suite s{"gridworld-reduction", {}};
  for (int m : {0, 1}) {
    s.checks.push_back({"east reduces to north with the analytic witness for every policy, m=" + std::to_string(m), [m] {
      const auto g = grid(m, 60);
      const auto& fam = g.families[0];
      if (fam.size() < 50) return fail("family has only " + std::to_string(fam.size()) + " policies");
      const auto H = envs::rotation_encoder_space(g.universe);
      const auto G = envs::rotation_decoder_space();
      const auto v = reduction::check_reduction(g.tasks[1], g.tasks[0], H, G, fam);
      if (!v.holds) return fail("reduction does not hold");
      for (const auto& w : v.witnesses) {
        if (w.encoder != 1 || w.decoder != 1) return fail("policy " + std::to_string(w.policy) + " used another witness");
        const auto composed = reduction::compose_policy(G.members()[w.decoder], fam[w.policy], H.members()[w.encoder]);
        if (!core::is_admissible(g.tasks[1], composed, core::ExactEvaluation{})) return fail("witness not admissible");
      }
      return ok(std::to_string(fam.size()) + " policies, witness (rot90_obs k=1, rot_action_mod4 k=1)");
    }});
  }
  return s;
}

Suite order_suite() {
  Suite s{"order-axioms", {}};
  for (int m : {0, 1}) {
    s.checks.push_back({"four goal-direction gridworld tasks, m=" + std::to_string(m), [m] {
      const auto g = grid(m, 4);
      const auto family =
          reduction::SpaceFamily::uniform(4, envs::rotation_encoder_space(g.universe), envs::rotation_decoder_space());
      const auto r = reduction::partial_order_audit(g.tasks, family, g.families);
      for (const auto& row : r.reduces) {
        if (std::find(row.begin(), row.end(), false) != row.end()) return fail("some pair is not equivalent");
      }
      return audit_outcome(r);
    }});
  }
  s.checks.push_back({"single task with identity spaces", [] {
    const auto t = complexity::contextual_bandit("b", {{1, 0}, {0, 1}}, 1.0);
    const std::vector<core::TaskSpec> tasks{t};
    const auto r = reduction::partial_order_audit(tasks, reduction::SpaceFamily::uniform(1, identity_h(2), identity_g(2)),
                                                  {core::enumerate_admissible(t)});
    if (!r.reduces[0][0]) return fail("task does not reduce to itself");
    return audit_outcome(r);
  }});
  s.checks.push_back({"cyclic relabelings are mutually equivalent", [] {
    std::vector<core::TaskSpec> tasks;
    std::vector<reduction::Decoder> shifts;
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<std::vector<double>> r(2, std::vector<double>(3, 0.0));
      for (std::size_t c = 0; c < 2; ++c) r[c][(c + k) % 3] = 1.0;
      tasks.push_back(complexity::contextual_bandit("shift" + std::to_string(k), r, 1.0));
      shifts.push_back(reduction::Decoder::tabular(FiniteMap::from_table(3, {k % 3, (k + 1) % 3, (k + 2) % 3})));
    }
    std::vector<std::vector<core::Policy>> fams;
    for (const auto& t : tasks) fams.push_back(core::enumerate_admissible(t));
    const auto r = reduction::partial_order_audit(
        tasks, reduction::SpaceFamily::uniform(3, identity_h(2), DecoderSpace::explicit_list(shifts)), fams);
    for (const auto& row : r.reduces) {
      if (std::find(row.begin(), row.end(), false) != row.end()) return fail("some pair is not equivalent");
    }
    return audit_outcome(r);
  }});
  return s;
}

Suite complexity_suite() {
  Suite s{"complexity-exact", {}};
  const auto pairs = std::make_shared<std::vector<complexity::HandcraftedPair>>(complexity::handcrafted_pairs());
  s.checks.push_back({"at least five handcrafted pairs", [pairs] { return Outcome{pairs->size() >= 5, std::to_string(pairs->size())}; }});
  for (std::size_t i = 0; i < pairs->size(); ++i) {
    s.checks.push_back({(*pairs)[i].name + ": oracle, range, nested monotonicity, zero iff reduction", [pairs, i] {
      const auto& p = (*pairs)[i];
      const auto fam = core::enumerate_admissible(p.tau2);
      const auto small = complexity::exact_relative_complexity(p.tau1, p.tau2, p.h_small, p.g_small, fam);
      const auto large = complexity::exact_relative_complexity(p.tau1, p.tau2, p.h_large, p.g_large, fam);
      std::ostringstream d;
      d << "small " << small.value << ", large " << large.value;
      if (small.value != brute_force(p.tau1, p.tau2, p.h_small, p.g_small) ||
          large.value != brute_force(p.tau1, p.tau2, p.h_large, p.g_large)) {
        return fail(d.str() + ": disagrees with brute force");
      }
      for (double v : {small.value, large.value}) {
        if (v < 0.0 || v > 1.0) return fail(d.str() + ": out of [0, 1]");
      }
      if (large.value > small.value) return fail(d.str() + ": larger spaces raised the value");
      for (const auto& [H, G] : {std::pair{&p.h_small, &p.g_small}, std::pair{&p.h_large, &p.g_large}}) {
        const auto r = complexity::consistency_check(p.tau1, p.tau2, *H, *G, fam);
        if (!r.consistent || (r.value == 0.0) != r.reduction_holds) return fail(d.str() + ": zero/reduction mismatch");
      }
      for (const auto* r : {&small, &large}) {
        const auto& [H, G] = r == &small ? std::pair{&p.h_small, &p.g_small} : std::pair{&p.h_large, &p.g_large};
        if (complexity::recompute_exact(p.tau1, *H, *G, fam, *r) != r->value) return fail(d.str() + ": witness recompute differs");
      }
      return ok(d.str());
    }});
  }
  s.checks.push_back({"some pair has value 1 and some value 0", [pairs] {
    bool one = false, zero = false;
    for (const auto& p : *pairs) {
      const auto fam = core::enumerate_admissible(p.tau2);
      for (const auto& [H, G] : {std::pair{&p.h_small, &p.g_small}, std::pair{&p.h_large, &p.g_large}}) {
        const double v = brute_force(p.tau1, p.tau2, *H, *G);
        one = one || v == 1.0;
        zero = zero || v == 0.0;
        if (v != complexity::exact_relative_complexity(p.tau1, p.tau2, *H, *G, fam).value) return fail(p.name);
      }
    }
    return Outcome{one && zero, {}};
  }});
  s.checks.push_back({"gridworld east/north with rotation spaces is zero", [] {
    const auto g = grid(0, 4);
    const auto r = complexity::exact_relative_complexity(g.tasks[1], g.tasks[0], envs::rotation_encoder_space(g.universe),
                                                         envs::rotation_decoder_space(), g.families[0]);
    return Outcome{r.value == 0.0, std::to_string(r.value)};
  }});
  return s;
}

Suite envs_suite() {
  Suite s{"envs", {}};
  s.checks.push_back({"gridworld universes are closed under quarter turns and rebuild identically", [] {
    for (int m : {0, 1}) {
      envs::GridWorldParams p;
      p.n = 2;
      p.m = m;
      const auto a = envs::GridUniverse::build(p, 0), b = envs::GridUniverse::build(p, 0);
      if (a.describe() != b.describe()) return fail("rebuild differs");
      for (int k = 0; k < 4; ++k) {
        const auto h = envs::rotation_observation_map(a, k);
        std::vector<bool> hit(a.size(), false);
        for (auto y : h.table) hit[y] = true;
        if (std::find(hit.begin(), hit.end(), false) != hit.end()) return fail("rotation is not a bijection");
      }
    }
    return ok();
  }});
  s.checks.push_back({"cartpole: passive hang succeeds, passive balance fails", [] {
    const auto up = envs::make_cartpole(envs::GravityDir::kUp), down = envs::make_cartpole(envs::GravityDir::kDown);
    const auto pol = core::Policy::mapped(std::make_shared<ConstantAction>(up.observations(), up.actions(), 0));
    const double r_down = core::estimate_return(down, pol, 8, 1).value, r_up = core::estimate_return(up, pol, 8, 1).value;
    std::ostringstream d;
    d << "down " << r_down << ", up " << r_up;
    return Outcome{r_down == 200.0 && r_up < 100.0, d.str()};
  }});
  s.checks.push_back({"speed tracker reward peaks at the target speed", [] {
    envs::SpeedTrackParams p;
    return Outcome{envs::speed_reward(p.target_speed, 0.0, p) == 1.0 && envs::speed_reward(p.target_speed + 0.5, 0.0, p) < 1.0, {}};
  }});
  return s;
}

Suite advest_suite() {
  Suite s{"advest", {}};
  s.checks.push_back({"estimator within 0.1 of the exact value on at least 4 of 5 seeds", [] {
    const auto pair = complexity::estimator_oracle_pair();
    const double exact = complexity::exact_relative_complexity(pair.tau1, pair.tau2, pair.h_large, pair.g_large,
                                                               core::enumerate_admissible(pair.tau2))
                             .value;
    int close = 0;
    std::ostringstream d;
    d << "exact " << exact << ", estimates";
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto out = advest::estimate(pair.tau1, pair.tau2, small_config(seed));
      d << ' ' << out.result.value;
      if (std::abs(out.result.value - exact) <= 0.1 && out.result.inner_admissible) ++close;
    }
    return Outcome{close >= 4, d.str()};
  }});
  s.checks.push_back({"self-pair without an adversary stays near zero", [] {
    const auto t = complexity::contextual_bandit("match", {{1, 0}, {0, 1}}, 1.0);
    auto c = small_config(3);
    c.alpha = 0.0;
    const auto out = advest::estimate(t, t, c);
    return Outcome{out.result.value <= 0.1, std::to_string(out.result.value)};
  }});
  s.checks.push_back({"identical seeds reproduce records and checkpoints", [] {
    const auto pair = complexity::estimator_oracle_pair();
    auto c = small_config(7);
    c.max_iters = 60;
    const auto a = advest::estimate(pair.tau1, pair.tau2, c), b = advest::estimate(pair.tau1, pair.tau2, c);
    return Outcome{complexity::to_json(a.result).dump() == complexity::to_json(b.result).dump() &&
                       advest::curve_csv(a.curve) == advest::curve_csv(b.curve) && a.checkpoint == b.checkpoint,
                   {}};
  }});
  s.checks.push_back({"checkpoint recompute stays within two standard errors", [] {
    const auto pair = complexity::estimator_oracle_pair();
    const auto c = small_config(1);
    const auto out = advest::estimate(pair.tau1, pair.tau2, c);
    const auto re = advest::recompute_from_checkpoint(pair.tau1, out.checkpoint, c.eval_rollouts, 99);
    const double value = std::clamp(1.0 - re.value / pair.tau1.success_threshold(), 0.0, 1.0);
    const double slack = 2.0 * std::max(re.standard_error, *out.result.composed_stderr) / pair.tau1.success_threshold();
    return Outcome{std::abs(value - out.result.value) <= slack + 1e-12,
                   std::to_string(value) + " vs " + std::to_string(out.result.value)};
  }});
  return s;
}

Suite expcli_suite() {
  Suite s{"expcli", {}};
  s.checks.push_back({"result records round-trip", [] {
    const auto pair = complexity::estimator_oracle_pair();
    const auto r = complexity::exact_relative_complexity(pair.tau1, pair.tau2, pair.h_large, pair.g_large,
                                                         core::enumerate_admissible(pair.tau2));
    const auto doc = complexity::to_json(r);
    return Outcome{complexity::to_json(complexity::complexity_result_from_json(json::parse(doc.dump()))) == doc, {}};
  }});
  s.checks.push_back({"invalid configs name the field and line", [] {
    const std::string text = "{\n  \"kind\": \"estimate\",\n  \"tau1\": {\"env\": \"handcrafted\", \"pair\": \"self\", \"side\": \"tau1\"},\n"
                             "  \"tau2\": {\"env\": \"handcrafted\", \"pair\": \"self\", \"side\": \"tau2\"},\n"
                             "  \"estimator\": {\n    \"lr_policy\": -1\n  }\n}\n";
    try {
      parse_experiment(text, "inline.json", {});
    } catch (const ConfigInvalid& e) {
      for (const auto& d : e.diagnostics()) {
        if (d.pointer == "/estimator/lr_policy" && d.line == 6) return ok(format(d, "inline.json"));
      }
      return fail(e.what());
    }
    return fail("accepted a negative learning rate");
  }});
  s.checks.push_back({"overrides set nested keys", [] {
    json doc = {{"estimator", {{"alpha", 1.0}}}, {"seeds", {0, 1}}};
    apply_override(doc, "estimator.alpha=10");
    apply_override(doc, "seeds.1=4");
    apply_override(doc, "label=up/down");
    return Outcome{doc["estimator"]["alpha"] == 10 && doc["seeds"][1] == 4 && doc["label"] == "up/down", doc.dump()};
  }});
  s.checks.push_back({"plot data: single seed gives zero spread, failed cells stay empty", [] {
    auto rec = [](double alpha, double value, bool failed) {
      json r = {{"schema", 1}, {"kind", "alpha-sweep"}, {"cell", {{"alpha", alpha}, {"direction", "a/b"}, {"tau1", "a"}, {"tau2", "b"}}}};
      if (failed) {
        r["error"] = {{"code", 4}, {"message", "diverged"}};
      } else {
        complexity::ComplexityResult c;
        c.value = value;
        c.alpha = alpha;
        r["result"] = complexity::to_json(c);
      }
      return r;
    };
    const auto p = plot_data({rec(1.0, 0.25, false), rec(10.0, 0.0, true)}, Figure::kAlpha);
    const std::string want = "alpha,mean_C,std_C,direction\n1,0.25,0,a/b\n10,,,a/b\n";
    return Outcome{p.csv == want && p.warnings.size() == 1, p.csv};
  }});
  return s;
}

std::vector<Suite> all_suites() {
  return {taskcore_suite(), gradient_suite(),   space_suite(), gridworld_suite(), order_suite(),
          complexity_suite(), envs_suite(), advest_suite(), expcli_suite()};
}

}  // namespace

bool PropsReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropCheck& c) { return c.passed; });
}

json to_json(const PropsReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"suite", c.suite}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"seconds", c.seconds}});
  }
  return {{"all_passed", report.all_passed()}, {"checks", checks}};
}

const std::vector<std::string>& props_suites() {
  static const std::vector<std::string> names = {"taskcore",         "gradients", "space-axioms", "gridworld-reduction",
                                                 "order-axioms",     "complexity-exact", "envs", "advest", "expcli"};
  return names;
}

PropsReport run_props(const std::vector<std::string>& suites, const Logger& log) {
  for (const auto& name : suites) {
    if (std::find(props_suites().begin(), props_suites().end(), name) == props_suites().end()) {
      std::string known;
      for (const auto& n : props_suites()) known += (known.empty() ? "" : ", ") + n;
      throw ValidationError("unknown property suite '" + name + "' (known: " + known + ")");
    }
  }
  PropsReport report;
  for (auto& suite : all_suites()) {
    if (!suites.empty() && std::find(suites.begin(), suites.end(), suite.name) == suites.end()) continue;
    for (auto& [name, fn] : suite.checks) {
      PropCheck c{suite.name, name, false, {}, 0.0};
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Outcome o = fn();
        c.passed = o.passed;
        c.detail = o.detail;
      } catch (const std::exception& e) {
        c.detail = std::string("threw: ") + e.what();
      }
      c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (log) log(std::string(c.passed ? "PASS " : "FAIL ") + suite.name + ": " + name + (c.detail.empty() ? "" : " [" + c.detail + "]"));
      report.checks.push_back(std::move(c));
    }
  }
  return report;
}

}  // namespace taskred::expcli
