#include "advest/config.hpp"

#include <functional>
#include <map>

#include "common/error.hpp"

namespace taskred::advest {

std::vector<std::size_t> ArchSpec::dims(std::size_t in, std::size_t out) const {
  std::vector<std::size_t> d{in};
  for (std::size_t i = 0; i < hidden_layers; ++i) d.push_back(width);
  d.push_back(out);
  return d;
}

nlohmann::json to_json(const ArchSpec& a) {
  if (a.identity) return "identity";
  return {{"hidden_layers", a.hidden_layers}, {"width", a.width}, {"activation", diffnet::to_string(a.activation)}};
}

ArchSpec arch_from_json(const nlohmann::json& doc, const std::string& where) {
  if (doc.is_string()) {
    if (doc.get<std::string>() == "identity") return ArchSpec::identity_only();
    throw ValidationError(where + ": expected \"identity\" or an object");
  }
  if (!doc.is_object()) throw ValidationError(where + ": expected \"identity\" or an object");
  ArchSpec a = ArchSpec::mlp(1);
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "hidden_layers") a.hidden_layers = value.get<std::size_t>();
      else if (key == "width") a.width = value.get<std::size_t>();
      else if (key == "activation") a.activation = diffnet::activation_from_string(value.get<std::string>());
      else throw ValidationError(where + "/" + key + ": unknown key");
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(where + "/" + key + ": wrong type");
    } catch (const ConfigurationError& e) {
      throw ValidationError(where + "/" + key + ": " + e.what());
    }
  }
  if (a.hidden_layers > 0 && a.width == 0) throw ValidationError(where + "/width: must be positive");
  return a;
}

EstimatorConfig continuous_defaults() {
  EstimatorConfig c;
  c.batch_size = 200;
  c.max_iters = 50000;
  c.steps_per_iter = 1;
  c.eval_every = 500;
  c.encoder = ArchSpec::mlp(3);
  c.decoder = ArchSpec::mlp(3);
  c.policy = ArchSpec::mlp(3);
  c.critic = ArchSpec::mlp(3);
  return c;
}

nlohmann::json to_json(const EstimatorConfig& c) {
  return {{"alpha", c.alpha},
          {"lr_policy", c.lr_policy},
          {"lr_enc_dec", c.lr_enc_dec},
          {"lr_critic", c.lr_critic},
          {"batch_size", c.batch_size},
          {"max_iters", c.max_iters},
          {"steps_per_iter", c.steps_per_iter},
          {"pretrain_iters", c.pretrain_iters},
          {"eval_rollouts", c.eval_rollouts},
          {"eval_every", c.eval_every},
          {"convergence_window", c.convergence_window},
          {"convergence_threshold", c.convergence_threshold},
          {"admissibility_tolerance", c.admissibility_tolerance},
          {"gamma", c.gamma},
          {"replay_capacity", c.replay_capacity},
          {"target_update", c.target_update},
          {"critic_target", c.critic_target == CriticTarget::kPolicy ? "policy" : "max"},
          {"eps_start", c.eps_start},
          {"eps_end", c.eps_end},
          {"eps_fraction", c.eps_fraction},
          {"entropy_weight", c.entropy_weight},
          {"init_log_std", c.init_log_std},
          {"identity_logit", c.identity_logit},
          {"grad_clip", c.grad_clip},
          {"critic_divergence", c.critic_divergence},
          {"policy", to_json(c.policy)},
          {"critic", to_json(c.critic)},
          {"encoder", to_json(c.encoder)},
          {"decoder", to_json(c.decoder)},
          {"seed", c.seed}};
}

EstimatorConfig estimator_config_from_json(const nlohmann::json& doc, const EstimatorConfig& base, const std::string& where) {
  if (!doc.is_object()) throw ValidationError(where + ": expected an object");
  EstimatorConfig c = base;
  using Setter = std::function<void(const nlohmann::json&, const std::string&)>;
  auto real = [](double& field) -> Setter {
    return [&field](const nlohmann::json& v, const std::string&) { field = v.get<double>(); };
  };
  auto count = [](std::size_t& field) -> Setter {
    return [&field](const nlohmann::json& v, const std::string&) { field = v.get<std::size_t>(); };
  };
  auto arch = [](ArchSpec& field) -> Setter {
    return [&field](const nlohmann::json& v, const std::string& path) { field = arch_from_json(v, path); };
  };
  const std::map<std::string, Setter> setters = {
      {"alpha", real(c.alpha)},
      {"lr_policy", real(c.lr_policy)},
      {"lr_enc_dec", real(c.lr_enc_dec)},
      {"lr_critic", real(c.lr_critic)},
      {"batch_size", count(c.batch_size)},
      {"max_iters", count(c.max_iters)},
      {"steps_per_iter", count(c.steps_per_iter)},
      {"pretrain_iters", count(c.pretrain_iters)},
      {"eval_rollouts", count(c.eval_rollouts)},
      {"eval_every", count(c.eval_every)},
      {"convergence_window", count(c.convergence_window)},
      {"convergence_threshold", real(c.convergence_threshold)},
      {"admissibility_tolerance", real(c.admissibility_tolerance)},
      {"gamma", real(c.gamma)},
      {"replay_capacity", count(c.replay_capacity)},
      {"target_update", count(c.target_update)},
      {"critic_target",
       [&c](const nlohmann::json& v, const std::string& path) {
         const auto s = v.get<std::string>();
         if (s == "policy") c.critic_target = CriticTarget::kPolicy;
         else if (s == "max") c.critic_target = CriticTarget::kMax;
         else throw ValidationError(path + ": expected \"policy\" or \"max\"");
       }},
      {"eps_start", real(c.eps_start)},
      {"eps_end", real(c.eps_end)},
      {"eps_fraction", real(c.eps_fraction)},
      {"entropy_weight", real(c.entropy_weight)},
      {"init_log_std", real(c.init_log_std)},
      {"identity_logit", real(c.identity_logit)},
      {"grad_clip", real(c.grad_clip)},
      {"critic_divergence", real(c.critic_divergence)},
      {"policy", arch(c.policy)},
      {"critic", arch(c.critic)},
      {"encoder", arch(c.encoder)},
      {"decoder", arch(c.decoder)},
      {"seed", [&c](const nlohmann::json& v, const std::string&) { c.seed = v.get<std::uint64_t>(); }},
  };
  for (const auto& [key, value] : doc.items()) {
    const std::string path = where + "/" + key;
    auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError(path + ": unknown key");
    try {
      it->second(value, path);
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(path + ": wrong type");
    }
  }
  validate(c, where);
  return c;
}

void validate(const EstimatorConfig& c, const std::string& where) {
  auto fail = [&](const std::string& field, const std::string& why) { throw ValidationError(where + "/" + field + ": " + why); };
  if (!(c.alpha >= 0.0)) fail("alpha", "must be >= 0");
  if (!(c.lr_policy > 0.0)) fail("lr_policy", "must be > 0");
  if (!(c.lr_enc_dec > 0.0)) fail("lr_enc_dec", "must be > 0");
  if (!(c.lr_critic > 0.0)) fail("lr_critic", "must be > 0");
  if (c.batch_size == 0) fail("batch_size", "must be >= 1");
  if (c.max_iters == 0) fail("max_iters", "must be >= 1");
  if (c.steps_per_iter == 0) fail("steps_per_iter", "must be >= 1");
  if (c.eval_rollouts == 0) fail("eval_rollouts", "must be >= 1");
  if (c.eval_every == 0) fail("eval_every", "must be >= 1");
  if (c.convergence_window == 0) fail("convergence_window", "must be >= 1");
  if (!(c.convergence_threshold > 0.0)) fail("convergence_threshold", "must be > 0");
  if (!(c.admissibility_tolerance >= 0.0)) fail("admissibility_tolerance", "must be >= 0");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("gamma", "must lie in (0, 1]");
  if (c.replay_capacity == 0) fail("replay_capacity", "must be >= 1");
  if (c.batch_size > c.replay_capacity) fail("batch_size", "must not exceed replay_capacity");
  if (c.target_update == 0) fail("target_update", "must be >= 1");
  if (!(c.eps_start >= 0.0 && c.eps_start <= 1.0)) fail("eps_start", "must lie in [0, 1]");
  if (!(c.eps_end >= 0.0 && c.eps_end <= 1.0)) fail("eps_end", "must lie in [0, 1]");
  if (!(c.eps_fraction > 0.0 && c.eps_fraction <= 1.0)) fail("eps_fraction", "must lie in (0, 1]");
  if (!(c.entropy_weight >= 0.0)) fail("entropy_weight", "must be >= 0");
  if (!(c.grad_clip > 0.0)) fail("grad_clip", "must be > 0");
  if (!(c.critic_divergence > 0.0)) fail("critic_divergence", "must be > 0");
  if (c.policy.identity) fail("policy", "the inner policy cannot be identity-only");
  if (c.critic.identity) fail("critic", "critics cannot be identity-only");
}

}  // namespace taskred::advest
