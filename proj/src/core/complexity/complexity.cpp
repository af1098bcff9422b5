#include "complexity/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "common/digest.hpp"
#include "common/error.hpp"

namespace taskred::complexity {

std::string to_string(Method m) { return m == Method::kExact ? "exact" : "adversarial"; }

Method method_from_string(const std::string& s) {
  if (s == "exact") return Method::kExact;
  if (s == "adversarial") return Method::kAdversarial;
  throw ValidationError("unknown complexity method '" + s + "'");
}

namespace {

template <class T>
void put(nlohmann::json& doc, const char* key, const std::optional<T>& v) {
  if (v) doc[key] = *v;
}

template <class T>
void take(const nlohmann::json& doc, const char* key, std::optional<T>& v) {
  if (doc.contains(key) && !doc.at(key).is_null()) v = doc.at(key).get<T>();
}

}  // namespace

nlohmann::json to_json(const ComplexityResult& r) {
  nlohmann::json doc = {{"schema", 1},
                        {"method", to_string(r.method)},
                        {"value", r.value},
                        {"seed", r.seed},
                        {"inner_admissible", r.inner_admissible},
                        {"config_digest", r.config_digest},
                        {"tau1", r.tau1_digest},
                        {"tau2", r.tau2_digest}};
  put(doc, "alpha", r.alpha);
  put(doc, "policy_index", r.policy_index);
  put(doc, "encoder_index", r.encoder_index);
  put(doc, "decoder_index", r.decoder_index);
  if (!r.attaining_policy.is_null()) doc["attaining_policy"] = r.attaining_policy;
  if (!r.attaining_encoder.is_null()) doc["attaining_encoder"] = r.attaining_encoder;
  if (!r.attaining_decoder.is_null()) doc["attaining_decoder"] = r.attaining_decoder;
  put(doc, "composed_return", r.composed_return);
  put(doc, "composed_stderr", r.composed_stderr);
  put(doc, "inner_return", r.inner_return);
  put(doc, "iterations", r.iterations);
  if (!r.label.empty()) doc["label"] = r.label;
  return doc;
}

ComplexityResult complexity_result_from_json(const nlohmann::json& doc) {
  if (doc.value("schema", 0) != 1) throw ValidationError("complexity record has unsupported schema");
  ComplexityResult r;
  try {
    r.method = method_from_string(doc.at("method").get<std::string>());
    r.value = doc.at("value").get<double>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.inner_admissible = doc.at("inner_admissible").get<bool>();
    r.config_digest = doc.at("config_digest").get<std::string>();
    r.tau1_digest = doc.at("tau1").get<std::string>();
    r.tau2_digest = doc.at("tau2").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed complexity record: ") + e.what());
  }
  take(doc, "alpha", r.alpha);
  take(doc, "policy_index", r.policy_index);
  take(doc, "encoder_index", r.encoder_index);
  take(doc, "decoder_index", r.decoder_index);
  r.attaining_policy = doc.value("attaining_policy", nlohmann::json());
  r.attaining_encoder = doc.value("attaining_encoder", nlohmann::json());
  r.attaining_decoder = doc.value("attaining_decoder", nlohmann::json());
  take(doc, "composed_return", r.composed_return);
  take(doc, "composed_stderr", r.composed_stderr);
  take(doc, "inner_return", r.inner_return);
  take(doc, "iterations", r.iterations);
  r.label = doc.value("label", std::string());
  if (!(r.value >= 0.0 && r.value <= 1.0)) throw ValidationError("complexity value outside [0, 1]");
  return r;
}

std::string quantification_digest(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H, const DecoderSpace& G,
                                  std::span<const Policy> admissible2) {
  nlohmann::json doc = {{"tau1", tau1.digest()}, {"tau2", tau2.digest()}};
  for (const auto& h : H.members()) doc["H"].push_back(reduction::to_json(h));
  for (const auto& g : G.members()) doc["G"].push_back(reduction::to_json(g));
  for (const auto& p : admissible2) doc["family"].push_back(p.action_table());
  return digest_of(doc);
}

namespace {

void require_exact_inputs(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H, const DecoderSpace& G,
                          std::span<const Policy> admissible2) {
  if (!tau1.is_finite() || !tau2.is_finite()) throw UnsupportedOperation("exact relative complexity needs finite tasks");
  if (!H.is_explicit() || !G.is_explicit()) throw UnsupportedOperation("exact relative complexity needs explicit H and G");
  for (const auto& h : H.members()) {
    if (!h.body().is_finite()) throw UnsupportedOperation("neural encoders are excluded from exact computation");
  }
  for (const auto& g : G.members()) {
    if (!g.body().is_finite()) throw UnsupportedOperation("neural decoders are excluded from exact computation");
  }
  if (admissible2.empty()) throw PreconditionViolation("admissible family of tau2 is empty: C undefined");
  if (H.size() == 0 || G.size() == 0) throw PreconditionViolation("encoder and decoder spaces must be nonempty");
}

double gap(const TaskSpec& tau1, const std::vector<std::size_t>& table) {
  const double r_star = tau1.success_threshold();
  const double r = core::exact_return_for_table(tau1, table);
  // Admissible within the exact tolerance counts as zero.
  if (r >= r_star - core::kExactTolerance) return 0.0;
  return std::clamp(1.0 - r / r_star, 0.0, 1.0);
}

}  // namespace

ComplexityResult exact_relative_complexity(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H,
                                           const DecoderSpace& G, std::span<const Policy> admissible2) {
  require_exact_inputs(tau1, tau2, H, G, admissible2);
  ComplexityResult result;
  result.method = Method::kExact;
  result.config_digest = quantification_digest(tau1, tau2, H, G, admissible2);
  result.tau1_digest = tau1.digest();
  result.tau2_digest = tau2.digest();
  double best = -1.0;
  for (std::size_t p = 0; p < admissible2.size(); ++p) {
    const Policy& pi = admissible2[p];
    core::check_compatible(tau2, pi);
    if (!core::is_admissible(tau2, pi, core::ExactEvaluation{})) {
      throw PreconditionViolation("policy #" + std::to_string(p) + " of the family is not admissible on '" + tau2.name() + "'");
    }
    const auto inner = pi.action_table();
    double worst = 2.0;
    std::size_t hi = 0, gi = 0;
    for (std::size_t i = 0; i < H.size() && worst > 0.0; ++i) {
      for (std::size_t j = 0; j < G.size(); ++j) {
        const double v = gap(tau1, reduction::compose_tables(G.members()[j].table(), inner, H.members()[i].table()));
        if (v < worst) {
          worst = v;
          hi = i;
          gi = j;
          if (worst == 0.0) break;
        }
      }
    }
    if (worst > best) {
      best = worst;
      result.policy_index = p;
      result.encoder_index = hi;
      result.decoder_index = gi;
    }
  }
  result.value = best;
  result.attaining_policy = core::to_json(admissible2[*result.policy_index]);
  result.attaining_encoder = reduction::to_json(H.members()[*result.encoder_index]);
  result.attaining_decoder = reduction::to_json(G.members()[*result.decoder_index]);
  return result;
}

double recompute_exact(const TaskSpec& tau1, const EncoderSpace& H, const DecoderSpace& G,
                       std::span<const Policy> admissible2, const ComplexityResult& result) {
  if (!result.policy_index || !result.encoder_index || !result.decoder_index) {
    throw UsageError("result carries no attaining triple");
  }
  const auto inner = admissible2[*result.policy_index].action_table();
  return gap(tau1, reduction::compose_tables(G.members().at(*result.decoder_index).table(), inner,
                                             H.members().at(*result.encoder_index).table()));
}

nlohmann::json to_json(const ConsistencyReport& r) {
  return {{"value", r.value}, {"reduction_holds", r.reduction_holds}, {"consistent", r.consistent}};
}

ConsistencyReport consistency_check(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H,
                                    const DecoderSpace& G, std::span<const Policy> admissible2) {
  ConsistencyReport report;
  report.value = exact_relative_complexity(tau1, tau2, H, G, admissible2).value;
  report.reduction_holds = reduction::check_reduction(tau1, tau2, H, G, admissible2).holds;
  report.consistent = (report.value == 0.0) == report.reduction_holds;
  return report;
}

}  // namespace taskred::complexity
