#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "reduction/reduction.hpp"

namespace taskred::complexity {

using core::Policy;
using core::TaskSpec;
using reduction::DecoderSpace;
using reduction::EncoderSpace;

enum class Method { kExact, kAdversarial };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Shared record for exact and adversarial results. Policies and maps are kept
// in their serialized form so records round-trip without the live objects.
struct ComplexityResult {
  double value = 0.0;
  Method method = Method::kExact;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  bool inner_admissible = true;
  std::string config_digest;
  std::string tau1_digest;
  std::string tau2_digest;
  // Exact: indices into the admissible family and the (H, G) lists.
  std::optional<std::size_t> policy_index;
  std::optional<std::size_t> encoder_index;
  std::optional<std::size_t> decoder_index;
  nlohmann::json attaining_policy;
  nlohmann::json attaining_encoder;
  nlohmann::json attaining_decoder;
  // Adversarial: return estimates behind the value.
  std::optional<double> composed_return;
  std::optional<double> composed_stderr;
  std::optional<double> inner_return;
  std::optional<std::size_t> iterations;
  std::string label;
};

nlohmann::json to_json(const ComplexityResult& r);
ComplexityResult complexity_result_from_json(const nlohmann::json& doc);

// Digest of the quantification set: both task digests, H, G and the family.
std::string quantification_digest(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H, const DecoderSpace& G,
                                  std::span<const Policy> admissible2);

// max over the family of min over (h, g) of 1 - R1(g o pi o h) / R1*.
// Ties keep the first policy / pair in list order.
ComplexityResult exact_relative_complexity(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H,
                                           const DecoderSpace& G, std::span<const Policy> admissible2);

// Recomputes 1 - R1/R1* for the recorded attaining triple.
double recompute_exact(const TaskSpec& tau1, const EncoderSpace& H, const DecoderSpace& G,
                       std::span<const Policy> admissible2, const ComplexityResult& result);

struct ConsistencyReport {
  double value = 0.0;
  bool reduction_holds = false;
  bool consistent = false;
};

nlohmann::json to_json(const ConsistencyReport& r);

// value = 0 exactly when the reduction holds on the same quantification set.
ConsistencyReport consistency_check(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H,
                                    const DecoderSpace& G, std::span<const Policy> admissible2);

}  // namespace taskred::complexity
