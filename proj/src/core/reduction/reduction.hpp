#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "reduction/function_map.hpp"
#include "taskcore/evaluate.hpp"

namespace taskred::reduction {

using core::Policy;
using core::TaskSpec;

// An encoder space H or decoder space G. Explicit members are deduplicated
// extensionally; parametric families only carry an architecture descriptor.
template <class F>
class FunctionSpace {
 public:
  static FunctionSpace explicit_list(std::vector<F> members, std::string label = {});
  static FunctionSpace parametric(nlohmann::json architecture, std::string label = {});

  bool is_explicit() const { return !parametric_; }
  const std::vector<F>& members() const { return members_; }
  const nlohmann::json& architecture() const { return architecture_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return members_.size(); }

  // Extensional membership on finite domains.
  bool contains(const FiniteMap& f) const;
  std::optional<std::size_t> index_of(const FiniteMap& f) const;
  bool contains_identity() const;

  FunctionSpace with_member(F member) const;

 private:
  std::vector<F> members_;
  nlohmann::json architecture_;
  std::string label_;
  bool parametric_ = false;
};

using EncoderSpace = FunctionSpace<Encoder>;
using DecoderSpace = FunctionSpace<Decoder>;

// g o pi o h, acting as a policy on the outer task.
class ComposedPolicy final : public core::PolicyMap {
 public:
  ComposedPolicy(Encoder h, Policy inner, Decoder g);

  Point act(const Point& observation) const override;
  const Space& observation_space() const override { return h_.body().domain(); }
  const Space& action_space() const override { return g_.body().codomain(); }
  nlohmann::json describe() const override;

  const Encoder& encoder() const { return h_; }
  const Policy& inner() const { return inner_; }
  const Decoder& decoder() const { return g_; }

  // Tabular policy over the finite outer observation space.
  Policy materialize() const;

 private:
  Encoder h_;
  Policy inner_;
  Decoder g_;
};

// Checks h's codomain against inner's observations and inner's actions against
// g's domain; ConfigurationError on mismatch.
std::shared_ptr<const ComposedPolicy> compose(const Decoder& g, const Policy& inner, const Encoder& h);
Policy compose_policy(const Decoder& g, const Policy& inner, const Encoder& h);

// Tabular shortcut: x -> g[pi[h[x]]].
std::vector<std::size_t> compose_tables(const FiniteMap& g, std::span<const std::size_t> inner, const FiniteMap& h);

struct Witness {
  std::size_t policy = 0;  // index into the admissible family
  std::size_t encoder = 0;
  std::size_t decoder = 0;
};

struct ReductionVerdict {
  bool holds = false;
  std::vector<Witness> witnesses;
  std::optional<std::size_t> counterexample;
  std::size_t quantification_size = 0;
};

nlohmann::json to_json(const ReductionVerdict& verdict);

// tau1 reduces to tau2 over the supplied admissible family of tau2.
ReductionVerdict check_reduction(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H, const DecoderSpace& G,
                                 std::span<const Policy> admissible2);

bool check_equivalence(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H12, const DecoderSpace& G21,
                       const EncoderSpace& H21, const DecoderSpace& G12, std::span<const Policy> admissible1,
                       std::span<const Policy> admissible2);

// Indexed family of spaces over a task set. encoders(i, j) is H_{i,j}: O_i -> O_j;
// decoders(i, j) is G_{j,i}: A_j -> A_i, the decoder space used when asking
// whether task i reduces to task j.
class SpaceFamily {
 public:
  explicit SpaceFamily(std::size_t task_count) : task_count_(task_count) {}

  // Same H and G for every ordered pair.
  static SpaceFamily uniform(std::size_t task_count, const EncoderSpace& H, const DecoderSpace& G);

  void set(std::size_t i, std::size_t j, EncoderSpace H, DecoderSpace G);
  std::size_t task_count() const { return task_count_; }
  const EncoderSpace& encoders(std::size_t i, std::size_t j) const;
  const DecoderSpace& decoders(std::size_t i, std::size_t j) const;

 private:
  std::size_t task_count_;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<EncoderSpace, DecoderSpace>> spaces_;
};

struct AxiomEntry {
  std::string check;  // "identity" or "closure"
  std::string space;  // e.g. "H[0,1]", "G[2,0]"
  bool passed = true;
  std::string detail;
};

struct AxiomReport {
  std::vector<AxiomEntry> entries;
  bool identity_ok = true;
  bool closure_ok = true;
  bool hypotheses_hold() const { return identity_ok && closure_ok; }
};

nlohmann::json to_json(const AxiomReport& report);

AxiomReport verify_space_axioms(const SpaceFamily& family);

struct AuditCheck {
  std::string property;  // e.g. "reflexivity", "strict asymmetry"
  bool passed = true;
  std::vector<std::size_t> violation;  // task indices of the first violating tuple
};

struct AuditReport {
  std::vector<std::vector<bool>> reduces;  // reduces[i][j]: task i reduces to task j
  std::vector<AuditCheck> checks;
  bool all_passed() const;
};

nlohmann::json to_json(const AuditReport& report);

// Order axioms over the relation matrix computed on the concrete task set.
// Refuses (PreconditionViolation) unless the family satisfies identity + closure.
AuditReport partial_order_audit(std::span<const TaskSpec> tasks, const SpaceFamily& family,
                                const std::vector<std::vector<Policy>>& admissible_families);

// The axiom checks alone, on a given reduction relation.
std::vector<AuditCheck> order_axiom_checks(const std::vector<std::vector<bool>>& reduces);

}  // namespace taskred::reduction
