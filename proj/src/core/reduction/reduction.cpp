#include "reduction/reduction.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace taskred::reduction {

template <class F>
FunctionSpace<F> FunctionSpace<F>::explicit_list(std::vector<F> members, std::string label) {
  FunctionSpace s;
  s.label_ = std::move(label);
  for (auto& m : members) {
    if (m.body().is_finite() && s.contains(m.table())) continue;
    s.members_.push_back(std::move(m));
  }
  return s;
}

template <class F>
FunctionSpace<F> FunctionSpace<F>::parametric(nlohmann::json architecture, std::string label) {
  FunctionSpace s;
  s.parametric_ = true;
  s.architecture_ = std::move(architecture);
  s.label_ = std::move(label);
  return s;
}

template <class F>
std::optional<std::size_t> FunctionSpace<F>::index_of(const FiniteMap& f) const {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i].body().is_finite() && members_[i].table() == f) return i;
  }
  return std::nullopt;
}

template <class F>
bool FunctionSpace<F>::contains(const FiniteMap& f) const {
  return index_of(f).has_value();
}

template <class F>
bool FunctionSpace<F>::contains_identity() const {
  for (const auto& m : members_) {
    if (m.body().is_finite() && m.table().is_identity()) return true;
  }
  return false;
}

template <class F>
FunctionSpace<F> FunctionSpace<F>::with_member(F member) const {
  auto members = members_;
  members.push_back(std::move(member));
  return explicit_list(std::move(members), label_);
}

template class FunctionSpace<Encoder>;
template class FunctionSpace<Decoder>;

ComposedPolicy::ComposedPolicy(Encoder h, Policy inner, Decoder g) : h_(std::move(h)), inner_(std::move(inner)), g_(std::move(g)) {}

Point ComposedPolicy::act(const Point& observation) const { return g_(inner_.act(h_(observation))); }

nlohmann::json ComposedPolicy::describe() const {
  nlohmann::json doc = {{"kind", "composed"}, {"encoder", to_json(h_)}, {"decoder", to_json(g_)}};
  if (inner_.as_tabular() || inner_.as_neural()) doc["inner"] = core::to_json(inner_);
  return doc;
}

Policy ComposedPolicy::materialize() const {
  const auto inner_table = inner_.action_table();
  return Policy::tabular(compose_tables(g_.table(), inner_table, h_.table()), g_.table().codomain_size);
}

std::shared_ptr<const ComposedPolicy> compose(const Decoder& g, const Policy& inner, const Encoder& h) {
  if (!(h.body().codomain() == inner.observation_space())) {
    throw ConfigurationError("compose: encoder codomain does not match the inner policy's observation space");
  }
  if (!(inner.action_space() == g.body().domain())) {
    throw ConfigurationError("compose: inner policy's action space does not match the decoder domain");
  }
  return std::make_shared<const ComposedPolicy>(h, inner, g);
}

Policy compose_policy(const Decoder& g, const Policy& inner, const Encoder& h) { return Policy::mapped(compose(g, inner, h)); }

std::vector<std::size_t> compose_tables(const FiniteMap& g, std::span<const std::size_t> inner, const FiniteMap& h) {
  std::vector<std::size_t> out(h.domain_size);
  for (std::size_t x = 0; x < h.domain_size; ++x) out[x] = g(inner[h(x)]);
  return out;
}

nlohmann::json to_json(const ReductionVerdict& v) {
  nlohmann::json doc;
  doc["holds"] = v.holds;
  doc["quantification_size"] = v.quantification_size;
  auto w = nlohmann::json::array();
  for (const auto& x : v.witnesses) w.push_back({{"policy", x.policy}, {"encoder", x.encoder}, {"decoder", x.decoder}});
  doc["witnesses"] = w;
  doc["counterexample"] = v.counterexample ? nlohmann::json(*v.counterexample) : nlohmann::json(nullptr);
  return doc;
}

namespace {

bool admissible_table(const TaskSpec& task, std::span<const std::size_t> table) {
  return std::abs(core::exact_return_for_table(task, table) - task.success_threshold()) <= core::kExactTolerance;
}

void check_shapes(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H, const DecoderSpace& G) {
  if (!tau1.is_finite() || !tau2.is_finite()) throw UnsupportedOperation("exact reduction checks require finite tasks");
  if (!H.is_explicit() || !G.is_explicit()) throw UnsupportedOperation("exact reduction checks require explicit finite spaces");
  const auto& m1 = tau1.finite_model();
  const auto& m2 = tau2.finite_model();
  for (const auto& h : H.members()) {
    const auto& t = h.table();
    if (t.domain_size != m1.observation_count || t.codomain_size != m2.observation_count) {
      throw ConfigurationError("encoder does not map O1 -> O2");
    }
  }
  for (const auto& g : G.members()) {
    const auto& t = g.table();
    if (t.domain_size != m2.action_count || t.codomain_size != m1.action_count) {
      throw ConfigurationError("decoder does not map A2 -> A1");
    }
  }
}

}  // namespace

ReductionVerdict check_reduction(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H, const DecoderSpace& G,
                                 std::span<const Policy> admissible2) {
  check_shapes(tau1, tau2, H, G);
  if (admissible2.empty()) throw PreconditionViolation("check_reduction: the admissible family of tau2 is empty");
  std::vector<std::vector<std::size_t>> tables;
  tables.reserve(admissible2.size());
  for (std::size_t p = 0; p < admissible2.size(); ++p) {
    core::check_compatible(tau2, admissible2[p]);
    tables.push_back(admissible2[p].action_table());
    if (!admissible_table(tau2, tables.back())) {
      throw PreconditionViolation("check_reduction: policy #" + std::to_string(p) + " of the family is not admissible on '" +
                                  tau2.name() + "'");
    }
  }
  ReductionVerdict verdict;
  verdict.quantification_size = admissible2.size();
  for (std::size_t p = 0; p < tables.size(); ++p) {
    bool found = false;
    for (std::size_t hi = 0; hi < H.size() && !found; ++hi) {
      for (std::size_t gi = 0; gi < G.size() && !found; ++gi) {
        const auto composed = compose_tables(G.members()[gi].table(), tables[p], H.members()[hi].table());
        if (admissible_table(tau1, composed)) {
          verdict.witnesses.push_back({p, hi, gi});
          found = true;
        }
      }
    }
    if (!found) {
      verdict.counterexample = p;
      verdict.holds = false;
      return verdict;
    }
  }
  verdict.holds = true;
  return verdict;
}

bool check_equivalence(const TaskSpec& tau1, const TaskSpec& tau2, const EncoderSpace& H12, const DecoderSpace& G21,
                       const EncoderSpace& H21, const DecoderSpace& G12, std::span<const Policy> admissible1,
                       std::span<const Policy> admissible2) {
  return check_reduction(tau1, tau2, H12, G21, admissible2).holds &&
         check_reduction(tau2, tau1, H21, G12, admissible1).holds;
}

SpaceFamily SpaceFamily::uniform(std::size_t task_count, const EncoderSpace& H, const DecoderSpace& G) {
  SpaceFamily f(task_count);
  for (std::size_t i = 0; i < task_count; ++i) {
    for (std::size_t j = 0; j < task_count; ++j) f.set(i, j, H, G);
  }
  return f;
}

void SpaceFamily::set(std::size_t i, std::size_t j, EncoderSpace H, DecoderSpace G) {
  if (i >= task_count_ || j >= task_count_) throw ConfigurationError("space family index out of range");
  spaces_.insert_or_assign({i, j}, std::make_pair(std::move(H), std::move(G)));
}

const EncoderSpace& SpaceFamily::encoders(std::size_t i, std::size_t j) const {
  auto it = spaces_.find({i, j});
  if (it == spaces_.end()) throw ConfigurationError("no encoder space for pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  return it->second.first;
}

const DecoderSpace& SpaceFamily::decoders(std::size_t i, std::size_t j) const {
  auto it = spaces_.find({i, j});
  if (it == spaces_.end()) throw ConfigurationError("no decoder space for pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  return it->second.second;
}

nlohmann::json to_json(const AxiomReport& r) {
  auto entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"check", e.check}, {"space", e.space}, {"passed", e.passed}, {"detail", e.detail}});
  }
  return {{"identity_ok", r.identity_ok}, {"closure_ok", r.closure_ok}, {"hypotheses_hold", r.hypotheses_hold()}, {"entries", entries}};
}

namespace {

std::string pair_label(const char* prefix, std::size_t i, std::size_t j) {
  return std::string(prefix) + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
}

template <class F>
bool all_finite(const FunctionSpace<F>& s) {
  if (!s.is_explicit()) return false;
  for (const auto& m : s.members()) {
    if (!m.body().is_finite()) return false;
  }
  return true;
}

}  // namespace

AxiomReport verify_space_axioms(const SpaceFamily& family) {
  AxiomReport report;
  const std::size_t n = family.task_count();
  bool non_finite = false;
  auto add = [&report](std::string check, std::string space, bool passed, std::string detail) {
    if (!passed) (check == "identity" ? report.identity_ok : report.closure_ok) = false;
    report.entries.push_back({std::move(check), std::move(space), passed, std::move(detail)});
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& H = family.encoders(i, j);
      const auto& G = family.decoders(i, j);
      if (!all_finite(H) || !all_finite(G)) {
        add("identity", pair_label("H", i, j), false, "space is not an explicit finite list");
        non_finite = true;
        continue;
      }
      // Identity is only meaningful where domain and codomain coincide.
      const bool h_square = !H.members().empty() && H.members()[0].table().domain_size == H.members()[0].table().codomain_size;
      const bool g_square = !G.members().empty() && G.members()[0].table().domain_size == G.members()[0].table().codomain_size;
      if (h_square || i == j) add("identity", pair_label("H", i, j), H.contains_identity(), H.contains_identity() ? "" : "identity missing");
      if (g_square || i == j) add("identity", pair_label("G", j, i), G.contains_identity(), G.contains_identity() ? "" : "identity missing");
    }
  }
  if (non_finite) return report;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        // h2 o h1 in H_{i,k} for h1 in H_{i,j}, h2 in H_{j,k}.
        const auto& H_ij = family.encoders(i, j);
        const auto& H_jk = family.encoders(j, k);
        const auto& H_ik = family.encoders(i, k);
        std::string h_detail;
        for (std::size_t a = 0; a < H_ij.size() && h_detail.empty(); ++a) {
          for (std::size_t b = 0; b < H_jk.size() && h_detail.empty(); ++b) {
            if (!H_ik.contains(H_ij.members()[a].table().then(H_jk.members()[b].table()))) {
              h_detail = "h2#" + std::to_string(b) + " o h1#" + std::to_string(a) + " not in " + pair_label("H", i, k);
            }
          }
        }
        add("closure", pair_label("H", i, j) + "*" + pair_label("H", j, k), h_detail.empty(), h_detail);
        // g1 o g2 in G_{k,i} for g1 in G_{j,i}, g2 in G_{k,j}.
        const auto& G_ji = family.decoders(i, j);
        const auto& G_kj = family.decoders(j, k);
        const auto& G_ki = family.decoders(i, k);
        std::string g_detail;
        for (std::size_t a = 0; a < G_ji.size() && g_detail.empty(); ++a) {
          for (std::size_t b = 0; b < G_kj.size() && g_detail.empty(); ++b) {
            if (!G_ki.contains(G_kj.members()[b].table().then(G_ji.members()[a].table()))) {
              g_detail = "g1#" + std::to_string(a) + " o g2#" + std::to_string(b) + " not in " + pair_label("G", k, i);
            }
          }
        }
        add("closure", pair_label("G", j, i) + "*" + pair_label("G", k, j), g_detail.empty(), g_detail);
      }
    }
  }
  return report;
}

bool AuditReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

nlohmann::json to_json(const AuditReport& r) {
  auto checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back({{"property", c.property}, {"passed", c.passed}, {"violation", c.violation}});
  return {{"reduces", r.reduces}, {"checks", checks}, {"all_passed", r.all_passed()}};
}

std::vector<AuditCheck> order_axiom_checks(const std::vector<std::vector<bool>>& R) {
  const std::size_t n = R.size();
  auto E = [&](std::size_t i, std::size_t j) { return R[i][j] && R[j][i]; };
  auto S = [&](std::size_t i, std::size_t j) { return R[i][j] && !E(i, j); };
  std::vector<AuditCheck> checks;
  auto unary = [&](std::string name, auto pred) {
    AuditCheck c{std::move(name), true, {}};
    for (std::size_t i = 0; i < n && c.passed; ++i) {
      if (!pred(i)) c = {c.property, false, {i}};
    }
    checks.push_back(std::move(c));
  };
  auto binary = [&](std::string name, auto pred) {
    AuditCheck c{std::move(name), true, {}};
    for (std::size_t i = 0; i < n && c.passed; ++i) {
      for (std::size_t j = 0; j < n && c.passed; ++j) {
        if (!pred(i, j)) c = {c.property, false, {i, j}};
      }
    }
    checks.push_back(std::move(c));
  };
  auto ternary = [&](std::string name, auto pred) {
    AuditCheck c{std::move(name), true, {}};
    for (std::size_t i = 0; i < n && c.passed; ++i) {
      for (std::size_t j = 0; j < n && c.passed; ++j) {
        for (std::size_t k = 0; k < n && c.passed; ++k) {
          if (!pred(i, j, k)) c = {c.property, false, {i, j, k}};
        }
      }
    }
    checks.push_back(std::move(c));
  };
  unary("reflexivity", [&](std::size_t i) { return R[i][i]; });
  binary("antisymmetry", [&](std::size_t i, std::size_t j) { return !S(i, j) || !R[j][i]; });
  ternary("transitivity", [&](std::size_t i, std::size_t j, std::size_t k) { return !(R[i][j] && R[j][k]) || R[i][k]; });
  unary("equivalence reflexivity", [&](std::size_t i) { return E(i, i); });
  binary("equivalence symmetry", [&](std::size_t i, std::size_t j) { return !E(i, j) || E(j, i); });
  ternary("equivalence transitivity", [&](std::size_t i, std::size_t j, std::size_t k) { return !(E(i, j) && E(j, k)) || E(i, k); });
  unary("strict irreflexivity", [&](std::size_t i) { return !S(i, i); });
  binary("strict asymmetry", [&](std::size_t i, std::size_t j) { return !S(i, j) || !S(j, i); });
  ternary("strict transitivity", [&](std::size_t i, std::size_t j, std::size_t k) { return !(S(i, j) && S(j, k)) || S(i, k); });
  return checks;
}

AuditReport partial_order_audit(std::span<const TaskSpec> tasks, const SpaceFamily& family,
                                const std::vector<std::vector<Policy>>& admissible_families) {
  const std::size_t n = tasks.size();
  if (family.task_count() != n || admissible_families.size() != n) {
    throw ConfigurationError("audit: tasks, space family and admissible families must have the same length");
  }
  const AxiomReport axioms = verify_space_axioms(family);
  if (!axioms.hypotheses_hold()) {
    throw PreconditionViolation(std::string("audit refused: the space family does not satisfy the ordering hypotheses (") +
                                (axioms.identity_ok ? "" : "identity missing; ") + (axioms.closure_ok ? "" : "not closed under composition") + ")");
  }
  AuditReport report;
  report.reduces.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      report.reduces[i][j] =
          check_reduction(tasks[i], tasks[j], family.encoders(i, j), family.decoders(i, j), admissible_families[j]).holds;
    }
  }
  report.checks = order_axiom_checks(report.reduces);
  return report;
}

}  // namespace taskred::reduction
