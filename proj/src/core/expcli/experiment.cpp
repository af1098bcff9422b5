#include "expcli/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "complexity/handcrafted.hpp"
#include "envs/cartpole.hpp"
#include "envs/speed_tracker.hpp"

namespace taskred::expcli {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxEnumeratedMaps = 100000;

struct KindInfo {
  Kind kind;
  const char* name;
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> table = {
      {Kind::kCheckReduction, "check-reduction", {"tau1", "tau2", "encoders", "decoders", "admissible"}, {}},
      {Kind::kExactComplexity, "exact-complexity", {"tau1", "tau2", "encoders", "decoders", "admissible"}, {}},
      {Kind::kEstimate, "estimate", {"tau1", "tau2"}, {"estimator"}},
      {Kind::kAlphaSweep, "alpha-sweep", {"tau1", "tau2", "alphas"}, {"estimator"}},
      {Kind::kModelStudy, "model-study", {"tau1", "tau2"}, {"estimator", "h_variants", "g_variants"}},
      {Kind::kAudit, "audit", {"tasks", "encoders", "decoders", "admissible"}, {}},
      {Kind::kCalibrate, "calibrate", {"tasks"}, {"estimator", "floor"}},
  };
  return table;
}

const std::vector<std::string> kCommonKeys = {"kind", "name", "label", "description", "output", "seeds", "workers"};

int line_of(const std::string& text, std::size_t pos) {
  int line = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

// Best-effort source line of a JSON pointer: follows the object keys through
// the raw text. Array indices do not move the cursor.
int locate(const std::string& text, const std::string& pointer) {
  if (pointer.empty() || text.empty()) return 0;
  std::size_t pos = 0;
  bool found = false;
  std::size_t start = 1;
  while (start <= pointer.size()) {
    const std::size_t end = std::min(pointer.find('/', start), pointer.size());
    const std::string seg = pointer.substr(start, end - start);
    start = end + 1;
    if (seg.empty() || seg.find_first_not_of("0123456789") == std::string::npos) continue;
    const std::size_t at = text.find('"' + seg + '"', pos);
    if (at == std::string::npos) break;
    pos = at;
    found = true;
  }
  return found ? line_of(text, pos) : 0;
}

// Splits "pointer: message" as produced by the estimator config parser.
Diagnostic from_message(const std::string& fallback, const std::string& what) {
  if (!what.empty() && what.front() == '/') {
    const auto colon = what.find(": ");
    if (colon != std::string::npos) return {what.substr(0, colon), 0, what.substr(colon + 2)};
  }
  return {fallback, 0, what};
}

json at_pointer(const json& doc, const std::string& key, const std::string& where) {
  if (!doc.contains(key)) throw ValidationError(where + "/" + key + ": missing");
  return doc.at(key);
}

template <class F>
auto rethrow_as_validation(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError&) {
    throw;
  } catch (const json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

const complexity::HandcraftedPair& handcrafted(const std::string& name, const std::string& where) {
  static const auto pairs = complexity::handcrafted_pairs();
  for (const auto& p : pairs) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : pairs) known += (known.empty() ? "" : ", ") + p.name;
  throw ValidationError(where + "/pair: unknown handcrafted pair '" + name + "' (known: " + known + ")");
}

void require_finite(const BuiltTask& t, const std::string& where) {
  if (!t.task.is_finite()) throw ValidationError(where + ": needs finite tasks, '" + t.task.name() + "' is continuous");
}

std::vector<reduction::FiniteMap> enumerated_maps(std::size_t domain, std::size_t codomain, const std::string& where) {
  const std::size_t count = core::tabular_policy_count(codomain, domain, kMaxEnumeratedMaps);
  if (count > kMaxEnumeratedMaps) {
    throw ValidationError(where + ": " + std::to_string(codomain) + "^" + std::to_string(domain) +
                          " functions exceed the enumeration cap of " + std::to_string(kMaxEnumeratedMaps));
  }
  return complexity::all_functions(domain, codomain);
}

void check_keys(const json& block, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : block.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) throw ValidationError(where + "/" + key + ": unknown key");
  }
}

}  // namespace

std::string to_string(Kind k) {
  for (const auto& info : kinds()) {
    if (info.kind == k) return info.name;
  }
  return "?";
}

std::optional<Kind> kind_from_string(const std::string& s) {
  for (const auto& info : kinds()) {
    if (s == info.name) return info.kind;
  }
  return std::nullopt;
}

std::string format(const Diagnostic& d, const std::string& origin) {
  std::ostringstream out;
  out << origin;
  if (d.line > 0) out << ':' << d.line;
  out << ": ";
  if (!d.pointer.empty()) out << d.pointer << ": ";
  out << d.message;
  return out.str();
}

namespace {

std::string joined(const std::string& origin, const std::vector<Diagnostic>& ds) {
  std::string s;
  for (const auto& d : ds) s += (s.empty() ? "" : "\n") + format(d, origin);
  return s;
}

}  // namespace

ConfigInvalid::ConfigInvalid(std::string origin, std::vector<Diagnostic> diagnostics)
    : ValidationError(joined(origin, diagnostics)), diagnostics_(std::move(diagnostics)) {}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "': expected key=value");
  const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string seg = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (seg.empty()) throw ValidationError("override '" + assignment + "': empty path segment");
    json* next = nullptr;
    if (node->is_array()) {
      if (seg.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError("override '" + assignment + "': '" + seg + "' indexes an array");
      }
      const auto i = std::stoul(seg);
      if (i >= node->size()) throw ValidationError("override '" + assignment + "': index " + seg + " out of range");
      next = &(*node)[i];
    } else {
      if (!node->is_object()) *node = json::object();
      next = &(*node)[seg];
    }
    if (dot == std::string::npos) {
      *next = std::move(value);
      return;
    }
    node = next;
    start = dot + 1;
  }
}

BuiltTask build_task(const json& block, const std::string& where) {
  return rethrow_as_validation(where, [&]() -> BuiltTask {
    if (!block.is_object()) throw ValidationError(where + ": expected a task object");
    const auto env = at_pointer(block, "env", where).get<std::string>();
    if (env == "gridworld") {
      std::uint64_t seed = 0;
      const auto params = envs::gridworld_params_from_json(block, &seed);
      auto u = envs::GridUniverse::build(params, seed);
      auto task = envs::make_gridworld(u, params.goal);
      return {std::move(task), std::move(u), block};
    }
    if (env == "cartpole") return {envs::make_cartpole(envs::cartpole_params_from_json(block)), std::nullopt, block};
    if (env == "speed") {
      json params = block;
      if (params.contains("calibrate")) {
        const auto& cal = params.at("calibrate");
        check_keys(cal, {"estimator", "floor", "seed"}, where + "/calibrate");
        advest::estimator_config_from_json(cal.value("estimator", json::object()), advest::continuous_defaults(),
                                           where + "/calibrate/estimator");
        params.erase("calibrate");
      }
      return {envs::make_speed_tracker(envs::speed_params_from_json(params)), std::nullopt, block};
    }
    if (env == "finite") return {core::finite_task_from_json(block), std::nullopt, block};
    if (env == "handcrafted") {
      check_keys(block, {"env", "pair", "side"}, where);
      const auto& pair = handcrafted(at_pointer(block, "pair", where).get<std::string>(), where);
      const auto side = at_pointer(block, "side", where).get<std::string>();
      if (side != "tau1" && side != "tau2") throw ValidationError(where + "/side: expected \"tau1\" or \"tau2\"");
      return {side == "tau1" ? pair.tau1 : pair.tau2, std::nullopt, block};
    }
    throw ValidationError(where + "/env: unknown environment '" + env + "' (known: gridworld, cartpole, speed, finite, handcrafted)");
  });
}

reduction::EncoderSpace build_encoders(const json& block, const BuiltTask& tau1, const BuiltTask& tau2, const std::string& where) {
  return rethrow_as_validation(where, [&]() -> reduction::EncoderSpace {
    require_finite(tau1, where);
    require_finite(tau2, where);
    const auto kind = at_pointer(block, "kind", where).get<std::string>();
    const std::size_t o1 = tau1.task.observations().size(), o2 = tau2.task.observations().size();
    if (kind == "identity") {
      check_keys(block, {"kind"}, where);
      if (o1 != o2) throw ValidationError(where + ": identity needs equal observation spaces");
      return reduction::EncoderSpace::explicit_list({reduction::Encoder::identity(o1)}, "identity");
    }
    if (kind == "rotations") {
      check_keys(block, {"kind"}, where);
      if (!tau1.universe || !tau2.universe || tau1.universe->describe() != tau2.universe->describe()) {
        throw ValidationError(where + ": rotations need two gridworld tasks over the same universe");
      }
      return envs::rotation_encoder_space(*tau1.universe);
    }
    if (kind == "all") {
      check_keys(block, {"kind"}, where);
      std::vector<reduction::Encoder> members;
      for (auto& f : enumerated_maps(o1, o2, where)) members.push_back(reduction::Encoder::tabular(std::move(f)));
      return reduction::EncoderSpace::explicit_list(std::move(members), "all");
    }
    if (kind == "explicit") {
      check_keys(block, {"kind", "members"}, where);
      std::vector<reduction::Encoder> members;
      for (const auto& m : at_pointer(block, "members", where)) members.push_back(reduction::encoder_from_json(m));
      if (members.empty()) throw ValidationError(where + "/members: empty space");
      return reduction::EncoderSpace::explicit_list(std::move(members), "explicit");
    }
    if (kind == "handcrafted") {
      check_keys(block, {"kind", "pair", "size"}, where);
      const auto& pair = handcrafted(at_pointer(block, "pair", where).get<std::string>(), where);
      return block.value("size", "large") == "small" ? pair.h_small : pair.h_large;
    }
    throw ValidationError(where + "/kind: unknown encoder space '" + kind + "' (known: identity, rotations, all, explicit, handcrafted)");
  });
}

reduction::DecoderSpace build_decoders(const json& block, const BuiltTask& tau1, const BuiltTask& tau2, const std::string& where) {
  return rethrow_as_validation(where, [&]() -> reduction::DecoderSpace {
    require_finite(tau1, where);
    require_finite(tau2, where);
    const auto kind = at_pointer(block, "kind", where).get<std::string>();
    const std::size_t a1 = tau1.task.actions().size(), a2 = tau2.task.actions().size();
    if (kind == "identity") {
      check_keys(block, {"kind"}, where);
      if (a1 != a2) throw ValidationError(where + ": identity needs equal action spaces");
      return reduction::DecoderSpace::explicit_list({reduction::Decoder::identity(a1)}, "identity");
    }
    if (kind == "rotations") {
      check_keys(block, {"kind"}, where);
      if (!tau1.universe || !tau2.universe) throw ValidationError(where + ": rotations need two gridworld tasks");
      return envs::rotation_decoder_space();
    }
    if (kind == "all") {
      check_keys(block, {"kind"}, where);
      std::vector<reduction::Decoder> members;
      for (auto& f : enumerated_maps(a2, a1, where)) members.push_back(reduction::Decoder::tabular(std::move(f)));
      return reduction::DecoderSpace::explicit_list(std::move(members), "all");
    }
    if (kind == "explicit") {
      check_keys(block, {"kind", "members"}, where);
      std::vector<reduction::Decoder> members;
      for (const auto& m : at_pointer(block, "members", where)) members.push_back(reduction::decoder_from_json(m));
      if (members.empty()) throw ValidationError(where + "/members: empty space");
      return reduction::DecoderSpace::explicit_list(std::move(members), "explicit");
    }
    if (kind == "handcrafted") {
      check_keys(block, {"kind", "pair", "size"}, where);
      const auto& pair = handcrafted(at_pointer(block, "pair", where).get<std::string>(), where);
      return block.value("size", "large") == "small" ? pair.g_small : pair.g_large;
    }
    throw ValidationError(where + "/kind: unknown decoder space '" + kind + "' (known: identity, rotations, all, explicit, handcrafted)");
  });
}

std::vector<core::Policy> build_family(const json& block, const BuiltTask& task, const std::string& where) {
  return rethrow_as_validation(where, [&]() -> std::vector<core::Policy> {
    require_finite(task, where);
    const auto kind = at_pointer(block, "kind", where).get<std::string>();
    if (kind == "enumerate") {
      check_keys(block, {"kind"}, where);
      return core::enumerate_admissible(task.task);
    }
    if (kind == "gridworld") {
      check_keys(block, {"kind", "random", "seed"}, where);
      if (!task.universe) throw ValidationError(where + ": gridworld families need a gridworld task");
      const auto goal = envs::direction_from_string(task.task.parameters().at("goal").get<std::string>());
      return envs::gridworld_admissible_family(*task.universe, goal, block.value("random", std::size_t{0}),
                                               block.value("seed", std::uint64_t{0}));
    }
    if (kind == "explicit") {
      check_keys(block, {"kind", "policies"}, where);
      std::vector<core::Policy> out;
      for (const auto& p : at_pointer(block, "policies", where)) out.push_back(core::policy_from_json(p));
      return out;
    }
    throw ValidationError(where + "/kind: unknown admissible family '" + kind + "' (known: enumerate, gridworld, explicit)");
  });
}

advest::EstimatorConfig build_estimator(const json& block, const BuiltTask& tau1, const BuiltTask& tau2, const std::string& where) {
  const bool box = !tau1.task.actions().is_finite() && !tau2.task.actions().is_finite();
  return advest::estimator_config_from_json(block, box ? advest::continuous_defaults() : advest::EstimatorConfig{}, where);
}

std::string direction_label(const Experiment& e, const BuiltTask& tau1, const BuiltTask& tau2) {
  if (e.doc.contains("label")) return e.doc.at("label").get<std::string>();
  return tau1.task.name() + "/" + tau2.task.name();
}

namespace {

struct Checker {
  std::vector<Diagnostic> diags;

  template <class F>
  void guard(const std::string& where, F&& f) {
    try {
      f();
    } catch (const json::exception& e) {
      diags.push_back({where, 0, e.what()});
    } catch (const Error& e) {
      diags.push_back(from_message(where, e.what()));
    }
  }

  std::optional<BuiltTask> task(const json& doc, const std::string& key) {
    std::optional<BuiltTask> out;
    guard("/" + key, [&] { out = build_task(doc.at(key), "/" + key); });
    return out;
  }
};

std::vector<std::uint64_t> parse_seeds(const json& doc) {
  if (!doc.contains("seeds")) return {0};
  const auto& s = doc.at("seeds");
  if (!s.is_array() || s.empty()) throw ValidationError("/seeds: expected a non-empty list of non-negative integers");
  std::vector<std::uint64_t> out;
  for (const auto& v : s) {
    if (!v.is_number_unsigned()) throw ValidationError("/seeds: expected a non-empty list of non-negative integers");
    out.push_back(v.get<std::uint64_t>());
  }
  return out;
}

void check_arch_list(Checker& c, const json& doc, const char* key) {
  if (!doc.contains(key)) return;
  const std::string where = std::string("/") + key;
  c.guard(where, [&] {
    if (!doc.at(key).is_array()) throw ValidationError(where + ": expected a list of architectures");
    for (std::size_t i = 0; i < doc.at(key).size(); ++i) advest::arch_from_json(doc.at(key)[i], where + "/" + std::to_string(i));
  });
}

}  // namespace

Experiment parse_experiment(const std::string& text, const std::string& origin, const std::vector<std::string>& overrides) {
  Experiment e;
  e.origin = origin;
  try {
    e.doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigInvalid(origin, {{"", line_of(text, err.byte > 0 ? err.byte - 1 : 0), std::string("parse error: ") + err.what()}});
  }
  if (!e.doc.is_object()) throw ConfigInvalid(origin, {{"", 1, "expected a JSON object at the top level"}});
  for (const auto& o : overrides) {
    try {
      apply_override(e.doc, o);
    } catch (const ValidationError& err) {
      throw ConfigInvalid(origin, {{"", 0, err.what()}});
    }
  }

  Checker c;
  const json& doc = e.doc;
  const KindInfo* info = nullptr;
  if (!doc.contains("kind") || !doc.at("kind").is_string()) {
    c.diags.push_back({"/kind", 0, "missing or not a string"});
  } else if (auto k = kind_from_string(doc.at("kind").get<std::string>())) {
    e.kind = *k;
    for (const auto& i : kinds()) {
      if (i.kind == *k) info = &i;
    }
  } else {
    std::string known;
    for (const auto& i : kinds()) known += (known.empty() ? "" : ", ") + std::string(i.name);
    c.diags.push_back({"/kind", 0, "unknown experiment kind '" + doc.at("kind").get<std::string>() + "' (known: " + known + ")"});
  }

  bool complete = info != nullptr;
  if (info) {
    for (const auto& [key, value] : doc.items()) {
      const bool known = std::find(kCommonKeys.begin(), kCommonKeys.end(), key) != kCommonKeys.end() ||
                         std::find(info->required.begin(), info->required.end(), key) != info->required.end() ||
                         std::find(info->optional.begin(), info->optional.end(), key) != info->optional.end();
      if (!known) c.diags.push_back({"/" + key, 0, "unknown key for a " + std::string(info->name) + " experiment"});
    }
    for (const auto& key : info->required) {
      if (!doc.contains(key)) {
        c.diags.push_back({"/" + key, 0, "missing required key"});
        complete = false;
      }
    }
  }

  c.guard("/name", [&] { e.name = doc.value("name", std::filesystem::path(origin).stem().string()); });
  if (e.name.empty() || e.name.find_first_of("/\\") != std::string::npos) c.diags.push_back({"/name", 0, "must be a plain non-empty name"});
  c.guard("/label", [&] {
    if (doc.contains("label") && !doc.at("label").is_string()) throw ValidationError("/label: expected a string");
  });
  c.guard("/seeds", [&] { e.seeds = parse_seeds(doc); });
  c.guard("/workers", [&] {
    if (!doc.contains("workers")) return;
    if (!doc.at("workers").is_number_unsigned() || doc.at("workers").get<std::size_t>() < 1) {
      throw ValidationError("/workers: expected an integer >= 1");
    }
    e.workers = doc.at("workers").get<std::size_t>();
  });
  c.guard("/output", [&] {
    e.output = doc.value("output", std::string("results/") + e.name);
    if (const char* dir = std::getenv("TASKRED_OUTPUT_DIR"); dir && *dir) e.output = std::filesystem::path(dir) / e.output.filename();
  });

  if (complete) {
    switch (e.kind) {
      case Kind::kCheckReduction:
      case Kind::kExactComplexity: {
        auto t1 = c.task(doc, "tau1");
        auto t2 = c.task(doc, "tau2");
        if (t1 && t2) {
          c.guard("/encoders", [&] { build_encoders(doc.at("encoders"), *t1, *t2, "/encoders"); });
          c.guard("/decoders", [&] { build_decoders(doc.at("decoders"), *t1, *t2, "/decoders"); });
          c.guard("/admissible", [&] { build_family(doc.at("admissible"), *t2, "/admissible"); });
        }
        break;
      }
      case Kind::kEstimate:
      case Kind::kAlphaSweep:
      case Kind::kModelStudy: {
        auto t1 = c.task(doc, "tau1");
        auto t2 = c.task(doc, "tau2");
        if (t1 && t2) {
          c.guard("/estimator", [&] { build_estimator(doc.value("estimator", json::object()), *t1, *t2, "/estimator"); });
          c.guard("/tau2", [&] {
            if (t1->task.actions().is_finite() != t2->task.actions().is_finite()) {
              throw ValidationError("/tau2: both tasks need finite actions or both box actions");
            }
          });
        }
        if (e.kind == Kind::kAlphaSweep) {
          c.guard("/alphas", [&] {
            const auto& a = doc.at("alphas");
            if (!a.is_array() || a.empty()) throw ValidationError("/alphas: expected a non-empty list");
            std::vector<double> v;
            for (const auto& x : a) {
              if (!x.is_number() || x.get<double>() < 0) throw ValidationError("/alphas: values must be numbers >= 0");
              v.push_back(x.get<double>());
            }
            if (!std::is_sorted(v.begin(), v.end())) throw ValidationError("/alphas: must be sorted ascending");
          });
        }
        if (e.kind == Kind::kModelStudy) {
          check_arch_list(c, doc, "h_variants");
          check_arch_list(c, doc, "g_variants");
          if (doc.value("h_variants", json::array()).empty() && doc.value("g_variants", json::array()).empty()) {
            c.diags.push_back({"/g_variants", 0, "a model study needs h_variants or g_variants"});
          }
        }
        break;
      }
      case Kind::kAudit: {
        std::vector<BuiltTask> tasks;
        if (!doc.at("tasks").is_array() || doc.at("tasks").empty()) {
          c.diags.push_back({"/tasks", 0, "expected a non-empty list"});
          break;
        }
        for (std::size_t i = 0; i < doc.at("tasks").size(); ++i) {
          const std::string where = "/tasks/" + std::to_string(i);
          c.guard(where, [&] { tasks.push_back(build_task(doc.at("tasks")[i], where)); });
        }
        if (tasks.size() == doc.at("tasks").size()) {
          c.guard("/encoders", [&] { build_encoders(doc.at("encoders"), tasks.front(), tasks.back(), "/encoders"); });
          c.guard("/decoders", [&] { build_decoders(doc.at("decoders"), tasks.front(), tasks.back(), "/decoders"); });
          c.guard("/admissible", [&] { build_family(doc.at("admissible"), tasks.front(), "/admissible"); });
        }
        break;
      }
      case Kind::kCalibrate: {
        c.guard("/tasks", [&] {
          if (!doc.at("tasks").is_array() || doc.at("tasks").empty()) throw ValidationError("/tasks: expected a non-empty list");
        });
        if (!c.diags.empty()) break;
        for (std::size_t i = 0; i < doc.at("tasks").size(); ++i) {
          const std::string where = "/tasks/" + std::to_string(i);
          c.guard(where, [&] {
            auto t = build_task(doc.at("tasks")[i], where);
            build_estimator(doc.value("estimator", json::object()), t, t, "/estimator");
          });
        }
        c.guard("/floor", [&] {
          if (doc.contains("floor") && (!doc.at("floor").is_number() || doc.at("floor").get<double>() < 0)) {
            throw ValidationError("/floor: expected a number >= 0");
          }
        });
        break;
      }
    }
  }

  if (!c.diags.empty()) {
    for (auto& d : c.diags) {
      if (d.line == 0) d.line = locate(text, d.pointer);
    }
    throw ConfigInvalid(origin, std::move(c.diags));
  }
  e.digest = digest_of(e.doc);
  return e;
}

Experiment load_experiment(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment(text.str(), path.string(), overrides);
}

}  // namespace taskred::expcli
