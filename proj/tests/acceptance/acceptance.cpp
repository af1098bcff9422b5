#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "complexity/handcrafted.hpp"
#include "expcli/experiment.hpp"
#include "expcli/props.hpp"
#include "expcli/runner.hpp"
#include "taskcore/evaluate.hpp"

using namespace taskred;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(TASKRED_SOURCE_DIR) / "configs";
const fs::path kOut = "acceptance_results";

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Run {
  fs::path dir;
  std::vector<json> records;
  std::string text;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Run run_config(const std::string& name, std::vector<std::string> overrides = {}, const std::string& subdir = "") {
  const fs::path dir = kOut / subdir / name;
  overrides.push_back("output=" + dir.string());
  const auto e = expcli::load_experiment(kConfigs / (name + ".json"), overrides);
  expcli::run_experiment(e);
  Run r{dir, {}, read_text(dir / "records.jsonl")};
  std::istringstream lines(r.text);
  for (std::string line; std::getline(lines, line);) r.records.push_back(json::parse(line));
  return r;
}

// Reuses the records of an earlier full run in this directory.
Run load_or_run(const std::string& name) {
  const fs::path dir = kOut / name;
  if (!fs::exists(dir / "records.jsonl")) return run_config(name);
  Run r{dir, {}, read_text(dir / "records.jsonl")};
  std::istringstream lines(r.text);
  for (std::string line; std::getline(lines, line);) r.records.push_back(json::parse(line));
  return r;
}

const json* find_key(const Run& r, const std::string& key) {
  for (const auto& rec : r.records) {
    if (rec.value("key", "") == key) return &rec;
  }
  return nullptr;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string props_signature(const expcli::PropsReport& r) {
  std::string s;
  for (const auto& c : r.checks) s += c.suite + "|" + c.name + "|" + (c.passed ? "1" : "0") + "|" + c.detail + "\n";
  return s;
}

Verdict props_pass(const std::string& suite) {
  const auto r = expcli::run_props({suite});
  for (const auto& c : r.checks) {
    if (!c.passed) return {false, suite + ": " + c.name + ": " + c.detail};
  }
  return {true, suite + ": " + std::to_string(r.checks.size()) + " checks"};
}

// Every admissible tabular pi2, then every (h, g) pair of the spaces.
double brute_force(const complexity::HandcraftedPair& p, bool large) {
  const auto& H = large ? p.h_large : p.h_small;
  const auto& G = large ? p.g_large : p.g_small;
  const auto& m2 = p.tau2.finite_model();
  double worst = -1.0;
  for (const auto& pi : complexity::all_functions(m2.observation_count, m2.action_count)) {
    if (core::exact_return_for_table(p.tau2, pi.table) < p.tau2.success_threshold()) continue;
    double best = 2.0;
    for (const auto& h : H.members()) {
      for (const auto& g : G.members()) {
        std::vector<std::size_t> t(h.table().domain_size);
        for (std::size_t o = 0; o < t.size(); ++o) t[o] = g.table()(pi(h.table()(o)));
        best = std::min(best, 1.0 - core::exact_return_for_table(p.tau1, t) / p.tau1.success_threshold());
      }
    }
    worst = std::max(worst, best);
  }
  return worst;
}

struct ExactConfig {
  std::string config;
  std::string pair;
  bool large;
};

const std::vector<ExactConfig> kExact = {{"exact_self", "self", true},
                                         {"exact_opposite_actions", "opposite-actions", true},
                                         {"exact_opposite_actions_small", "opposite-actions", false},
                                         {"exact_match_vs_any", "match-vs-any", true},
                                         {"exact_noisy_sensor", "noisy-sensor", true},
                                         {"exact_wildcard_action", "wildcard-action", true},
                                         {"exact_relabeled_actions", "relabeled-actions", true}};

Verdict order_axioms() {
  auto v = props_pass("order-axioms");
  if (!v.pass) return v;
  for (const char* name : {"gridworld_audit_m0", "gridworld_audit_m1"}) {
    const auto r = run_config(name);
    if (r.records.size() != 1 || !r.records[0].value("all_passed", false)) return {false, std::string(name) + " audit failed"};
    for (const auto& row : r.records[0].at("audit").at("reduces")) {
      for (const auto& x : row) {
        if (!x.get<bool>()) return {false, std::string(name) + ": a goal pair is not equivalent"};
      }
    }
  }
  return {true, v.detail + "; both audits pass all axioms"};
}

Verdict east_north() {
  auto v = props_pass("gridworld-reduction");
  if (!v.pass) return v;
  const auto r = run_config("gridworld_east_north");
  const auto& rec = r.records.at(0);
  const auto n = rec.at("family_size").get<std::size_t>();
  const auto& verdict = rec.at("verdict");
  if (n < 50) return {false, "family of " + std::to_string(n) + " policies"};
  if (!verdict.at("holds").get<bool>()) return {false, "reduction does not hold"};
  if (verdict.at("witnesses").size() != n) return {false, "witness count differs from family size"};
  for (const auto& w : verdict.at("witnesses")) {
    if (w.at("encoder") != 1 || w.at("decoder") != 1) return {false, "policy " + w.at("policy").dump() + " used another witness"};
  }
  return {true, std::to_string(n) + " policies, witness (quarter turn, quarter turn) for each"};
}

Verdict exact_suite() {
  auto v = props_pass("complexity-exact");
  if (!v.pass) return v;
  std::map<std::string, complexity::HandcraftedPair> pairs;
  for (auto& p : complexity::handcrafted_pairs()) pairs.emplace(p.name, std::move(p));
  std::set<std::string> checked;
  bool one = false;
  std::string values;
  for (const auto& x : kExact) {
    const auto r = run_config(x.config);
    const auto& rec = r.records.at(0);
    const double value = rec.at("result").at("value").get<double>();
    const double oracle = brute_force(pairs.at(x.pair), x.large);
    if (value != oracle) return {false, x.config + ": " + fmt(value) + " but brute force gives " + fmt(oracle)};
    if (value < 0.0 || value > 1.0) return {false, x.config + ": out of [0, 1]"};
    const auto& c = rec.at("consistency");
    if (!c.at("consistent").get<bool>() || (value == 0.0) != c.at("reduction_holds").get<bool>()) {
      return {false, x.config + ": zero/reduction mismatch"};
    }
    one = one || value == 1.0;
    values += (values.empty() ? "" : " ") + x.config.substr(6) + "=" + fmt(value);
    checked.insert(x.pair);
  }
  if (checked.size() < 5 || !one) return {false, "need >= 5 pairs including one valued 1: " + values};
  return {true, values};
}

Verdict oracle_estimate() {
  const auto exact = run_config("exact_match_vs_any");
  const double truth = exact.records.at(0).at("result").at("value").get<double>();
  const auto r = run_config("oracle_estimate");
  std::size_t close = 0, runs = 0;
  std::string values;
  for (const auto& rec : r.records) {
    if (!rec.contains("result")) continue;
    ++runs;
    const double c = rec.at("result").at("value").get<double>();
    if (std::abs(c - truth) <= 0.1) ++close;
    values += (values.empty() ? "" : " ") + fmt(c);
  }
  return {runs == 5 && close >= 4, "exact " + fmt(truth) + ", estimates " + values + " (" + std::to_string(close) + "/5 within 0.1)"};
}

json summary_of(const Run& r) {
  const json* s = find_key(r, "summary");
  if (!s) throw std::runtime_error(r.dir.string() + " has no summary record");
  return *s;
}

Verdict cartpole_sweeps() {
  const auto up = summary_of(run_config("cartpole_up_down")).at("sweep");
  const auto down = summary_of(run_config("cartpole_down_up")).at("sweep");
  std::string detail;
  bool pass = true;
  if (!up.contains("selected_alpha")) {
    pass = false;
    detail = "up/down: no admissible alpha";
  } else {
    for (const auto& e : up.at("entries")) {
      if (e.at("alpha") != up.at("selected_alpha")) continue;
      const double m = e.at("mean_C").get<double>();
      pass = pass && m >= 0.6 && m <= 1.0;
      detail = "up/down at alpha " + fmt(e.at("alpha").get<double>()) + ": " + fmt(m);
    }
  }
  std::size_t admissible = 0;
  double worst = 0.0;
  for (const auto& e : down.at("entries")) {
    if (!e.at("all_admissible").get<bool>()) continue;
    ++admissible;
    worst = std::max(worst, e.at("mean_C").get<double>());
  }
  pass = pass && admissible > 0 && worst <= 0.15;
  detail += "; down/up max " + fmt(worst) + " over " + std::to_string(admissible) + " admissible alpha(s)";
  return {pass, detail};
}

Verdict decoder_depth() {
  const auto cells = summary_of(run_config("cartpole_model_study")).at("cells");
  std::optional<double> identity, two;
  for (const auto& c : cells) {
    if (c.at("space") != "G" || c.at("n").get<std::size_t>() != 5) continue;
    if (c.at("depth") == -1) identity = c.at("mean_C").get<double>();
    if (c.at("depth") == 2) two = c.at("mean_C").get<double>();
  }
  if (!identity || !two) return {false, "missing identity or 2-layer cell"};
  return {*two < *identity, "identity " + fmt(*identity) + ", 2 hidden layers " + fmt(*two)};
}

Verdict speed_tracker() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"speed_08_10", "speed_12_10"}) {
    const auto r = run_config(name);
    bool admissible = false, in_range = true;
    for (const auto& rec : r.records) {
      if (rec.contains("calibration")) {
        const auto& c = rec.at("calibration");
        const bool ok = c.at("r_star").get<double>() <= 1000.0 && c.at("r_star").get<double>() > 0.0;
        pass = pass && ok;
        if (!ok) detail += std::string(name) + ": R* " + c.at("r_star").dump() + " above the horizon; ";
      }
      if (!rec.contains("result")) continue;
      const double c = rec.at("result").at("value").get<double>();
      in_range = in_range && c >= 0.0 && c <= 1.0;
      admissible = admissible || rec.at("result").at("inner_admissible").get<bool>();
    }
    pass = pass && admissible && in_range;
    detail += std::string(name) + (admissible ? " admissible" : " never admissible") + (in_range ? "" : " out of range") + "; ";
  }
  const auto self = run_config("speed_self");
  const json* rec = find_key(self, "s0");
  const double c = rec && rec->contains("result") ? rec->at("result").at("value").get<double>() : 1.0;
  pass = pass && c <= 0.1;
  return {pass, detail + "self " + fmt(c)};
}

Verdict gradients() { return props_pass("gradients"); }

// Reruns each cheap criterion in full and one job of each expensive one.
Verdict determinism() {
  std::vector<std::string> differ;
  auto same_file = [&](const std::string& name, std::vector<std::string> overrides = {}) {
    if (run_config(name, overrides, "first").text != run_config(name, overrides, "repeat").text) differ.push_back(name);
  };
  auto same_job = [&](const std::string& name, const std::string& key, std::vector<std::string> overrides) {
    const auto full = load_or_run(name);
    const auto again = run_config(name, overrides, "repeat");
    const json *a = find_key(full, key), *b = find_key(again, key);
    if (!a || !b || *a != *b) differ.push_back(name + ":" + key);
  };
  for (const char* name : {"gridworld_audit_m0", "gridworld_audit_m1", "gridworld_east_north", "oracle_estimate"}) same_file(name);
  for (const auto& x : kExact) same_file(x.config);
  for (const char* suite : {"order-axioms", "gridworld-reduction", "complexity-exact", "gradients"}) {
    if (props_signature(expcli::run_props({suite})) != props_signature(expcli::run_props({suite}))) differ.push_back(suite);
  }
  same_job("cartpole_up_down", "a100_s0", {"seeds=[0]", "alphas=[100]"});
  same_job("cartpole_model_study", "G0_s0", {"seeds=[0]", "g_variants=[\"identity\"]"});
  same_job("speed_self", "s0", {});
  std::string d;
  for (const auto& x : differ) d += (d.empty() ? "" : ", ") + x;
  return {differ.empty(), differ.empty() ? "records identical on rerun" : "differ: " + d};
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "order axioms on four gridworld goals", 60, order_axioms},
      {2, "east reduces to north with the analytic witness", 60, east_north},
      {3, "exact complexity against brute force", 60, exact_suite},
      {4, "estimator within 0.1 of the exact value", 300, oracle_estimate},
      {5, "cartpole alpha sweeps", 7200, cartpole_sweeps},
      {6, "deeper decoder lowers down/up complexity", 3600, decoder_depth},
      {7, "speed tracker calibration and pairs", 7200, speed_tracker},
      {8, "gradients against finite differences", 60, gradients},
      {9, "rerun determinism", 10800, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  fs::create_directories(kOut);

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = v.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " | " << v.detail << " | " << fmt(secs)
              << " s" << (in_time ? "" : " (over budget " + fmt(c.budget_seconds) + " s)") << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criterion(s) fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
