#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "complexity/complexity.hpp"
#include "expcli/experiment.hpp"
#include "expcli/plot_data.hpp"
#include "expcli/props.hpp"
#include "expcli/runner.hpp"

using namespace taskred;
using namespace taskred::expcli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json side(const char* pair, const char* s) { return {{"env", "handcrafted"}, {"pair", pair}, {"side", s}}; }

std::vector<Diagnostic> diagnostics_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_experiment(text, "t.json", overrides);
  } catch (const ConfigInvalid& e) {
    return e.diagnostics();
  }
  return {};
}

bool has_pointer(const std::vector<Diagnostic>& ds, const std::string& p) {
  for (const auto& d : ds) {
    if (d.pointer == p) return true;
  }
  return false;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("taskred_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<json> read_records(const fs::path& dir) {
  std::vector<json> out;
  std::ifstream in(dir / "records.jsonl");
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

json run_record(const char* kind, json cell, double value) {
  complexity::ComplexityResult r;
  r.value = value;
  return {{"schema", 1}, {"kind", kind}, {"cell", std::move(cell)}, {"result", complexity::to_json(r)}};
}

}  // namespace

TEST_CASE("experiment kinds round-trip through their names") {
  for (auto k : {Kind::kCheckReduction, Kind::kExactComplexity, Kind::kEstimate, Kind::kAlphaSweep, Kind::kModelStudy, Kind::kAudit,
                 Kind::kCalibrate}) {
    CHECK(kind_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(kind_from_string("estimates").has_value());
}

TEST_CASE("overrides") {
  json doc = {{"a", {{"b", 1}}}, {"xs", {1, 2, 3}}};
  apply_override(doc, "a.b=2.5");
  apply_override(doc, "a.c.d=true");
  apply_override(doc, "xs.2=[7]");
  apply_override(doc, "name=plain words");
  CHECK(doc["a"]["b"] == 2.5);
  CHECK(doc["a"]["c"]["d"] == true);
  CHECK(doc["xs"][2] == json::array({7}));
  CHECK(doc["name"] == "plain words");
  CHECK_THROWS_AS(apply_override(doc, "no-equals-sign"), ValidationError);
  CHECK_THROWS_AS(apply_override(doc, "xs.9=1"), ValidationError);
}

TEST_CASE("parse errors carry a line") {
  const auto ds = diagnostics_of("{\n  \"kind\": \"estimate\",\n  \"tau1\": ,\n}\n");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].line == 3);
  CHECK(ds[0].message.find("parse error") != std::string::npos);
}

TEST_CASE("diagnostics are collected, not stopped at the first") {
  const json doc = {{"kind", "exact-complexity"}, {"tau1", side("self", "tau1")}, {"extra", 1}, {"workers", 0}};
  const auto ds = diagnostics_of(doc.dump(2));
  CHECK(has_pointer(ds, "/extra"));
  CHECK(has_pointer(ds, "/workers"));
  CHECK(has_pointer(ds, "/tau2"));
  CHECK(has_pointer(ds, "/encoders"));
  for (const auto& d : ds) {
    if (d.pointer == "/extra" || d.pointer == "/workers") CHECK(d.line >= 1);
  }

  CHECK(has_pointer(diagnostics_of(R"({"kind":"sweep"})"), "/kind"));
  CHECK(has_pointer(diagnostics_of(R"({"kind":"estimate","tau1":{"env":"moon"},"tau2":{"env":"cartpole"}})"), "/tau1/env"));
}

TEST_CASE("deep checks name nested fields") {
  const json doc = {{"kind", "alpha-sweep"},
                    {"tau1", side("self", "tau1")},
                    {"tau2", side("self", "tau2")},
                    {"alphas", {1.0, 0.5}},
                    {"estimator", {{"batch_size", 0}}}};
  const auto ds = diagnostics_of(doc.dump(2));
  CHECK(has_pointer(ds, "/alphas"));
  CHECK(has_pointer(ds, "/estimator/batch_size"));
  CHECK(diagnostics_of(doc.dump(2), {"alphas=[0,1]", "estimator.batch_size=8"}).empty());
}

TEST_CASE("defaults and output directory") {
  const json doc = {{"kind", "exact-complexity"},
                    {"tau1", side("self", "tau1")},
                    {"tau2", side("self", "tau2")},
                    {"encoders", {{"kind", "identity"}}},
                    {"decoders", {{"kind", "identity"}}},
                    {"admissible", {{"kind", "enumerate"}}}};
  const auto e = parse_experiment(doc.dump(), "dir/self.json", {});
  CHECK(e.name == "self");
  CHECK(e.seeds == std::vector<std::uint64_t>{0});
  CHECK(e.output == fs::path("results/self"));
  setenv("TASKRED_OUTPUT_DIR", "/tmp/elsewhere", 1);
  const auto moved = parse_experiment(doc.dump(), "dir/self.json", {});
  unsetenv("TASKRED_OUTPUT_DIR");
  CHECK(moved.output == fs::path("/tmp/elsewhere/self"));
}

TEST_CASE("file tokens") {
  CHECK(file_token("up/down") == "up-down");
  CHECK(file_token("v1.2_x") == "v1.2_x");
  CHECK(file_token("") == "run");
}

TEST_CASE("exact runs write records that match the library") {
  const auto dir = fresh_dir("exact");
  const json doc = {{"kind", "exact-complexity"},
                    {"output", dir.string()},
                    {"tau1", side("opposite-actions", "tau1")},
                    {"tau2", side("opposite-actions", "tau2")},
                    {"encoders", {{"kind", "handcrafted"}, {"pair", "opposite-actions"}, {"size", "large"}}},
                    {"decoders", {{"kind", "handcrafted"}, {"pair", "opposite-actions"}, {"size", "large"}}},
                    {"admissible", {{"kind", "enumerate"}}}};
  const auto report = run_experiment(parse_experiment(doc.dump(), "opp.json", {}));
  CHECK(report.failures == 0);
  const auto recs = read_records(dir);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["key"] == "exact");
  CHECK(complexity::complexity_result_from_json(recs[0]["result"]).value == doctest::Approx(0.0));
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("audits and reductions on gridworlds") {
  const auto dir = fresh_dir("audit");
  const json grid = {{"env", "gridworld"}, {"n", 2}, {"m", 0}, {"goal", "east"}};
  const json doc = {{"kind", "check-reduction"},
                    {"output", dir.string()},
                    {"tau1", grid},
                    {"tau2", grid},
                    {"encoders", {{"kind", "identity"}}},
                    {"decoders", {{"kind", "identity"}}},
                    {"admissible", {{"kind", "gridworld"}, {"random", 5}}}};
  const auto report = run_experiment(parse_experiment(doc.dump(), "grid.json", {}));
  CHECK(report.failures == 0);
  const auto recs = read_records(dir);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["verdict"]["holds"] == true);
  CHECK(recs[0]["family_size"] == 14);
}

TEST_CASE("estimate runs write curves, checkpoints and the same records twice") {
  const auto dir = fresh_dir("estimate");
  const json doc = {{"kind", "estimate"},
                    {"output", dir.string()},
                    {"seeds", {0, 1}},
                    {"tau1", side("match-vs-any", "tau1")},
                    {"tau2", side("match-vs-any", "tau2")},
                    {"estimator", {{"batch_size", 32}, {"max_iters", 30}, {"steps_per_iter", 4}, {"eval_every", 10}}}};
  const auto e = parse_experiment(doc.dump(), "est.json", {});
  run_experiment(e);
  std::ifstream a(dir / "records.jsonl");
  const std::string first{std::istreambuf_iterator<char>(a), {}};
  const auto recs = read_records(dir);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0]["key"] == "s0");
  CHECK(recs[1]["key"] == "s1");
  CHECK(recs[0]["cell"]["direction"] == "match/any");
  CHECK(fs::exists(dir / recs[0]["curve"].get<std::string>()));
  CHECK(fs::exists(dir / recs[0]["checkpoint"].get<std::string>()));
  run_experiment(e);
  std::ifstream b(dir / "records.jsonl");
  CHECK(std::string{std::istreambuf_iterator<char>(b), {}} == first);
}

TEST_CASE("plot data figures") {
  const json a = {{"direction", "x/y"}, {"tau1", "x"}, {"tau2", "y"}};
  SUBCASE("alpha sweeps average over seeds") {
    auto cell = a;
    cell["alpha"] = 1.0;
    const auto p = plot_data({run_record("alpha-sweep", cell, 0.2), run_record("alpha-sweep", cell, 0.4)}, Figure::kAlpha);
    std::istringstream lines(p.csv);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "alpha,mean_C,std_C,direction");
    CHECK(row.rfind("1,0.3", 0) == 0);
    CHECK(row.find(",x/y") != std::string::npos);
  }
  SUBCASE("model study cells") {
    auto id = a, deep = a;
    id["space"] = "g";
    id["depth"] = 0;
    deep["space"] = "g";
    deep["depth"] = 2;
    const auto p = plot_data({run_record("model-study", deep, 0.1), run_record("model-study", id, 0.5)}, Figure::kModel);
    CHECK(p.csv == "space,depth,mean_C,std_C,direction\ng,0,0.5,0,x/y\ng,2,0.10000000000000001,0,x/y\n");
  }
  SUBCASE("pairs use estimates and the selected alpha only") {
    auto lo = a, hi = a;
    lo["alpha"] = 0.0;
    hi["alpha"] = 1.0;
    json summary = {{"schema", 1}, {"kind", "alpha-sweep"}, {"direction", "x/y"}, {"sweep", {{"selected_alpha", 1.0}}}};
    const auto p = plot_data({run_record("alpha-sweep", lo, 0.9), run_record("alpha-sweep", hi, 0.5), summary}, Figure::kPairs);
    CHECK(p.csv == "tau1,tau2,mean_C,std_C\nx,y,0.5,0\n");
    summary["sweep"] = json::object();
    const auto none = plot_data({run_record("alpha-sweep", lo, 0.9), summary}, Figure::kPairs);
    CHECK(none.csv == "tau1,tau2,mean_C,std_C\n");
    CHECK(none.warnings.size() == 1);
  }
  CHECK_THROWS_AS(figure_from_string("fig5"), ValidationError);
}

TEST_CASE("record loading rejects foreign files") {
  const auto dir = fresh_dir("records");
  fs::create_directories(dir);
  std::ofstream(dir / "records.jsonl") << R"({"schema":2})" << "\n";
  CHECK_THROWS_AS(load_records({dir}), ValidationError);
  std::ofstream(dir / "records.jsonl") << R"({"schema":1,"result":{"value":"high"}})" << "\n";
  CHECK_THROWS_AS(load_records({dir}), ValidationError);
  CHECK_THROWS_AS(load_records({dir / "missing"}), IoError);
}

TEST_CASE("property suites by name") {
  const auto r = run_props({"expcli"});
  CHECK(r.all_passed());
  CHECK_THROWS_AS(run_props({"everything"}), ValidationError);
}
