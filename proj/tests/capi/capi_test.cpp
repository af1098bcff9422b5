#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "taskred/taskred.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  trd_string_free(s);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("taskred_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "exp.json";
  std::ofstream(p) << doc.dump(2) << "\n";
  return p;
}

json handcrafted(const char* pair, const char* side) { return {{"env", "handcrafted"}, {"pair", pair}, {"side", side}}; }

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("version and empty error") {
  CHECK(std::string(trd_version()) == "0.1.0");
  trd_task* t = nullptr;
  CHECK(trd_task_from_json(R"({"env":"cartpole"})", &t) == TRD_OK);
  CHECK(std::string(trd_last_error()).empty());
  trd_task_free(t);
}

TEST_CASE("tasks, policies and exact returns through opaque handles") {
  trd_task* task = nullptr;
  REQUIRE(trd_task_from_json(R"({"env":"handcrafted","pair":"match-vs-any","side":"tau1"})", &task) == TRD_OK);
  char* desc = nullptr;
  REQUIRE(trd_task_describe(task, &desc) == TRD_OK);
  const auto d = json::parse(take(desc));
  CHECK(d["finite"] == true);
  CHECK(d["digest"].get<std::string>().size() == 16);

  trd_policy* match = nullptr;
  trd_policy* constant = nullptr;
  REQUIRE(trd_policy_from_json(R"({"kind":"tabular","table":[0,1],"action_count":2})", &match) == TRD_OK);
  REQUIRE(trd_policy_from_json(R"({"kind":"tabular","table":[0,0],"action_count":2})", &constant) == TRD_OK);
  double r = -1;
  CHECK(trd_exact_return(task, match, &r) == TRD_OK);
  CHECK(r == doctest::Approx(1.0));
  CHECK(trd_exact_return(task, constant, &r) == TRD_OK);
  CHECK(r == doctest::Approx(0.5));
  double se = -1;
  CHECK(trd_estimate_return(task, constant, 400, 3, &r, &se) == TRD_OK);
  CHECK(r == doctest::Approx(0.5).epsilon(0.15));
  CHECK(se > 0.0);
  trd_policy_free(match);
  trd_policy_free(constant);
  trd_task_free(task);
}

TEST_CASE("errors map to status codes with a message") {
  trd_task* t = nullptr;
  CHECK(trd_task_from_json(R"({"env":"cartpole","gravty":1})", &t) == TRD_ERR_VALIDATION);
  CHECK(t == nullptr);
  CHECK(std::string(trd_last_error()).find("gravty") != std::string::npos);
  CHECK(trd_task_from_json(nullptr, &t) == TRD_ERR_USAGE);
  CHECK(trd_task_from_json("{not json", &t) == TRD_ERR_CONFIGURATION);

  REQUIRE(trd_task_from_json(R"({"env":"cartpole"})", &t) == TRD_OK);
  trd_policy* p = nullptr;
  REQUIRE(trd_policy_from_json(R"({"kind":"tabular","table":[0],"action_count":3})", &p) == TRD_OK);
  double r = 0;
  CHECK(trd_exact_return(t, p, &r) == TRD_ERR_UNSUPPORTED);
  trd_policy_free(p);
  trd_task_free(t);
}

TEST_CASE("validation reports every problem with pointer and line") {
  const auto dir = scratch("validate");
  const auto path = write_config(dir, {{"kind", "estimate"},
                                       {"tau1", handcrafted("self", "tau1")},
                                       {"tau2", handcrafted("self", "tau2")},
                                       {"estimator", {{"lr_policy", -1.0}}},
                                       {"bogus", 1}});
  char* diags = nullptr;
  CHECK(trd_config_validate(path.c_str(), nullptr, 0, &diags) == TRD_ERR_VALIDATION);
  const auto d = json::parse(take(diags));
  REQUIRE(d.size() == 2);
  std::set<std::string> pointers;
  for (const auto& x : d) {
    pointers.insert(x["pointer"].get<std::string>());
    CHECK(x["line"].get<int>() > 0);
  }
  CHECK(pointers == std::set<std::string>{"/bogus", "/estimator/lr_policy"});

  const char* fix[] = {"estimator.lr_policy=0.01"};
  CHECK(trd_config_validate(path.c_str(), fix, 1, &diags) == TRD_ERR_VALIDATION);
  CHECK(json::parse(take(diags)).size() == 1);
}

TEST_CASE("run writes records and a manifest, and reruns are identical") {
  const auto dir = scratch("run");
  const auto path = write_config(dir, {{"kind", "exact-complexity"},
                                       {"output", (dir / "out").string()},
                                       {"tau1", handcrafted("match-vs-any", "tau1")},
                                       {"tau2", handcrafted("match-vs-any", "tau2")},
                                       {"encoders", {{"kind", "all"}}},
                                       {"decoders", {{"kind", "all"}}},
                                       {"admissible", {{"kind", "enumerate"}}}});
  char* report = nullptr;
  REQUIRE(trd_run(path.c_str(), nullptr, 0, nullptr, nullptr, &report) == TRD_OK);
  const auto r = json::parse(take(report));
  CHECK(r["failures"] == 0);
  const auto first = read(dir / "out" / "records.jsonl");
  const auto rec = json::parse(first);
  CHECK(rec["schema"] == 1);
  CHECK(rec["result"]["value"] == 0.5);
  CHECK(rec["consistency"]["consistent"] == true);
  const auto manifest = json::parse(read(dir / "out" / "manifest.json"));
  CHECK(manifest["config_digest"].get<std::string>().size() == 16);
  CHECK(manifest["version"]["taskred"] == "0.1.0");
  REQUIRE(trd_run(path.c_str(), nullptr, 0, nullptr, nullptr, &report) == TRD_OK);
  take(report);
  CHECK(read(dir / "out" / "records.jsonl") == first);
}

TEST_CASE("compute errors become error records") {
  const auto dir = scratch("errors");
  const json bad_family = {{"kind", "explicit"}, {"policies", {{{"kind", "tabular"}, {"table", {1}}, {"action_count", 2}}}}};
  const auto path = write_config(dir, {{"kind", "check-reduction"},
                                       {"output", (dir / "out").string()},
                                       {"tau1", handcrafted("opposite-actions", "tau1")},
                                       {"tau2", handcrafted("opposite-actions", "tau2")},
                                       {"encoders", {{"kind", "identity"}}},
                                       {"decoders", {{"kind", "identity"}}},
                                       {"admissible", bad_family}});
  char* report = nullptr;
  REQUIRE(trd_run(path.c_str(), nullptr, 0, nullptr, nullptr, &report) == TRD_OK);
  CHECK(json::parse(take(report))["failures"] == 1);
  const auto rec = json::parse(read(dir / "out" / "records.jsonl"));
  CHECK(rec["error"]["code"] == 3);
  CHECK(rec["key"] == "reduction");
}

TEST_CASE("output directory override") {
  const auto dir = scratch("outdir");
  const auto path = write_config(dir, {{"kind", "exact-complexity"},
                                       {"output", "somewhere/else/named"},
                                       {"tau1", handcrafted("self", "tau1")},
                                       {"tau2", handcrafted("self", "tau2")},
                                       {"encoders", {{"kind", "identity"}}},
                                       {"decoders", {{"kind", "identity"}}},
                                       {"admissible", {{"kind", "enumerate"}}}});
  setenv("TASKRED_OUTPUT_DIR", (dir / "redirected").c_str(), 1);
  char* report = nullptr;
  const auto st = trd_run(path.c_str(), nullptr, 0, nullptr, nullptr, &report);
  unsetenv("TASKRED_OUTPUT_DIR");
  REQUIRE(st == TRD_OK);
  take(report);
  CHECK(fs::exists(dir / "redirected" / "named" / "records.jsonl"));
}

TEST_CASE("plot data from a small sweep") {
  const auto dir = scratch("plot");
  const auto path = write_config(dir, {{"kind", "alpha-sweep"},
                                       {"output", (dir / "out").string()},
                                       {"label", "match/any"},
                                       {"seeds", {0}},
                                       {"tau1", handcrafted("match-vs-any", "tau1")},
                                       {"tau2", handcrafted("match-vs-any", "tau2")},
                                       {"alphas", {0.0, 1.0}},
                                       {"estimator", {{"batch_size", 32}, {"max_iters", 40}, {"steps_per_iter", 8}}}});
  char* report = nullptr;
  REQUIRE(trd_run(path.c_str(), nullptr, 0, nullptr, nullptr, &report) == TRD_OK);
  take(report);
  const auto sweep = read(dir / "out" / "sweep.csv");
  CHECK(sweep.rfind("row,alpha,seed,C,std_C,inner_admissible,direction\n", 0) == 0);
  CHECK(sweep.find("\nselected,") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "curves" / "match-any_a0_s0.csv"));

  const std::string in = (dir / "out").string();
  const char* inputs[] = {in.c_str()};
  char* csv = nullptr;
  char* warnings = nullptr;
  REQUIRE(trd_plot_data(inputs, 1, "fig2", &csv, &warnings) == TRD_OK);
  const auto text = take(csv);
  CHECK(text.rfind("alpha,mean_C,std_C,direction\n", 0) == 0);
  CHECK(text.find(",0,match/any\n") != std::string::npos);
  CHECK(take(warnings) == "[]");
  CHECK(trd_plot_data(inputs, 1, "fig9", &csv, &warnings) == TRD_ERR_VALIDATION);
}

TEST_CASE("props through the C API") {
  const char* suites[] = {"expcli"};
  char* report = nullptr;
  int all = 0;
  REQUIRE(trd_props(suites, 1, nullptr, nullptr, &report, &all) == TRD_OK);
  CHECK(all == 1);
  CHECK(json::parse(take(report))["checks"].size() >= 3);
  const char* unknown[] = {"nope"};
  CHECK(trd_props(unknown, 1, nullptr, nullptr, &report, &all) == TRD_ERR_VALIDATION);
  CHECK(std::string(trd_props_suites()).find("order-axioms") != std::string::npos);
}
