#include "taskred/taskred.h"

#include <cstring>
#include <string>

#include "common/error.hpp"
#include "common/version.hpp"
#include "expcli/experiment.hpp"
#include "expcli/plot_data.hpp"
#include "expcli/props.hpp"
#include "expcli/runner.hpp"
#include "taskcore/evaluate.hpp"

struct trd_task {
  taskred::core::TaskSpec task;
};

struct trd_policy {
  taskred::core::Policy policy;
};

namespace {

using nlohmann::json;

thread_local std::string last_error;

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class F>
trd_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return TRD_OK;
  } catch (const taskred::Error& e) {
    last_error = e.what();
    return static_cast<trd_status>(static_cast<int>(e.code()));
  } catch (const json::exception& e) {
    last_error = e.what();
    return TRD_ERR_CONFIGURATION;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TRD_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return TRD_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw taskred::UsageError(std::string(what) + " must not be NULL");
}

std::vector<std::string> strings(const char* const* xs, size_t n) {
  std::vector<std::string> out;
  if (n > 0) need(xs, "string list");
  for (size_t i = 0; i < n; ++i) {
    need(xs[i], "string list entry");
    out.emplace_back(xs[i]);
  }
  return out;
}

taskred::expcli::Logger logger(trd_log_fn log, void* user) {
  if (!log) return {};
  return [log, user](const std::string& line) { log(line.c_str(), user); };
}

}  // namespace

extern "C" {

const char* trd_version(void) { return taskred::kVersion; }

const char* trd_last_error(void) { return last_error.c_str(); }

void trd_string_free(char* s) { std::free(s); }

trd_status trd_task_from_json(const char* block, trd_task** out) {
  return guarded([&] {
    need(block, "block");
    need(out, "out");
    *out = nullptr;
    auto built = taskred::expcli::resolve_task(json::parse(block), "");
    *out = new trd_task{std::move(built.task)};
  });
}

void trd_task_free(trd_task* task) { delete task; }

trd_status trd_task_describe(const trd_task* task, char** json_out) {
  return guarded([&] {
    need(task, "task");
    need(json_out, "json_out");
    const auto& t = task->task;
    const json doc = {{"name", t.name()},
                      {"digest", t.digest()},
                      {"horizon", t.horizon()},
                      {"success_threshold", t.success_threshold()},
                      {"finite", t.is_finite()},
                      {"observations", taskred::core::to_json(t.observations())},
                      {"actions", taskred::core::to_json(t.actions())}};
    *json_out = dup(doc.dump());
  });
}

trd_status trd_policy_from_json(const char* doc, trd_policy** out) {
  return guarded([&] {
    need(doc, "doc");
    need(out, "out");
    *out = nullptr;
    *out = new trd_policy{taskred::core::policy_from_json(json::parse(doc))};
  });
}

void trd_policy_free(trd_policy* policy) { delete policy; }

trd_status trd_exact_return(const trd_task* task, const trd_policy* policy, double* out) {
  return guarded([&] {
    need(task, "task");
    need(policy, "policy");
    need(out, "out");
    *out = taskred::core::exact_return(task->task, policy->policy);
  });
}

trd_status trd_estimate_return(const trd_task* task, const trd_policy* policy, size_t rollouts, uint64_t seed, double* value,
                               double* standard_error) {
  return guarded([&] {
    need(task, "task");
    need(policy, "policy");
    need(value, "value");
    const auto est = taskred::core::estimate_return(task->task, policy->policy, rollouts, seed);
    *value = est.value;
    if (standard_error) *standard_error = est.standard_error;
  });
}

trd_status trd_config_validate(const char* path, const char* const* overrides, size_t n_overrides, char** diagnostics_json) {
  if (diagnostics_json) *diagnostics_json = nullptr;
  json diags = json::array();
  const trd_status st = guarded([&] {
    need(path, "path");
    try {
      taskred::expcli::load_experiment(path, strings(overrides, n_overrides));
    } catch (const taskred::expcli::ConfigInvalid& e) {
      for (const auto& d : e.diagnostics()) {
        diags.push_back({{"pointer", d.pointer}, {"line", d.line}, {"message", d.message}, {"text", format(d, path)}});
      }
      throw;
    }
  });
  if (diagnostics_json) *diagnostics_json = dup(diags.dump());
  return st;
}

trd_status trd_run(const char* path, const char* const* overrides, size_t n_overrides, trd_log_fn log, void* user,
                   char** report_json) {
  if (report_json) *report_json = nullptr;
  return guarded([&] {
    need(path, "path");
    const auto e = taskred::expcli::load_experiment(path, strings(overrides, n_overrides));
    const auto r = taskred::expcli::run_experiment(e, logger(log, user));
    if (report_json) {
      *report_json = dup(json{{"output", r.output.string()}, {"records", r.records}, {"failures", r.failures},
                              {"manifest", r.manifest}}
                             .dump());
    }
  });
}

trd_status trd_plot_data(const char* const* inputs, size_t n_inputs, const char* figure, char** csv, char** warnings_json) {
  if (csv) *csv = nullptr;
  if (warnings_json) *warnings_json = nullptr;
  return guarded([&] {
    need(figure, "figure");
    need(csv, "csv");
    std::vector<std::filesystem::path> paths;
    for (const auto& s : strings(inputs, n_inputs)) paths.emplace_back(s);
    if (paths.empty()) throw taskred::UsageError("plot data needs at least one input");
    const auto fig = taskred::expcli::figure_from_string(figure);
    const auto out = taskred::expcli::plot_data(taskred::expcli::load_records(paths), fig);
    *csv = dup(out.csv);
    if (warnings_json) *warnings_json = dup(json(out.warnings).dump());
  });
}

trd_status trd_props(const char* const* suites, size_t n_suites, trd_log_fn log, void* user, char** report_json,
                     int* all_passed) {
  if (report_json) *report_json = nullptr;
  return guarded([&] {
    const auto r = taskred::expcli::run_props(strings(suites, n_suites), logger(log, user));
    if (report_json) *report_json = dup(taskred::expcli::to_json(r).dump());
    if (all_passed) *all_passed = r.all_passed() ? 1 : 0;
  });
}

const char* trd_props_suites(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : taskred::expcli::props_suites()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return names.c_str();
}

}  // extern "C"
