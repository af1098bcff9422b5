#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "taskred/taskred.h"

namespace {

enum Exit { kOk = 0, kInvalid = 1, kComputeFailed = 2, kPropsFailed = 3 };

std::vector<const char*> c_strings(const std::vector<std::string>& xs) {
  std::vector<const char*> out;
  for (const auto& x : xs) out.push_back(x.c_str());
  return out;
}

// Config, usage and validation problems are the caller's to fix.
int exit_for(trd_status st) {
  switch (st) {
    case TRD_OK:
      return kOk;
    case TRD_ERR_CONFIGURATION:
    case TRD_ERR_USAGE:
    case TRD_ERR_VALIDATION:
      return kInvalid;
    default:
      return kComputeFailed;
  }
}

void print_line(const char* line, void*) {
  std::cerr << line << std::endl;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  trd_string_free(s);
  return out;
}

int fail(trd_status st) {
  std::cerr << "error: " << trd_last_error() << "\n";
  return exit_for(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task reduction and relative complexity experiments"};
  app.set_version_flag("--version", std::string(trd_version()));
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run an experiment file");
  run->add_option("config", config, "Experiment file (JSON)")->required();
  run->add_option("-s,--set", overrides, "Override a config key: a.b.c=value");
  run->add_flag("-q,--quiet", quiet, "No progress lines");

  auto* validate = app.add_subcommand("validate", "Check an experiment file without running it");
  validate->add_option("config", config, "Experiment file (JSON)")->required();
  validate->add_option("-s,--set", overrides, "Override a config key: a.b.c=value");

  std::vector<std::string> inputs;
  std::string figure, out_path;
  auto* plot = app.add_subcommand("plot-data", "Aggregate result records into figure CSV");
  plot->add_option("figure", figure, "fig2 | fig3 | fig4")->required()->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
  plot->add_option("inputs", inputs, "Result directories or records.jsonl files")->required();
  plot->add_option("-o,--output", out_path, "Write the CSV here instead of stdout");

  std::vector<std::string> suites;
  std::string report_path;
  auto* props = app.add_subcommand("props", "Run the property suites");
  props->add_option("--suite", suites, std::string("Suites to run (default all): ") + trd_props_suites());
  props->add_option("--report", report_path, "Write the JSON report here");
  props->add_flag("-q,--quiet", quiet, "Only print failures and the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  const auto ov = c_strings(overrides);

  if (*validate) {
    char* diags = nullptr;
    const trd_status st = trd_config_validate(config.c_str(), ov.data(), ov.size(), &diags);
    const auto doc = take(diags);
    if (st == TRD_OK) {
      std::cout << config << ": ok\n";
      return kOk;
    }
    if (st != TRD_ERR_VALIDATION) return fail(st);
    std::cerr << trd_last_error() << "\n";
    return kInvalid;
  }

  if (*run) {
    char* diags = nullptr;
    const trd_status vst = trd_config_validate(config.c_str(), ov.data(), ov.size(), &diags);
    take(diags);
    if (vst != TRD_OK) return fail(vst);
    char* report = nullptr;
    const trd_status st = trd_run(config.c_str(), ov.data(), ov.size(), quiet ? nullptr : print_line, nullptr, &report);
    const auto doc = take(report);
    if (st != TRD_OK) return fail(st);
    const auto summary = nlohmann::json::parse(doc);
    std::cout << "results: " << summary["output"].get<std::string>() << " (" << summary["records"] << " records)\n";
    if (summary["failures"].get<std::size_t>() > 0) {
      std::cerr << summary["failures"] << " job(s) failed; see the error records\n";
      return kComputeFailed;
    }
    return kOk;
  }

  if (*plot) {
    const auto in = c_strings(inputs);
    char* csv = nullptr;
    char* warnings = nullptr;
    const trd_status st = trd_plot_data(in.data(), in.size(), figure.c_str(), &csv, &warnings);
    const auto text = take(csv);
    const auto warn = take(warnings);
    if (st != TRD_OK) return fail(st);
    for (const auto& w : nlohmann::json::parse(warn)) std::cerr << "warning: " << w.get<std::string>() << "\n";
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!(f << text)) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kComputeFailed;
      }
    }
    return kOk;
  }

  const auto su = c_strings(suites);
  char* report = nullptr;
  int all_passed = 0;
  auto log = [](const char* line, void* user) {
    if (!*static_cast<bool*>(user) || std::string(line).rfind("FAIL", 0) == 0) std::cout << line << std::endl;
  };
  const trd_status st = trd_props(su.data(), su.size(), log, &quiet, &report, &all_passed);
  const auto doc = take(report);
  if (st != TRD_OK) return fail(st);
  if (!report_path.empty()) std::ofstream(report_path, std::ios::binary) << doc << "\n";
  std::cout << (all_passed ? "all properties hold" : "property failures") << "\n";
  return all_passed ? kOk : kPropsFailed;
}
