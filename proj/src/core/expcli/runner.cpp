#include "expcli/runner.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "advest/estimator.hpp"
#include "common/version.hpp"
#include "complexity/complexity.hpp"

namespace taskred::expcli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Job {
  std::string key;
  json cell;  // plot coordinates, copied into success and error records
  std::function<json()> work;
};

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

std::string alpha_token(double alpha) {
  std::ostringstream s;
  s << alpha;
  return s.str();
}

// Writes records in job order as soon as every earlier job has finished.
class Appender {
 public:
  Appender(const fs::path& path, std::size_t jobs) : slots_(jobs) {
    fs::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
  }

  void put(std::size_t index, json record) {
    std::lock_guard<std::mutex> lock(mu_);
    slots_[index] = std::move(record);
    while (next_ < slots_.size() && slots_[next_]) {
      out_ << slots_[next_]->dump() << '\n';
      ++next_;
    }
    out_.flush();
  }

  void append(const json& record) {
    std::lock_guard<std::mutex> lock(mu_);
    out_ << record.dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
  std::vector<std::optional<json>> slots_;
  std::size_t next_ = 0;
};

json error_json(const std::exception& err) {
  int code = 0;
  if (const auto* e = dynamic_cast<const Error*>(&err)) code = static_cast<int>(e->code());
  return {{"code", code}, {"message", err.what()}};
}

json base_record(const Experiment& e, const std::string& key) {
  return {{"schema", kRecordSchema}, {"experiment", e.name}, {"kind", to_string(e.kind)}, {"key", key}};
}

struct EstimatorSetup {
  BuiltTask tau1;
  BuiltTask tau2;
  advest::EstimatorConfig base;
  std::string direction;
};

EstimatorSetup estimator_setup(const Experiment& e, json& calibrations) {
  json cal1, cal2;
  EstimatorSetup s{resolve_task(e.doc.at("tau1"), "/tau1", &cal1), resolve_task(e.doc.at("tau2"), "/tau2", &cal2), {}, {}};
  for (auto* c : {&cal1, &cal2}) {
    if (!c->is_null()) calibrations.push_back(*c);
  }
  s.base = build_estimator(e.doc.value("estimator", json::object()), s.tau1, s.tau2, "/estimator");
  s.direction = direction_label(e, s.tau1, s.tau2);
  return s;
}

// One estimator run; writes its curve and checkpoint and returns the record body.
json estimator_run(const Experiment& e, const EstimatorSetup& s, const advest::EstimatorConfig& c, const std::string& stem) {
  auto outcome = advest::estimate(s.tau1.task, s.tau2.task, c);
  outcome.result.label = s.direction;
  const fs::path curve = fs::path("curves") / (stem + ".csv");
  const fs::path checkpoint = fs::path("checkpoints") / (stem + ".json");
  write_text(e.output / curve, advest::curve_csv(outcome.curve));
  write_text(e.output / checkpoint, outcome.checkpoint.dump());
  return {{"result", complexity::to_json(outcome.result)},
          {"converged", outcome.converged},
          {"curve", curve.generic_string()},
          {"checkpoint", checkpoint.generic_string()}};
}

json cell_of(const EstimatorSetup& s) {
  return {{"direction", s.direction}, {"tau1", s.tau1.task.name()}, {"tau2", s.tau2.task.name()}};
}

std::vector<advest::ArchSpec> arch_list(const json& doc, const char* key) {
  std::vector<advest::ArchSpec> out;
  if (!doc.contains(key)) return out;
  for (std::size_t i = 0; i < doc.at(key).size(); ++i) {
    out.push_back(advest::arch_from_json(doc.at(key)[i], std::string("/") + key + "/" + std::to_string(i)));
  }
  return out;
}

std::string sweep_csv(const std::vector<json>& records, const advest::SweepResult& sweep, const std::string& direction) {
  std::ostringstream out;
  out.precision(17);
  out << "row,alpha,seed,C,std_C,inner_admissible,direction\n";
  for (const auto& r : records) {
    if (!r.contains("result")) continue;
    const auto& res = r.at("result");
    out << "run," << res.at("alpha").get<double>() << ',' << res.at("seed").get<std::uint64_t>() << ','
        << res.at("value").get<double>() << ",," << (res.at("inner_admissible").get<bool>() ? 1 : 0) << ',' << direction << '\n';
  }
  if (sweep.selected) {
    const auto& sel = sweep.entries[*sweep.selected];
    out << "selected," << sel.alpha << ",," << sel.mean << ',' << sel.stddev << ",1," << direction << '\n';
  } else {
    out << "selected,,,,,0," << direction << '\n';
  }
  return out.str();
}

}  // namespace

std::string file_token(const std::string& label) {
  std::string out;
  for (char ch : label) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_' ? ch : '-';
  return out.empty() ? "run" : out;
}

BuiltTask resolve_task(const json& block, const std::string& where, json* calibration) {
  BuiltTask built = build_task(block, where);
  if (block.value("env", "") != "speed" || !block.contains("calibrate")) return built;
  const auto& cal = block.at("calibrate");
  auto config = advest::estimator_config_from_json(cal.value("estimator", json::object()), advest::continuous_defaults(),
                                                   where + "/calibrate/estimator");
  config.seed = cal.value("seed", std::uint64_t{0});
  const auto c = advest::calibrate_success_threshold(built.task, config, cal.value("floor", 0.0));
  if (calibration) *calibration = advest::to_json(c);
  built.task = c.task;
  return built;
}

RunReport run_experiment(const Experiment& e, const Logger& log) {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  fs::create_directories(e.output);

  std::vector<Job> jobs;
  json calibrations = json::array();
  std::optional<EstimatorSetup> setup;
  std::mutex result_mu;
  std::vector<json> finished;  // filled by index, for the summaries

  switch (e.kind) {
    case Kind::kCheckReduction:
    case Kind::kExactComplexity: {
      jobs.push_back({e.kind == Kind::kCheckReduction ? "reduction" : "exact", json::object(), [&e]() -> json {
                        const auto t1 = resolve_task(e.doc.at("tau1"), "/tau1");
                        const auto t2 = resolve_task(e.doc.at("tau2"), "/tau2");
                        const auto H = build_encoders(e.doc.at("encoders"), t1, t2, "/encoders");
                        const auto G = build_decoders(e.doc.at("decoders"), t1, t2, "/decoders");
                        const auto family = build_family(e.doc.at("admissible"), t2, "/admissible");
                        json out = {{"tau1", t1.task.name()}, {"tau2", t2.task.name()},
                                    {"tau1_digest", t1.task.digest()}, {"tau2_digest", t2.task.digest()},
                                    {"family_size", family.size()},
                                    {"quantification_digest", complexity::quantification_digest(t1.task, t2.task, H, G, family)}};
                        if (e.kind == Kind::kCheckReduction) {
                          out["verdict"] = reduction::to_json(reduction::check_reduction(t1.task, t2.task, H, G, family));
                        } else {
                          auto r = complexity::exact_relative_complexity(t1.task, t2.task, H, G, family);
                          r.label = direction_label(e, t1, t2);
                          out["result"] = complexity::to_json(r);
                          out["consistency"] = complexity::to_json(complexity::consistency_check(t1.task, t2.task, H, G, family));
                        }
                        return out;
                      }});
      break;
    }
    case Kind::kAudit: {
      jobs.push_back({"audit", json::object(), [&e]() -> json {
                        std::vector<BuiltTask> built;
                        std::vector<core::TaskSpec> tasks;
                        for (std::size_t i = 0; i < e.doc.at("tasks").size(); ++i) {
                          built.push_back(resolve_task(e.doc.at("tasks")[i], "/tasks/" + std::to_string(i)));
                          tasks.push_back(built.back().task);
                        }
                        const auto H = build_encoders(e.doc.at("encoders"), built.front(), built.back(), "/encoders");
                        const auto G = build_decoders(e.doc.at("decoders"), built.front(), built.back(), "/decoders");
                        std::vector<std::vector<core::Policy>> families;
                        for (const auto& t : built) families.push_back(build_family(e.doc.at("admissible"), t, "/admissible"));
                        const auto family = reduction::SpaceFamily::uniform(tasks.size(), H, G);
                        json names = json::array();
                        for (const auto& t : tasks) names.push_back(t.name());
                        const auto axioms = reduction::verify_space_axioms(family);
                        json out = {{"tasks", names}, {"axioms", reduction::to_json(axioms)}};
                        const auto audit = reduction::partial_order_audit(tasks, family, families);
                        out["audit"] = reduction::to_json(audit);
                        out["all_passed"] = audit.all_passed();
                        return out;
                      }});
      break;
    }
    case Kind::kCalibrate: {
      for (std::size_t i = 0; i < e.doc.at("tasks").size(); ++i) {
        for (auto seed : e.seeds) {
          jobs.push_back({"t" + std::to_string(i) + "_s" + std::to_string(seed), json::object(), [&e, i, seed]() -> json {
                            const auto t = build_task(e.doc.at("tasks")[i], "/tasks/" + std::to_string(i));
                            auto c = build_estimator(e.doc.value("estimator", json::object()), t, t, "/estimator");
                            c.seed = seed;
                            const auto cal = advest::calibrate_success_threshold(t.task, c, e.doc.value("floor", 0.0));
                            return {{"calibration", advest::to_json(cal)}};
                          }});
        }
      }
      break;
    }
    case Kind::kEstimate:
    case Kind::kAlphaSweep:
    case Kind::kModelStudy: {
      say("preparing tasks");
      setup = estimator_setup(e, calibrations);
      const EstimatorSetup& s = *setup;
      const std::string stem = file_token(s.direction);
      if (e.kind == Kind::kEstimate) {
        for (auto seed : e.seeds) {
          auto c = s.base;
          c.seed = seed;
          json cell = cell_of(s);
          cell["alpha"] = c.alpha;
          jobs.push_back({"s" + std::to_string(seed), cell, [&e, &s, c, stem]() {
                            return estimator_run(e, s, c, stem + "_a" + alpha_token(c.alpha) + "_s" + std::to_string(c.seed));
                          }});
        }
      } else if (e.kind == Kind::kAlphaSweep) {
        for (double alpha : e.doc.at("alphas").get<std::vector<double>>()) {
          for (auto seed : e.seeds) {
            auto c = s.base;
            c.seed = seed;
            c.alpha = alpha;
            json cell = cell_of(s);
            cell["alpha"] = alpha;
            const std::string key = "a" + alpha_token(alpha) + "_s" + std::to_string(seed);
            jobs.push_back({key, cell, [&e, &s, c, stem, key]() { return estimator_run(e, s, c, stem + "_" + key); }});
          }
        }
      } else {
        const auto h_variants = arch_list(e.doc, "h_variants");
        const auto g_variants = arch_list(e.doc, "g_variants");
        auto add = [&](const std::string& space, std::size_t index, const advest::ArchSpec& arch) {
          for (auto seed : e.seeds) {
            auto c = s.base;
            c.seed = seed;
            (space == "H" ? c.encoder : c.decoder) = arch;
            json cell = cell_of(s);
            cell["space"] = space;
            cell["depth"] = arch.depth();
            cell["alpha"] = c.alpha;
            const std::string key = space + std::to_string(index) + "_s" + std::to_string(seed);
            jobs.push_back({key, cell, [&e, &s, c, stem, key]() { return estimator_run(e, s, c, stem + "_" + key); }});
          }
        };
        for (std::size_t i = 0; i < h_variants.size(); ++i) add("H", i, h_variants[i]);
        for (std::size_t i = 0; i < g_variants.size(); ++i) add("G", i, g_variants[i]);
      }
      break;
    }
  }

  Appender appender(e.output / "records.jsonl", jobs.size());
  finished.resize(jobs.size());
  std::vector<double> seconds(jobs.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto t0 = clock::now();
      json record = base_record(e, jobs[i].key);
      if (!jobs[i].cell.empty()) record["cell"] = jobs[i].cell;
      try {
        record.update(jobs[i].work());
      } catch (const std::exception& err) {
        record["error"] = error_json(err);
        ++failures;
      }
      seconds[i] = std::chrono::duration<double>(clock::now() - t0).count();
      say(jobs[i].key + (record.contains("error") ? " failed: " + record["error"]["message"].get<std::string>() : " done") +
          " (" + std::to_string(seconds[i]) + " s)");
      {
        std::lock_guard<std::mutex> lock(result_mu);
        finished[i] = record;
      }
      appender.put(i, std::move(record));
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(e.workers, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::size_t records = jobs.size();

  for (const auto& c : calibrations) {
    json rec = base_record(e, "calibration");
    rec["calibration"] = c;
    appender.append(rec);
    ++records;
  }

  if (e.kind == Kind::kAlphaSweep) {
    advest::SweepResult sweep;
    for (double alpha : e.doc.at("alphas").get<std::vector<double>>()) {
      advest::SweepEntry entry;
      entry.alpha = alpha;
      entry.all_admissible = true;
      std::vector<double> values;
      for (const auto& r : finished) {
        if (r.at("cell").at("alpha").get<double>() != alpha) continue;
        if (!r.contains("result")) {
          entry.all_admissible = false;
          continue;
        }
        auto res = complexity::complexity_result_from_json(r.at("result"));
        entry.all_admissible = entry.all_admissible && res.inner_admissible;
        values.push_back(res.value);
        entry.runs.push_back(std::move(res));
      }
      std::tie(entry.mean, entry.stddev) = advest::mean_std(values);
      if (values.empty()) entry.all_admissible = false;
      sweep.entries.push_back(std::move(entry));
    }
    sweep.selected = advest::select_alpha(sweep.entries);
    json rec = base_record(e, "summary");
    rec["sweep"] = advest::to_json(sweep);
    rec["direction"] = setup->direction;
    appender.append(rec);
    ++records;
    write_text(e.output / "sweep.csv", sweep_csv(finished, sweep, setup->direction));
  }

  if (e.kind == Kind::kModelStudy) {
    std::map<std::pair<std::string, int>, advest::StudyCell> cells;
    std::vector<std::pair<std::string, int>> order;
    for (const auto& r : finished) {
      const auto key = std::make_pair(r.at("cell").at("space").get<std::string>(), r.at("cell").at("depth").get<int>());
      if (!cells.count(key)) {
        order.push_back(key);
        cells[key].space = key.first;
        cells[key].depth = key.second;
      }
      if (!r.contains("result")) continue;
      auto res = complexity::complexity_result_from_json(r.at("result"));
      if (res.inner_admissible) ++cells[key].admissible;
      cells[key].runs.push_back(std::move(res));
    }
    json out = json::array();
    for (const auto& key : order) {
      auto& cell = cells[key];
      std::vector<double> values;
      for (const auto& r : cell.runs) values.push_back(r.value);
      std::tie(cell.mean, cell.stddev) = advest::mean_std(values);
      out.push_back(advest::to_json(cell));
    }
    json rec = base_record(e, "summary");
    rec["cells"] = out;
    rec["direction"] = setup->direction;
    appender.append(rec);
    ++records;
  }

  json job_times = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) job_times.push_back({{"key", jobs[i].key}, {"wall_seconds", seconds[i]}});
  RunReport report;
  report.output = e.output;
  report.records = records;
  report.failures = failures;
  report.manifest = {{"schema", kRecordSchema},
                     {"experiment", e.name},
                     {"kind", to_string(e.kind)},
                     {"origin", e.origin},
                     {"config_digest", e.digest},
                     {"config", e.doc},
                     {"seeds", e.seeds},
                     {"workers", e.workers},
                     {"version", {{"taskred", kVersion}, {"compiler", __VERSION__}, {"cxx", __cplusplus}}},
                     {"records", records},
                     {"failures", report.failures},
                     {"jobs", job_times},
                     {"wall_seconds", std::chrono::duration<double>(clock::now() - started).count()}};
  write_text(e.output / "manifest.json", report.manifest.dump(2) + "\n");
  return report;
}

}  // namespace taskred::expcli
