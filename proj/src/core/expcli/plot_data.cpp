#include "expcli/plot_data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "advest/estimator.hpp"
#include "common/error.hpp"
#include "common/version.hpp"
#include "complexity/complexity.hpp"

namespace taskred::expcli {

using nlohmann::json;

Figure figure_from_string(const std::string& s) {
  if (s == "fig2") return Figure::kAlpha;
  if (s == "fig3") return Figure::kModel;
  if (s == "fig4") return Figure::kPairs;
  throw ValidationError("unknown figure '" + s + "' (known: fig2, fig3, fig4)");
}

std::vector<json> load_records(const std::vector<std::filesystem::path>& inputs) {
  std::vector<json> out;
  for (auto path : inputs) {
    if (std::filesystem::is_directory(path)) path /= "records.jsonl";
    std::ifstream in(path);
    if (!in) throw IoError("cannot read records '" + path.string() + "'");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      const std::string where = path.string() + ":" + std::to_string(n);
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ValidationError(where + ": " + e.what());
      }
      if (!rec.is_object() || rec.value("schema", 0) != kRecordSchema) throw ValidationError(where + ": not a schema-1 record");
      if (rec.contains("result")) {
        try {
          complexity::complexity_result_from_json(rec.at("result"));
        } catch (const std::exception& e) {
          throw ValidationError(where + ": malformed result: " + e.what());
        }
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

namespace {

struct Cell {
  std::vector<double> values;
  std::size_t attempts = 0;
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

std::string stats(const Cell& c) {
  if (c.values.empty()) return ",";
  const auto [mean, sd] = advest::mean_std(c.values);
  return num(mean) + "," + num(sd);
}

// Record used as an estimator run: has a cell, and either a result or an error.
bool is_run(const json& r) { return r.contains("cell") && r.at("cell").contains("direction"); }

void add(Cell& cell, const json& r) {
  ++cell.attempts;
  if (r.contains("result")) cell.values.push_back(r.at("result").at("value").get<double>());
}

}  // namespace

PlotData plot_data(const std::vector<json>& records, Figure figure) {
  PlotData out;
  std::ostringstream csv;
  auto warn_missing = [&](const std::string& what, const Cell& c) {
    if (c.values.empty()) out.warnings.push_back("missing cell " + what + ": " + std::to_string(c.attempts) + " run(s), none succeeded");
  };

  if (figure == Figure::kAlpha) {
    csv << "alpha,mean_C,std_C,direction\n";
    std::vector<std::string> directions;
    std::vector<double> alphas;
    std::map<std::pair<std::string, double>, Cell> cells;
    for (const auto& r : records) {
      if (!is_run(r) || r.value("kind", "") != "alpha-sweep") continue;
      const auto d = r.at("cell").at("direction").get<std::string>();
      const auto a = r.at("cell").at("alpha").get<double>();
      if (std::find(directions.begin(), directions.end(), d) == directions.end()) directions.push_back(d);
      if (std::find(alphas.begin(), alphas.end(), a) == alphas.end()) alphas.push_back(a);
      add(cells[{d, a}], r);
    }
    std::sort(alphas.begin(), alphas.end());
    for (const auto& d : directions) {
      for (double a : alphas) {
        const Cell& c = cells[{d, a}];
        warn_missing("alpha=" + num(a) + " direction=" + d, c);
        csv << num(a) << ',' << stats(c) << ',' << d << '\n';
      }
    }
  } else if (figure == Figure::kModel) {
    csv << "space,depth,mean_C,std_C,direction\n";
    std::vector<std::tuple<std::string, std::string, int>> order;
    std::map<std::tuple<std::string, std::string, int>, Cell> cells;
    for (const auto& r : records) {
      if (!is_run(r) || r.value("kind", "") != "model-study") continue;
      const auto key = std::make_tuple(r.at("cell").at("direction").get<std::string>(), r.at("cell").at("space").get<std::string>(),
                                       r.at("cell").at("depth").get<int>());
      if (!cells.count(key)) order.push_back(key);
      add(cells[key], r);
    }
    std::stable_sort(order.begin(), order.end());
    for (const auto& key : order) {
      const auto& [d, space, depth] = key;
      warn_missing(space + " depth=" + std::to_string(depth) + " direction=" + d, cells[key]);
      csv << space << ',' << depth << ',' << stats(cells[key]) << ',' << d << '\n';
    }
  } else {
    csv << "tau1,tau2,mean_C,std_C\n";
    std::map<std::string, double> selected;  // direction -> selected alpha
    std::set<std::string> unselected;
    for (const auto& r : records) {
      if (r.value("kind", "") != "alpha-sweep" || !r.contains("sweep")) continue;
      const auto d = r.at("direction").get<std::string>();
      if (r.at("sweep").contains("selected_alpha")) {
        selected[d] = r.at("sweep").at("selected_alpha").get<double>();
      } else {
        unselected.insert(d);
      }
    }
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, Cell> cells;
    for (const auto& r : records) {
      if (!is_run(r)) continue;
      const auto kind = r.value("kind", "");
      const auto d = r.at("cell").at("direction").get<std::string>();
      if (kind == "alpha-sweep") {
        if (!selected.count(d) || r.at("cell").at("alpha").get<double>() != selected[d]) continue;
      } else if (kind != "estimate") {
        continue;
      }
      const auto key = std::make_pair(r.at("cell").at("tau1").get<std::string>(), r.at("cell").at("tau2").get<std::string>());
      if (!cells.count(key)) order.push_back(key);
      add(cells[key], r);
    }
    for (const auto& d : unselected) out.warnings.push_back("sweep " + d + " has no admissible alpha; its runs are left out");
    for (const auto& key : order) {
      warn_missing(key.first + "/" + key.second, cells[key]);
      csv << key.first << ',' << key.second << ',' << stats(cells[key]) << '\n';
    }
  }
  out.csv = csv.str();
  return out;
}

}  // namespace taskred::expcli
