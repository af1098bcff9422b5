#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace taskred::expcli {

enum class Figure { kAlpha, kModel, kPairs };

Figure figure_from_string(const std::string& s);  // "fig2" | "fig3" | "fig4"

struct PlotData {
  std::string csv;
  std::vector<std::string> warnings;
};

// Column order:
//   fig2: alpha,mean_C,std_C,direction
//   fig3: space,depth,mean_C,std_C,direction
//   fig4: tau1,tau2,mean_C,std_C
// Cells whose runs all failed are emitted with empty mean/std and a warning.
// fig4 uses every estimate run and, for sweeps, the runs at the selected alpha.
PlotData plot_data(const std::vector<nlohmann::json>& records, Figure figure);

// Reads records.jsonl files (or result directories containing one). Every
// record must carry "schema": 1 and re-parse into its result type.
std::vector<nlohmann::json> load_records(const std::vector<std::filesystem::path>& inputs);

}  // namespace taskred::expcli
