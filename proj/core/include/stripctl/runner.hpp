#pragma once

#include <string>
#include <vector>

#include "stripctl/scenario.hpp"

namespace stripctl {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunArtifacts {
  std::string primary_csv;
  std::string plot_csv;
  std::string manifest_json;
  std::string summary;  // one human-readable line
};

/// Executes the scenario's task and renders all artifacts in memory. Nothing
/// touches the filesystem here, so a failed run leaves no partial outputs.
RunArtifacts run_scenario(const Scenario& sc, int workers);

/// Cartesian expansion of `sweep.<key>` ranges, one primary-CSV row block per
/// point, deterministic order. Refuses more than 10^5 points.
RunArtifacts sweep_scenario(const Scenario& sc, int workers);

/// Box list of the scenario's set within the model box, one row per box.
std::string geometry_dump_csv(const Scenario& sc);

/// Simple CSV assembly: comma separated, header row, LF endings, numbers at
/// 17 significant digits.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_; }
  std::string str() const { return out_; }

 private:
  std::vector<std::string> header_;
  std::string out_;
  std::size_t rows_ = 0;
};

}  // namespace stripctl
