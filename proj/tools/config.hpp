#pragma once

#include "dvar/bootstrap.hpp"
#include "dvar/calibration.hpp"
#include "dvar/counterfactual.hpp"
#include "dvar/irf.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dvar::cli {

struct SourceConfig {
  std::string path;
  PanelSchema schema;
};

enum class SupportCheck { off, warn, error };

struct ScenarioConfig {
  std::string name;
  std::string variable;
  std::string at;    ///< period t of the shocked Y_t
  std::string kind;  ///< point_mass, truncated_normal, truncated_gamma, table, fitted
  CounterfactualLaw law;
  SupportCheck support_check = SupportCheck::warn;
};

struct RunConfig {
  std::string base_dir;  ///< relative paths resolve against the config file
  std::string text;      ///< raw config bytes, hashed into sidecars

  std::vector<SourceConfig> sources;
  std::optional<Frequency> frequency;  ///< common frequency after aggregation
  Coverage coverage = Coverage::require_full;
  std::string sample_from, sample_to;

  std::vector<std::string> variables;  ///< panel columns, in this order; all when empty
  std::vector<std::string> ordering;   ///< factorization order; `variables` when empty
  SuiteSpec suite;
  ModelOptions model;

  Eigen::Index draws = 10000;
  std::uint64_t seed = 20240101;
  StreamMode stream_mode = StreamMode::common;
  unsigned threads = 0;

  std::vector<std::string> forecast_at;
  std::vector<int> forecast_horizons;
  std::vector<double> bandwidths = {0.25, 0.8};  ///< panel column order
  int kde_points = 200;

  std::map<std::string, ScenarioConfig> scenarios;
  std::vector<int> irf_horizons;  ///< default 0..max horizon
  int irf_grid_points = 101;

  bool correlation_report = true;
  Eigen::Index correlation_draws = 10000;

  std::string window_end;
  std::vector<std::string> calibration_variables;
  std::vector<int> calibration_horizons;
  Eigen::Index calibration_draws = 10000;
  PITMode calibration_mode = PITMode::composed;

  BlockPlan bootstrap;
  std::string bootstrap_scenario;
  Eigen::Index bootstrap_draws = 2000;

  std::string out_dir = "out";
  std::string model_path;  ///< default <out>/model.json

  std::string resolve(const std::string& path) const;
  std::string output(const std::string& file) const;
};

/// Reads a YAML run configuration. Throws ConfigError naming the offending
/// key.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& base_dir);

/// Flag overrides.
struct Overrides {
  std::string data, date_col, freq, out;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};
void apply(RunConfig& config, const Overrides& o);

/// Loads, aggregates, joins and orders the panel. Variable names in the
/// config are validated here.
SeriesPanel load_data(const RunConfig& config);

/// Index of a variable, or ConfigError naming it.
int variable_index(const SeriesPanel& panel, const std::string& name);
/// Row of a period label, or ConfigError.
Eigen::Index period_row(const SeriesPanel& panel, const std::string& label);

}  // namespace dvar::cli
