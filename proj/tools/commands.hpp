#pragma once

#include "config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dvar::cli {

struct Context {
  RunConfig config;
  std::string config_hash;
  std::string command;
  bool quiet = false;

  std::string models_dir() const;
};

int cmd_fit(const Context& ctx);
int cmd_forecast(const Context& ctx, const std::vector<std::string>& at, const std::vector<int>& horizons);
int cmd_dirf(const Context& ctx, const std::string& scenario);
int cmd_calibrate(const Context& ctx);
int cmd_bands(const Context& ctx, const std::string& target);

struct SimulateOptions {
  std::string dgp = "gaussian_var";
  Eigen::Index periods = 200;
  std::uint64_t seed = 1;
  std::string start = "1960Q1";
  std::string out = "panel.csv";
};
int cmd_simulate(const SimulateOptions& options, const std::string& config_hash);

/// Synthetic panels shared by the simulate command and the tests.
SeriesPanel simulate_panel(const std::string& dgp, Eigen::Index periods, std::uint64_t seed,
                           const Period& start);

}  // namespace dvar::cli
