#pragma once

#include "dvar/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dvar {

struct BlockPlan {
  Eigen::Index block_length = 8;
  int replications = 500;
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double max_failed_fraction = 0.20;
};

/// Throws PlanError unless 1 <= L <= T, B >= 1 and level in (0, 1).
void validate(const BlockPlan& plan, Eigen::Index periods);

/// Source row of each resampled row: ceil(T/L) block starts drawn uniformly
/// from {0, ..., T-L}, concatenated and cut to T rows.
std::vector<Eigen::Index> block_indices(Eigen::Index periods, Eigen::Index block_length, std::uint64_t seed);

/// Moving block resample. Dates are relabeled as consecutive periods from
/// the first source date. Throws PlanError when L > T or L < 1.
SeriesPanel moving_block_resample(const SeriesPanel& panel, Eigen::Index block_length, std::uint64_t seed);

struct BandResult {
  Eigen::VectorXd estimate, lower, upper;
  int replications = 0;
  int failed = 0;
  std::vector<std::string> failures;  ///< first few failure messages
};

using PanelStatistic = std::function<Eigen::VectorXd(const SeriesPanel&)>;

/// Percentile intervals at (1 ± level)/2 over B moving-block replications,
/// pointwise per coordinate. Replication b resamples with
/// derive_seed(seed, b). A replication that throws or returns the wrong
/// length is excluded and counted; more than max_failed_fraction failures
/// throws BootstrapQualityError.
BandResult bootstrap_bands(const SeriesPanel& panel, const PanelStatistic& statistic, const BlockPlan& plan);

/// Linearly interpolated sample quantile (type 7) of unsorted values.
double interpolated_quantile(std::vector<double> values, double p);

/// Columns coordinate, point, lower, upper.
void write_bands(std::ostream& out, const std::vector<std::string>& coordinates, const BandResult& bands);

}  // namespace dvar
