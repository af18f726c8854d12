#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <vector>

namespace dvar {

/// Density values on a 1-D axis (y empty, density n×1) or a rectangular
/// 2-D grid (density nx×ny).
struct DensityGrid {
  std::vector<double> x, y;
  Eigen::MatrixXd density;
  std::vector<double> bandwidth;

  bool bivariate() const noexcept { return !y.empty(); }
  /// Σ density · cell area on the (uniform) grid.
  double riemann_sum() const;
};

/// 0.9 · min(sd, IQR/1.34) · S^(-1/5). Throws SpecError for S < 2 or zero
/// spread.
double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& samples);

/// `points` evenly spaced values over [min - 3h, max + 3h].
std::vector<double> kde_axis(const Eigen::Ref<const Eigen::VectorXd>& samples, double bandwidth, int points = 200);

/// Gaussian kernel density. Without a bandwidth the Silverman rule is used.
/// Throws SpecError for S < 2 or a non-positive bandwidth.
DensityGrid kde1d(const Eigen::Ref<const Eigen::VectorXd>& samples, std::optional<double> bandwidth = std::nullopt,
                  int points = 200);
DensityGrid kde1d(const Eigen::Ref<const Eigen::VectorXd>& samples, double bandwidth, const std::vector<double>& axis);

/// Product Gaussian kernel density of an S×2 sample.
DensityGrid kde2d(const Eigen::MatrixXd& samples, double h1, double h2, int points = 200, unsigned threads = 1);
DensityGrid kde2d(const Eigen::MatrixXd& samples, double h1, double h2, const std::vector<double>& axis_x,
                  const std::vector<double>& axis_y, unsigned threads = 1);

/// Local maxima of a 1-D density after merging flat runs. Peaks lower than
/// min_relative_height times the global maximum are ignored.
int count_modes(const DensityGrid& grid, double min_relative_height = 0.01);

/// Long format: x, density or x, y, density.
void write_density(std::ostream& out, const DensityGrid& grid);

}  // namespace dvar
