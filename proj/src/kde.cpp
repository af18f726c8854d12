#include "dvar/kde.hpp"

#include "dvar/csv.hpp"
#include "dvar/error.hpp"
#include "dvar/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace dvar {
namespace {

double type7(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double spacing(const std::vector<double>& axis) {
  return axis.size() < 2 ? 0.0 : (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
}

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw SpecError("bandwidth must be positive and finite");
}

void check_axis(const std::vector<double>& axis) {
  if (axis.size() < 2) throw SpecError("a density axis needs at least two points");
  if (!std::is_sorted(axis.begin(), axis.end())) throw SpecError("density axis must be sorted");
}

// Kernel matrix K(a, s) = φ((axis_a - x_s)/h)/h for samples [begin, end).
Eigen::MatrixXd kernel_block(const std::vector<double>& axis, const double* x, Eigen::Index n, double h) {
  const double c = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
  Eigen::MatrixXd K(static_cast<Eigen::Index>(axis.size()), n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (std::size_t a = 0; a < axis.size(); ++a) {
      const double u = (axis[a] - x[s]) / h;
      K(static_cast<Eigen::Index>(a), s) = c * std::exp(-0.5 * u * u);
    }
  return K;
}

constexpr Eigen::Index chunk = 4096;

}  // namespace

double DensityGrid::riemann_sum() const {
  const double dx = spacing(x);
  return bivariate() ? density.sum() * dx * spacing(y) : density.sum() * dx;
}

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& samples) {
  const Eigen::Index S = samples.size();
  if (S < 2) throw SpecError("rule-of-thumb bandwidth needs at least two samples");
  std::vector<double> v(samples.data(), samples.data() + S);
  std::sort(v.begin(), v.end());
  const double mean = samples.mean();
  const double sd = std::sqrt((samples.array() - mean).square().sum() / static_cast<double>(S - 1));
  const double iqr = type7(v, 0.75) - type7(v, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  if (!(spread > 0.0)) throw SpecError("rule-of-thumb bandwidth undefined for a sample with zero spread");
  return 0.9 * spread * std::pow(static_cast<double>(S), -0.2);
}

std::vector<double> kde_axis(const Eigen::Ref<const Eigen::VectorXd>& samples, double bandwidth, int points) {
  check_bandwidth(bandwidth);
  if (samples.size() == 0) throw SpecError("empty sample");
  if (points < 2) throw SpecError("a density axis needs at least two points");
  const double lo = samples.minCoeff() - 3.0 * bandwidth, hi = samples.maxCoeff() + 3.0 * bandwidth;
  std::vector<double> axis(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) axis[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  axis.back() = hi;
  return axis;
}

DensityGrid kde1d(const Eigen::Ref<const Eigen::VectorXd>& samples, std::optional<double> bandwidth, int points) {
  if (samples.size() < 2) throw SpecError("density estimation needs at least two samples");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  check_bandwidth(h);
  return kde1d(samples, h, kde_axis(samples, h, points));
}

DensityGrid kde1d(const Eigen::Ref<const Eigen::VectorXd>& samples, double bandwidth, const std::vector<double>& axis) {
  if (samples.size() < 2) throw SpecError("density estimation needs at least two samples");
  check_bandwidth(bandwidth);
  check_axis(axis);
  const Eigen::VectorXd x = samples;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(axis.size()));
  for (Eigen::Index s = 0; s < x.size(); s += chunk) {
    const Eigen::Index n = std::min(chunk, x.size() - s);
    f += kernel_block(axis, x.data() + s, n, bandwidth).rowwise().sum();
  }
  return {axis, {}, f / static_cast<double>(x.size()), {bandwidth}};
}

DensityGrid kde2d(const Eigen::MatrixXd& samples, double h1, double h2, int points, unsigned threads) {
  if (samples.cols() != 2) throw ShapeError("bivariate density needs an S×2 sample");
  check_bandwidth(h1);
  check_bandwidth(h2);
  return kde2d(samples, h1, h2, kde_axis(samples.col(0), h1, points), kde_axis(samples.col(1), h2, points), threads);
}

DensityGrid kde2d(const Eigen::MatrixXd& samples, double h1, double h2, const std::vector<double>& axis_x,
                  const std::vector<double>& axis_y, unsigned threads) {
  if (samples.cols() != 2) throw ShapeError("bivariate density needs an S×2 sample");
  if (samples.rows() < 2) throw SpecError("density estimation needs at least two samples");
  check_bandwidth(h1);
  check_bandwidth(h2);
  check_axis(axis_x);
  check_axis(axis_y);
  const Eigen::VectorXd x = samples.col(0), y = samples.col(1);
  const Eigen::Index S = samples.rows();
  const auto chunks = static_cast<std::size_t>((S + chunk - 1) / chunk);
  std::vector<Eigen::MatrixXd> partial(chunks);
  // Fixed chunking keeps the summation order independent of the thread count.
  parallel_for(chunks, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const Eigen::Index s = static_cast<Eigen::Index>(c) * chunk;
      const Eigen::Index n = std::min(chunk, S - s);
      partial[c] = kernel_block(axis_x, x.data() + s, n, h1) * kernel_block(axis_y, y.data() + s, n, h2).transpose();
    }
  });
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(axis_x.size()),
                                            static_cast<Eigen::Index>(axis_y.size()));
  for (const auto& p : partial) f += p;
  return {axis_x, axis_y, f / static_cast<double>(S), {h1, h2}};
}

int count_modes(const DensityGrid& grid, double min_relative_height) {
  if (grid.bivariate()) throw ShapeError("mode counting is for 1-D densities");
  std::vector<double> f;
  for (Eigen::Index i = 0; i < grid.density.rows(); ++i)
    if (f.empty() || grid.density(i, 0) != f.back()) f.push_back(grid.density(i, 0));
  if (f.empty()) return 0;
  const double floor = min_relative_height * *std::max_element(f.begin(), f.end());
  int modes = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const bool left = i == 0 || f[i] > f[i - 1];
    const bool right = i + 1 == f.size() || f[i] > f[i + 1];
    if (left && right && f[i] >= floor && f[i] > 0.0) ++modes;
  }
  return modes;
}

void write_density(std::ostream& out, const DensityGrid& grid) {
  if (!grid.bivariate()) {
    csv::write_row(out, {"x", "density"});
    for (std::size_t a = 0; a < grid.x.size(); ++a)
      csv::write_row(out, {csv::format(grid.x[a]), csv::format(grid.density(static_cast<Eigen::Index>(a), 0))});
    return;
  }
  csv::write_row(out, {"x", "y", "density"});
  for (std::size_t a = 0; a < grid.x.size(); ++a)
    for (std::size_t b = 0; b < grid.y.size(); ++b)
      csv::write_row(out, {csv::format(grid.x[a]), csv::format(grid.y[b]),
                           csv::format(grid.density(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)))});
}

}  // namespace dvar
