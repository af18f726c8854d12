#pragma once

#include "dvar/panel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace dvar::test {

inline SeriesPanel quarterly(const Eigen::MatrixXd& values, std::vector<std::string> names,
                             Period start = Period::quarter(1960, 1)) {
  std::vector<Period> dates;
  Period p = start;
  for (Eigen::Index t = 0; t < values.rows(); ++t, p = p.next()) dates.push_back(p);
  return SeriesPanel(std::move(dates), values, std::move(names), Frequency::quarterly);
}

inline SeriesPanel quarterly(const Eigen::VectorXd& values, const std::string& name = "y") {
  return quarterly(Eigen::MatrixXd(values), std::vector<std::string>{name});
}

// Standard library generator, independent of the library's keyed streams.
inline Eigen::VectorXd std_normals(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = d(gen);
  return out;
}

inline Eigen::VectorXd std_uniforms(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d;
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = d(gen);
  return out;
}

// Bivariate VAR(1) with correlated Gaussian shocks.
inline SeriesPanel gaussian_var(Eigen::Index T, unsigned seed) {
  const Eigen::VectorXd e1 = std_normals(T + 50, seed), e2 = std_normals(T + 50, seed + 1);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(T + 50, 2);
  for (Eigen::Index t = 1; t < y.rows(); ++t) {
    y(t, 0) = 0.5 * y(t - 1, 0) + e1(t);
    y(t, 1) = 0.2 * y(t - 1, 0) + 0.3 * y(t - 1, 1) + 0.4 * e1(t) + e2(t);
  }
  return quarterly(Eigen::MatrixXd(y.bottomRows(T)), {"a", "b"});
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

inline std::vector<double> to_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace dvar::test
