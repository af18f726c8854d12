#pragma once

#include "dvar/forecast.hpp"
#include "dvar/joint.hpp"

#include <vector>

namespace dvar::test {

// A marginal with chosen coefficients; theta has one row per grid point.
inline MarginalCDFModel hand_marginal(std::vector<double> points, const Eigen::MatrixXd& theta, int variable) {
  MarginalCDFModel m{DRCoefficients{LocationGrid(std::move(points), GridSource::explicit_points), theta,
                                    std::vector<bool>(static_cast<std::size_t>(theta.rows()), true), 0.0},
                     Link(LinkId::logit), CovariateTransform::identity(static_cast<int>(theta.cols())), variable, true};
  return m;
}

inline FactorizedJointModel hand_joint(std::vector<MarginalCDFModel> marginals, std::vector<int> ordering, int lags,
                                       std::vector<std::string> names, int horizon = 0, bool contemporaneous = true) {
  FactorizedJointModel m;
  m.marginals = std::move(marginals);
  m.spec = DesignSpec{std::move(ordering), lags, horizon, contemporaneous};
  m.names = std::move(names);
  return m;
}

// Logistic location family on a fine grid: F(y | x) = Λ(k·(y - w·x)).
inline MarginalCDFModel location_marginal(const Eigen::VectorXd& w, double k, double lo, double hi, int points,
                                          int variable) {
  std::vector<double> grid;
  Eigen::MatrixXd theta(points, w.size());
  for (int g = 0; g < points; ++g) {
    const double y = lo + (hi - lo) * g / (points - 1);
    grid.push_back(y);
    theta.row(g) = -k * w.transpose();
    theta(g, 0) += k * y;
  }
  return hand_marginal(grid, theta, variable);
}

}  // namespace dvar::test
