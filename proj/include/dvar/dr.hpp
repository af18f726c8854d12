#pragma once

#include "dvar/link.hpp"
#include "dvar/transform.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace dvar {

enum class GridSource { empirical_quantiles, uniform_range, explicit_points };

std::string_view to_string(GridSource s) noexcept;
GridSource parse_grid_source(std::string_view s);

/// Threshold locations y_1 < ... < y_m at which the binary regressions
/// 1{Y <= y_g} are fitted.
class LocationGrid {
 public:
  /// Throws GridError unless m >= 2 and points are finite and strictly
  /// increasing.
  LocationGrid(std::vector<double> points, GridSource source);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  GridSource source() const noexcept { return source_; }
  double min() const noexcept { return points_.front(); }
  double max() const noexcept { return points_.back(); }

  friend bool operator==(const LocationGrid&, const LocationGrid&) = default;

 private:
  std::vector<double> points_;
  GridSource source_;
};

/// m empirical quantiles (linear interpolation between order statistics) at
/// equally spaced probabilities in [trim_lo, trim_hi]; ties are merged, so
/// the grid may have fewer than m points. Throws GridError for constant
/// samples or bad arguments.
LocationGrid make_grid(std::span<const double> samples, int m, double trim_lo, double trim_hi);

struct GridOptions {
  GridSource source = GridSource::empirical_quantiles;
  int points = 99;
  double trim_lo = 0.01;
  double trim_hi = 0.99;
  std::vector<double> explicit_points;  ///< used when source == explicit_points
};

/// Builds a grid for one response sample. uniform_range spaces points evenly
/// between the trimmed quantiles; explicit points must lie inside the sample
/// range.
LocationGrid make_grid(std::span<const double> samples, const GridOptions& options);

struct FitOptions {
  /// L1 penalty on every coefficient but the intercept; 0 is plain MLE.
  double penalty = 0.0;
  /// Choose the penalty by BIC over a log-spaced path instead.
  bool select_penalty = false;
  int penalty_path_points = 20;
  double penalty_path_ratio = 1e-3;

  double tol_grad = 1e-8;
  double tol_penalized = 1e-6;
  int max_iter = 200;
  int max_iter_penalized = 20000;

  bool warm_start = true;
  /// > 1 fits contiguous grid chunks concurrently, each chunk starting cold.
  unsigned threads = 1;
  double max_nonconverged_fraction = 0.10;
};

/// Result of one binary regression.
struct LocationFit {
  Eigen::VectorXd theta;
  bool converged = false;
  bool separated = false;
  double loglik = 0.0;          ///< mean log-likelihood at theta
  int iterations = 0;
  std::vector<double> trace;    ///< mean log-likelihood after each accepted step
};

/// Mean log-likelihood (1/n) Σ [d log Λ(φᵀθ) + (1-d) log(1-Λ(φᵀθ))] with
/// d = 1{Y <= y_loc}.
double location_loglik(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses, double y_loc,
                       const Link& link, const Eigen::VectorXd& theta);
/// ∂/∂θ of location_loglik.
Eigen::VectorXd location_gradient(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses,
                                  double y_loc, const Link& link, const Eigen::VectorXd& theta);
/// Score Ψ = (1/n) Σ [Λ(φᵀθ) - d] R(φᵀθ) φ, the negative gradient.
Eigen::VectorXd location_score(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses, double y_loc,
                               const Link& link, const Eigen::VectorXd& theta);
Eigen::MatrixXd location_hessian(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses,
                                 double y_loc, const Link& link, const Eigen::VectorXd& theta);

/// Maximizes the location log-likelihood. With penalty 0 this is damped
/// Newton with Armijo backtracking (gradient ascent when the Hessian is not
/// negative definite) until ‖gradient‖∞ <= tol_grad. With penalty > 0 it is
/// accelerated proximal gradient with restarts, stopping when the L1
/// subgradient condition holds to tol_penalized; the intercept is never
/// penalized.
///
/// Perfect separation (constant indicators, or a near-perfect in-sample fit)
/// and divergence return converged = false with the last clamped iterate.
/// Throws ShapeError on dimension mismatch.
LocationFit fit_location(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses, double y_loc,
                         const Link& link, double penalty, const Eigen::VectorXd& init,
                         const FitOptions& options = {});

/// Per-location coefficients θ(y_g), one row per grid point.
struct DRCoefficients {
  LocationGrid grid;
  Eigen::MatrixXd theta;
  std::vector<bool> converged;
  double penalty = 0.0;

  std::size_t nonconverged() const;
};

/// Fits every grid location, warm-starting each row at the previous
/// solution. Throws FitQualityError when more than
/// options.max_nonconverged_fraction of the rows fail.
DRCoefficients fit_marginal(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses,
                            const LocationGrid& grid, const Link& link, const FitOptions& options = {});

/// Monotone rearrangement: the ascending sort of the values.
std::vector<double> rearrange(std::vector<double> values);

/// Fitted conditional CDF F̂(y | x) = Λ(φ(x)ᵀθ(y)) of one variable.
///
/// Beyond the grid: 0 below the first point, and the top (rearranged) value
/// at or above the last point; the residual mass above it is not forced to 1.
struct MarginalCDFModel {
  DRCoefficients coefficients;
  Link link;
  CovariateTransform transform;
  int variable = 0;
  bool rearranged = true;

  const LocationGrid& grid() const noexcept { return coefficients.grid; }
  int raw_dimension() const noexcept { return transform.raw_dimension(); }

  /// F̂(y_g | x) at every grid point, rearranged when the flag is set.
  /// `x` holds raw covariates, the constant 1 first.
  Eigen::VectorXd cdf_table(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Same table from already-transformed features.
  Eigen::VectorXd cdf_table_features(const Eigen::Ref<const Eigen::VectorXd>& features) const;
};

/// Right-continuous step evaluation of the rearranged table.
/// Throws NumericError for non-finite covariates.
double eval_cdf(const MarginalCDFModel& model, const Eigen::VectorXd& x, double y);

/// Step lookup shared by eval_cdf and the tables built from it.
double step_cdf(const std::vector<double>& points, const Eigen::VectorXd& table, double y);

/// min{ g : table(g) >= u }, or the last point when u exceeds every value.
double generalized_inverse(const std::vector<double>& points, const Eigen::VectorXd& table, double u);

/// Fits a marginal model on raw covariates, applying `transform` first.
MarginalCDFModel fit_marginal_model(const Eigen::MatrixXd& raw_covariates, const Eigen::VectorXd& responses,
                                    int variable, const Link& link, const CovariateTransform& transform,
                                    const GridOptions& grid, const FitOptions& options = {});

}  // namespace dvar
