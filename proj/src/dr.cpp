#include "dvar/dr.hpp"

#include "dvar/error.hpp"
#include "dvar/parallel.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

namespace dvar {
namespace {

// Linear-interpolation (type 7) quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

// Λ⁻¹(p), used for intercept starting values.
double link_quantile(const Link& link, double p) {
  p = std::clamp(p, link_epsilon, 1.0 - link_epsilon);
  if (link.id() == LinkId::logit) return std::log(p / (1.0 - p));
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

class LocationObjective {
 public:
  LocationObjective(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses, double y_loc,
                    const Link& link)
      : x_(features), link_(link), n_(static_cast<double>(features.rows())) {
    if (features.rows() != responses.size())
      throw ShapeError("features have " + std::to_string(features.rows()) + " rows but responses have " +
                       std::to_string(responses.size()));
    if (features.rows() == 0) throw ShapeError("empty design");
    if (!std::isfinite(y_loc)) throw NumericError("non-finite grid location");
    d_.resize(responses.size());
    for (Eigen::Index i = 0; i < responses.size(); ++i) d_[static_cast<std::size_t>(i)] = responses(i) <= y_loc;
  }

  Eigen::Index dim() const { return x_.cols(); }

  double fraction() const {
    return static_cast<double>(std::count(d_.begin(), d_.end(), true)) / n_;
  }

  double value(const Eigen::VectorXd& theta) const {
    check(theta);
    const Eigen::VectorXd u = x_ * theta;
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += link_.terms(u(i), d_[static_cast<std::size_t>(i)]).value;
    return s / n_;
  }

  Evaluation evaluate(const Eigen::VectorXd& theta, bool with_hessian) const {
    check(theta);
    const Eigen::VectorXd u = x_ * theta;
    Eigen::VectorXd g(u.size()), c(u.size());
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const auto t = link_.terms(u(i), d_[static_cast<std::size_t>(i)]);
      s += t.value;
      g(i) = t.gradient;
      c(i) = t.curvature;
    }
    Evaluation e;
    e.value = s / n_;
    e.gradient = x_.transpose() * g / n_;
    if (with_hessian) e.hessian = x_.transpose() * c.asDiagonal() * x_ / n_;
    return e;
  }

  // Lipschitz constant of the gradient.
  double lipschitz() const {
    const Eigen::MatrixXd gram = x_.transpose() * x_ / n_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return link_.curvature_bound() * std::max(es.eigenvalues().maxCoeff(), 1e-12);
  }

 private:
  void check(const Eigen::VectorXd& theta) const {
    if (theta.size() != x_.cols())
      throw ShapeError("theta has " + std::to_string(theta.size()) + " entries, design has " +
                       std::to_string(x_.cols()) + " columns");
  }

  const Eigen::MatrixXd& x_;
  Link link_;
  double n_;
  std::vector<bool> d_;
};

double penalty_norm(const Eigen::VectorXd& theta) { return theta.tail(theta.size() - 1).lpNorm<1>(); }

bool subgradient_ok(const Eigen::VectorXd& theta, const Eigen::VectorXd& g, double penalty, double tol) {
  if (std::abs(g(0)) > tol) return false;
  for (Eigen::Index k = 1; k < theta.size(); ++k) {
    if (theta(k) != 0.0) {
      if (std::abs(g(k) - penalty * (theta(k) > 0 ? 1.0 : -1.0)) > tol) return false;
    } else if (std::abs(g(k)) > penalty + tol) {
      return false;
    }
  }
  return true;
}

void soft_threshold(Eigen::VectorXd& theta, double t) {
  for (Eigen::Index k = 1; k < theta.size(); ++k) {
    const double a = std::abs(theta(k)) - t;
    theta(k) = a > 0 ? std::copysign(a, theta(k)) : 0.0;
  }
}

LocationFit newton(const LocationObjective& obj, const Eigen::VectorXd& init, const FitOptions& opt) {
  LocationFit fit;
  fit.theta = init;
  Evaluation e = obj.evaluate(fit.theta, true);
  fit.trace.push_back(e.value);
  double lipschitz = -1.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    if (e.gradient.lpNorm<Eigen::Infinity>() <= opt.tol_grad) {
      fit.converged = true;
      break;
    }
    Eigen::VectorXd dir;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-e.hessian);
    bool newton_ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (newton_ok) {
      const auto diag = ldlt.vectorD();
      newton_ok = diag.minCoeff() > 1e-13 * std::max(1.0, diag.maxCoeff());
    }
    if (newton_ok) {
      dir = ldlt.solve(e.gradient);
      newton_ok = dir.allFinite() && e.gradient.dot(dir) > 0;
    }
    if (!newton_ok) {
      if (lipschitz < 0) lipschitz = obj.lipschitz();
      dir = e.gradient / lipschitz;
    }
    const double slope = e.gradient.dot(dir);
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd cand;
    for (int ls = 0; ls < 60; ++ls) {
      cand = fit.theta + step * dir;
      const double v = obj.value(cand);
      if (std::isfinite(v) && v >= e.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++fit.iterations;
    if (!accepted) break;
    fit.theta = cand;
    e = obj.evaluate(fit.theta, true);
    fit.trace.push_back(e.value);
    if (!fit.theta.allFinite() || fit.theta.lpNorm<Eigen::Infinity>() > 1e6) break;
  }
  if (!fit.converged && e.gradient.lpNorm<Eigen::Infinity>() <= opt.tol_grad) fit.converged = true;
  fit.loglik = e.value;
  return fit;
}

LocationFit proximal_gradient(const LocationObjective& obj, double penalty, const Eigen::VectorXd& init,
                              const FitOptions& opt) {
  const double L = obj.lipschitz();
  const auto objective = [&](const Eigen::VectorXd& th) { return -obj.value(th) + penalty * penalty_norm(th); };
  const auto prox_step = [&](const Eigen::VectorXd& from) {
    Eigen::VectorXd next = from + obj.evaluate(from, false).gradient / L;
    soft_threshold(next, penalty / L);
    return next;
  };

  LocationFit fit;
  Eigen::VectorXd theta = init;
  Eigen::VectorXd y = theta;
  double f_theta = objective(theta);
  double t = 1.0;
  fit.trace.push_back(-f_theta);
  for (int it = 0; it < opt.max_iter_penalized; ++it) {
    Eigen::VectorXd next = prox_step(y);
    double f_next = objective(next);
    if (f_next > f_theta) {  // adaptive restart
      t = 1.0;
      next = prox_step(theta);
      f_next = objective(next);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - theta);
    theta = std::move(next);
    f_theta = f_next;
    t = t_next;
    fit.trace.push_back(-f_theta);
    ++fit.iterations;
    if (it % 5 == 0 || it + 1 == opt.max_iter_penalized) {
      const Eigen::VectorXd g = obj.evaluate(theta, false).gradient;
      if (subgradient_ok(theta, g, penalty, opt.tol_penalized)) {
        fit.converged = true;
        break;
      }
    }
    if (!theta.allFinite() || theta.lpNorm<Eigen::Infinity>() > 1e6) break;
  }
  fit.theta = theta;
  fit.loglik = obj.value(theta);
  return fit;
}

}  // namespace

std::string_view to_string(GridSource s) noexcept {
  switch (s) {
    case GridSource::empirical_quantiles:
      return "empirical_quantiles";
    case GridSource::uniform_range:
      return "uniform_range";
    case GridSource::explicit_points:
      return "explicit";
  }
  return "?";
}

GridSource parse_grid_source(std::string_view s) {
  if (s == "empirical_quantiles" || s == "quantiles") return GridSource::empirical_quantiles;
  if (s == "uniform_range" || s == "uniform") return GridSource::uniform_range;
  if (s == "explicit") return GridSource::explicit_points;
  throw ConfigError("unknown grid source '" + std::string(s) + "'");
}

LocationGrid::LocationGrid(std::vector<double> points, GridSource source)
    : points_(std::move(points)), source_(source) {
  if (points_.size() < 2) throw GridError("a location grid needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw GridError("non-finite grid point");
    if (i > 0 && !(points_[i] > points_[i - 1])) throw GridError("grid points must be strictly increasing");
  }
}

LocationGrid make_grid(std::span<const double> samples, int m, double trim_lo, double trim_hi) {
  if (samples.empty()) throw GridError("no samples");
  if (m < 2) throw GridError("grid size must be >= 2");
  if (!(trim_lo >= 0.0 && trim_lo < trim_hi && trim_hi <= 1.0)) throw GridError("trim must satisfy 0 <= lo < hi <= 1");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw GridError("degenerate support: all samples identical");
  std::vector<double> pts;
  for (int g = 0; g < m; ++g) {
    const double p = trim_lo + (trim_hi - trim_lo) * g / (m - 1);
    const double q = sorted_quantile(sorted, p);
    if (pts.empty() || q > pts.back()) pts.push_back(q);
  }
  if (pts.size() < 2) throw GridError("degenerate support after deduplication");
  return LocationGrid(std::move(pts), GridSource::empirical_quantiles);
}

LocationGrid make_grid(std::span<const double> samples, const GridOptions& o) {
  switch (o.source) {
    case GridSource::empirical_quantiles:
      return make_grid(samples, o.points, o.trim_lo, o.trim_hi);
    case GridSource::uniform_range: {
      const LocationGrid ends = make_grid(samples, 2, o.trim_lo, o.trim_hi);
      if (o.points < 2) throw GridError("grid size must be >= 2");
      std::vector<double> pts;
      for (int g = 0; g < o.points; ++g)
        pts.push_back(ends.min() + (ends.max() - ends.min()) * g / (o.points - 1));
      return LocationGrid(std::move(pts), GridSource::uniform_range);
    }
    case GridSource::explicit_points: {
      if (samples.empty()) throw GridError("no samples");
      const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
      for (double p : o.explicit_points)
        if (p < *lo || p > *hi) throw GridError("explicit grid point outside the observed sample range");
      return LocationGrid(o.explicit_points, GridSource::explicit_points);
    }
  }
  throw GridError("unknown grid source");
}

double location_loglik(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses, double y_loc,
                       const Link& link, const Eigen::VectorXd& theta) {
  return LocationObjective(features, responses, y_loc, link).value(theta);
}

Eigen::VectorXd location_gradient(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses,
                                  double y_loc, const Link& link, const Eigen::VectorXd& theta) {
  return LocationObjective(features, responses, y_loc, link).evaluate(theta, false).gradient;
}

Eigen::VectorXd location_score(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses, double y_loc,
                               const Link& link, const Eigen::VectorXd& theta) {
  return -location_gradient(features, responses, y_loc, link, theta);
}

Eigen::MatrixXd location_hessian(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses,
                                 double y_loc, const Link& link, const Eigen::VectorXd& theta) {
  return LocationObjective(features, responses, y_loc, link).evaluate(theta, true).hessian;
}

LocationFit fit_location(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses, double y_loc,
                         const Link& link, double penalty, const Eigen::VectorXd& init, const FitOptions& options) {
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw SpecError("penalty must be a finite value >= 0");
  const LocationObjective obj(features, responses, y_loc, link);
  if (init.size() != obj.dim()) throw ShapeError("initial value has the wrong dimension");
  if (!init.allFinite()) throw NumericError("non-finite initial value");

  const double q = obj.fraction();
  if (q == 0.0 || q == 1.0) {
    // MLE at infinity: return the intercept-only iterate at the clamp.
    LocationFit fit;
    fit.theta = Eigen::VectorXd::Zero(obj.dim());
    fit.theta(0) = link_quantile(link, q);
    fit.loglik = obj.value(fit.theta);
    fit.trace = {obj.value(init), fit.loglik};
    fit.separated = true;
    return fit;
  }

  LocationFit fit = penalty > 0.0 ? proximal_gradient(obj, penalty, init, options) : newton(obj, init, options);
  // A near-perfect in-sample fit means the indicators are separable.
  if (fit.loglik > -1e-7 || fit.theta.lpNorm<Eigen::Infinity>() > 1e6) {
    fit.separated = true;
    fit.converged = false;
  }
  return fit;
}

std::size_t DRCoefficients::nonconverged() const {
  return static_cast<std::size_t>(std::count(converged.begin(), converged.end(), false));
}

namespace {

Eigen::VectorXd cold_start(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses, double y_loc,
                           const Link& link) {
  Eigen::VectorXd init = Eigen::VectorXd::Zero(features.cols());
  const double q = static_cast<double>((responses.array() <= y_loc).count()) / static_cast<double>(responses.size());
  init(0) = link_quantile(link, std::clamp(q, 1e-3, 1.0 - 1e-3));
  return init;
}

DRCoefficients fit_path_point(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses,
                              const LocationGrid& grid, const Link& link, double penalty, const FitOptions& opt) {
  const auto m = grid.size();
  DRCoefficients out{grid, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), features.cols()),
                     std::vector<bool>(m, false), penalty};
  const unsigned threads = opt.threads > 1 ? std::min<unsigned>(opt.threads, static_cast<unsigned>(m)) : 1u;
  std::vector<char> conv(m, 0);
  parallel_for(m, threads, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd prev;
    bool prev_ok = false;
    for (std::size_t g = begin; g < end; ++g) {
      const double y = grid.points()[g];
      const Eigen::VectorXd init =
          (opt.warm_start && prev_ok) ? prev : cold_start(features, responses, y, link);
      const LocationFit fit = fit_location(features, responses, y, link, penalty, init, opt);
      out.theta.row(static_cast<Eigen::Index>(g)) = fit.theta.transpose();
      conv[g] = fit.converged ? 1 : 0;
      prev = fit.theta;
      prev_ok = fit.converged;
    }
  });
  for (std::size_t g = 0; g < m; ++g) out.converged[g] = conv[g] != 0;
  return out;
}

void check_quality(const DRCoefficients& c, const FitOptions& opt) {
  const auto bad = c.nonconverged();
  if (static_cast<double>(bad) > opt.max_nonconverged_fraction * static_cast<double>(c.grid.size())) {
    std::ostringstream msg;
    msg << bad << " of " << c.grid.size() << " locations did not converge:";
    for (std::size_t g = 0; g < c.grid.size(); ++g)
      if (!c.converged[g]) msg << ' ' << c.grid.points()[g];
    throw FitQualityError(msg.str());
  }
}

}  // namespace

DRCoefficients fit_marginal(const Eigen::MatrixXd& features, const Eigen::VectorXd& responses,
                            const LocationGrid& grid, const Link& link, const FitOptions& options) {
  if (!options.select_penalty) {
    DRCoefficients c = fit_path_point(features, responses, grid, link, options.penalty, options);
    check_quality(c, options);
    return c;
  }

  // Largest useful penalty: every slope is zero at the intercept-only fit.
  double lambda_max = 0.0;
  for (double y : grid.points()) {
    const Eigen::VectorXd th = cold_start(features, responses, y, link);
    const Eigen::VectorXd g = location_gradient(features, responses, y, link, th);
    if (g.size() > 1) lambda_max = std::max(lambda_max, g.tail(g.size() - 1).lpNorm<Eigen::Infinity>());
  }
  if (lambda_max <= 0.0 || features.cols() == 1) {
    FitOptions plain = options;
    plain.select_penalty = false;
    plain.penalty = 0.0;
    return fit_marginal(features, responses, grid, link, plain);
  }

  const double n = static_cast<double>(features.rows());
  std::optional<DRCoefficients> best;
  double best_bic = std::numeric_limits<double>::infinity();
  const int k = std::max(2, options.penalty_path_points);
  for (int i = 0; i < k; ++i) {
    const double lambda = lambda_max * std::pow(options.penalty_path_ratio, static_cast<double>(i) / (k - 1));
    DRCoefficients c = fit_path_point(features, responses, grid, link, lambda, options);
    try {
      check_quality(c, options);
    } catch (const FitQualityError&) {
      continue;
    }
    double bic = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Eigen::VectorXd th = c.theta.row(static_cast<Eigen::Index>(g)).transpose();
      const double ll = location_loglik(features, responses, grid.points()[g], link, th);
      const auto df = static_cast<double>((th.array() != 0.0).count());
      bic += -2.0 * n * ll + std::log(n) * df;
    }
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(c);
    }
  }
  if (!best) throw FitQualityError("no penalty on the BIC path produced an acceptable fit");
  return *best;
}

std::vector<double> rearrange(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values;
}

Eigen::VectorXd MarginalCDFModel::cdf_table(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!x.allFinite()) throw NumericError("non-finite covariate");
  if (transform.is_identity()) {
    if (x.size() != transform.raw_dimension()) throw ShapeError("covariate vector has the wrong dimension");
    return cdf_table_features(x);
  }
  return cdf_table_features(transform.apply(x));
}

Eigen::VectorXd MarginalCDFModel::cdf_table_features(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  if (features.size() != coefficients.theta.cols()) throw ShapeError("feature vector has the wrong dimension");
  Eigen::VectorXd table = coefficients.theta * features;
  for (Eigen::Index g = 0; g < table.size(); ++g) table(g) = link.eval(table(g));
  if (rearranged) std::sort(table.data(), table.data() + table.size());
  return table;
}

double step_cdf(const std::vector<double>& points, const Eigen::VectorXd& table, double y) {
  if (y < points.front()) return 0.0;
  const auto it = std::upper_bound(points.begin(), points.end(), y);
  return table(static_cast<Eigen::Index>(it - points.begin()) - 1);
}

double eval_cdf(const MarginalCDFModel& model, const Eigen::VectorXd& x, double y) {
  return step_cdf(model.grid().points(), model.cdf_table(x), y);
}

double generalized_inverse(const std::vector<double>& points, const Eigen::VectorXd& table, double u) {
  const double* begin = table.data();
  const double* end = begin + table.size();
  const double* it = std::lower_bound(begin, end, u);
  if (it == end) return points.back();
  return points[static_cast<std::size_t>(it - begin)];
}

MarginalCDFModel fit_marginal_model(const Eigen::MatrixXd& raw_covariates, const Eigen::VectorXd& responses,
                                    int variable, const Link& link, const CovariateTransform& transform,
                                    const GridOptions& grid_options, const FitOptions& options) {
  const Eigen::MatrixXd features = transform.apply_rows(raw_covariates);
  const LocationGrid grid =
      make_grid(std::span<const double>(responses.data(), static_cast<std::size_t>(responses.size())), grid_options);
  MarginalCDFModel model{fit_marginal(features, responses, grid, link, options), link, transform, variable, true};
  return model;
}

}  // namespace dvar
