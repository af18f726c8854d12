#include "dvar/irf.hpp"

#include "dvar/csv.hpp"
#include "dvar/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dvar {

std::string_view to_string(StreamMode m) noexcept {
  return m == StreamMode::common ? "common" : "independent";
}

StreamMode parse_stream_mode(std::string_view s) {
  if (s == "common") return StreamMode::common;
  if (s == "independent") return StreamMode::independent;
  throw ConfigError("unknown stream mode '" + std::string(s) + "' (expected common or independent)");
}

namespace {

// Σ terms with positive and negative parts summed separately in ascending
// magnitude, so mirrored inputs cancel exactly and order does not matter.
double split_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  double pos = 0.0, neg = 0.0;
  for (double t : terms) (t >= 0.0 ? pos : neg) += std::abs(t);
  return pos - neg;
}

std::vector<double> sorted_copy(const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  return v;
}

std::optional<double> diff_of(const std::optional<double>& cf, const std::optional<double>& base) {
  if (!cf || !base) return std::nullopt;
  return *cf - *base;
}

}  // namespace

Moments sample_moments(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Moments m;
  const auto n = static_cast<std::size_t>(x.size());
  if (n == 0) return m;
  std::vector<double> t(x.data(), x.data() + x.size());
  const double mean = split_sum(t) / static_cast<double>(n);
  m.mean = mean;
  if (n < 2) return m;
  std::vector<double> d2(n), d3(n), d4(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = t[i] - mean;
    d2[i] = d * d;
    d3[i] = d2[i] * d;
    d4[i] = d2[i] * d2[i];
  }
  const double s2 = split_sum(d2);
  m.std = std::sqrt(s2 / static_cast<double>(n - 1));
  const double m2 = s2 / static_cast<double>(n);
  if (n < 4 || !(m2 > 0.0)) return m;
  m.skewness = (split_sum(d3) / static_cast<double>(n)) / (m2 * std::sqrt(m2));
  m.kurtosis = (split_sum(d4) / static_cast<double>(n)) / (m2 * m2);
  return m;
}

double empirical_quantile(const std::vector<double>& sorted, double tau) {
  if (sorted.empty()) throw ShapeError("quantile of an empty sample");
  if (!(tau > 0.0 && tau < 1.0)) throw ShapeError("quantile level must be in (0, 1)");
  const double S = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(tau * S));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  while (k > 1 && static_cast<double>(k - 1) / S >= tau) --k;
  while (k < sorted.size() && static_cast<double>(k) / S < tau) ++k;
  return sorted[k - 1];
}

double empirical_cdf(const std::vector<double>& sorted, double y) {
  if (sorted.empty()) throw ShapeError("CDF of an empty sample");
  const auto k = std::upper_bound(sorted.begin(), sorted.end(), y) - sorted.begin();
  return static_cast<double>(k) / static_cast<double>(sorted.size());
}

const std::vector<double>& default_taus() {
  static const std::vector<double> taus{0.05, 0.25, 0.5, 0.75, 0.95};
  return taus;
}

std::vector<QuantileRow> qirf(const Eigen::Ref<const Eigen::VectorXd>& baseline,
                              const Eigen::Ref<const Eigen::VectorXd>& counterfactual,
                              const std::vector<double>& taus) {
  if (baseline.size() == 0 || counterfactual.size() == 0) throw ShapeError("empty sample");
  const auto b = sorted_copy(baseline), c = sorted_copy(counterfactual);
  std::vector<QuantileRow> rows;
  for (double tau : taus) {
    const double qb = empirical_quantile(b, tau);
    rows.push_back({tau, qb, empirical_quantile(c, tau) - qb});
  }
  return rows;
}

std::vector<MomentRow> mirf(const Eigen::Ref<const Eigen::VectorXd>& baseline,
                            const Eigen::Ref<const Eigen::VectorXd>& counterfactual) {
  if (baseline.size() == 0 || counterfactual.size() == 0) throw ShapeError("empty sample");
  const Moments b = sample_moments(baseline), c = sample_moments(counterfactual);
  return {
      {"mean", b.mean, diff_of(c.mean, b.mean)},
      {"std", b.std, diff_of(c.std, b.std)},
      {"skewness", b.skewness, diff_of(c.skewness, b.skewness)},
      {"kurtosis", b.kurtosis, diff_of(c.kurtosis, b.kurtosis)},
  };
}

std::vector<double> pooled_grid(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                                int points) {
  if (points < 2) throw ShapeError("a grid needs at least two points");
  if (a.size() == 0 || b.size() == 0) throw ShapeError("empty sample");
  const double lo = std::min(a.minCoeff(), b.minCoeff());
  double hi = std::max(a.maxCoeff(), b.maxCoeff());
  if (!(hi > lo)) hi = lo + 1.0;
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  g.back() = hi;
  return g;
}

namespace {

Eigen::MatrixXd joint_cdf_grid(const Eigen::MatrixXd& draws, const std::vector<double>& gx,
                               const std::vector<double>& gy) {
  const auto nx = static_cast<Eigen::Index>(gx.size()), ny = static_cast<Eigen::Index>(gy.size());
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(nx, ny);
  for (Eigen::Index s = 0; s < draws.rows(); ++s) {
    const auto ix = std::lower_bound(gx.begin(), gx.end(), draws(s, 0)) - gx.begin();
    const auto iy = std::lower_bound(gy.begin(), gy.end(), draws(s, 1)) - gy.begin();
    if (ix < nx && iy < ny) hist(ix, iy) += 1.0;
  }
  for (Eigen::Index a = 0; a < nx; ++a)
    for (Eigen::Index b = 0; b < ny; ++b) {
      if (a > 0) hist(a, b) += hist(a - 1, b);
      if (b > 0) hist(a, b) += hist(a, b - 1);
      if (a > 0 && b > 0) hist(a, b) -= hist(a - 1, b - 1);
    }
  return hist / static_cast<double>(draws.rows());
}

}  // namespace

JointDIR joint_dirf(const Eigen::MatrixXd& baseline, const Eigen::MatrixXd& counterfactual,
                    const std::vector<double>& grid_x, const std::vector<double>& grid_y) {
  if (baseline.cols() != 2 || counterfactual.cols() != 2) throw ShapeError("joint DIR needs J = 2");
  if (baseline.rows() == 0 || counterfactual.rows() == 0) throw ShapeError("empty sample");
  if (!std::is_sorted(grid_x.begin(), grid_x.end()) || !std::is_sorted(grid_y.begin(), grid_y.end()))
    throw ShapeError("joint DIR grids must be sorted");
  JointDIR out{grid_x, grid_y, joint_cdf_grid(baseline, grid_x, grid_y),
               joint_cdf_grid(counterfactual, grid_x, grid_y), {}};
  out.dir = out.counterfactual - out.base;
  return out;
}

IRFReport dirf(const JointSample& baseline, const JointSample& counterfactual,
               const std::vector<std::vector<double>>& grids, StreamMode mode) {
  const Eigen::MatrixXd& B = baseline.draws;
  const Eigen::MatrixXd& C = counterfactual.draws;
  if (B.rows() == 0 || C.rows() == 0) throw ShapeError("empty sample");
  if (B.cols() != C.cols()) throw ShapeError("baseline and counterfactual have different variable counts");
  if (grids.size() != static_cast<std::size_t>(B.cols())) throw ShapeError("need one grid per variable");

  IRFReport report;
  report.mode = mode;
  const bool paired = mode == StreamMode::common && B.rows() == C.rows();
  const double nb = static_cast<double>(B.rows()), nc = static_cast<double>(C.rows());
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    const auto& grid = grids[static_cast<std::size_t>(j)];
    for (double g : grid)
      if (!std::isfinite(g)) throw ShapeError("non-finite evaluation grid");
    VariableResponse v;
    v.name = j < static_cast<Eigen::Index>(baseline.names.size()) ? baseline.names[static_cast<std::size_t>(j)]
                                                                   : "y" + std::to_string(j + 1);
    v.cdf.grid = grid;
    const auto b = sorted_copy(B.col(j)), c = sorted_copy(C.col(j));
    for (double g : grid) {
      const double fb = empirical_cdf(b, g), fc = empirical_cdf(c, g);
      v.cdf.base.push_back(fb);
      v.cdf.counterfactual.push_back(fc);
      v.cdf.dir.push_back(fc - fb);
      double se;
      if (paired) {
        double sum = 0.0, sum2 = 0.0;
        for (Eigen::Index s = 0; s < B.rows(); ++s) {
          const double d = (C(s, j) <= g ? 1.0 : 0.0) - (B(s, j) <= g ? 1.0 : 0.0);
          sum += d;
          sum2 += d * d;
        }
        const double mean = sum / nb;
        se = nb > 1 ? std::sqrt(std::max(0.0, (sum2 - nb * mean * mean) / (nb - 1)) / nb) : 0.0;
      } else {
        se = std::sqrt(fb * (1 - fb) / nb + fc * (1 - fc) / nc);
      }
      v.cdf.standard_error.push_back(se);
    }
    report.variables.push_back(std::move(v));
  }
  return report;
}

IRFReport impulse_response(const HorizonSuite& suite, const CounterfactualSpec& spec, int h,
                           const Eigen::VectorXd& z, const IRFOptions& options) {
  const std::uint64_t cf_seed = options.mode == StreamMode::common ? options.seed : derive_seed(options.seed, 1);
  const JointSample base = baseline_forecast(suite, h, z, options.draws, options.seed, options.threads);
  const JointSample cf = counterfactual_forecast(suite, spec, h, z, options.draws, cf_seed, options.threads);
  return irf_from_samples(base, cf, h, options);
}

IRFReport irf_from_samples(const JointSample& base, const JointSample& cf, int h, const IRFOptions& options) {
  const auto J = static_cast<std::size_t>(base.draws.cols());

  std::vector<std::vector<double>> grids = options.grids;
  if (grids.empty())
    for (std::size_t j = 0; j < J; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      grids.push_back(pooled_grid(base.draws.col(jj), cf.draws.col(jj), options.grid_points));
    }
  IRFReport report = dirf(base, cf, grids, options.mode);
  report.horizon = h;
  for (std::size_t j = 0; j < J; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    report.variables[j].quantiles = qirf(base.draws.col(jj), cf.draws.col(jj), options.taus);
    report.variables[j].moments = mirf(base.draws.col(jj), cf.draws.col(jj));
  }
  if (J == 2 && options.joint_grid_points > 1)
    report.joint = joint_dirf(base.draws, cf.draws,
                              pooled_grid(base.draws.col(0), cf.draws.col(0), options.joint_grid_points),
                              pooled_grid(base.draws.col(1), cf.draws.col(1), options.joint_grid_points));
  return report;
}

std::vector<IRFReport> impulse_responses(const HorizonSuite& suite, const CounterfactualSpec& spec,
                                         const std::vector<int>& horizons, const Eigen::VectorXd& z,
                                         const IRFOptions& options) {
  std::vector<IRFReport> out;
  for (int h : horizons) out.push_back(impulse_response(suite, spec, h, z, options));
  return out;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? csv::format(*v) : "NA"; }

std::string tau_label(double tau) { return "q" + csv::format(tau); }

}  // namespace

void write_irf_table(std::ostream& out, const std::vector<IRFReport>& reports) {
  std::vector<std::string> header{"variable", "statistic"};
  for (const auto& r : reports) {
    header.push_back("h" + std::to_string(r.horizon) + "_base");
    header.push_back("h" + std::to_string(r.horizon) + "_diff");
  }
  csv::write_row(out, header);
  if (reports.empty()) return;
  const auto& first = reports.front();
  for (std::size_t j = 0; j < first.variables.size(); ++j) {
    for (std::size_t q = 0; q < first.variables[j].quantiles.size(); ++q) {
      std::vector<std::string> row{first.variables[j].name, tau_label(first.variables[j].quantiles[q].tau)};
      for (const auto& r : reports) {
        row.push_back(csv::format(r.variables[j].quantiles[q].base));
        row.push_back(csv::format(r.variables[j].quantiles[q].diff));
      }
      csv::write_row(out, row);
    }
    for (std::size_t k = 0; k < first.variables[j].moments.size(); ++k) {
      std::vector<std::string> row{first.variables[j].name, first.variables[j].moments[k].name};
      for (const auto& r : reports) {
        row.push_back(cell(r.variables[j].moments[k].base));
        row.push_back(cell(r.variables[j].moments[k].diff));
      }
      csv::write_row(out, row);
    }
  }
}

void write_irf_curves(std::ostream& out, const std::vector<IRFReport>& reports) {
  csv::write_row(out, {"h", "variable", "y", "base", "counterfactual", "dir", "se"});
  for (const auto& r : reports)
    for (const auto& v : r.variables)
      for (std::size_t g = 0; g < v.cdf.grid.size(); ++g)
        csv::write_row(out, {std::to_string(r.horizon), v.name, csv::format(v.cdf.grid[g]),
                             csv::format(v.cdf.base[g]), csv::format(v.cdf.counterfactual[g]),
                             csv::format(v.cdf.dir[g]), csv::format(v.cdf.standard_error[g])});
}

void write_joint_dir(std::ostream& out, const std::vector<IRFReport>& reports) {
  csv::write_row(out, {"h", "x", "y", "base", "counterfactual", "dir"});
  for (const auto& r : reports) {
    if (!r.joint) continue;
    const auto& jd = *r.joint;
    for (std::size_t a = 0; a < jd.grid_x.size(); ++a)
      for (std::size_t b = 0; b < jd.grid_y.size(); ++b) {
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        csv::write_row(out, {std::to_string(r.horizon), csv::format(jd.grid_x[a]), csv::format(jd.grid_y[b]),
                             csv::format(jd.base(ia, ib)), csv::format(jd.counterfactual(ia, ib)),
                             csv::format(jd.dir(ia, ib))});
      }
  }
}

}  // namespace dvar
