#include "dvar/calibration.hpp"

#include "dvar/csv.hpp"
#include "dvar/error.hpp"
#include "dvar/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

namespace dvar {

BandTest rs_band_test(std::span<const double> pits) {
  if (pits.empty()) throw ShapeError("band test needs at least one PIT");
  std::vector<double> x(pits.begin(), pits.end());
  std::sort(x.begin(), x.end());
  const double P = static_cast<double>(x.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Left limit uses the first index of a tie run, the value the last.
    std::size_t last = i;
    while (last + 1 < x.size() && x[last + 1] == x[i]) ++last;
    sup = std::max(sup, std::abs(static_cast<double>(last + 1) / P - x[i]));
    sup = std::max(sup, std::abs(x[i] - static_cast<double>(i) / P));
    i = last;
  }
  BandTest t;
  t.statistic = std::sqrt(P) * sup;
  t.reject = t.statistic > t.critical;
  return t;
}

double PITReport::half_width() const {
  return pits.empty() ? 0.0 : rs_critical_value / std::sqrt(static_cast<double>(pits.size()));
}

std::vector<double> PITReport::sorted() const {
  std::vector<double> s = pits;
  std::sort(s.begin(), s.end());
  return s;
}

PITReport make_pit_report(std::vector<double> pits, int variable, int horizon) {
  for (double p : pits)
    if (!(p >= 0.0 && p <= 1.0)) throw NumericError("PIT outside [0, 1]");
  PITReport r;
  r.variable = variable;
  r.horizon = horizon;
  r.pits = std::move(pits);
  if (!r.pits.empty()) r.test = rs_band_test(r.pits);
  return r;
}

double pit_from_draws(const Eigen::Ref<const Eigen::VectorXd>& draws, double realization) {
  if (draws.size() == 0) throw ShapeError("no forecast draws");
  return static_cast<double>((draws.array() <= realization).count()) / static_cast<double>(draws.size());
}

PITReport expanding_window_pits(const SeriesPanel& panel, int variable, int h, const CalibrationOptions& options) {
  if (variable < 0 || variable >= panel.variables()) throw ShapeError("variable index out of range");
  if (h < 0) throw SpecError("negative horizon");
  if (options.mode == PITMode::direct && h < 1) throw SpecError("direct PITs need h >= 1");
  const auto first = panel.find(options.window_end);
  if (!first) throw InsufficientDataError("window end " + options.window_end.label() + " is not in the panel");

  const Eigen::Index T = panel.periods();
  const Eigen::Index last = options.mode == PITMode::composed ? T - 2 - h : T - 1 - h;
  if (last < *first) throw InsufficientDataError("no out-of-sample origin after " + options.window_end.label());

  SuiteSpec spec = options.suite;
  spec.horizons = h > 0 ? std::vector<int>{h} : std::vector<int>{};
  spec.fit_direct = true;
  ModelOptions model = options.model;
  model.fit.threads = 1;

  const auto n = static_cast<std::size_t>(last - *first + 1);
  std::vector<std::optional<double>> pit(n);
  std::vector<std::string> failure(n);
  parallel_for(n, resolve_threads(options.threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Eigen::Index o = *first + static_cast<Eigen::Index>(i);
      try {
        const SeriesPanel window = panel.slice(0, o);
        const HorizonSuite suite = fit_suite(window, spec, model);
        if (options.mode == PITMode::composed) {
          const auto& base = suite.base.spec;
          const Eigen::VectorXd z = conditioning_block(window, o + 1, base);
          const Eigen::VectorXd draws = marginal_forecast(suite, variable, h, z, options.draws, options.seed);
          pit[i] = pit_from_draws(draws, panel.values()(o + 1 + h, variable));
        } else {
          const auto& direct = suite.direct(h);
          const Eigen::VectorXd block = conditioning_block(window, o, direct.spec);
          Eigen::VectorXd x(1 + block.size());
          x << 1.0, block;
          const auto& m = direct.marginals[static_cast<std::size_t>(direct.position_of(variable))];
          pit[i] = eval_cdf(m, x, panel.values()(o + h, variable));
        }
      } catch (const Error& e) {
        failure[i] = e.what();
      }
    }
  });

  std::vector<double> pits;
  std::vector<std::string> origins;
  std::vector<PITGap> gaps;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string label = panel.dates()[static_cast<std::size_t>(*first) + i].label();
    if (pit[i]) {
      pits.push_back(*pit[i]);
      origins.push_back(label);
    } else {
      gaps.push_back({label, failure[i]});
    }
  }
  PITReport report = make_pit_report(std::move(pits), variable, h);
  report.name = panel.names()[static_cast<std::size_t>(variable)];
  report.origins = std::move(origins);
  report.gaps = std::move(gaps);
  return report;
}

void write_pit_bands(std::ostream& out, const PITReport& report) {
  csv::write_row(out, {"r", "ecdf", "lower", "upper"});
  if (report.pits.empty()) return;
  const std::vector<double> s = report.sorted();
  std::vector<double> r(s);
  for (int i = 0; i <= 512; ++i) r.push_back(i / 512.0);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  const double w = report.half_width();
  const double P = static_cast<double>(s.size());
  for (double v : r) {
    const double e = static_cast<double>(std::upper_bound(s.begin(), s.end(), v) - s.begin()) / P;
    csv::write_row(out, {csv::format(v), csv::format(e), csv::format(v - w), csv::format(v + w)});
  }
}

void write_pits(std::ostream& out, const PITReport& report) {
  csv::write_row(out, {"origin", "pit"});
  for (std::size_t i = 0; i < report.pits.size(); ++i)
    csv::write_row(out, {report.origins.size() > i ? report.origins[i] : std::to_string(i), csv::format(report.pits[i])});
  for (const auto& g : report.gaps) csv::write_row(out, {g.origin, ""});
}

}  // namespace dvar
