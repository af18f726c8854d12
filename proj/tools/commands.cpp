#include "commands.hpp"

#include "dvar/csv.hpp"
#include "dvar/error.hpp"
#include "dvar/kde.hpp"
#include "dvar/parallel.hpp"
#include "dvar/serialize.hpp"

#include <boost/math/distributions/normal.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace dvar::cli {
namespace {

namespace fs = std::filesystem;

template <class Writer>
void emit(const Context& ctx, const std::string& file, Writer&& write, const Json& extra = Json::object()) {
  fs::create_directories(ctx.config.out_dir);
  const std::string path = ctx.config.output(file);
  {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    write(out);
    if (!out) throw ConfigError("failed writing " + path);
  }
  Json meta = {{"command", ctx.command}};
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  write_sidecar(path, ctx.config_hash, ctx.config.seed, meta);
  if (!ctx.quiet) std::cout << path << '\n';
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

SuiteSpec suite_spec(const RunConfig& c, const SeriesPanel& panel) {
  SuiteSpec spec = c.suite;
  spec.ordering.clear();
  const auto& names = c.ordering.empty() ? panel.names() : c.ordering;
  for (const auto& n : names) spec.ordering.push_back(variable_index(panel, n));
  if (static_cast<Eigen::Index>(spec.ordering.size()) != panel.variables())
    throw ConfigError("model.ordering must list every variable exactly once");
  return spec;
}

ModelOptions model_options(const RunConfig& c) {
  ModelOptions m = c.model;
  // Fits stay single-threaded so results do not depend on --threads.
  m.fit.threads = 1;
  return m;
}

HorizonSuite load_models(const Context& ctx) { return load_suite_files(ctx.models_dir()); }

std::string label_of(const SeriesPanel& panel, Eigen::Index row) {
  return panel.dates()[static_cast<std::size_t>(row)].label();
}

void check_suite_matches(const HorizonSuite& suite, const SeriesPanel& panel) {
  if (suite.base.names != panel.names())
    throw ConfigError("fitted models were built for different variables; rerun fit");
}

// The counterfactual law of a scenario at conditioning block z.
CounterfactualSpec scenario_spec(const ScenarioConfig& sc, const FactorizedJointModel& base, const SeriesPanel& panel,
                                 const Eigen::VectorXd& z, bool report) {
  CounterfactualSpec spec;
  spec.target = variable_index(panel, sc.variable);
  if (sc.kind == "fitted") {
    if (base.spec.ordering.front() != spec.target)
      throw ConfigError("scenario '" + sc.name + "': the fitted law needs '" + sc.variable +
                        "' first in the ordering");
    Eigen::VectorXd x(1 + z.size());
    x << 1.0, z;
    spec.law = table_from_marginal(base, spec.target, x);
  } else {
    spec.law = sc.law;
  }
  validate(spec);
  if (sc.support_check != SupportCheck::off) {
    const auto col = panel.values().col(spec.target);
    try {
      check_support(spec, col.minCoeff(), col.maxCoeff());
    } catch (const SpecError& e) {
      if (sc.support_check == SupportCheck::error) throw;
      if (report) warn("scenario '" + sc.name + "': " + e.what());
    }
  }
  return spec;
}

const ScenarioConfig& find_scenario(const RunConfig& c, const std::string& name) {
  const auto it = c.scenarios.find(name);
  if (it == c.scenarios.end()) throw ConfigError("scenario '" + name + "' is not defined in the config");
  return it->second;
}

std::vector<int> irf_horizons(const RunConfig& c, const HorizonSuite& suite) {
  if (!c.irf_horizons.empty()) return c.irf_horizons;
  std::vector<int> hs{0};
  for (int h : suite.horizons) hs.push_back(h);
  return hs;
}

void write_sample(std::ostream& out, const JointSample& s) {
  csv::write_matrix(out, s.names, s.draws);
}

}  // namespace

std::string Context::models_dir() const {
  return config.model_path.empty() ? config.output("models") : config.model_path;
}

int cmd_fit(const Context& ctx) {
  const auto& c = ctx.config;
  const SeriesPanel panel = load_data(c);
  const SuiteSpec spec = suite_spec(c, panel);
  const HorizonSuite suite = fit_suite(panel, spec, model_options(c));

  save_suite_files(ctx.models_dir(), suite);
  for (const auto& f : suite_file_names(suite)) {
    const std::string path = ctx.models_dir() + "/" + f;
    write_sidecar(path, ctx.config_hash, c.seed, {{"command", ctx.command}});
    if (!ctx.quiet) std::cout << path << '\n';
  }
  const Json report = fit_report(suite);
  emit(ctx, "fit_report.json", [&](std::ostream& out) { out << report.dump(2) << '\n'; });

  if (panel.variables() == 2 && c.correlation_report) {
    const DesignSpec& base = suite.base.spec;
    const Eigen::Index first = base.lags, T = panel.periods();
    const auto n = static_cast<std::size_t>(T - first);
    std::vector<std::optional<double>> rho(n);
    parallel_for(n, resolve_threads(c.threads), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const Eigen::Index t = first + static_cast<Eigen::Index>(i);
        try {
          rho[i] = conditional_correlation(suite.base, conditioning_block(panel, t, base), c.correlation_draws,
                                           derive_seed(c.seed, static_cast<std::uint64_t>(t)));
        } catch (const CorrelationError&) {
        }
      }
    });
    emit(ctx, "correlation.csv", [&](std::ostream& out) {
      csv::write_row(out, {"date", "correlation"});
      for (std::size_t i = 0; i < n; ++i)
        csv::write_row(out, {label_of(panel, first + static_cast<Eigen::Index>(i)),
                             rho[i] ? csv::format(*rho[i]) : "NA"});
    });
  }
  return 0;
}

int cmd_forecast(const Context& ctx, const std::vector<std::string>& at_flag, const std::vector<int>& h_flag) {
  const auto& c = ctx.config;
  const HorizonSuite suite = load_models(ctx);
  const SeriesPanel panel = load_data(c);
  check_suite_matches(suite, panel);
  const auto ats = at_flag.empty() ? c.forecast_at : at_flag;
  if (ats.empty()) throw ConfigError("no conditioning date (pass --at or set forecast.at)");
  std::vector<int> hs = !h_flag.empty() ? h_flag : !c.forecast_horizons.empty() ? c.forecast_horizons : suite.horizons;
  const unsigned threads = resolve_threads(c.threads);
  const auto J = static_cast<std::size_t>(panel.variables());

  Json summary = Json::array();
  for (const auto& at : ats) {
    const Eigen::Index t = period_row(panel, at);
    const std::string label = label_of(panel, t);
    for (int h : hs) {
      JointSample sample;
      if (h == 0) {
        sample = sample_joint(suite.base, conditioning_block(panel, t, suite.base.spec), c.draws, c.seed, threads);
      } else {
        const auto& model = suite.horizon(h);
        sample = direct_forecast(suite, h, conditioning_block(panel, t, model.spec), c.draws, c.seed, threads);
      }
      const std::string stem = label + "_h" + std::to_string(h);
      emit(ctx, "forecast_" + stem + ".csv", [&](std::ostream& out) { write_sample(out, sample); });

      Json modes = Json::object();
      std::vector<DensityGrid> marginals;
      for (std::size_t j = 0; j < J; ++j) {
        const auto col = sample.draws.col(static_cast<Eigen::Index>(j));
        std::optional<double> bw;
        if (j < c.bandwidths.size()) bw = c.bandwidths[j];
        try {
          marginals.push_back(kde1d(col, bw, c.kde_points));
          modes[panel.names()[j]] = count_modes(marginals.back());
        } catch (const SpecError& e) {
          warn(panel.names()[j] + " at " + stem + ": " + e.what());
          marginals.push_back({});
        }
      }
      emit(ctx, "density_" + stem + ".csv", [&](std::ostream& out) {
        csv::write_row(out, {"variable", "x", "density"});
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t a = 0; a < marginals[j].x.size(); ++a)
            csv::write_row(out, {panel.names()[j], csv::format(marginals[j].x[a]),
                                 csv::format(marginals[j].density(static_cast<Eigen::Index>(a), 0))});
      });
      if (J == 2) {
        const double h1 = c.bandwidths.size() > 0 ? c.bandwidths[0] : 0.25;
        const double h2 = c.bandwidths.size() > 1 ? c.bandwidths[1] : 0.8;
        const DensityGrid grid = kde2d(sample.draws, h1, h2, c.kde_points, threads);
        emit(ctx, "contour_" + stem + ".csv", [&](std::ostream& out) { write_density(out, grid); },
             {{"bandwidths", {h1, h2}}});
      }
      summary.push_back({{"at", label}, {"h", h}, {"modes", modes}});
    }
  }
  emit(ctx, "forecast_summary.json", [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
  return 0;
}

int cmd_dirf(const Context& ctx, const std::string& name) {
  const auto& c = ctx.config;
  const ScenarioConfig& sc = find_scenario(c, name);
  const HorizonSuite suite = load_models(ctx);
  const SeriesPanel panel = load_data(c);
  check_suite_matches(suite, panel);
  const Eigen::Index t = period_row(panel, sc.at);
  const Eigen::VectorXd z = conditioning_block(panel, t, suite.base.spec);
  const CounterfactualSpec spec = scenario_spec(sc, suite.base, panel, z, true);

  IRFOptions opt;
  opt.draws = c.draws;
  opt.seed = c.seed;
  opt.mode = c.stream_mode;
  opt.threads = resolve_threads(c.threads);
  opt.grid_points = c.irf_grid_points;
  const std::uint64_t cf_seed = opt.mode == StreamMode::common ? opt.seed : derive_seed(opt.seed, 1);

  std::vector<IRFReport> reports;
  std::vector<std::pair<JointSample, JointSample>> samples;
  for (int h : irf_horizons(c, suite)) {
    JointSample base = baseline_forecast(suite, h, z, opt.draws, opt.seed, opt.threads);
    JointSample cf = counterfactual_forecast(suite, spec, h, z, opt.draws, cf_seed, opt.threads);
    reports.push_back(irf_from_samples(base, cf, h, opt));
    samples.emplace_back(std::move(base), std::move(cf));
  }

  const Json extra = {{"scenario", name}, {"law", sc.kind == "fitted" ? "fitted" : describe(spec.law)},
                      {"at", label_of(panel, t)}, {"stream_mode", to_string(opt.mode)}};
  emit(ctx, "dirf_" + name + "_table.csv", [&](std::ostream& out) { write_irf_table(out, reports); }, extra);
  emit(ctx, "dirf_" + name + "_cdf.csv", [&](std::ostream& out) { write_irf_curves(out, reports); }, extra);
  if (panel.variables() == 2)
    emit(ctx, "dirf_" + name + "_joint.csv", [&](std::ostream& out) { write_joint_dir(out, reports); }, extra);
  emit(ctx, "dirf_" + name + "_density.csv", [&](std::ostream& out) {
    csv::write_row(out, {"h", "variable", "x", "base", "counterfactual"});
    for (std::size_t k = 0; k < reports.size(); ++k) {
      const auto& [base, cf] = samples[k];
      for (Eigen::Index j = 0; j < panel.variables(); ++j) {
        try {
          const double hb = silverman_bandwidth(base.draws.col(j));
          const double hc = silverman_bandwidth(cf.draws.col(j));
          Eigen::VectorXd pooled(base.draws.rows() + cf.draws.rows());
          pooled << base.draws.col(j), cf.draws.col(j);
          const auto axis = kde_axis(pooled, std::max(hb, hc), c.kde_points);
          const DensityGrid fb = kde1d(base.draws.col(j), hb, axis), fc = kde1d(cf.draws.col(j), hc, axis);
          for (std::size_t a = 0; a < axis.size(); ++a) {
            const auto ia = static_cast<Eigen::Index>(a);
            csv::write_row(out, {std::to_string(reports[k].horizon), panel.names()[static_cast<std::size_t>(j)],
                                 csv::format(axis[a]), csv::format(fb.density(ia, 0)), csv::format(fc.density(ia, 0))});
          }
        } catch (const SpecError&) {
          // A degenerate sample (e.g. a point-mass target at h = 0) has no density.
        }
      }
    }
  }, extra);
  return 0;
}

int cmd_calibrate(const Context& ctx) {
  const auto& c = ctx.config;
  const SeriesPanel panel = load_data(c);
  if (c.window_end.empty()) throw ConfigError("calibration.window_end is required");
  CalibrationOptions opt;
  opt.suite = suite_spec(c, panel);
  opt.model = model_options(c);
  opt.window_end = parse_period(c.window_end, panel.frequency());
  opt.draws = c.calibration_draws;
  opt.seed = c.seed;
  opt.threads = resolve_threads(c.threads);
  opt.mode = c.calibration_mode;
  const auto vars = c.calibration_variables.empty() ? panel.names() : c.calibration_variables;
  const auto hs = c.calibration_horizons.empty() ? c.suite.horizons : c.calibration_horizons;
  if (hs.empty()) throw ConfigError("no calibration horizons (set calibration.horizons)");

  Json summary = Json::array();
  for (const auto& v : vars) {
    const int j = variable_index(panel, v);
    for (int h : hs) {
      const PITReport r = expanding_window_pits(panel, j, h, opt);
      const std::string stem = v + "_h" + std::to_string(h);
      if (!r.meaningful())
        warn(stem + ": only " + std::to_string(r.size()) + " PITs; the band test needs at least " +
             std::to_string(pit_floor));
      for (const auto& g : r.gaps) warn(stem + ": window ending " + g.origin + " skipped: " + g.reason);
      emit(ctx, "pit_" + stem + ".csv", [&](std::ostream& out) { write_pits(out, r); });
      emit(ctx, "pit_bands_" + stem + ".csv", [&](std::ostream& out) { write_pit_bands(out, r); });
      summary.push_back({{"variable", v},
                         {"h", h},
                         {"pits", r.size()},
                         {"gaps", r.gaps.size()},
                         {"statistic", r.test.statistic},
                         {"critical", r.test.critical},
                         {"reject", r.test.reject},
                         {"meaningful", r.meaningful()}});
    }
  }
  emit(ctx, "calibration_summary.json", [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
  return 0;
}

int cmd_bands(const Context& ctx, const std::string& target) {
  const auto& c = ctx.config;
  const SeriesPanel panel = load_data(c);
  const SuiteSpec spec = suite_spec(c, panel);
  const ModelOptions model = model_options(c);
  BlockPlan plan = c.bootstrap;
  plan.seed = c.seed;
  plan.threads = resolve_threads(c.threads);
  const Eigen::Index S = c.bootstrap_draws;

  BandResult bands;
  std::vector<std::string> coords;
  if (target == "correlation") {
    if (panel.variables() != 2) throw ConfigError("correlation bands need exactly two variables");
    const DesignSpec base{spec.ordering, spec.base_lags, 0, true};
    std::vector<Eigen::VectorXd> zs;
    for (Eigen::Index t = base.lags; t < panel.periods(); ++t) {
      zs.push_back(conditioning_block(panel, t, base));
      coords.push_back(label_of(panel, t));
    }
    const PanelStatistic stat = [&](const SeriesPanel& p) {
      const FactorizedJointModel m = fit_factorized(p, base, model);
      Eigen::VectorXd out(static_cast<Eigen::Index>(zs.size()));
      for (std::size_t i = 0; i < zs.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = conditional_correlation(m, zs[i], S, derive_seed(c.seed, i));
      return out;
    };
    bands = bootstrap_bands(panel, stat, plan);
  } else if (target == "dirf") {
    if (c.bootstrap_scenario.empty()) throw ConfigError("bootstrap.scenario is required for dirf bands");
    const ScenarioConfig& sc = find_scenario(c, c.bootstrap_scenario);
    const Eigen::Index t = period_row(panel, sc.at);
    const HorizonSuite fitted = fit_suite(panel, spec, model);
    const Eigen::VectorXd z = conditioning_block(panel, t, fitted.base.spec);
    const auto hs = irf_horizons(c, fitted);
    IRFOptions opt;
    opt.draws = S;
    opt.seed = c.seed;
    opt.mode = c.stream_mode;
    opt.grid_points = c.irf_grid_points;
    opt.joint_grid_points = 0;
    // Grids are pinned from the full-sample fit so every replication reports
    // the same coordinates.
    std::vector<std::vector<std::vector<double>>> grids;
    for (int h : hs) {
      const IRFReport r = impulse_response(fitted, scenario_spec(sc, fitted.base, panel, z, true), h, z, opt);
      grids.emplace_back();
      for (const auto& v : r.variables) {
        grids.back().push_back(v.cdf.grid);
        for (double y : v.cdf.grid) coords.push_back("h" + std::to_string(h) + ":" + v.name + ":" + csv::format(y));
      }
    }
    const PanelStatistic stat = [&](const SeriesPanel& p) {
      const HorizonSuite s = fit_suite(p, spec, model);
      const CounterfactualSpec cf = scenario_spec(sc, s.base, panel, z, false);
      std::vector<double> values;
      for (std::size_t k = 0; k < hs.size(); ++k) {
        IRFOptions o = opt;
        o.grids = grids[k];
        for (const auto& v : impulse_response(s, cf, hs[k], z, o).variables)
          values.insert(values.end(), v.cdf.dir.begin(), v.cdf.dir.end());
      }
      return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    };
    bands = bootstrap_bands(panel, stat, plan);
  } else {
    throw ConfigError("--target must be correlation or dirf");
  }
  if (bands.failed > 0) warn(std::to_string(bands.failed) + " bootstrap replications failed and were excluded");
  emit(ctx, "bands_" + target + ".csv", [&](std::ostream& out) { write_bands(out, coords, bands); },
       {{"block_length", plan.block_length},
        {"replications", plan.replications},
        {"level", plan.level},
        {"failed", bands.failed}});
  return 0;
}

SeriesPanel simulate_panel(const std::string& dgp, Eigen::Index periods, std::uint64_t seed, const Period& start) {
  if (periods < 10) throw ConfigError("simulate needs at least 10 periods");
  const KeyedUniform u(seed);
  const boost::math::normal_distribution<> n01;
  const auto gauss = [&](Eigen::Index t, std::uint64_t k) {
    return boost::math::quantile(n01, u(static_cast<std::uint64_t>(t), stream::auxiliary + k));
  };
  const Eigen::Index burn = 100;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(periods + burn, 2);
  std::vector<std::string> names;
  if (dgp == "gaussian_var") {
    names = {"y1", "y2"};
    for (Eigen::Index t = 1; t < y.rows(); ++t) {
      const double e1 = gauss(t, 0), e2 = 0.3 * e1 + 0.95 * gauss(t, 1);
      y(t, 0) = 0.5 * y(t - 1, 0) + 0.1 * y(t - 1, 1) + e1;
      y(t, 1) = 0.2 * y(t - 1, 0) + 0.4 * y(t - 1, 1) + e2;
    }
  } else if (dgp == "regime") {
    // Markov-switching stress regime feeding a growth equation.
    names = {"stress", "growth"};
    int s = 0;
    for (Eigen::Index t = 1; t < y.rows(); ++t) {
      const double stay = s == 0 ? 0.95 : 0.8;
      if (u(static_cast<std::uint64_t>(t), stream::auxiliary + 2) > stay) s = 1 - s;
      y(t, 0) = 0.7 * y(t - 1, 0) + 1.5 * s + 0.5 * gauss(t, 0);
      y(t, 1) = 2.0 - 0.8 * y(t, 0) + 0.3 * y(t - 1, 1) + 1.2 * gauss(t, 1);
    }
  } else {
    throw ConfigError("unknown DGP '" + dgp + "' (expected gaussian_var or regime)");
  }
  std::vector<Period> dates;
  Period p = start;
  for (Eigen::Index t = 0; t < periods; ++t, p = p.next()) dates.push_back(p);
  return SeriesPanel(std::move(dates), y.bottomRows(periods), names, start.freq);
}

int cmd_simulate(const SimulateOptions& o, const std::string& config_hash) {
  const Period start = parse_period(o.start, Frequency::quarterly);
  const SeriesPanel panel = simulate_panel(o.dgp, o.periods, o.seed, start);
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  {
    std::ofstream out(o.out);
    if (!out) throw ConfigError("cannot write " + o.out);
    write_panel_csv(out, panel);
  }
  write_sidecar(o.out, config_hash, o.seed, {{"command", "simulate"}, {"dgp", o.dgp}, {"periods", o.periods}});
  std::cout << o.out << '\n';
  return 0;
}

}  // namespace dvar::cli
