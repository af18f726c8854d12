#include "config.hpp"

#include "dvar/error.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace dvar::cli {
namespace {

namespace fs = std::filesystem;

void allow(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> keys) {
  if (!node.IsMap()) throw ConfigError("'" + where + "' must be a mapping");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.contains(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
  }
}

template <class T>
T get(const YAML::Node& node, const std::string& where, const T& fallback) {
  if (!node) return fallback;
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + where + "'");
  }
}

template <class T>
T need(const YAML::Node& node, const std::string& where) {
  if (!node) throw ConfigError("missing key '" + where + "'");
  return get<T>(node, where, T{});
}

// Accepts a scalar or a list.
std::vector<std::string> strings(const YAML::Node& node, const std::string& where) {
  if (!node) return {};
  if (node.IsScalar()) return {node.as<std::string>()};
  return get<std::vector<std::string>>(node, where, {});
}

PanelSchema schema_from(const YAML::Node& n, const std::string& where) {
  PanelSchema s;
  s.date_column = get<std::string>(n["date_column"], where + ".date_column", "date");
  s.frequency = parse_frequency(get<std::string>(n["frequency"], where + ".frequency", "quarterly"));
  if (const auto c = n["columns"]) {
    if (c.IsSequence()) {
      for (const auto& name : c) s.columns.emplace_back(name.as<std::string>(), name.as<std::string>());
    } else {
      for (const auto& kv : c) s.columns.emplace_back(kv.first.as<std::string>(), kv.second.as<std::string>());
    }
  }
  return s;
}

void read_data(RunConfig& c, const YAML::Node& d) {
  if (!d) return;
  allow(d, "data",
        {"path", "date_column", "frequency", "columns", "sources", "aggregate_to", "partial_periods", "from", "to"});
  if (d["path"]) c.sources.push_back({d["path"].as<std::string>(), schema_from(d, "data")});
  if (const auto src = d["sources"]) {
    for (std::size_t i = 0; i < src.size(); ++i) {
      const std::string where = "data.sources[" + std::to_string(i) + "]";
      allow(src[i], where, {"path", "date_column", "frequency", "columns"});
      c.sources.push_back({need<std::string>(src[i]["path"], where + ".path"), schema_from(src[i], where)});
    }
  }
  if (d["aggregate_to"]) c.frequency = parse_frequency(d["aggregate_to"].as<std::string>());
  const auto partial = get<std::string>(d["partial_periods"], "data.partial_periods", "error");
  if (partial == "allow") c.coverage = Coverage::allow_partial;
  else if (partial != "error") throw ConfigError("data.partial_periods must be 'error' or 'allow'");
  c.sample_from = get<std::string>(d["from"], "data.from", "");
  c.sample_to = get<std::string>(d["to"], "data.to", "");
}

void read_model(RunConfig& c, const YAML::Node& m) {
  if (!m) return;
  allow(m, "model",
        {"variables", "ordering", "base_lags", "horizon_lags", "horizons", "link", "transform", "penalty", "grid",
         "max_nonconverged_fraction", "direct_models", "penalty_path_points", "penalty_path_ratio"});
  c.variables = strings(m["variables"], "model.variables");
  c.ordering = strings(m["ordering"], "model.ordering");
  c.suite.base_lags = get<int>(m["base_lags"], "model.base_lags", 2);
  c.suite.horizon_lags = get<int>(m["horizon_lags"], "model.horizon_lags", c.suite.base_lags + 1);
  c.suite.horizons = get<std::vector<int>>(m["horizons"], "model.horizons", {});
  c.suite.fit_direct = get<bool>(m["direct_models"], "model.direct_models", true);
  c.model.link = Link(parse_link(get<std::string>(m["link"], "model.link", "logit")));
  c.model.transform = get<std::string>(m["transform"], "model.transform", "identity");
  if (const auto p = m["penalty"]) {
    if (p.IsScalar() && p.as<std::string>() == "bic") {
      c.model.fit.select_penalty = true;
    } else {
      c.model.fit.penalty = get<double>(p, "model.penalty", 0.0);
      if (c.model.fit.penalty < 0) throw ConfigError("model.penalty must be >= 0 or 'bic'");
    }
  }
  c.model.fit.penalty_path_points = get<int>(m["penalty_path_points"], "model.penalty_path_points", 20);
  c.model.fit.penalty_path_ratio = get<double>(m["penalty_path_ratio"], "model.penalty_path_ratio", 1e-3);
  c.model.fit.max_nonconverged_fraction =
      get<double>(m["max_nonconverged_fraction"], "model.max_nonconverged_fraction", 0.10);
  if (const auto g = m["grid"]) {
    allow(g, "model.grid", {"source", "points", "trim", "values"});
    c.model.grid.source = parse_grid_source(get<std::string>(g["source"], "model.grid.source", "empirical_quantiles"));
    c.model.grid.points = get<int>(g["points"], "model.grid.points", 99);
    if (g["trim"]) {
      const auto t = get<std::vector<double>>(g["trim"], "model.grid.trim", {});
      if (t.size() != 2) throw ConfigError("model.grid.trim must be [lo, hi]");
      c.model.grid.trim_lo = t[0];
      c.model.grid.trim_hi = t[1];
    }
    c.model.grid.explicit_points = get<std::vector<double>>(g["values"], "model.grid.values", {});
  }
}

ScenarioConfig read_scenario(const std::string& name, const YAML::Node& s) {
  const std::string where = "scenarios." + name;
  allow(s, where, {"variable", "at", "law", "support_check"});
  ScenarioConfig sc;
  sc.name = name;
  sc.variable = need<std::string>(s["variable"], where + ".variable");
  sc.at = need<std::string>(s["at"], where + ".at");
  const auto check = get<std::string>(s["support_check"], where + ".support_check", "warn");
  if (check == "off") sc.support_check = SupportCheck::off;
  else if (check == "warn") sc.support_check = SupportCheck::warn;
  else if (check == "error") sc.support_check = SupportCheck::error;
  else throw ConfigError(where + ".support_check must be off, warn or error");

  const auto law = s["law"];
  if (!law) throw ConfigError("missing key '" + where + ".law'");
  const std::string lw = where + ".law";
  sc.kind = need<std::string>(law["kind"], lw + ".kind");
  if (sc.kind == "point_mass") {
    allow(law, lw, {"kind", "value"});
    sc.law = PointMass{need<double>(law["value"], lw + ".value")};
  } else if (sc.kind == "truncated_normal") {
    allow(law, lw, {"kind", "mu", "sigma", "lo", "hi"});
    sc.law = TruncatedNormal{need<double>(law["mu"], lw + ".mu"), need<double>(law["sigma"], lw + ".sigma"),
                             need<double>(law["lo"], lw + ".lo"), need<double>(law["hi"], lw + ".hi")};
  } else if (sc.kind == "truncated_gamma") {
    allow(law, lw, {"kind", "shape", "scale", "lo", "hi"});
    sc.law = TruncatedGamma{need<double>(law["shape"], lw + ".shape"), need<double>(law["scale"], lw + ".scale"),
                            need<double>(law["lo"], lw + ".lo"), need<double>(law["hi"], lw + ".hi")};
  } else if (sc.kind == "table") {
    allow(law, lw, {"kind", "points", "cdf"});
    sc.law = CdfTable{need<std::vector<double>>(law["points"], lw + ".points"),
                      need<std::vector<double>>(law["cdf"], lw + ".cdf")};
  } else if (sc.kind == "fitted") {
    allow(law, lw, {"kind"});
  } else {
    throw ConfigError(lw + ".kind must be point_mass, truncated_normal, truncated_gamma, table or fitted");
  }
  if (sc.kind != "fitted") validate(CounterfactualSpec{0, sc.law});
  return sc;
}

}  // namespace

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).string();
}

std::string RunConfig::output(const std::string& file) const { return (fs::path(out_dir) / file).string(); }

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  RunConfig c;
  c.base_dir = base_dir;
  c.text = text;
  if (!root || root.IsNull()) return c;
  allow(root, "config",
        {"data", "model", "sampling", "forecast", "scenarios", "irf", "correlation", "calibration", "bootstrap",
         "output"});
  try {
    read_data(c, root["data"]);
    read_model(c, root["model"]);

    if (const auto s = root["sampling"]) {
      allow(s, "sampling", {"draws", "seed", "stream_mode", "threads"});
      c.draws = get<Eigen::Index>(s["draws"], "sampling.draws", c.draws);
      c.seed = get<std::uint64_t>(s["seed"], "sampling.seed", c.seed);
      c.stream_mode = parse_stream_mode(get<std::string>(s["stream_mode"], "sampling.stream_mode", "common"));
      c.threads = get<unsigned>(s["threads"], "sampling.threads", 0);
    }
    if (const auto f = root["forecast"]) {
      allow(f, "forecast", {"at", "horizons", "bandwidths", "kde_points"});
      c.forecast_at = strings(f["at"], "forecast.at");
      c.forecast_horizons = get<std::vector<int>>(f["horizons"], "forecast.horizons", {});
      c.bandwidths = get<std::vector<double>>(f["bandwidths"], "forecast.bandwidths", c.bandwidths);
      c.kde_points = get<int>(f["kde_points"], "forecast.kde_points", c.kde_points);
    }
    if (const auto s = root["scenarios"]) {
      if (!s.IsMap()) throw ConfigError("'scenarios' must be a mapping of named scenarios");
      for (const auto& kv : s) {
        const auto name = kv.first.as<std::string>();
        c.scenarios.emplace(name, read_scenario(name, kv.second));
      }
    }
    if (const auto i = root["irf"]) {
      allow(i, "irf", {"horizons", "grid_points"});
      c.irf_horizons = get<std::vector<int>>(i["horizons"], "irf.horizons", {});
      c.irf_grid_points = get<int>(i["grid_points"], "irf.grid_points", c.irf_grid_points);
    }
    if (const auto r = root["correlation"]) {
      allow(r, "correlation", {"enabled", "draws"});
      c.correlation_report = get<bool>(r["enabled"], "correlation.enabled", true);
      c.correlation_draws = get<Eigen::Index>(r["draws"], "correlation.draws", c.correlation_draws);
    }
    if (const auto k = root["calibration"]) {
      allow(k, "calibration", {"window_end", "variables", "horizons", "draws", "mode"});
      c.window_end = get<std::string>(k["window_end"], "calibration.window_end", "");
      c.calibration_variables = strings(k["variables"], "calibration.variables");
      c.calibration_horizons = get<std::vector<int>>(k["horizons"], "calibration.horizons", {});
      c.calibration_draws = get<Eigen::Index>(k["draws"], "calibration.draws", c.calibration_draws);
      const auto mode = get<std::string>(k["mode"], "calibration.mode", "composed");
      if (mode == "composed") c.calibration_mode = PITMode::composed;
      else if (mode == "direct") c.calibration_mode = PITMode::direct;
      else throw ConfigError("calibration.mode must be composed or direct");
    }
    if (const auto b = root["bootstrap"]) {
      allow(b, "bootstrap", {"block_length", "replications", "level", "scenario", "draws", "max_failed_fraction"});
      c.bootstrap.block_length = get<Eigen::Index>(b["block_length"], "bootstrap.block_length", 8);
      c.bootstrap.replications = get<int>(b["replications"], "bootstrap.replications", 500);
      c.bootstrap.level = get<double>(b["level"], "bootstrap.level", 0.95);
      c.bootstrap.max_failed_fraction = get<double>(b["max_failed_fraction"], "bootstrap.max_failed_fraction", 0.20);
      c.bootstrap_scenario = get<std::string>(b["scenario"], "bootstrap.scenario", "");
      c.bootstrap_draws = get<Eigen::Index>(b["draws"], "bootstrap.draws", c.bootstrap_draws);
    }
    if (const auto o = root["output"]) {
      allow(o, "output", {"dir", "model"});
      c.out_dir = get<std::string>(o["dir"], "output.dir", c.out_dir);
      c.model_path = get<std::string>(o["model"], "output.model", "");
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!c.out_dir.empty()) c.out_dir = c.resolve(c.out_dir);
  if (!c.model_path.empty()) c.model_path = c.resolve(c.model_path);
  if (c.draws < 1) throw ConfigError("sampling.draws must be positive");
  for (int h : c.suite.horizons)
    if (h < 1) throw ConfigError("model.horizons must be positive");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::path(path).parent_path().string());
}

void apply(RunConfig& c, const Overrides& o) {
  if (!o.data.empty()) {
    PanelSchema schema = c.sources.size() == 1 ? c.sources.front().schema : PanelSchema{};
    c.sources = {{fs::absolute(o.data).string(), schema}};
  }
  if (!o.date_col.empty())
    for (auto& s : c.sources) s.schema.date_column = o.date_col;
  if (!o.freq.empty())
    for (auto& s : c.sources) s.schema.frequency = parse_frequency(o.freq);
  if (!o.out.empty()) c.out_dir = fs::absolute(o.out).string();
  if (o.threads) c.threads = *o.threads;
  if (o.seed) c.seed = *o.seed;
}

int variable_index(const SeriesPanel& panel, const std::string& name) {
  const auto j = panel.find(name);
  if (!j) throw ConfigError("variable '" + name + "' is not in the data");
  return *j;
}

Eigen::Index period_row(const SeriesPanel& panel, const std::string& label) {
  const auto row = panel.find(parse_period(label, panel.frequency()));
  if (!row) throw ConfigError("date " + label + " is outside the panel");
  return *row;
}

SeriesPanel load_data(const RunConfig& c) {
  if (c.sources.empty()) throw ConfigError("no data source (set data.path or pass --data)");
  std::optional<SeriesPanel> panel;
  for (const auto& s : c.sources) {
    SeriesPanel p = load_panel_file(c.resolve(s.path), s.schema);
    if (c.frequency) p = aggregate_frequency(p, *c.frequency, AggregationScheme::mean, c.coverage);
    panel = panel ? join_panels(*panel, p) : std::move(p);
  }
  if (!c.sample_from.empty() || !c.sample_to.empty()) {
    const Period from = c.sample_from.empty() ? panel->dates().front() : parse_period(c.sample_from, panel->frequency());
    const Period to = c.sample_to.empty() ? panel->dates().back() : parse_period(c.sample_to, panel->frequency());
    panel = panel->slice(from, to);
  }
  if (!c.variables.empty()) {
    std::vector<int> cols;
    for (const auto& v : c.variables) cols.push_back(variable_index(*panel, v));
    panel = panel->select(cols);
  }
  return *panel;
}

}  // namespace dvar::cli
