#include "dvar/serialize.hpp"

#include "dvar/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#ifndef DVAR_VERSION
#define DVAR_VERSION "0.1.0-unknown"
#endif

namespace dvar {
namespace {

constexpr int format_version = 1;

double finite(double v) {
  if (!std::isfinite(v)) throw NumericError("cannot serialize a non-finite value");
  return v;
}

Json matrix_rows(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(finite(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const Json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(cols)) throw ConfigError("ragged coefficient matrix");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

template <class F>
auto parsing(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + ": " + e.what());
  }
}

Json models_by_horizon(const std::map<int, FactorizedJointModel>& models) {
  Json out = Json::object();
  for (const auto& [h, m] : models) out[std::to_string(h)] = to_json(m);
  return out;
}

std::map<int, FactorizedJointModel> models_from(const Json& j) {
  std::map<int, FactorizedJointModel> out;
  for (const auto& [key, value] : j.items()) out.emplace(std::stoi(key), joint_from_json(value));
  return out;
}

Json joint_report(const FactorizedJointModel& model) {
  Json vars = Json::array();
  for (const auto& m : model.marginals) {
    Json failed = Json::array();
    const auto& pts = m.grid().points();
    for (std::size_t g = 0; g < pts.size(); ++g)
      if (!m.coefficients.converged[g]) failed.push_back(pts[g]);
    vars.push_back({{"variable", model.names[static_cast<std::size_t>(m.variable)]},
                    {"locations", pts.size()},
                    {"nonconverged", m.coefficients.nonconverged()},
                    {"nonconverged_locations", failed},
                    {"penalty", m.coefficients.penalty}});
  }
  return {{"horizon", model.spec.horizon},
          {"lags", model.spec.lags},
          {"contemporaneous", model.spec.include_contemporaneous},
          {"variables", vars}};
}

}  // namespace

Json to_json(const MarginalCDFModel& model) {
  std::vector<bool> conv = model.coefficients.converged;
  Json grid = Json::array();
  for (double p : model.grid().points()) grid.push_back(finite(p));
  return {
      {"variable", model.variable},
      {"link", to_string(model.link.id())},
      {"rearranged", model.rearranged},
      {"transform", {{"raw_dimension", model.transform.raw_dimension()}, {"terms", model.transform.terms()}}},
      {"grid", {{"source", to_string(model.grid().source())}, {"points", grid}}},
      {"penalty", finite(model.coefficients.penalty)},
      {"converged", conv},
      {"theta", matrix_rows(model.coefficients.theta)},
  };
}

MarginalCDFModel marginal_from_json(const Json& j) {
  return parsing("marginal model", [&] {
    const auto& t = j.at("transform");
    CovariateTransform transform(t.at("raw_dimension").get<int>(),
                                 t.at("terms").get<std::vector<CovariateTransform::Monomial>>());
    LocationGrid grid(j.at("grid").at("points").get<std::vector<double>>(),
                      parse_grid_source(j.at("grid").at("source").get<std::string>()));
    const auto conv = j.at("converged").get<std::vector<bool>>();
    Eigen::MatrixXd theta = matrix_from(j.at("theta"), transform.dimension());
    if (theta.rows() != static_cast<Eigen::Index>(grid.size()) || conv.size() != grid.size())
      throw ConfigError("coefficient rows do not match the grid");
    MarginalCDFModel m{DRCoefficients{std::move(grid), std::move(theta), conv, j.at("penalty").get<double>()},
                       Link(parse_link(j.at("link").get<std::string>())), std::move(transform),
                       j.at("variable").get<int>(), j.at("rearranged").get<bool>()};
    return m;
  });
}

Json to_json(const FactorizedJointModel& model) {
  Json marginals = Json::array();
  for (const auto& m : model.marginals) marginals.push_back(to_json(m));
  return {
      {"spec",
       {{"ordering", model.spec.ordering},
        {"lags", model.spec.lags},
        {"horizon", model.spec.horizon},
        {"include_contemporaneous", model.spec.include_contemporaneous}}},
      {"names", model.names},
      {"marginals", marginals},
  };
}

FactorizedJointModel joint_from_json(const Json& j) {
  return parsing("joint model", [&] {
    FactorizedJointModel m;
    const auto& s = j.at("spec");
    m.spec = DesignSpec{s.at("ordering").get<std::vector<int>>(), s.at("lags").get<int>(), s.at("horizon").get<int>(),
                        s.at("include_contemporaneous").get<bool>()};
    m.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& mj : j.at("marginals")) m.marginals.push_back(marginal_from_json(mj));
    if (m.marginals.size() != m.names.size())
      throw ConfigError("joint model needs one marginal per variable");
    validate(m.spec, m.variables());
    return m;
  });
}

Json to_json(const HorizonSuite& suite) {
  return {
      {"format", "dvar-suite"},
      {"format_version", format_version},
      {"horizons", suite.horizons},
      {"base", to_json(suite.base)},
      {"horizon_models", models_by_horizon(suite.horizon_models)},
      {"direct_models", models_by_horizon(suite.direct_models)},
  };
}

HorizonSuite suite_from_json(const Json& j) {
  return parsing("model suite", [&] {
    if (j.at("format").get<std::string>() != "dvar-suite") throw ConfigError("not a model suite file");
    if (j.at("format_version").get<int>() != format_version) throw ConfigError("unsupported suite format version");
    HorizonSuite s;
    s.horizons = j.at("horizons").get<std::vector<int>>();
    s.base = joint_from_json(j.at("base"));
    s.horizon_models = models_from(j.at("horizon_models"));
    s.direct_models = models_from(j.at("direct_models"));
    return s;
  });
}

void save_suite(const std::string& path, const HorizonSuite& suite) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << to_json(suite).dump() << '\n';
  if (!out) throw ConfigError("failed writing " + path);
}

HorizonSuite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("model file " + path + " not found (run fit first)");
  return parsing("model suite", [&] { return suite_from_json(Json::parse(in)); });
}

namespace {

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump() << '\n';
  if (!out) throw ConfigError("failed writing " + path);
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("model file " + path + " not found (run fit first)");
  return parsing("model file", [&] { return Json::parse(in); });
}

std::string horizon_file(int h) { return "h" + std::to_string(h) + ".json"; }

}  // namespace

std::vector<std::string> suite_file_names(const HorizonSuite& suite) {
  std::vector<std::string> names{"suite.json", "base.json"};
  for (int h : suite.horizons) names.push_back(horizon_file(h));
  return names;
}

void save_suite_files(const std::string& dir, const HorizonSuite& suite) {
  std::filesystem::create_directories(dir);
  Json files = Json::object();
  for (int h : suite.horizons) files[std::to_string(h)] = horizon_file(h);
  write_json(dir + "/suite.json", {{"format", "dvar-suite-index"},
                                   {"format_version", format_version},
                                   {"horizons", suite.horizons},
                                   {"base", "base.json"},
                                   {"horizon_files", files}});
  write_json(dir + "/base.json", to_json(suite.base));
  for (int h : suite.horizons) {
    Json j = {{"horizon", h}, {"joint", to_json(suite.horizon(h))}};
    if (suite.direct_models.contains(h)) j["direct"] = to_json(suite.direct(h));
    write_json(dir + "/" + horizon_file(h), j);
  }
}

HorizonSuite load_suite_files(const std::string& dir) {
  const Json index = read_json(dir + "/suite.json");
  return parsing("model suite", [&] {
    if (index.at("format").get<std::string>() != "dvar-suite-index") throw ConfigError("not a model suite index");
    if (index.at("format_version").get<int>() != format_version)
      throw ConfigError("unsupported suite format version");
    HorizonSuite s;
    s.horizons = index.at("horizons").get<std::vector<int>>();
    s.base = joint_from_json(read_json(dir + "/" + index.at("base").get<std::string>()));
    for (int h : s.horizons) {
      const Json j = read_json(dir + "/" + index.at("horizon_files").at(std::to_string(h)).get<std::string>());
      s.horizon_models.emplace(h, joint_from_json(j.at("joint")));
      if (j.contains("direct")) s.direct_models.emplace(h, joint_from_json(j.at("direct")));
    }
    return s;
  });
}

Json fit_report(const HorizonSuite& suite) {
  Json horizons = Json::array();
  for (const auto& [h, m] : suite.horizon_models) horizons.push_back(joint_report(m));
  Json direct = Json::array();
  for (const auto& [h, m] : suite.direct_models) direct.push_back(joint_report(m));
  return {{"base", joint_report(suite.base)}, {"horizon_models", horizons}, {"direct_models", direct}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_sidecar(const std::string& output_path, std::string_view config_hash, std::uint64_t seed,
                   const Json& extra) {
  Json meta = {{"file", output_path.substr(output_path.find_last_of('/') + 1)},
               {"config_hash", config_hash},
               {"seed", seed},
               {"version", version()}};
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  std::ofstream out(output_path + ".meta.json");
  if (!out) throw ConfigError("cannot write sidecar for " + output_path);
  out << meta.dump(2) << '\n';
}

std::string_view version() noexcept { return DVAR_VERSION; }

}  // namespace dvar
