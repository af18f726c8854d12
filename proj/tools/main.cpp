#include "commands.hpp"

#include "dvar/error.hpp"
#include "dvar/serialize.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace dvar;
using namespace dvar::cli;

std::string override_string(const Overrides& o) {
  std::string s = "data=" + o.data + ";date_col=" + o.date_col + ";freq=" + o.freq + ";out=" + o.out;
  if (o.seed) s += ";seed=" + std::to_string(*o.seed);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional VAR: fit, forecast, impulse responses, calibration and bootstrap bands"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  bool quiet = false;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config,-c", config_path, "YAML run configuration");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--data", ov.data, "panel CSV (replaces the configured sources)");
    sub->add_option("--date-col", ov.date_col, "date column name");
    sub->add_option("--freq", ov.freq, "data frequency: weekly, monthly or quarterly");
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_flag("--quiet,-q", quiet, "do not list written files");
  };

  auto* fit = app.add_subcommand("fit", "fit the one-step and horizon models");
  add_common(fit, true);

  auto* forecast = app.add_subcommand("forecast", "forecast draws and density grids");
  add_common(forecast, true);
  std::vector<std::string> at;
  std::vector<int> hs;
  forecast->add_option("--at", at, "conditioning period t (repeatable)");
  forecast->set_help_flag("--help", "Print this help message and exit");
  forecast->add_option("--h", hs, "horizon (repeatable)");

  auto* dirf = app.add_subcommand("dirf", "distributional impulse responses of a scenario");
  add_common(dirf, true);
  std::string scenario;
  dirf->add_option("--scenario", scenario, "scenario name from the config")->required();

  auto* calibrate = app.add_subcommand("calibrate", "out-of-sample PITs and band tests");
  add_common(calibrate, true);

  auto* bands = app.add_subcommand("bands", "moving block bootstrap bands");
  add_common(bands, true);
  std::string target;
  bands->add_option("--target", target, "correlation or dirf")
      ->required()
      ->check(CLI::IsMember({"correlation", "dirf"}));

  auto* simulate = app.add_subcommand("simulate", "write a synthetic panel");
  add_common(simulate, false);
  SimulateOptions sim;
  std::string file = "panel.csv";
  simulate->add_option("--dgp", sim.dgp, "gaussian_var or regime");
  simulate->add_option("--periods", sim.periods, "number of periods");
  simulate->add_option("--start", sim.start, "first quarter");
  simulate->add_option("--file", file, "file name inside --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorClass::config);
  }

  try {
    if (threads > 0) ov.threads = threads;
    if (seed > 0 || app.get_subcommands().front()->count("--seed") > 0) ov.seed = seed;

    if (simulate->parsed()) {
      sim.seed = ov.seed.value_or(1);
      sim.out = (ov.out.empty() ? std::string(".") : ov.out) + "/" + file;
      return cmd_simulate(sim, fnv1a_hex(override_string(ov) + ";dgp=" + sim.dgp));
    }

    Context ctx;
    ctx.config = load_config(config_path);
    apply(ctx.config, ov);
    ctx.config_hash = fnv1a_hex(ctx.config.text + "\n#" + override_string(ov));
    ctx.quiet = quiet;
    ctx.command = app.get_subcommands().front()->get_name();

    if (fit->parsed()) return cmd_fit(ctx);
    if (forecast->parsed()) return cmd_forecast(ctx, at, hs);
    if (dirf->parsed()) return cmd_dirf(ctx, scenario);
    if (calibrate->parsed()) return cmd_calibrate(ctx);
    if (bands->parsed()) return cmd_bands(ctx, target);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
