#include "dvar/forecast.hpp"

#include "dvar/error.hpp"

#include <algorithm>
#include <set>

namespace dvar {

const FactorizedJointModel& HorizonSuite::horizon(int h) const {
  const auto it = horizon_models.find(h);
  if (it == horizon_models.end()) throw MissingHorizonError("horizon " + std::to_string(h) + " was not fitted");
  return it->second;
}

const FactorizedJointModel& HorizonSuite::direct(int h) const {
  const auto it = direct_models.find(h);
  if (it == direct_models.end())
    throw MissingHorizonError("no direct models for horizon " + std::to_string(h));
  return it->second;
}

HorizonSuite fit_suite(const SeriesPanel& panel, const SuiteSpec& spec, const ModelOptions& options) {
  const int J = static_cast<int>(panel.variables());
  std::vector<int> horizons = spec.horizons;
  std::sort(horizons.begin(), horizons.end());
  if (std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end())
    throw SpecError("duplicate horizons");
  if (!horizons.empty() && horizons.front() < 1) throw SpecError("horizons must be positive");
  if (spec.horizon_lags > spec.base_lags + 1)
    throw SpecError("horizon lags (" + std::to_string(spec.horizon_lags) + ") exceed base lags + 1");
  if (spec.horizon_lags < 1) throw SpecError("horizon lags must be >= 1");
  const int max_h = horizons.empty() ? 0 : horizons.back();
  if (max_h + std::max(spec.base_lags, spec.horizon_lags) >= panel.periods())
    throw InsufficientDataError("max horizon + lags must be below T = " + std::to_string(panel.periods()));

  HorizonSuite suite;
  suite.horizons = horizons;
  const auto ordering = spec.ordering.empty() ? DesignSpec::identity_ordering(J) : spec.ordering;
  suite.base = fit_factorized(panel, DesignSpec{ordering, spec.base_lags, 0, true}, options);
  for (int h : horizons) {
    try {
      suite.horizon_models.emplace(h, fit_factorized(panel, DesignSpec{ordering, spec.horizon_lags, h, true}, options));
      if (spec.fit_direct)
        suite.direct_models.emplace(h,
                                    fit_factorized(panel, DesignSpec{ordering, spec.horizon_lags, h, false}, options));
    } catch (const FitQualityError& e) {
      throw FitQualityError("h = " + std::to_string(h) + ", " + e.detail());
    }
  }
  return suite;
}

Eigen::VectorXd horizon_block(const Eigen::VectorXd& y_t, const Eigen::VectorXd& z, int horizon_block_size) {
  if (horizon_block_size > y_t.size() + z.size()) throw ShapeError("horizon block longer than (y_t, z)");
  Eigen::VectorXd full(y_t.size() + z.size());
  full << y_t, z;
  return full.head(horizon_block_size);
}

namespace {

void check_base_block(const HorizonSuite& suite, const Eigen::VectorXd& z) {
  if (z.size() != suite.base.block_size())
    throw ShapeError("conditioning vector has " + std::to_string(z.size()) + " entries, expected " +
                     std::to_string(suite.base.block_size()));
}

Eigen::MatrixXd stacked_blocks(const Eigen::MatrixXd& y_t, const Eigen::VectorXd& z, int width) {
  Eigen::MatrixXd blocks(y_t.rows(), width);
  for (Eigen::Index s = 0; s < y_t.rows(); ++s)
    blocks.row(s) = horizon_block(y_t.row(s).transpose(), z, width).transpose();
  return blocks;
}

}  // namespace

Eigen::MatrixXd compose_horizon(const HorizonSuite& suite, int h, const Eigen::MatrixXd& time_t_draws,
                                const Eigen::VectorXd& z, std::uint64_t seed, unsigned threads) {
  const auto& model = suite.horizon(h);
  SamplingOptions opt;
  opt.stream_offset = stream::horizon;
  opt.threads = threads;
  return draw_factorized(model, stacked_blocks(time_t_draws, z, model.block_size()), time_t_draws.rows(),
                         KeyedUniform(seed), opt);
}

JointSample baseline_forecast(const HorizonSuite& suite, int h, const Eigen::VectorXd& z, Eigen::Index draws,
                              std::uint64_t seed, unsigned threads) {
  check_base_block(suite, z);
  if (h < 0) throw MissingHorizonError("negative horizon");
  JointSample base = sample_joint(suite.base, z, draws, seed, threads);
  if (h == 0) return base;
  base.draws = compose_horizon(suite, h, base.draws, z, seed, threads);
  return base;
}

Eigen::VectorXd marginal_forecast(const HorizonSuite& suite, int variable, int h, const Eigen::VectorXd& z,
                                  Eigen::Index draws, std::uint64_t seed, unsigned threads) {
  check_base_block(suite, z);
  if (variable < 0 || variable >= suite.variables()) throw ShapeError("variable index out of range");
  const JointSample base = sample_joint(suite.base, z, draws, seed, threads);
  if (h == 0) return base.draws.col(variable);
  const auto& direct = suite.direct(h);
  const auto& m = direct.marginals[static_cast<std::size_t>(direct.position_of(variable))];
  const Eigen::MatrixXd blocks = stacked_blocks(base.draws, z, direct.block_size());
  const KeyedUniform uniforms(seed);
  Eigen::VectorXd out(draws);
  Eigen::VectorXd x(1 + direct.block_size());
  for (Eigen::Index s = 0; s < draws; ++s) {
    x(0) = 1.0;
    x.tail(direct.block_size()) = blocks.row(s).transpose();
    // Same stream as the joint horizon draw, so the first coordinate of the
    // ordering coincides across the two routes.
    const double u = uniforms(static_cast<std::uint64_t>(s), stream::horizon + static_cast<std::uint64_t>(variable));
    out(s) = generalized_inverse(m.grid().points(), m.cdf_table(x), u);
  }
  return out;
}

JointSample direct_forecast(const HorizonSuite& suite, int h, const Eigen::VectorXd& block, Eigen::Index draws,
                            std::uint64_t seed, unsigned threads) {
  const auto& model = suite.horizon(h);
  SamplingOptions opt;
  opt.stream_offset = stream::horizon;
  opt.threads = threads;
  JointSample out;
  out.draws = draw_factorized(model, block.transpose(), draws, KeyedUniform(seed), opt);
  out.seed = seed;
  out.z = block;
  out.names = model.names;
  return out;
}

}  // namespace dvar
