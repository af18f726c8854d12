#include "dvar/joint.hpp"

#include "dvar/error.hpp"
#include "dvar/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace dvar {

int FactorizedJointModel::position_of(int variable) const {
  for (std::size_t k = 0; k < spec.ordering.size(); ++k)
    if (spec.ordering[k] == variable) return static_cast<int>(k);
  throw ShapeError("variable " + std::to_string(variable) + " is not part of the model");
}

FactorizedJointModel fit_factorized(const SeriesPanel& panel, const DesignSpec& spec, const ModelOptions& options) {
  const DesignSet design = build_design(panel, spec);
  FactorizedJointModel model;
  model.spec = spec;
  model.names = panel.names();
  for (const auto& vd : design.variables) {
    const auto transform =
        CovariateTransform::from_recipe(options.transform, static_cast<int>(vd.covariates.cols()));
    try {
      model.marginals.push_back(fit_marginal_model(vd.covariates, vd.response, vd.variable, options.link, transform,
                                                   options.grid, options.fit));
    } catch (const FitQualityError& e) {
      throw FitQualityError("variable '" + panel.names()[static_cast<std::size_t>(vd.variable)] +
                            "' (horizon " + std::to_string(spec.horizon) + "): " + e.detail());
    } catch (const GridError& e) {
      throw GridError("variable '" + panel.names()[static_cast<std::size_t>(vd.variable)] + "': " + e.detail());
    }
  }
  return model;
}

Eigen::MatrixXd draw_factorized(const FactorizedJointModel& model, const Eigen::MatrixXd& conditioning,
                                Eigen::Index draws, const KeyedUniform& uniforms, const SamplingOptions& options) {
  const int J = model.variables();
  const int k = model.block_size();
  if (draws < 1) throw ShapeError("need at least one draw");
  if (conditioning.cols() != k)
    throw ShapeError("conditioning block has " + std::to_string(conditioning.cols()) + " entries, model expects " +
                     std::to_string(k));
  if (conditioning.rows() != 1 && conditioning.rows() != draws)
    throw ShapeError("conditioning must have one row or one row per draw");
  if (!conditioning.allFinite()) throw NumericError("non-finite conditioning values");

  Eigen::MatrixXd out(draws, J);
  const bool per_draw = conditioning.rows() == draws && draws > 1;
  parallel_for(static_cast<std::size_t>(draws), options.threads, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd x(1 + k + J);
    for (std::size_t s = begin; s < end; ++s) {
      const auto row = static_cast<Eigen::Index>(s);
      x(0) = 1.0;
      x.segment(1, k) = conditioning.row(per_draw ? row : 0).transpose();
      for (int pos = 0; pos < J; ++pos) {
        const int var = model.spec.ordering[static_cast<std::size_t>(pos)];
        const auto& m = model.marginals[static_cast<std::size_t>(pos)];
        const double u = uniforms(s, options.stream_offset + static_cast<std::uint64_t>(var));
        double y;
        if (options.override_law && options.override_law->variable == var) {
          y = options.override_law->quantile(u);
        } else {
          const Eigen::VectorXd table = m.cdf_table(x.head(m.raw_dimension()));
          y = generalized_inverse(m.grid().points(), table, u);
        }
        out(row, var) = y;
        if (model.spec.include_contemporaneous) x(1 + k + pos) = y;
      }
    }
  });
  return out;
}

JointSample sample_joint(const FactorizedJointModel& model, const Eigen::VectorXd& z, Eigen::Index draws,
                         std::uint64_t seed, unsigned threads) {
  SamplingOptions opt;
  opt.threads = threads;
  JointSample out;
  out.draws = draw_factorized(model, z.transpose(), draws, KeyedUniform(seed), opt);
  out.seed = seed;
  out.z = z;
  out.names = model.names;
  return out;
}

MonteCarloEstimate empirical_joint_cdf(const Eigen::MatrixXd& draws, const Eigen::VectorXd& y) {
  if (draws.rows() == 0) throw ShapeError("empty sample");
  if (y.size() != draws.cols()) throw ShapeError("evaluation point has the wrong dimension");
  Eigen::Index hits = 0;
  for (Eigen::Index s = 0; s < draws.rows(); ++s)
    if ((draws.row(s).transpose().array() <= y.array()).all()) ++hits;
  const double n = static_cast<double>(draws.rows());
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

MonteCarloEstimate joint_cdf(const FactorizedJointModel& model, const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                             Eigen::Index draws, std::uint64_t seed) {
  return empirical_joint_cdf(sample_joint(model, z, draws, seed).draws, y);
}

double sample_correlation(const Eigen::MatrixXd& draws) {
  if (draws.cols() != 2) throw ShapeError("correlation needs exactly two variables");
  if (draws.rows() < 2) throw ShapeError("correlation needs at least two draws");
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd c = draws.rowwise() - mean;
  const double sxx = c.col(0).squaredNorm(), syy = c.col(1).squaredNorm();
  if (sxx <= 0.0 || syy <= 0.0) throw CorrelationError("a coordinate has zero variance (degenerate marginal)");
  return std::clamp(c.col(0).dot(c.col(1)) / std::sqrt(sxx * syy), -1.0, 1.0);
}

double conditional_correlation(const FactorizedJointModel& model, const Eigen::VectorXd& z, Eigen::Index draws,
                               std::uint64_t seed) {
  if (model.variables() != 2) throw ShapeError("conditional correlation needs J = 2");
  return sample_correlation(sample_joint(model, z, draws, seed).draws);
}

}  // namespace dvar
