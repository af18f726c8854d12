#pragma once

#include "dvar/design.hpp"
#include "dvar/dr.hpp"
#include "dvar/panel.hpp"
#include "dvar/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dvar {

/// Settings shared by every marginal fit of a joint model.
struct ModelOptions {
  Link link{LinkId::logit};
  std::string transform = "identity";
  GridOptions grid;
  FitOptions fit;
};

/// Chain of marginal conditional CDFs: the k-th marginal (in ordering order)
/// conditions on (1, block, Y_{ordering[0]}, ..., Y_{ordering[k-1]}).
struct FactorizedJointModel {
  std::vector<MarginalCDFModel> marginals;  ///< ordering order
  DesignSpec spec;
  std::vector<std::string> names;           ///< panel column order

  int variables() const noexcept { return static_cast<int>(names.size()); }
  int block_size() const noexcept { return spec.block_size(variables()); }
  /// Position of a panel column in the ordering.
  int position_of(int variable) const;
};

/// Fits the J marginals on build_design(panel, spec). A FitQualityError from
/// any marginal is rethrown annotated with the variable name.
FactorizedJointModel fit_factorized(const SeriesPanel& panel, const DesignSpec& spec,
                                    const ModelOptions& options = {});

/// S×J draws in panel column order.
struct JointSample {
  Eigen::MatrixXd draws;
  std::uint64_t seed = 0;
  Eigen::VectorXd z;
  std::vector<std::string> names;

  Eigen::Index size() const noexcept { return draws.rows(); }
};

/// Replacement law for one coordinate during sampling: given a uniform u,
/// returns the coordinate's value. Used for counterfactual surgery.
struct CoordinateOverride {
  int variable = -1;
  std::function<double(double)> quantile;
};

struct SamplingOptions {
  std::uint64_t stream_offset = stream::contemporaneous;
  unsigned threads = 1;
  const CoordinateOverride* override_law = nullptr;
};

/// Draws S samples from the factorized model. For draw s and each
/// coordinate in ordering order, u ~ U(0,1) from the (seed, s, stream +
/// variable) key and y = min{g : F̂(g | x) >= u}; u above the top value maps
/// to the grid maximum. `conditioning` is either one block used for every
/// draw or an S-row matrix of per-draw blocks.
Eigen::MatrixXd draw_factorized(const FactorizedJointModel& model, const Eigen::MatrixXd& conditioning,
                                Eigen::Index draws, const KeyedUniform& uniforms,
                                const SamplingOptions& options = {});

/// Throws ShapeError when z has the wrong dimension or S < 1.
JointSample sample_joint(const FactorizedJointModel& model, const Eigen::VectorXd& z, Eigen::Index draws,
                         std::uint64_t seed, unsigned threads = 1);

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// P̂(Y <= y componentwise | z) from S draws, with binomial standard error.
MonteCarloEstimate joint_cdf(const FactorizedJointModel& model, const Eigen::VectorXd& z,
                             const Eigen::VectorXd& y, Eigen::Index draws, std::uint64_t seed);

/// Fraction of sample rows <= y componentwise.
MonteCarloEstimate empirical_joint_cdf(const Eigen::MatrixXd& draws, const Eigen::VectorXd& y);

/// Pearson correlation of the two columns of a J = 2 sample.
/// Throws CorrelationError for a zero-variance column, ShapeError if J != 2.
double sample_correlation(const Eigen::MatrixXd& draws);
double conditional_correlation(const FactorizedJointModel& model, const Eigen::VectorXd& z, Eigen::Index draws,
                               std::uint64_t seed);

}  // namespace dvar
