#pragma once

#include "dvar/forecast.hpp"

#include <string>
#include <variant>
#include <vector>

namespace dvar {

struct PointMass {
  double value = 0.0;
};

struct TruncatedNormal {
  double mu = 0.0;
  double sigma = 1.0;
  double lo = -1.0;
  double hi = 1.0;
};

struct TruncatedGamma {
  double shape = 1.0;
  double scale = 1.0;
  double lo = 0.0;
  double hi = 1.0;
};

/// Step CDF on explicit points, sampled by generalized inverse.
struct CdfTable {
  std::vector<double> points;
  std::vector<double> cdf;
};

using CounterfactualLaw = std::variant<PointMass, TruncatedNormal, TruncatedGamma, CdfTable>;

/// Replacement law G for one coordinate of Y_t. Laws are
/// covariate-independent.
struct CounterfactualSpec {
  int target = 0;  ///< panel column
  CounterfactualLaw law;
};

/// Throws SpecError: lo >= hi, sigma/shape/scale <= 0, a table that is not
/// nondecreasing within [0, 1], or truncation mass below 1e-12.
void validate(const CounterfactualSpec& spec);

/// [lo, hi] of the law (the value twice for a point mass).
std::pair<double, double> support(const CounterfactualLaw& law);

/// Throws SpecError when the law's support is not inside [observed_lo,
/// observed_hi].
void check_support(const CounterfactualSpec& spec, double observed_lo, double observed_hi);

/// Inverse CDF of the (truncated) law, exact: truncated laws are inverted on
/// the truncated CDF, not rejection-sampled.
double counterfactual_quantile(const CounterfactualLaw& law, double u);

std::string describe(const CounterfactualLaw& law);

/// i.i.d. draws from the law.
Eigen::VectorXd sample_counterfactual_marginal(const CounterfactualSpec& spec, Eigen::Index draws,
                                               std::uint64_t seed);

/// The fitted marginal of `variable` at raw covariates x as a table law,
/// i.e. G = F̂. Used for null counterfactuals.
CdfTable table_from_marginal(const FactorizedJointModel& model, int variable, const Eigen::VectorXd& x);

/// Draws of Y_t under G: the sampler with the target coordinate's inverse
/// step replaced by the law, reusing that coordinate's uniform stream.
/// Later coordinates condition on the counterfactual value.
JointSample sample_counterfactual_joint(const FactorizedJointModel& base, const CounterfactualSpec& spec,
                                        const Eigen::VectorXd& z, Eigen::Index draws, std::uint64_t seed,
                                        unsigned threads = 1);

/// Y_{t+h} mixed over the counterfactual Y_t; h = 0 returns the
/// counterfactual joint itself.
JointSample counterfactual_forecast(const HorizonSuite& suite, const CounterfactualSpec& spec, int h,
                                    const Eigen::VectorXd& z, Eigen::Index draws, std::uint64_t seed,
                                    unsigned threads = 1);

}  // namespace dvar
