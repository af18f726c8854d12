#pragma once

#include "dvar/joint.hpp"

#include <map>
#include <vector>

namespace dvar {

struct SuiteSpec {
  std::vector<int> ordering;
  int base_lags = 2;     ///< Z_t = (Y_{t-1}, ..., Y_{t-p})
  int horizon_lags = 3;  ///< (Y_t, Z_t) blocks for the local projections; at most base_lags + 1
  std::vector<int> horizons;
  bool fit_direct = true;  ///< also fit univariate Y_{j,t+h} | (Y_t, Z_t) models
};

/// One-step factorized model of Y_t | Z_t plus, per horizon h, a factorized
/// local projection of Y_{t+h} | (Y_t, Z_t) and univariate direct models of
/// each Y_{j,t+h} | (Y_t, Z_t).
struct HorizonSuite {
  FactorizedJointModel base;
  std::map<int, FactorizedJointModel> horizon_models;
  std::map<int, FactorizedJointModel> direct_models;
  std::vector<int> horizons;

  int variables() const noexcept { return base.variables(); }
  const FactorizedJointModel& horizon(int h) const;
  const FactorizedJointModel& direct(int h) const;
};

/// Throws SpecError for non-positive or duplicate horizons, or
/// horizon_lags > base_lags + 1; InsufficientDataError when
/// max horizon + lags >= T; fit errors are annotated with (h, variable).
HorizonSuite fit_suite(const SeriesPanel& panel, const SuiteSpec& spec, const ModelOptions& options = {});

/// Conditioning block of a horizon model from a time-t draw and the base
/// block: the leading entries of (y_t, z).
Eigen::VectorXd horizon_block(const Eigen::VectorXd& y_t, const Eigen::VectorXd& z, int horizon_block_size);

/// Draws of Y_{t+h} given Z_t = z. h = 0 is sample_joint(base); h > 0 draws
/// Y_t from base, then Y_{t+h} from the horizon model given (Y_t, z), draw by
/// draw. Throws MissingHorizonError for an unfitted h.
JointSample baseline_forecast(const HorizonSuite& suite, int h, const Eigen::VectorXd& z, Eigen::Index draws,
                              std::uint64_t seed, unsigned threads = 1);

/// Draws of Y_{j,t+h} given Z_t = z from the direct univariate model mixed
/// over base draws of Y_t. At h = 0 this is column j of the base draw.
Eigen::VectorXd marginal_forecast(const HorizonSuite& suite, int variable, int h, const Eigen::VectorXd& z,
                                  Eigen::Index draws, std::uint64_t seed, unsigned threads = 1);

/// Draws of Y_{t+h} given the observed (Y_t, Z_t) block, i.e. the horizon
/// model alone.
JointSample direct_forecast(const HorizonSuite& suite, int h, const Eigen::VectorXd& block, Eigen::Index draws,
                            std::uint64_t seed, unsigned threads = 1);

/// Composes horizon draws onto existing time-t draws (one row per draw).
Eigen::MatrixXd compose_horizon(const HorizonSuite& suite, int h, const Eigen::MatrixXd& time_t_draws,
                                const Eigen::VectorXd& z, std::uint64_t seed, unsigned threads = 1);

}  // namespace dvar
