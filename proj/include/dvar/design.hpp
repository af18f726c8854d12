#pragma once

#include "dvar/panel.hpp"

#include <Eigen/Dense>

#include <vector>

namespace dvar {

/// How to regress outcomes on lagged information.
///
/// horizon == 0 builds the one-step factorized design: response Y_t,
/// conditioning block Z_t = (Y_{t-1}, ..., Y_{t-p}).
///
/// horizon >= 1 builds the local-projection design for Y_{t+h} given
/// (Y_t, Z_t): the block starts at the current period, (Y_t, ..., Y_{t-p+1}),
/// so `lags` counts Y_t itself. A one-step model with p lags pairs with
/// horizon models using p + 1 lags.
///
/// Within a block, lags are stacked newest first and each lag lists variables
/// in panel column order.
struct DesignSpec {
  std::vector<int> ordering;  ///< permutation of 0..J-1 (0-based)
  int lags = 2;
  int horizon = 0;
  bool include_contemporaneous = true;

  /// Most recent lag used by the block: 1 at horizon 0, else 0.
  int first_lag() const noexcept { return horizon == 0 ? 1 : 0; }
  /// Block width J·p.
  int block_size(int variables) const noexcept { return variables * lags; }
  /// Raw covariate count for the k-th variable in the ordering (0-based):
  /// 1 + J·p + k contemporaneous entries when include_contemporaneous.
  int raw_dimension(int variables, int position) const noexcept {
    return 1 + block_size(variables) + (include_contemporaneous ? position : 0);
  }

  /// Identity ordering on J variables.
  static std::vector<int> identity_ordering(int variables);
};

/// Throws SpecError unless `ordering` is a bijection on 0..J-1 and lags >= 1,
/// horizon >= 0.
void validate(const DesignSpec& spec, int variables);

/// (response, covariates) for one variable of the ordering.
struct VariableDesign {
  int variable = 0;  ///< panel column of the response
  Eigen::VectorXd response;
  Eigen::MatrixXd covariates;  ///< first column is the constant 1
};

struct DesignSet {
  DesignSpec spec;
  std::vector<VariableDesign> variables;  ///< in ordering order
  /// Panel row t of the conditioning time for each design row; the response
  /// is dated t + horizon.
  std::vector<Eigen::Index> origin_rows;
  Eigen::Index rows() const noexcept { return static_cast<Eigen::Index>(origin_rows.size()); }
};

/// Throws InsufficientDataError when T <= p + h.
DesignSet build_design(const SeriesPanel& panel, const DesignSpec& spec);

/// Conditioning block for origin row t (may equal T when horizon == 0, i.e.
/// the block for the first unobserved period). Throws InsufficientDataError
/// when the block would reach before the first row.
Eigen::VectorXd conditioning_block(const SeriesPanel& panel, Eigen::Index t, const DesignSpec& spec);

/// Assembles raw covariates (1, block, contemporaneous...) for one variable.
Eigen::VectorXd raw_covariates(const Eigen::VectorXd& block, const Eigen::VectorXd& contemporaneous);

}  // namespace dvar
