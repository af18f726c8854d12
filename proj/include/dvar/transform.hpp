#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace dvar {

/// Covariate map φ: each output feature is a product of raw covariate
/// columns. Raw column 0 is the intercept, so the identity recipe keeps every
/// raw column as-is and the first feature stays the constant 1.
class CovariateTransform {
 public:
  using Monomial = std::vector<int>;

  CovariateTransform() = default;
  CovariateTransform(int raw_dimension, std::vector<Monomial> terms);

  /// Recipes: "identity", "quadratic" (identity + squares), "interactions"
  /// (identity + pairwise products), "full" (identity + both).
  static CovariateTransform from_recipe(std::string_view recipe, int raw_dimension);
  static CovariateTransform identity(int raw_dimension) { return from_recipe("identity", raw_dimension); }

  int raw_dimension() const noexcept { return raw_dim_; }
  int dimension() const noexcept { return static_cast<int>(terms_.size()); }
  const std::vector<Monomial>& terms() const noexcept { return terms_; }
  bool is_identity() const noexcept;

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const;

  friend bool operator==(const CovariateTransform&, const CovariateTransform&) = default;

 private:
  int raw_dim_ = 0;
  std::vector<Monomial> terms_;
};

}  // namespace dvar
