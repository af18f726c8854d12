#include "dvar/transform.hpp"

#include "dvar/error.hpp"

namespace dvar {

CovariateTransform::CovariateTransform(int raw_dimension, std::vector<Monomial> terms)
    : raw_dim_(raw_dimension), terms_(std::move(terms)) {
  if (raw_dim_ < 1 || terms_.empty()) throw SpecError("empty covariate transform");
  for (const auto& m : terms_) {
    if (m.empty()) throw SpecError("empty monomial in covariate transform");
    for (int c : m)
      if (c < 0 || c >= raw_dim_) throw SpecError("transform references raw column " + std::to_string(c));
  }
  if (terms_.front() != Monomial{0}) throw SpecError("first transform feature must be the intercept");
}

CovariateTransform CovariateTransform::from_recipe(std::string_view recipe, int raw_dimension) {
  std::vector<Monomial> terms;
  for (int c = 0; c < raw_dimension; ++c) terms.push_back({c});
  const bool squares = recipe == "quadratic" || recipe == "full";
  const bool cross = recipe == "interactions" || recipe == "full";
  if (!squares && !cross && recipe != "identity")
    throw ConfigError("unknown transform recipe '" + std::string(recipe) + "'");
  if (squares)
    for (int c = 1; c < raw_dimension; ++c) terms.push_back({c, c});
  if (cross)
    for (int a = 1; a < raw_dimension; ++a)
      for (int b = a + 1; b < raw_dimension; ++b) terms.push_back({a, b});
  return CovariateTransform(raw_dimension, std::move(terms));
}

bool CovariateTransform::is_identity() const noexcept {
  if (static_cast<int>(terms_.size()) != raw_dim_) return false;
  for (int c = 0; c < raw_dim_; ++c)
    if (terms_[static_cast<std::size_t>(c)] != Monomial{c}) return false;
  return true;
}

Eigen::VectorXd CovariateTransform::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != raw_dim_)
    throw ShapeError("covariate vector has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(raw_dim_));
  Eigen::VectorXd out(dimension());
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    double v = 1.0;
    for (int c : terms_[k]) v *= x(c);
    out(static_cast<Eigen::Index>(k)) = v;
  }
  return out;
}

Eigen::MatrixXd CovariateTransform::apply_rows(const Eigen::MatrixXd& x) const {
  if (x.cols() != raw_dim_) throw ShapeError("covariate matrix has the wrong number of columns");
  if (is_identity()) return x;
  Eigen::MatrixXd out(x.rows(), dimension());
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    auto col = out.col(static_cast<Eigen::Index>(k));
    col.setOnes();
    for (int c : terms_[k]) col.array() *= x.col(c).array();
  }
  return out;
}

}  // namespace dvar
