#pragma once

#include <string_view>

namespace dvar {

enum class LinkId { logit, probit };

std::string_view to_string(LinkId id) noexcept;
LinkId parse_link(std::string_view s);

/// Probabilities entering logarithms are clamped to [eps, 1 - eps].
inline constexpr double link_epsilon = 1e-10;

/// Per-observation log-likelihood pieces for a binary outcome d at index u:
/// value = d·log Λ(u) + (1-d)·log(1-Λ(u)) and its first two u-derivatives.
struct IndexTerms {
  double value;
  double gradient;
  double curvature;
};

/// Binary-choice link Λ with derivative λ and score weight
/// R(u) = λ(u) / (Λ(u)(1 - Λ(u))).
class Link {
 public:
  constexpr explicit Link(LinkId id = LinkId::logit) noexcept : id_(id) {}
  constexpr LinkId id() const noexcept { return id_; }

  /// Λ(u), unclamped. Throws NumericError for non-finite u.
  double cdf(double u) const;
  /// Λ(u) clamped into [eps, 1 - eps].
  double eval(double u) const;
  double deriv(double u) const;
  /// R(u), computed in log space so it stays finite for any finite u.
  double weight(double u) const;
  /// log Λ(u) and log(1 - Λ(u)), stable in both tails.
  double log_cdf(double u) const;
  double log_ccdf(double u) const;

  IndexTerms terms(double u, bool indicator) const;

  /// Upper bound on |∂²/∂u² log-likelihood|, used as a Lipschitz constant.
  constexpr double curvature_bound() const noexcept { return id_ == LinkId::logit ? 0.25 : 1.0; }

 private:
  LinkId id_;
};

double link_eval(const Link& link, double u);
double link_weight(const Link& link, double u);

}  // namespace dvar
