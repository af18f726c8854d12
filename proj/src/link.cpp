#include "dvar/link.hpp"

#include "dvar/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dvar {
namespace {

const double log_eps = std::log(link_epsilon);

void require_finite(double u) {
  if (!std::isfinite(u)) throw NumericError("non-finite linear index");
}

double log_normal_pdf(double u) { return -0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi); }

// log Φ(u), accurate in both tails.
double log_normal_cdf(double u) {
  if (u > 5.0) return std::log1p(-0.5 * std::erfc(u / std::numbers::sqrt2));
  if (u > -30.0) return std::log(0.5 * std::erfc(-u / std::numbers::sqrt2));
  // Asymptotic Mills-ratio expansion for the far lower tail.
  const double x2 = 1.0 / (u * u);
  return log_normal_pdf(u) - std::log(-u) + std::log1p(x2 * (-1.0 + x2 * (3.0 - 15.0 * x2)));
}

double log_logistic(double u) { return u >= 0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u)); }

}  // namespace

std::string_view to_string(LinkId id) noexcept { return id == LinkId::logit ? "logit" : "probit"; }

LinkId parse_link(std::string_view s) {
  if (s == "logit") return LinkId::logit;
  if (s == "probit") return LinkId::probit;
  throw ConfigError("unknown link '" + std::string(s) + "' (expected logit|probit)");
}

double Link::cdf(double u) const {
  require_finite(u);
  if (id_ == LinkId::logit) {
    if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
  }
  return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

double Link::eval(double u) const { return std::clamp(cdf(u), link_epsilon, 1.0 - link_epsilon); }

double Link::deriv(double u) const {
  require_finite(u);
  if (id_ == LinkId::logit) {
    const double e = std::exp(-std::abs(u));
    return e / ((1.0 + e) * (1.0 + e));
  }
  return std::exp(log_normal_pdf(u));
}

double Link::log_cdf(double u) const {
  require_finite(u);
  return id_ == LinkId::logit ? log_logistic(u) : log_normal_cdf(u);
}

double Link::log_ccdf(double u) const { return log_cdf(-u); }

double Link::weight(double u) const {
  require_finite(u);
  if (id_ == LinkId::logit) return 1.0;
  return std::exp(log_normal_pdf(u) - log_normal_cdf(u) - log_normal_cdf(-u));
}

IndexTerms Link::terms(double u, bool indicator) const {
  require_finite(u);
  if (id_ == LinkId::logit) {
    const double p = cdf(u);
    const double v = indicator ? log_logistic(u) : log_logistic(-u);
    return {std::max(v, log_eps), (indicator ? 1.0 : 0.0) - p, -deriv(u)};
  }
  const double lp = log_normal_pdf(u);
  if (indicator) {
    const double r = std::exp(lp - log_normal_cdf(u));  // φ/Φ
    return {std::max(log_normal_cdf(u), log_eps), r, -r * (u + r)};
  }
  const double r = std::exp(lp - log_normal_cdf(-u));  // φ/(1-Φ)
  return {std::max(log_normal_cdf(-u), log_eps), -r, -r * (r - u)};
}

double link_eval(const Link& link, double u) { return link.eval(u); }
double link_weight(const Link& link, double u) { return link.weight(u); }

}  // namespace dvar
