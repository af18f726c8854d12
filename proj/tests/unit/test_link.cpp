#include "dvar/error.hpp"
#include "dvar/link.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace dvar;

namespace {
const Link logit{LinkId::logit}, probit{LinkId::probit};
}

TEST(Link, CentreValues) {
  EXPECT_DOUBLE_EQ(link_eval(logit, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(link_eval(probit, 0.0), 0.5);
  EXPECT_NEAR(link_eval(logit, std::log(3.0)), 0.75, 1e-15);
}

TEST(Link, LogitWeightIsOne) {
  for (double u : {-5.0, 0.0, 7.0, -30.0, 45.0}) EXPECT_NEAR(link_weight(logit, u), 1.0, 1e-12) << u;
}

TEST(Link, ProbitWeight) {
  EXPECT_NEAR(link_weight(probit, 0.0), 4.0 / std::sqrt(2.0 * std::numbers::pi), 1e-12);
  for (double u : {0.3, 1.7, 4.0, 12.0}) EXPECT_NEAR(link_weight(probit, u), link_weight(probit, -u), 1e-12 * link_weight(probit, u));
}

TEST(Link, WeightMatchesDefinition) {
  for (const Link& l : {logit, probit})
    for (double u = -6.0; u <= 6.0; u += 0.25) {
      // Both links are symmetric, so 1 - F(u) = F(-u) without cancellation.
      EXPECT_NEAR(l.weight(u), l.deriv(u) / (l.cdf(u) * l.cdf(-u)), 1e-10 * l.weight(u));
    }
}

TEST(Link, WeightStaysFiniteInFarTails) {
  for (double u : {-1e3, -60.0, 60.0, 1e3}) {
    EXPECT_TRUE(std::isfinite(probit.weight(u))) << u;
    EXPECT_GT(probit.weight(u), 0.0);
    EXPECT_TRUE(std::isfinite(probit.log_cdf(u)));
    EXPECT_TRUE(std::isfinite(probit.log_ccdf(u)));
  }
}

TEST(Link, Symmetry) {
  for (const Link& l : {logit, probit})
    for (double u = -8.0; u <= 8.0; u += 0.5) EXPECT_NEAR(l.cdf(-u), 1.0 - l.cdf(u), 1e-15);
}

TEST(Link, DerivativeMatchesFiniteDifference) {
  const double h = 1e-5;
  for (const Link& l : {logit, probit})
    for (double u = -6.0; u <= 6.0; u += 0.1) {
      const double fd = (l.cdf(u + h) - l.cdf(u - h)) / (2 * h);
      EXPECT_NEAR(l.deriv(u), fd, 1e-6);
    }
}

TEST(Link, MonotoneAndClamped) {
  for (const Link& l : {logit, probit}) {
    double prev = 0.0;
    for (double u = -40.0; u <= 40.0; u += 0.5) {
      const double v = l.eval(u);
      EXPECT_GE(v, link_epsilon);
      EXPECT_LE(v, 1.0 - link_epsilon);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Link, IndexTermsMatchFiniteDifferences) {
  const double h = 1e-5;
  for (const Link& l : {logit, probit})
    for (bool d : {false, true})
      for (double u : {-3.0, -0.4, 0.0, 1.1, 2.5}) {
        const auto t = l.terms(u, d);
        const auto tp = l.terms(u + h, d), tm = l.terms(u - h, d);
        EXPECT_NEAR(t.gradient, (tp.value - tm.value) / (2 * h), 1e-6);
        EXPECT_NEAR(t.curvature, (tp.gradient - tm.gradient) / (2 * h), 1e-6);
        EXPECT_LE(t.curvature, 0.0);
        EXPECT_LE(-t.curvature, l.curvature_bound() + 1e-12);
      }
}

TEST(Link, NonFiniteRejected) {
  EXPECT_THROW(link_eval(logit, std::numeric_limits<double>::quiet_NaN()), NumericError);
  EXPECT_THROW(link_eval(probit, std::numeric_limits<double>::infinity()), NumericError);
  EXPECT_EQ(parse_link("probit"), LinkId::probit);
  EXPECT_EQ(to_string(LinkId::logit), "logit");
  EXPECT_THROW(parse_link("cloglog"), Error);
}
