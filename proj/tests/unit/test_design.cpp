#include "dvar/design.hpp"
#include "dvar/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace dvar;

TEST(Design, OneLagThreePoints) {
  Eigen::VectorXd y(3);
  y << 10, 20, 30;
  const auto d = build_design(test::quarterly(y), DesignSpec{{0}, 1, 0, true});
  ASSERT_EQ(d.rows(), 2);
  const auto& v = d.variables[0];
  EXPECT_EQ(v.response, Eigen::Vector2d(20, 30));
  EXPECT_EQ(v.covariates.col(0), Eigen::Vector2d(1, 1));
  EXPECT_EQ(v.covariates.col(1), Eigen::Vector2d(10, 20));
}

TEST(Design, ContemporaneousColumnCount) {
  const auto p = test::gaussian_var(30, 1);
  const auto d = build_design(p, DesignSpec{{0, 1}, 2, 0, true});
  EXPECT_EQ(d.variables[0].covariates.cols(), 1 + 4);
  EXPECT_EQ(d.variables[1].covariates.cols(), 1 + 4 + 1);
  // The extra column is the first variable's contemporaneous value.
  EXPECT_EQ(d.variables[1].covariates.col(5), d.variables[0].response);
}

TEST(Design, HorizonRowCount) {
  const auto p = test::gaussian_var(30, 1);
  const auto d = build_design(p, DesignSpec{{0, 1}, 3, 4, true});
  // Origins t (1-based) need t - 3 + 1 >= 1 for the block and t + 4 <= 30.
  int count = 0;
  for (int t = 1; t <= 30; ++t)
    if (t - 2 >= 1 && t + 4 <= 30) ++count;
  EXPECT_EQ(d.rows(), count);
  EXPECT_EQ(d.rows(), 24);
}

TEST(Design, HorizonBlockStartsAtOrigin) {
  const auto p = test::gaussian_var(20, 2);
  const DesignSpec spec{{0, 1}, 2, 3, false};
  const auto d = build_design(p, spec);
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    const Eigen::Index t = d.origin_rows[static_cast<std::size_t>(r)];
    const Eigen::VectorXd x = d.variables[1].covariates.row(r).transpose();
    EXPECT_EQ(x(1), p.values()(t, 0));
    EXPECT_EQ(x(2), p.values()(t, 1));
    EXPECT_EQ(x(3), p.values()(t - 1, 0));
    EXPECT_EQ(d.variables[1].response(r), p.values()(t + 3, 1));
    EXPECT_EQ(conditioning_block(p, t, spec), x.segment(1, 4));
  }
  // Without contemporaneous terms every variable shares the covariates.
  EXPECT_EQ(d.variables[0].covariates, d.variables[1].covariates);
}

TEST(Design, RoundTripPairsAppearOnce) {
  const auto y = test::std_normals(40, 77);
  const auto d = build_design(test::quarterly(y), DesignSpec{{0}, 1, 0, true});
  std::set<std::pair<double, double>> seen;
  for (Eigen::Index r = 0; r < d.rows(); ++r)
    seen.emplace(d.variables[0].response(r), d.variables[0].covariates(r, 1));
  ASSERT_EQ(seen.size(), 39u);
  for (Eigen::Index t = 1; t < 40; ++t) EXPECT_EQ(seen.count({y(t), y(t - 1)}), 1u);
}

TEST(Design, ColumnCountFormulaOnRandomSpecs) {
  std::mt19937 gen(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int J = 1 + static_cast<int>(gen() % 4);
    const int p = 1 + static_cast<int>(gen() % 3);
    const int h = static_cast<int>(gen() % 3);
    std::vector<int> order = DesignSpec::identity_ordering(J);
    std::shuffle(order.begin(), order.end(), gen);
    Eigen::MatrixXd v(25, J);
    for (int j = 0; j < J; ++j) v.col(j) = test::std_normals(25, 100 + trial * 10 + j);
    std::vector<std::string> names;
    for (int j = 0; j < J; ++j) names.push_back("v" + std::to_string(j));
    const DesignSpec spec{order, p, h, true};
    const auto d = build_design(test::quarterly(v, names), spec);
    EXPECT_EQ(d.rows(), h == 0 ? 25 - p : 25 - p - h + 1);
    for (int k = 0; k < J; ++k) {
      const auto& vd = d.variables[static_cast<std::size_t>(k)];
      EXPECT_EQ(vd.variable, order[static_cast<std::size_t>(k)]);
      EXPECT_EQ(vd.covariates.cols(), 1 + J * p + k);
      EXPECT_EQ(vd.covariates.cols(), spec.raw_dimension(J, k));
      EXPECT_TRUE((vd.covariates.col(0).array() == 1.0).all());
      // Contemporaneous entries follow the ordering.
      for (int c = 0; c < k; ++c)
        EXPECT_EQ(vd.covariates.col(1 + J * p + c), d.variables[static_cast<std::size_t>(c)].response);
    }
  }
}

TEST(Design, Errors) {
  const auto p = test::gaussian_var(6, 1);
  EXPECT_THROW(build_design(p, DesignSpec{{0, 1}, 3, 3, true}), InsufficientDataError);
  EXPECT_THROW(build_design(p, DesignSpec{{0, 0}, 1, 0, true}), SpecError);
  EXPECT_THROW(build_design(p, DesignSpec{{0, 1}, 0, 0, true}), SpecError);
  EXPECT_THROW(conditioning_block(p, 1, DesignSpec{{0, 1}, 2, 0, true}), InsufficientDataError);
  EXPECT_NO_THROW(conditioning_block(p, 6, DesignSpec{{0, 1}, 2, 0, true}));
}
