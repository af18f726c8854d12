#include "dvar/bootstrap.hpp"
#include "dvar/error.hpp"
#include "dvar/rng.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace dvar;

namespace {

Eigen::VectorXd mean_statistic(const SeriesPanel& p) { return p.values().colwise().mean().transpose(); }

}  // namespace

TEST(BlockIndices, FullLengthBlockIsIdentity) {
  const auto panel = test::gaussian_var(57, 1);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    const auto r = moving_block_resample(panel, 57, seed);
    EXPECT_EQ(r.values(), panel.values());
    EXPECT_EQ(r.dates(), panel.dates());
    EXPECT_EQ(r.names(), panel.names());
  }
}

TEST(BlockIndices, UnitBlocksDrawRows) {
  const auto rows = block_indices(40, 1, 7);
  ASSERT_EQ(rows.size(), 40u);
  for (auto r : rows) {
    EXPECT_GE(r, 0);
    EXPECT_LT(r, 40);
  }
  EXPECT_LT(std::set<Eigen::Index>(rows.begin(), rows.end()).size(), 40u);
}

TEST(BlockIndices, TraceOfShortSeries) {
  const std::uint64_t seed = 11;
  const auto rows = block_indices(10, 3, seed);
  ASSERT_EQ(rows.size(), 10u);
  const KeyedUniform u(seed);
  for (std::size_t b = 0; b < 4; ++b) {
    const auto start = static_cast<Eigen::Index>(u(b, stream::auxiliary) * 8);
    for (std::size_t k = 0; k < 3 && 3 * b + k < 10; ++k) EXPECT_EQ(rows[3 * b + k], start + static_cast<Eigen::Index>(k));
  }
  for (auto r : rows) EXPECT_LE(r, 9);
}

TEST(BlockIndices, ResampleRelabelsDates) {
  const auto panel = test::gaussian_var(30, 2);
  const auto r = moving_block_resample(panel, 4, 5);
  EXPECT_EQ(r.dates(), panel.dates());
  const auto rows = block_indices(30, 4, 5);
  for (Eigen::Index t = 0; t < 30; ++t)
    EXPECT_EQ(r.values().row(t), panel.values().row(rows[static_cast<std::size_t>(t)]));
}

TEST(BlockPlan, Validation) {
  BlockPlan p;
  EXPECT_NO_THROW(validate(p, 100));
  EXPECT_THROW(validate(p, 7), PlanError);
  p.block_length = 0;
  EXPECT_THROW(validate(p, 100), PlanError);
  p = BlockPlan{};
  p.replications = 0;
  EXPECT_THROW(validate(p, 100), PlanError);
  p = BlockPlan{};
  p.level = 1.0;
  EXPECT_THROW(validate(p, 100), PlanError);
  EXPECT_THROW(block_indices(5, 6, 1), PlanError);
}

TEST(InterpolatedQuantile, TypeSeven) {
  EXPECT_DOUBLE_EQ(interpolated_quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(interpolated_quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(interpolated_quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(interpolated_quantile({1, 2, 3, 4, 5}, 0.1), 1.4);
  EXPECT_THROW(interpolated_quantile({}, 0.5), ShapeError);
}

TEST(BootstrapBands, ConstantStatisticHasZeroWidth) {
  const auto panel = test::gaussian_var(60, 3);
  BlockPlan p;
  p.replications = 50;
  const auto b = bootstrap_bands(panel, [](const SeriesPanel&) { return Eigen::Vector2d(1.5, -2.0); }, p);
  EXPECT_EQ(b.lower, b.upper);
  EXPECT_EQ(b.lower, Eigen::Vector2d(1.5, -2.0));
  EXPECT_EQ(b.failed, 0);
}

TEST(BootstrapBands, FullBlockGivesDegenerateBand) {
  const auto panel = test::gaussian_var(60, 4);
  BlockPlan p;
  p.block_length = 60;
  p.replications = 20;
  const auto b = bootstrap_bands(panel, mean_statistic, p);
  EXPECT_EQ(b.lower, b.estimate);
  EXPECT_EQ(b.upper, b.estimate);
}

TEST(BootstrapBands, ReplicationSeedsAreDerived) {
  const auto panel = test::gaussian_var(80, 5);
  BlockPlan p;
  p.replications = 1;
  p.seed = 42;
  p.level = 0.5;
  const auto b = bootstrap_bands(panel, mean_statistic, p);
  EXPECT_EQ(b.lower, mean_statistic(moving_block_resample(panel, p.block_length, derive_seed(42, 0))));
}

TEST(BootstrapBands, DeterministicAcrossThreads) {
  const auto panel = test::gaussian_var(120, 6);
  BlockPlan p;
  p.replications = 200;
  p.seed = 9;
  p.threads = 1;
  const auto a = bootstrap_bands(panel, mean_statistic, p);
  p.threads = 6;
  const auto b = bootstrap_bands(panel, mean_statistic, p);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
  EXPECT_TRUE((a.lower.array() < a.estimate.array()).all());
  EXPECT_TRUE((a.upper.array() > a.estimate.array()).all());
}

TEST(BootstrapBands, FailuresAreCountedAndBounded) {
  const auto panel = test::gaussian_var(50, 7);
  BlockPlan p;
  p.replications = 100;
  auto flaky = [&](const SeriesPanel& s) -> Eigen::VectorXd {
    if (s.values() != panel.values() && s.values()(0, 0) > 0.8) throw FitQualityError("synthetic failure");
    return mean_statistic(s);
  };
  int expected = 0;
  for (int b = 0; b < 100; ++b)
    expected += moving_block_resample(panel, p.block_length, derive_seed(p.seed, static_cast<std::uint64_t>(b))).values()(0, 0) > 0.8;
  ASSERT_GT(expected, 0);
  if (expected <= 20) {
    const auto b = bootstrap_bands(panel, flaky, p);
    EXPECT_EQ(b.failed, expected);
    EXPECT_EQ(b.replications, 100 - expected);
    EXPECT_FALSE(b.failures.empty());
  } else {
    EXPECT_THROW(bootstrap_bands(panel, flaky, p), BootstrapQualityError);
  }
  EXPECT_THROW(bootstrap_bands(
                   panel,
                   [](const SeriesPanel& s) -> Eigen::VectorXd {
                     if (s.values() != test::gaussian_var(50, 7).values()) throw FitQualityError("always");
                     return mean_statistic(s);
                   },
                   p),
               BootstrapQualityError);
  EXPECT_THROW(bootstrap_bands(
                   panel,
                   [n = 0](const SeriesPanel&) mutable -> Eigen::VectorXd {
                     return n++ ? Eigen::VectorXd::Zero(3) : Eigen::VectorXd::Zero(2);
                   },
                   p),
               BootstrapQualityError);
}

TEST(BootstrapBands, BandsCsv) {
  BandResult b;
  b.estimate = Eigen::Vector2d(1, 2);
  b.lower = Eigen::Vector2d(0.5, 1.5);
  b.upper = Eigen::Vector2d(1.5, 2.5);
  std::ostringstream out;
  write_bands(out, {"x", "y"}, b);
  EXPECT_EQ(out.str(), "coordinate,point,lower,upper\nx,1,0.5,1.5\ny,2,1.5,2.5\n");
}

TEST(BootstrapBands, MeanCoverageOnGaussianNoise) {
  int covered = 0;
  const int metas = 40;
  for (int r = 0; r < metas; ++r) {
    BlockPlan p;
    p.replications = 300;
    p.seed = static_cast<std::uint64_t>(r);
    p.threads = 4;
    const auto b = bootstrap_bands(test::quarterly(test::std_normals(200, 700 + r)), mean_statistic, p);
    covered += b.lower(0) <= 0.0 && 0.0 <= b.upper(0);
  }
  EXPECT_GE(covered, 32);
}
