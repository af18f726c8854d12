#pragma once

#include "dvar/counterfactual.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dvar {

enum class StreamMode {
  common,       ///< baseline and counterfactual share uniforms
  independent,  ///< counterfactual uses a derived seed
};

std::string_view to_string(StreamMode m) noexcept;
StreamMode parse_stream_mode(std::string_view s);

/// Mean, std (n-1), skewness m3/m2^1.5 and raw kurtosis m4/m2^2 (central
/// moments with 1/n). Skewness and kurtosis are empty for zero variance or
/// fewer than 4 values. Sums split positive and negative terms, so a sample
/// symmetric about 0 has mean and skewness exactly 0.
struct Moments {
  std::optional<double> mean, std, skewness, kurtosis;
};
Moments sample_moments(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Left-continuous generalized inverse of the empirical CDF:
/// x_(k) for the smallest k with k/S >= tau.
double empirical_quantile(const std::vector<double>& sorted, double tau);

/// #{x <= y} / S on a sorted sample.
double empirical_cdf(const std::vector<double>& sorted, double y);

struct QuantileRow {
  double tau = 0.0;
  double base = 0.0;
  double diff = 0.0;
};

struct MomentRow {
  std::string name;
  std::optional<double> base, diff;
};

struct CdfCurve {
  std::vector<double> grid;
  std::vector<double> base, counterfactual, dir, standard_error;
};

struct VariableResponse {
  std::string name;
  CdfCurve cdf;
  std::vector<QuantileRow> quantiles;
  std::vector<MomentRow> moments;
};

/// CDFs on grid_x × grid_y; entry (a, b) is P(Y1 <= x_a, Y2 <= y_b).
struct JointDIR {
  std::vector<double> grid_x, grid_y;
  Eigen::MatrixXd base, counterfactual, dir;
};

struct IRFReport {
  int horizon = 0;
  StreamMode mode = StreamMode::common;
  std::vector<VariableResponse> variables;  ///< panel column order
  std::optional<JointDIR> joint;
};

const std::vector<double>& default_taus();

/// Empirical CDFs of both samples on per-variable grids and their
/// difference. Standard errors are paired (common) or binomial
/// (independent, or when the sample sizes differ).
/// Throws ShapeError for empty samples or mismatched variable counts.
IRFReport dirf(const JointSample& baseline, const JointSample& counterfactual,
               const std::vector<std::vector<double>>& grids, StreamMode mode = StreamMode::common);

std::vector<QuantileRow> qirf(const Eigen::Ref<const Eigen::VectorXd>& baseline,
                              const Eigen::Ref<const Eigen::VectorXd>& counterfactual,
                              const std::vector<double>& taus = default_taus());

std::vector<MomentRow> mirf(const Eigen::Ref<const Eigen::VectorXd>& baseline,
                            const Eigen::Ref<const Eigen::VectorXd>& counterfactual);

/// Joint DIR of a J = 2 pair on a product grid.
JointDIR joint_dirf(const Eigen::MatrixXd& baseline, const Eigen::MatrixXd& counterfactual,
                    const std::vector<double>& grid_x, const std::vector<double>& grid_y);

/// `points` evenly spaced values over the pooled range of two samples.
std::vector<double> pooled_grid(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                                int points);

struct IRFOptions {
  Eigen::Index draws = 10000;
  std::uint64_t seed = 0;
  StreamMode mode = StreamMode::common;
  unsigned threads = 1;
  std::vector<double> taus = default_taus();
  int grid_points = 101;
  std::vector<std::vector<double>> grids;  ///< per variable; pooled_grid when empty
  int joint_grid_points = 51;              ///< 0 disables the joint DIR
};

/// dirf, qirf, mirf and the J = 2 joint DIR of an existing sample pair.
IRFReport irf_from_samples(const JointSample& baseline, const JointSample& counterfactual, int h,
                           const IRFOptions& options = {});

/// Baseline and counterfactual forecasts at h, then irf_from_samples. The
/// counterfactual reuses the baseline seed in common mode.
IRFReport impulse_response(const HorizonSuite& suite, const CounterfactualSpec& spec, int h,
                           const Eigen::VectorXd& z, const IRFOptions& options = {});

std::vector<IRFReport> impulse_responses(const HorizonSuite& suite, const CounterfactualSpec& spec,
                                         const std::vector<int>& horizons, const Eigen::VectorXd& z,
                                         const IRFOptions& options = {});

/// Quantile and moment rows per variable, Base/Diff column pairs per horizon.
void write_irf_table(std::ostream& out, const std::vector<IRFReport>& reports);
/// Long format: h, variable, y, base, counterfactual, dir, se.
void write_irf_curves(std::ostream& out, const std::vector<IRFReport>& reports);
/// Long format: h, x, y, base, counterfactual, dir.
void write_joint_dir(std::ostream& out, const std::vector<IRFReport>& reports);

}  // namespace dvar
