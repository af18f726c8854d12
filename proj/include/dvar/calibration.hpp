#pragma once

#include "dvar/forecast.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dvar {

inline constexpr double rs_critical_value = 1.34;
/// Below this many PITs the band test is reported but not meaningful.
inline constexpr std::size_t pit_floor = 20;

struct BandTest {
  double statistic = 0.0;  ///< √P · sup_r |ECDF(r) - r|
  double critical = rs_critical_value;
  bool reject = false;
};

/// Uniformity test of PITs against the 45° line with a 1.34/√P band. The
/// supremum is exact: it includes left limits at every PIT, which covers the
/// 512-point evaluation grid as well. Throws ShapeError for an empty input.
BandTest rs_band_test(std::span<const double> pits);

struct PITGap {
  std::string origin;  ///< period label of the window end
  std::string reason;
};

struct PITReport {
  int variable = 0;
  std::string name;
  int horizon = 0;
  std::vector<double> pits;
  std::vector<std::string> origins;  ///< window end per PIT
  std::vector<PITGap> gaps;
  BandTest test;

  std::size_t size() const noexcept { return pits.size(); }
  double half_width() const;
  bool meaningful() const noexcept { return pits.size() >= pit_floor; }
  std::vector<double> sorted() const;
};

/// Builds the summary fields of a report from raw PITs.
PITReport make_pit_report(std::vector<double> pits, int variable = 0, int horizon = 0);

/// Right-continuous empirical CDF of forecast draws at the realization.
double pit_from_draws(const Eigen::Ref<const Eigen::VectorXd>& draws, double realization);

enum class PITMode {
  /// F̂_{Y_{j,t+h} | Z_t}: base draws of Y_t composed with the direct model.
  composed,
  /// Direct model evaluated at the observed (Y_t, Z_t) block.
  direct,
};

struct CalibrationOptions {
  SuiteSpec suite;  ///< ordering and lags; horizons are set per call
  ModelOptions model;
  Period window_end;  ///< last period of the initial estimation window
  Eigen::Index draws = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;  ///< windows refit concurrently
  PITMode mode = PITMode::composed;
};

/// Out-of-sample PITs with expanding-window refits. For each origin o from
/// the initial window end on, models are refitted on rows up to o only.
/// Composed mode forecasts Y_{j,o+1+h} from Z_{o+1}; direct mode forecasts
/// Y_{j,o+h} from the block at o (h >= 1). A window whose refit fails is
/// recorded as a gap. Throws InsufficientDataError when no origin remains.
PITReport expanding_window_pits(const SeriesPanel& panel, int variable, int h, const CalibrationOptions& options);

/// Columns r, ecdf, lower, upper on the 513-point grid i/512 merged with the
/// PITs. Bands are the 45° line ± 1.34/√P, not clipped to [0, 1].
void write_pit_bands(std::ostream& out, const PITReport& report);
/// Columns origin, pit; gaps listed with an empty pit.
void write_pits(std::ostream& out, const PITReport& report);

}  // namespace dvar
