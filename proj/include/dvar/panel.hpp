#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dvar {

enum class Frequency { weekly, monthly, quarterly };

std::string_view to_string(Frequency f) noexcept;
Frequency parse_frequency(std::string_view s);

/// True when `coarse` aggregates `fine` (or equals it).
bool is_coarser_or_equal(Frequency coarse, Frequency fine) noexcept;

/// A dated observation period.
///
/// `index` counts days since 1970-01-01 for weekly data, months since year 0
/// for monthly data and quarters since year 0 for quarterly data, so
/// consecutive periods of a regular series differ by 7, 1 and 1 respectively.
struct Period {
  Frequency freq = Frequency::quarterly;
  std::int64_t index = 0;

  static Period quarter(int year, int q);
  static Period month(int year, int m);
  static Period week(int year, int month, int day);

  /// "2008Q4", "2008-10" or "2008-10-03".
  std::string label() const;
  /// First and last calendar day, as days since 1970-01-01.
  std::int64_t first_day() const;
  std::int64_t last_day() const;
  /// The period of frequency `target` containing this one.
  Period containing(Frequency target) const;
  /// Step size between consecutive periods of this frequency.
  std::int64_t step() const noexcept { return freq == Frequency::weekly ? 7 : 1; }
  Period next() const { return {freq, index + step()}; }

  friend bool operator==(const Period&, const Period&) = default;
  friend auto operator<=>(const Period& a, const Period& b) { return a.index <=> b.index; }
};

/// Parses a period label at the declared frequency. Accepts ISO dates
/// (YYYY-MM-DD, YYYY/MM/DD), US dates (M/D/YYYY), months (YYYY-MM) and
/// quarters (YYYYQn, YYYY-Qn, YYYY:Qn, "YYYY Qn"). Calendar dates map to the
/// period that contains them. Throws IngestError.
Period parse_period(std::string_view text, Frequency freq);

/// Dated T×J matrix of outcomes. Immutable after construction.
class SeriesPanel {
 public:
  /// Validates: J ≥ 1, T ≥ 1, dates strictly increasing and equally spaced in
  /// `freq`, all values finite. Throws IngestError.
  SeriesPanel(std::vector<Period> dates, Eigen::MatrixXd values, std::vector<std::string> names,
              Frequency freq);

  const std::vector<Period>& dates() const noexcept { return dates_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  Frequency frequency() const noexcept { return freq_; }
  Eigen::Index periods() const noexcept { return values_.rows(); }
  Eigen::Index variables() const noexcept { return values_.cols(); }

  /// Column index of a variable name, or nullopt.
  std::optional<int> find(std::string_view name) const;
  /// Row index of a period, or nullopt.
  std::optional<Eigen::Index> find(const Period& p) const;

  /// Rows [first, last] inclusive.
  SeriesPanel slice(Eigen::Index first, Eigen::Index last) const;
  /// Rows dated within [from, to].
  SeriesPanel slice(const Period& from, const Period& to) const;
  /// Columns in the given order.
  SeriesPanel select(const std::vector<int>& columns) const;

 private:
  std::vector<Period> dates_;
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
  Frequency freq_;
};

/// Column mapping for tabular input.
struct PanelSchema {
  std::string date_column = "date";
  Frequency frequency = Frequency::quarterly;
  /// Source column → variable name. Empty means every non-date column, kept
  /// under its header name.
  std::vector<std::pair<std::string, std::string>> columns;
};

/// Reads a header-first CSV. Rows are sorted by date. Rows with a missing
/// cell ("", NA, NaN, ".", #N/A) are rejected with their 1-based data row
/// number; so are non-numeric cells and duplicate periods.
SeriesPanel load_panel(std::istream& source, const PanelSchema& schema);
SeriesPanel load_panel_file(const std::string& path, const PanelSchema& schema);

enum class AggregationScheme { mean };
enum class Coverage { require_full, allow_partial };

/// Averages observations within each period of the coarser `target`
/// frequency. With Coverage::require_full, a boundary period that is not
/// fully covered by the source observations throws AggregationError.
/// Returns the input unchanged when target equals the panel frequency.
SeriesPanel aggregate_frequency(const SeriesPanel& panel, Frequency target,
                                AggregationScheme scheme = AggregationScheme::mean,
                                Coverage coverage = Coverage::require_full);

/// Inner join on dates. The overlap must be a contiguous run of periods.
SeriesPanel join_panels(const SeriesPanel& a, const SeriesPanel& b);

/// Writes the panel as CSV with a "date" column.
void write_panel_csv(std::ostream& out, const SeriesPanel& panel);

}  // namespace dvar
