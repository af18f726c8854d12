#include "dvar/panel.hpp"

#include "dvar/csv.hpp"
#include "dvar/error.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace dvar {
namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

std::int64_t days_of(int y, int m, int d) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw IngestError("invalid calendar date " + std::to_string(y) + "-" +
                                   std::to_string(m) + "-" + std::to_string(d));
  return sys_days{ymd}.time_since_epoch().count();
}

year_month_day civil(std::int64_t days) {
  return year_month_day{sys_days{std::chrono::days{days}}};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

enum class LabelKind { day, month, quarter };

struct ParsedLabel {
  LabelKind kind;
  int y = 0, m = 1, d = 1, q = 1;
};

std::optional<ParsedLabel> parse_label(std::string_view t) {
  ParsedLabel p{};
  // Quarter forms: YYYYQn, YYYY-Qn, YYYY:Qn, YYYY Qn.
  if (const auto qpos = t.find_first_of("Qq"); qpos != std::string_view::npos) {
    std::string_view ys = t.substr(0, qpos);
    while (!ys.empty() && (ys.back() == '-' || ys.back() == ':' || ys.back() == ' ')) ys.remove_suffix(1);
    if (!parse_int(ys, p.y) || !parse_int(t.substr(qpos + 1), p.q) || p.q < 1 || p.q > 4)
      return std::nullopt;
    p.kind = LabelKind::quarter;
    return p;
  }
  const char sep = t.find('/') != std::string_view::npos ? '/' : '-';
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = t.find(sep, start);
    parts.push_back(t.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() == 2 && sep == '-') {
    if (!parse_int(parts[0], p.y) || !parse_int(parts[1], p.m) || p.m < 1 || p.m > 12) return std::nullopt;
    p.kind = LabelKind::month;
    return p;
  }
  if (parts.size() == 3) {
    bool ok;
    if (parts[0].size() == 4) {
      ok = parse_int(parts[0], p.y) && parse_int(parts[1], p.m) && parse_int(parts[2], p.d);
    } else {
      ok = sep == '/' && parse_int(parts[0], p.m) && parse_int(parts[1], p.d) && parse_int(parts[2], p.y);
    }
    if (!ok) return std::nullopt;
    p.kind = LabelKind::day;
    return p;
  }
  return std::nullopt;
}

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "." ||
         cell == "#N/A" || cell == "N/A";
}

}  // namespace

std::string_view to_string(Frequency f) noexcept {
  switch (f) {
    case Frequency::weekly:
      return "weekly";
    case Frequency::monthly:
      return "monthly";
    case Frequency::quarterly:
      return "quarterly";
  }
  return "?";
}

Frequency parse_frequency(std::string_view s) {
  if (s == "weekly") return Frequency::weekly;
  if (s == "monthly") return Frequency::monthly;
  if (s == "quarterly") return Frequency::quarterly;
  throw ConfigError("unknown frequency '" + std::string(s) + "' (expected weekly|monthly|quarterly)");
}

bool is_coarser_or_equal(Frequency coarse, Frequency fine) noexcept {
  return static_cast<int>(coarse) >= static_cast<int>(fine);
}

Period Period::quarter(int y, int q) { return {Frequency::quarterly, std::int64_t{y} * 4 + (q - 1)}; }
Period Period::month(int y, int m) { return {Frequency::monthly, std::int64_t{y} * 12 + (m - 1)}; }
Period Period::week(int y, int m, int d) { return {Frequency::weekly, days_of(y, m, d)}; }

std::string Period::label() const {
  char buf[64];
  switch (freq) {
    case Frequency::quarterly:
      std::snprintf(buf, sizeof buf, "%lldQ%lld", static_cast<long long>(floor_div(index, 4)),
                    static_cast<long long>(index - 4 * floor_div(index, 4) + 1));
      break;
    case Frequency::monthly:
      std::snprintf(buf, sizeof buf, "%lld-%02lld", static_cast<long long>(floor_div(index, 12)),
                    static_cast<long long>(index - 12 * floor_div(index, 12) + 1));
      break;
    case Frequency::weekly: {
      const auto ymd = civil(index);
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      break;
    }
  }
  return buf;
}

std::int64_t Period::first_day() const {
  switch (freq) {
    case Frequency::quarterly:
      return days_of(static_cast<int>(floor_div(index, 4)), static_cast<int>(index - 4 * floor_div(index, 4)) * 3 + 1, 1);
    case Frequency::monthly:
      return days_of(static_cast<int>(floor_div(index, 12)), static_cast<int>(index - 12 * floor_div(index, 12)) + 1, 1);
    case Frequency::weekly:
      return index;
  }
  return index;
}

std::int64_t Period::last_day() const {
  if (freq == Frequency::weekly) return index;
  return next().first_day() - 1;
}

Period Period::containing(Frequency target) const {
  if (target == freq) return *this;
  if (!is_coarser_or_equal(target, freq))
    throw AggregationError("cannot map " + std::string(to_string(freq)) + " period to finer " +
                           std::string(to_string(target)));
  if (freq == Frequency::monthly) return {Frequency::quarterly, floor_div(index, 3)};
  const auto ymd = civil(index);
  const int y = static_cast<int>(ymd.year());
  const int m = static_cast<int>(static_cast<unsigned>(ymd.month()));
  return target == Frequency::monthly ? Period::month(y, m) : Period::quarter(y, (m - 1) / 3 + 1);
}

Period parse_period(std::string_view text, Frequency freq) {
  const auto t = csv::trim(text);
  const auto parsed = parse_label(t);
  if (!parsed) throw IngestError("unparseable date '" + std::string(t) + "'");
  const auto& p = *parsed;
  switch (p.kind) {
    case LabelKind::quarter:
      if (freq != Frequency::quarterly)
        throw IngestError("quarter label '" + std::string(t) + "' in a " + std::string(to_string(freq)) + " series");
      return Period::quarter(p.y, p.q);
    case LabelKind::month:
      if (freq == Frequency::weekly)
        throw IngestError("month label '" + std::string(t) + "' in a weekly series");
      return Period::month(p.y, p.m).containing(freq);
    case LabelKind::day:
      return Period::week(p.y, p.m, p.d).containing(freq);
  }
  throw IngestError("unparseable date '" + std::string(t) + "'");
}

SeriesPanel::SeriesPanel(std::vector<Period> dates, Eigen::MatrixXd values, std::vector<std::string> names,
                         Frequency freq)
    : dates_(std::move(dates)), values_(std::move(values)), names_(std::move(names)), freq_(freq) {
  if (values_.cols() < 1 || values_.rows() < 1) throw IngestError("panel needs T >= 1 and J >= 1");
  if (static_cast<Eigen::Index>(dates_.size()) != values_.rows())
    throw IngestError("date count does not match row count");
  if (static_cast<Eigen::Index>(names_.size()) != values_.cols())
    throw IngestError("name count does not match column count");
  for (std::size_t i = 0; i < dates_.size(); ++i) {
    if (dates_[i].freq != freq_) throw IngestError("period " + dates_[i].label() + " has the wrong frequency");
    if (i > 0 && dates_[i].index != dates_[i - 1].index + dates_[i - 1].step())
      throw IngestError("dates not equally spaced: " + dates_[i - 1].label() + " then " + dates_[i].label());
  }
  if (!values_.allFinite()) throw IngestError("panel contains non-finite values");
}

std::optional<int> SeriesPanel::find(std::string_view name) const {
  for (std::size_t j = 0; j < names_.size(); ++j)
    if (names_[j] == name) return static_cast<int>(j);
  return std::nullopt;
}

std::optional<Eigen::Index> SeriesPanel::find(const Period& p) const {
  if (p.freq != freq_ || dates_.empty()) return std::nullopt;
  const auto diff = p.index - dates_.front().index;
  if (diff < 0 || diff % dates_.front().step() != 0) return std::nullopt;
  const auto row = diff / dates_.front().step();
  if (row >= periods()) return std::nullopt;
  return row;
}

SeriesPanel SeriesPanel::slice(Eigen::Index first, Eigen::Index last) const {
  if (first < 0 || last >= periods() || first > last)
    throw InsufficientDataError("slice [" + std::to_string(first) + ", " + std::to_string(last) +
                                "] outside panel of " + std::to_string(periods()) + " periods");
  std::vector<Period> d(dates_.begin() + first, dates_.begin() + last + 1);
  return SeriesPanel(std::move(d), values_.middleRows(first, last - first + 1), names_, freq_);
}

SeriesPanel SeriesPanel::slice(const Period& from, const Period& to) const {
  Eigen::Index first = 0, last = periods() - 1;
  while (first < periods() && dates_[static_cast<std::size_t>(first)] < from) ++first;
  while (last >= 0 && dates_[static_cast<std::size_t>(last)] > to) --last;
  if (first > last) throw InsufficientDataError("no observations between " + from.label() + " and " + to.label());
  return slice(first, last);
}

SeriesPanel SeriesPanel::select(const std::vector<int>& columns) const {
  Eigen::MatrixXd v(periods(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> n;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] < 0 || columns[k] >= variables()) throw ShapeError("column index out of range");
    v.col(static_cast<Eigen::Index>(k)) = values_.col(columns[k]);
    n.push_back(names_[static_cast<std::size_t>(columns[k])]);
  }
  return SeriesPanel(dates_, std::move(v), std::move(n), freq_);
}

SeriesPanel load_panel(std::istream& source, const PanelSchema& schema) {
  std::string line;
  if (!std::getline(source, line)) throw IngestError("empty input: header row required");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  std::vector<std::string> header;
  for (auto& h : csv::split_record(line)) header.emplace_back(csv::trim(h));

  const auto col_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IngestError("column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t date_col = col_of(schema.date_column);
  std::vector<std::size_t> value_cols;
  std::vector<std::string> names;
  if (schema.columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != date_col) {
        value_cols.push_back(c);
        names.push_back(header[c]);
      }
  } else {
    for (const auto& [src, dst] : schema.columns) {
      value_cols.push_back(col_of(src));
      names.push_back(dst.empty() ? src : dst);
    }
  }
  if (value_cols.empty()) throw IngestError("no numeric columns");

  std::vector<std::pair<Period, std::vector<double>>> rows;
  std::size_t row_no = 0;
  while (std::getline(source, line)) {
    if (csv::trim(line).empty()) continue;
    ++row_no;
    const auto cells = csv::split_record(line);
    const auto cell = [&](std::size_t c) { return c < cells.size() ? csv::trim(cells[c]) : std::string_view{}; };
    Period p;
    try {
      p = parse_period(cell(date_col), schema.frequency);
    } catch (const IngestError&) {
      throw IngestError("unparseable date '" + std::string(cell(date_col)) + "' at row " + std::to_string(row_no));
    }
    std::vector<double> vals;
    for (std::size_t k = 0; k < value_cols.size(); ++k) {
      const auto s = cell(value_cols[k]);
      if (is_missing(s))
        throw IngestError("missing value at row " + std::to_string(row_no) + ", column '" + names[k] + "'");
      double v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw IngestError("non-numeric cell '" + std::string(s) + "' at row " + std::to_string(row_no) +
                          ", column '" + names[k] + "'");
      vals.push_back(v);
    }
    rows.emplace_back(p, std::move(vals));
  }
  if (rows.empty()) throw IngestError("no data rows");
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].first == rows[i - 1].first) throw IngestError("duplicate period " + rows[i].first.label());

  std::vector<Period> dates;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(value_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    dates.push_back(rows[i].first);
    for (std::size_t k = 0; k < value_cols.size(); ++k)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i].second[k];
  }
  return SeriesPanel(std::move(dates), std::move(values), std::move(names), schema.frequency);
}

SeriesPanel load_panel_file(const std::string& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  return load_panel(in, schema);
}

SeriesPanel aggregate_frequency(const SeriesPanel& panel, Frequency target, AggregationScheme scheme,
                                Coverage coverage) {
  (void)scheme;  // mean is the only scheme
  if (target == panel.frequency()) return panel;
  if (!is_coarser_or_equal(target, panel.frequency()))
    throw AggregationError("target frequency " + std::string(to_string(target)) + " is finer than " +
                           std::string(to_string(panel.frequency())));

  const auto& dates = panel.dates();
  std::vector<Period> out_dates;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> groups;  // [begin, end)
  for (Eigen::Index t = 0; t < panel.periods(); ++t) {
    const Period p = dates[static_cast<std::size_t>(t)].containing(target);
    if (out_dates.empty() || !(out_dates.back() == p)) {
      out_dates.push_back(p);
      groups.emplace_back(t, t + 1);
    } else {
      groups.back().second = t + 1;
    }
  }

  if (coverage == Coverage::require_full) {
    // Interior periods of a regular series are always complete; only the two
    // boundary groups can be partial.
    const auto check = [&](std::size_t g) {
      const auto [b, e] = groups[g];
      const Period& first = dates[static_cast<std::size_t>(b)];
      const Period& last = dates[static_cast<std::size_t>(e - 1)];
      bool starts, ends;
      if (first.freq == Frequency::weekly) {
        // The week before the first observation must fall outside the period.
        starts = first.index - 7 < out_dates[g].first_day();
        ends = last.index + 7 > out_dates[g].last_day();
      } else {
        starts = first.first_day() == out_dates[g].first_day();
        ends = last.last_day() == out_dates[g].last_day();
      }
      if (!starts || !ends)
        throw AggregationError("period " + out_dates[g].label() + " is only partially covered by the source data");
    };
    check(0);
    check(groups.size() - 1);
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(groups.size()), panel.variables());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto [b, e] = groups[g];
    values.row(static_cast<Eigen::Index>(g)) =
        panel.values().middleRows(b, e - b).colwise().sum() / static_cast<double>(e - b);
  }
  return SeriesPanel(std::move(out_dates), std::move(values), panel.names(), target);
}

SeriesPanel join_panels(const SeriesPanel& a, const SeriesPanel& b) {
  if (a.frequency() != b.frequency()) throw IngestError("cannot join panels of different frequency");
  const Period from = std::max(a.dates().front(), b.dates().front());
  const Period to = std::min(a.dates().back(), b.dates().back());
  if (to < from) throw IngestError("panels do not overlap");
  const SeriesPanel sa = a.slice(from, to);
  const SeriesPanel sb = b.slice(from, to);
  Eigen::MatrixXd v(sa.periods(), sa.variables() + sb.variables());
  v << sa.values(), sb.values();
  auto names = sa.names();
  for (const auto& n : sb.names()) {
    if (std::find(names.begin(), names.end(), n) != names.end()) throw IngestError("duplicate variable " + n);
    names.push_back(n);
  }
  return SeriesPanel(sa.dates(), std::move(v), std::move(names), a.frequency());
}

void write_panel_csv(std::ostream& out, const SeriesPanel& panel) {
  std::vector<std::string> header{"date"};
  header.insert(header.end(), panel.names().begin(), panel.names().end());
  csv::write_row(out, header);
  for (Eigen::Index t = 0; t < panel.periods(); ++t) {
    std::vector<std::string> row{panel.dates()[static_cast<std::size_t>(t)].label()};
    for (Eigen::Index j = 0; j < panel.variables(); ++j) row.push_back(csv::format(panel.values()(t, j)));
    csv::write_row(out, row);
  }
}

}  // namespace dvar
