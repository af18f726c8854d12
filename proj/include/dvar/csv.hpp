#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dvar::csv {

/// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_record(std::string_view line);

std::string_view trim(std::string_view s) noexcept;

/// Locale-independent shortest round-trip formatting.
std::string format(double v);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Header + one row per matrix row.
void write_matrix(std::ostream& out, const std::vector<std::string>& header,
                  const Eigen::MatrixXd& m);

}  // namespace dvar::csv
