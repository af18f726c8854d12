#include "dvar/csv.hpp"

#include <charconv>
#include <ostream>

namespace dvar::csv {

std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r' && c != '\n') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n") != std::string::npos) {
      out << '"';
      for (char c : f) {
        if (c == '"') out << '"';
        out << c;
      }
      out << '"';
    } else {
      out << f;
    }
  }
  out << '\n';
}

void write_matrix(std::ostream& out, const std::vector<std::string>& header,
                  const Eigen::MatrixXd& m) {
  write_row(out, header);
  std::vector<std::string> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = format(m(r, c));
    write_row(out, row);
  }
}

}  // namespace dvar::csv
