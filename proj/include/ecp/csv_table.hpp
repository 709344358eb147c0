#pragma once

// A header row plus string cells. Used by the report smoother, which must
// pass through any curves file without knowing its schema.

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ecp/error.hpp"

namespace ecp {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool numeric_column(std::size_t c) const {
    for (const auto& r : rows) {
      double v = 0.0;
      const auto& s = r[c];
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return false;
    }
    return true;
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
      double v = 0.0;
      std::from_chars(r[c].data(), r[c].data() + r[c].size(), v);
      out.push_back(v);
    }
    return out;
  }
};

inline CsvTable parse_csv_table(std::string_view text) {
  CsvTable t;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t p = 0;
    for (;;) {
      const std::size_t comma = line.find(',', p);
      cells.emplace_back(line.substr(p, comma == std::string_view::npos ? comma : comma - p));
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else if (cells.size() != t.header.size()) {
      throw Error(ErrorKind::schema_mismatch,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " columns",
                  line_no);
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw Error(ErrorKind::schema_mismatch, "missing header", 1);
  return t;
}

inline std::string format_csv_table(const CsvTable& t) {
  auto join = [](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    return s + "\n";
  };
  std::string out = join(t.header);
  for (const auto& r : t.rows) out += join(r);
  return out;
}

}  // namespace ecp
