#pragma once

// CSV ingestion of externally computed scores.
//
//   regression calibration:  id,score
//   regression test:         id,prediction[,label]
//   classification:          id,label,s0,...,s{K-1}   (label -1 = unlabeled)

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ecp/error.hpp"
#include "ecp/file_io.hpp"
#include "ecp/scores.hpp"

namespace ecp {

struct RegressionCalibFile {
  std::vector<std::int64_t> ids;
  CalibScores scores;
};

struct RegressionTestFile {
  std::vector<std::int64_t> ids;
  std::vector<RegressionSample> samples;
  bool has_labels = false;
};

struct ClassificationFile {
  std::vector<std::int64_t> ids;
  std::vector<LabeledCandidates> rows;
  std::size_t n_classes = 0;
};

namespace csv_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Line {
  std::size_t number;  // 1-based
  std::vector<std::string_view> fields;
};

/// Non-empty lines with their 1-based line numbers.
inline std::vector<Line> lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view raw =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++number;
    if (!trim(raw).empty()) out.push_back({number, split(raw)});
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

inline Error parse_error(std::size_t line, const std::string& what) {
  return Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": " + what, line);
}

inline std::int64_t parse_int(std::string_view s, std::size_t line) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw parse_error(line, "'" + std::string(s) + "' is not an integer");
  }
  return v;
}

inline double parse_real(std::string_view s, std::size_t line) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw parse_error(line, "'" + std::string(s) + "' is not a number");
  }
  return v;
}

inline double parse_score(std::string_view s, std::size_t line) {
  const double v = parse_real(s, line);
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::non_finite, "line " + std::to_string(line) + ": score is not finite",
                line);
  }
  if (v < 0.0) {
    throw Error(ErrorKind::negative_score, "line " + std::to_string(line) + ": score is negative",
                line);
  }
  return v;
}

inline Error schema_error(std::size_t line, const std::string& what) {
  return Error(ErrorKind::schema_mismatch, "line " + std::to_string(line) + ": " + what, line);
}

inline void expect_header(const std::vector<Line>& ls, std::vector<std::string_view> expected) {
  if (ls.empty()) throw schema_error(1, "missing header");
  const auto& got = ls.front();
  if (got.fields != expected) throw schema_error(got.number, "unexpected header");
}

}  // namespace csv_detail

// --- regression calibration ------------------------------------------------

inline RegressionCalibFile parse_regression_calib_csv(std::string_view text) {
  using namespace csv_detail;
  const auto ls = lines(text);
  expect_header(ls, {"id", "score"});
  std::vector<std::int64_t> ids;
  std::vector<double> scores;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto& l = ls[i];
    if (l.fields.size() != 2) throw schema_error(l.number, "expected 2 columns");
    ids.push_back(parse_int(l.fields[0], l.number));
    scores.push_back(parse_score(l.fields[1], l.number));
  }
  return {std::move(ids), CalibScores::validate(scores)};
}

inline std::string format_regression_calib_csv(std::span<const std::int64_t> ids,
                                               const CalibScores& scores) {
  if (ids.size() != scores.count()) throw Error(ErrorKind::invalid_argument, "id count mismatch");
  std::string out = "id,score\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += std::to_string(ids[i]) + "," + format_double(scores[i]) + "\n";
  }
  return out;
}

inline RegressionCalibFile load_regression_calib_csv(const std::filesystem::path& path) {
  return parse_regression_calib_csv(read_text_file(path));
}

inline void save_regression_calib_csv(const std::filesystem::path& path,
                                      std::span<const std::int64_t> ids,
                                      const CalibScores& scores) {
  write_text_file(path, format_regression_calib_csv(ids, scores));
}

// --- regression test -------------------------------------------------------

inline RegressionTestFile parse_regression_test_csv(std::string_view text) {
  using namespace csv_detail;
  const auto ls = lines(text);
  if (ls.empty()) throw schema_error(1, "missing header");
  RegressionTestFile out;
  const auto& header = ls.front().fields;
  if (header == std::vector<std::string_view>{"id", "prediction", "label"}) {
    out.has_labels = true;
  } else if (header != std::vector<std::string_view>{"id", "prediction"}) {
    throw schema_error(ls.front().number, "unexpected header");
  }
  const std::size_t width = out.has_labels ? 3 : 2;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto& l = ls[i];
    if (l.fields.size() != width) {
      throw schema_error(l.number, "expected " + std::to_string(width) + " columns");
    }
    out.ids.push_back(parse_int(l.fields[0], l.number));
    const double pred = parse_real(l.fields[1], l.number);
    std::optional<double> label;
    if (out.has_labels) label = parse_real(l.fields[2], l.number);
    try {
      out.samples.push_back(RegressionSample::make(pred, label));
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(l.number) + ": " + e.what(), l.number);
    }
  }
  return out;
}

inline std::string format_regression_test_csv(const RegressionTestFile& file) {
  std::string out = file.has_labels ? "id,prediction,label\n" : "id,prediction\n";
  for (std::size_t i = 0; i < file.ids.size(); ++i) {
    const auto& s = file.samples[i];
    out += std::to_string(file.ids[i]) + "," + format_double(s.prediction);
    if (file.has_labels) out += "," + format_double(s.label.value());
    out += "\n";
  }
  return out;
}

inline RegressionTestFile load_regression_test_csv(const std::filesystem::path& path) {
  return parse_regression_test_csv(read_text_file(path));
}

inline void save_regression_test_csv(const std::filesystem::path& path,
                                     const RegressionTestFile& file) {
  write_text_file(path, format_regression_test_csv(file));
}

// --- classification --------------------------------------------------------

inline ClassificationFile parse_classification_csv(std::string_view text) {
  using namespace csv_detail;
  const auto ls = lines(text);
  if (ls.empty()) throw schema_error(1, "missing header");
  const auto& header = ls.front().fields;
  if (header.size() < 4 || header[0] != "id" || header[1] != "label") {
    throw schema_error(ls.front().number, "expected header id,label,s0,...,s{K-1} with K >= 2");
  }
  ClassificationFile out;
  out.n_classes = header.size() - 2;
  for (std::size_t c = 0; c < out.n_classes; ++c) {
    if (header[c + 2] != "s" + std::to_string(c)) {
      throw schema_error(ls.front().number, "score column " + std::to_string(c) + " must be named s" +
                                                std::to_string(c));
    }
  }
  std::vector<double> buf(out.n_classes);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto& l = ls[i];
    if (l.fields.size() != header.size()) {
      throw schema_error(l.number, "expected " + std::to_string(header.size()) + " columns, got " +
                                       std::to_string(l.fields.size()));
    }
    out.ids.push_back(parse_int(l.fields[0], l.number));
    const std::int64_t label = parse_int(l.fields[1], l.number);
    if (label < -1 || label >= static_cast<std::int64_t>(out.n_classes)) {
      throw schema_error(l.number, "label " + std::to_string(label) + " outside -1.." +
                                       std::to_string(out.n_classes - 1));
    }
    for (std::size_t c = 0; c < out.n_classes; ++c) buf[c] = parse_score(l.fields[c + 2], l.number);
    out.rows.push_back({CandidateScores::validate(buf), static_cast<int>(label)});
  }
  return out;
}

inline std::string format_classification_csv(std::span<const std::int64_t> ids,
                                             std::span<const LabeledCandidates> rows) {
  if (ids.size() != rows.size()) throw Error(ErrorKind::invalid_argument, "id count mismatch");
  if (rows.empty()) throw Error(ErrorKind::too_few, "no rows to write", 0);
  const std::size_t k = rows.front().scores.size();
  std::string out = "id,label";
  for (std::size_t c = 0; c < k; ++c) out += ",s" + std::to_string(c);
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].scores.size() != k) {
      throw Error(ErrorKind::schema_mismatch, "row " + std::to_string(i) + " has a different K", i);
    }
    out += std::to_string(ids[i]) + "," + std::to_string(rows[i].label);
    for (double s : rows[i].scores.values()) out += "," + format_double(s);
    out += "\n";
  }
  return out;
}

inline ClassificationFile load_classification_csv(const std::filesystem::path& path) {
  return parse_classification_csv(read_text_file(path));
}

inline void save_classification_csv(const std::filesystem::path& path,
                                    std::span<const std::int64_t> ids,
                                    std::span<const LabeledCandidates> rows) {
  write_text_file(path, format_classification_csv(ids, rows));
}

/// Calibration file for either task.
inline std::variant<RegressionCalibFile, ClassificationFile> load_scores_csv(
    const std::filesystem::path& path, Task task) {
  if (task == Task::regression) return load_regression_calib_csv(path);
  return load_classification_csv(path);
}

/// Consecutive ids 0..n-1.
inline std::vector<std::int64_t> sequential_ids(std::size_t n) {
  std::vector<std::int64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::int64_t>(i);
  return ids;
}

}  // namespace ecp
