#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ecp {

enum class ErrorKind {
  negative_score,
  non_finite,
  too_few,
  degenerate_x,
  parse_error,
  schema_mismatch,
  all_zero_scores,
  alpha_out_of_range,
  alpha_too_small,
  bad_dims,
  dim_mismatch,
  stale_cache,
  shape_mismatch,
  schema_version_mismatch,
  corrupt_file,
  non_finite_loss,
  no_bracket,
  no_convergence,
  empty_grid,
  invalid_argument,
  io_error,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::negative_score: return "NegativeScore";
    case ErrorKind::non_finite: return "NonFinite";
    case ErrorKind::too_few: return "TooFew";
    case ErrorKind::degenerate_x: return "DegenerateX";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::schema_mismatch: return "SchemaMismatch";
    case ErrorKind::all_zero_scores: return "AllZeroScores";
    case ErrorKind::alpha_out_of_range: return "AlphaOutOfRange";
    case ErrorKind::alpha_too_small: return "AlphaTooSmall";
    case ErrorKind::bad_dims: return "BadDims";
    case ErrorKind::dim_mismatch: return "DimMismatch";
    case ErrorKind::stale_cache: return "StaleCache";
    case ErrorKind::shape_mismatch: return "ShapeMismatch";
    case ErrorKind::schema_version_mismatch: return "SchemaVersionMismatch";
    case ErrorKind::corrupt_file: return "CorruptFile";
    case ErrorKind::non_finite_loss: return "NonFiniteLoss";
    case ErrorKind::no_bracket: return "NoBracket";
    case ErrorKind::no_convergence: return "NoConvergence";
    case ErrorKind::empty_grid: return "EmptyGrid";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::io_error: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `where()` carries the offending
/// element index or file line when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> where = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        where_(where) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> where() const noexcept { return where_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> where_;
};

}  // namespace ecp
