#pragma once

#include <stdexcept>
#include <string>

namespace riskshare {

// Machine-readable failure categories. Every error raised by the library maps
// to exactly one kind, and every kind maps to one CLI exit class: validation
// errors exit with 2, numerical errors with 3, I/O errors with 4.
enum class ErrorKind {
  // validation
  invalid_size,
  invalid_edge,
  not_connected,
  sigma_not_square,
  dimension_mismatch,
  sigma_not_symmetric,
  sigma_not_positive_definite,
  mean_not_positive,
  wrong_arity,
  too_large,
  inapplicable_criterion,
  inapplicable_solver,
  parse_error,
  // numerical
  singular_system,
  rank_deficient,
  degenerate_denominator,
  internal_inconsistency,
  feasibility_exceeded,
  // i/o
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Stable snake_case identifier, used verbatim in error documents.
const char* error_kind_name(ErrorKind kind) noexcept;

// CLI exit class: 2 = validation, 3 = numerical, 4 = I/O.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace riskshare
