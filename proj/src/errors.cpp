#include "riskshare/errors.hpp"

namespace riskshare {

const char* error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_size: return "invalid_size";
    case ErrorKind::invalid_edge: return "invalid_edge";
    case ErrorKind::not_connected: return "not_connected";
    case ErrorKind::sigma_not_square: return "sigma_not_square";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::sigma_not_symmetric: return "sigma_not_symmetric";
    case ErrorKind::sigma_not_positive_definite: return "sigma_not_positive_definite";
    case ErrorKind::mean_not_positive: return "mean_not_positive";
    case ErrorKind::wrong_arity: return "wrong_arity";
    case ErrorKind::too_large: return "too_large";
    case ErrorKind::inapplicable_criterion: return "inapplicable_criterion";
    case ErrorKind::inapplicable_solver: return "inapplicable_solver";
    case ErrorKind::parse_error: return "parse_error";
    case ErrorKind::singular_system: return "singular_system";
    case ErrorKind::rank_deficient: return "rank_deficient";
    case ErrorKind::degenerate_denominator: return "degenerate_denominator";
    case ErrorKind::internal_inconsistency: return "internal_inconsistency";
    case ErrorKind::feasibility_exceeded: return "feasibility_exceeded";
    case ErrorKind::io_error: return "io_error";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::singular_system:
    case ErrorKind::rank_deficient:
    case ErrorKind::degenerate_denominator:
    case ErrorKind::internal_inconsistency:
    case ErrorKind::feasibility_exceeded:
      return 3;
    case ErrorKind::io_error:
      return 4;
    default:
      return 2;
  }
}

}  // namespace riskshare
