#include "kpo/error.hpp"

namespace kpo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid_dimension";
    case ErrorCode::truncation: return "truncation";
    case ErrorCode::basis: return "basis";
    case ErrorCode::schedule: return "schedule";
    case ErrorCode::stiffness: return "stiffness";
    case ErrorCode::accuracy: return "accuracy";
    case ErrorCode::fit: return "fit";
    case ErrorCode::degenerate_data: return "degenerate_data";
    case ErrorCode::reconstruction: return "reconstruction";
    case ErrorCode::calibration: return "calibration";
    case ErrorCode::basis_degeneracy: return "basis_degeneracy";
    case ErrorCode::span: return "span";
    case ErrorCode::grid_extent: return "grid_extent";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::usage: return "usage";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace kpo
