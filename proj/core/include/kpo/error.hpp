#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kpo {

enum class ErrorCode {
  invalid_dimension,
  truncation,
  basis,
  schedule,
  stiffness,
  accuracy,
  fit,
  degenerate_data,
  reconstruction,
  calibration,
  basis_degeneracy,
  span,
  grid_extent,
  numerical,
  usage,
  config,
  io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` says which contract failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Set on truncation errors: the smallest Fock dimension that would pass.
  std::optional<int> required_dim;
  /// Set on stiffness errors: the time (us) at which the step size underflowed.
  std::optional<double> at_time;

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace kpo
