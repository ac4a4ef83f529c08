#pragma once

#include <span>

#include <Eigen/Dense>

namespace kpo {

/// Parameters of y = offset + amplitude * cos(2 pi frequency t + phase) * exp(-rate t).
/// The exponential fit uses the same record with frequency = phase = 0.
struct FitResult {
  double amplitude = 0;
  double rate = 0;       ///< 1/us, >= 0
  double frequency = 0;  ///< MHz (t in us), >= 0
  double phase = 0;      ///< rad, in (-pi, pi]
  double offset = 0;
  /// Covariance of the fitted parameters in the order they were fitted:
  /// (amplitude, rate, offset) or (amplitude, rate, frequency, phase, offset).
  /// When the damping rate is held at zero its row and column are zero.
  Eigen::MatrixXd covariance;
  double residual_norm = 0;
  int iterations = 0;

  double time_constant() const { return rate > 0 ? 1.0 / rate : INFINITY; }
};

struct FitOptions {
  int max_iterations = 500;
  double parameter_tolerance = 1e-10;
  bool fit_offset = true;
};

/// Levenberg-Marquardt fit of amplitude * exp(-rate t) + offset. Needs >= 8
/// points. The starting rate is the best of a log-spaced rate scan with the
/// linear parameters solved exactly, so the result is deterministic.
FitResult fit_exp_decay(std::span<const double> t, std::span<const double> y, const FitOptions& options = {});

/// Levenberg-Marquardt fit of the damped cosine. The starting frequency is the
/// peak of the discrete spectrum and the starting rate comes from the slope
/// of the log envelope. The record must cover at least 1.5 periods of the
/// starting frequency. A fit that would need a negative rate is redone with
/// the rate fixed at zero.
FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y, const FitOptions& options = {});

}  // namespace kpo
