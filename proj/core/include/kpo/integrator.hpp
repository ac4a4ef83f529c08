#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "kpo/fockspace.hpp"

namespace kpo {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  /// First trial step (us); 0 picks one from the derivative scale.
  double initial_step = 0;
  /// Steps shorter than this fraction of the interval length count as underflow.
  double min_step_fraction = 1e-13;
  std::size_t max_steps = 5'000'000;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double smallest_step = 0;
  double largest_step = 0;
};

/// dy/dt = f(t, y) for a complex matrix-valued y (column block or density matrix).
using MatrixRhs = std::function<void(double t, const Matrix& y, Matrix& dydt)>;
/// Called with (sample index, t, y) when the integrator lands on a sample time.
using SampleSink = std::function<void(std::size_t index, double t, const Matrix& y)>;

/// Dormand-Prince 5(4) with FSAL and elementwise mixed error control.
///
/// Steps are shortened to land exactly on every requested sample time, so
/// outputs are never interpolated. The step size proposed at the end of
/// `integrate` is kept and reused by the next call, which lets callers chain
/// piecewise-smooth intervals without restarting the step-size search.
class Dopri5 {
 public:
  explicit Dopri5(IntegratorOptions options = {});

  /// Integrate y from t0 to t1 in place. Sample times must be sorted and lie
  /// in [t0, t1]; a sample equal to t0 is emitted before the first step.
  /// Throws ErrorCode::stiffness (with at_time) on step underflow and
  /// ErrorCode::accuracy when max_steps is exhausted or the state turns non-finite.
  void integrate(const MatrixRhs& rhs, double t0, double t1, Matrix& y,
                 std::span<const double> samples, std::size_t first_index,
                 const SampleSink& sink);

  const IntegratorStats& stats() const { return stats_; }
  const IntegratorOptions& options() const { return options_; }

 private:
  double error_norm(const Matrix& y, const Matrix& y_new, const Matrix& err) const;
  double initial_step(const MatrixRhs& rhs, double t0, double span, const Matrix& y,
                      const Matrix& f0);

  IntegratorOptions options_;
  IntegratorStats stats_;
  double h_next_ = 0;
  Matrix k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_, err_;
};

}  // namespace kpo
