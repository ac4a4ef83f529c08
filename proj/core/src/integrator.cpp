#include "kpo/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kpo/error.hpp"

namespace kpo {

namespace {

// Dormand & Prince (1980) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;
// Lund stabilization exponent (Hairer's DOPRI5 default).
constexpr double kBeta = 0.04;

}  // namespace

Dopri5::Dopri5(IntegratorOptions options) : options_(options) {
  if (!(options_.rtol > 0) || !(options_.atol > 0)) {
    fail(ErrorCode::usage, "integrator tolerances must be positive");
  }
}

double Dopri5::error_norm(const Matrix& y, const Matrix& y_new, const Matrix& err) const {
  const auto scale =
      (options_.atol + options_.rtol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array());
  return std::sqrt((err.cwiseAbs().array() / scale).square().mean());
}

double Dopri5::initial_step(const MatrixRhs& rhs, double t0, double span, const Matrix& y,
                            const Matrix& f0) {
  // Hairer, Norsett & Wanner, Solving ODEs I, sec. II.4.
  const auto scale = options_.atol + options_.rtol * y.cwiseAbs().array();
  const double d0 = std::sqrt((y.cwiseAbs().array() / scale).square().mean());
  const double d1 = std::sqrt((f0.cwiseAbs().array() / scale).square().mean());
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  tmp_ = y + h0 * f0;
  rhs(t0 + h0, tmp_, k2_);
  ++stats_.rhs_evaluations;
  const double d2 = std::sqrt(((k2_ - f0).cwiseAbs().array() / scale).square().mean()) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span});
}

void Dopri5::integrate(const MatrixRhs& rhs, double t0, double t1, Matrix& y,
                       std::span<const double> samples, std::size_t first_index,
                       const SampleSink& sink) {
  if (!(t1 >= t0)) fail(ErrorCode::usage, "integration interval must be forward in time");
  std::size_t next = 0;
  auto emit_due = [&](double t) {
    while (next < samples.size() && samples[next] <= t) {
      if (sink) sink(first_index + next, samples[next], y);
      ++next;
    }
  };
  emit_due(t0);
  const double span = t1 - t0;
  if (span == 0.0) return;

  const auto rows = y.rows();
  const auto cols = y.cols();
  for (Matrix* m : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &y_new_, &err_}) {
    m->resize(rows, cols);
  }

  rhs(t0, y, k1_);
  ++stats_.rhs_evaluations;
  double h = h_next_ > 0 ? std::min(h_next_, span) : initial_step(rhs, t0, span, y, k1_);
  if (options_.initial_step > 0 && h_next_ == 0) h = std::min(options_.initial_step, span);
  const double h_min = options_.min_step_fraction * std::max(span, std::abs(t1));

  double t = t0;
  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;

  while (t < t1) {
    if (++steps > options_.max_steps) {
      Error e(ErrorCode::accuracy, "integrator exceeded " + std::to_string(options_.max_steps) +
                                       " steps before t = " + std::to_string(t1) + " us");
      e.at_time = t;
      throw e;
    }
    // Land exactly on the next sample or the interval end.
    const double target = next < samples.size() ? std::min(samples[next], t1) : t1;
    double h_try = h;
    bool hits_target = false;
    if (t + h_try >= target - 1e-12 * std::max(1.0, std::abs(target))) {
      h_try = target - t;
      hits_target = true;
    }
    if (h_try < h_min && !hits_target) {
      Error e(ErrorCode::stiffness, "step size underflow (" + std::to_string(h_try) +
                                        " us) at t = " + std::to_string(t) + " us");
      e.at_time = t;
      throw e;
    }

    tmp_ = y + h_try * a21 * k1_;
    rhs(t + c2 * h_try, tmp_, k2_);
    tmp_ = y + h_try * (a31 * k1_ + a32 * k2_);
    rhs(t + c3 * h_try, tmp_, k3_);
    tmp_ = y + h_try * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs(t + c4 * h_try, tmp_, k4_);
    tmp_ = y + h_try * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs(t + c5 * h_try, tmp_, k5_);
    tmp_ = y + h_try * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs(t + h_try, tmp_, k6_);
    y_new_ = y + h_try * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    const double t_new = hits_target ? target : t + h_try;
    rhs(t_new, y_new_, k7_);
    stats_.rhs_evaluations += 6;

    err_ = h_try * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    const double err = error_norm(y, y_new_, err_);
    if (!std::isfinite(err)) {
      Error e(ErrorCode::accuracy, "non-finite state at t = " + std::to_string(t) + " us");
      e.at_time = t;
      throw e;
    }

    if (err <= 1.0) {
      double factor = kSafety * std::pow(err, -(0.2 - 0.75 * kBeta)) * std::pow(err_old, kBeta);
      if (err == 0.0) factor = kMaxFactor;
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      if (last_rejected) factor = std::min(factor, 1.0);
      err_old = std::max(err, 1e-4);

      stats_.smallest_step = stats_.accepted == 0 ? h_try : std::min(stats_.smallest_step, h_try);
      stats_.largest_step = std::max(stats_.largest_step, h_try);
      ++stats_.accepted;

      y.swap(y_new_);
      k1_.swap(k7_);
      t = t_new;
      // A clamped step says nothing about the natural step length.
      if (!hits_target || h_try >= h) h = h_try * factor;
      last_rejected = false;
      emit_due(t);
    } else {
      ++stats_.rejected;
      h = h_try * std::max(kMinFactor, kSafety * std::pow(err, -0.2));
      last_rejected = true;
      if (h < h_min) {
        Error e(ErrorCode::stiffness,
                "step size underflow at t = " + std::to_string(t) + " us (error norm " +
                    std::to_string(err) + ")");
        e.at_time = t;
        throw e;
      }
    }
  }
  h_next_ = h;
}

}  // namespace kpo
