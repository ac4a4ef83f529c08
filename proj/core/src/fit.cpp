#include "kpo/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "kpo/error.hpp"

namespace kpo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Model = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac)>;

struct LmOutcome {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  double residual_norm = 0;
  int iterations = 0;
};

void check_series(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) fail(ErrorCode::usage, "fit: t and y lengths differ");
  if (t.size() < 8) fail(ErrorCode::fit, "fit needs at least 8 points, got " + std::to_string(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) fail(ErrorCode::fit, "fit data must be finite");
    if (i > 0 && !(t[i] > t[i - 1])) fail(ErrorCode::fit, "fit times must be strictly increasing");
  }
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double scale = std::max({std::abs(*lo), std::abs(*hi), 1e-300});
  if (*hi - *lo <= 1e-12 * scale) {
    fail(ErrorCode::degenerate_data, "fit: series is constant, no decay or oscillation to fit");
  }
}

// Levenberg-Marquardt with Nielsen's damping update.
LmOutcome levenberg_marquardt(const Model& model, Eigen::VectorXd p, std::size_t n_points,
                              const FitOptions& options) {
  const Eigen::Index np = p.size();
  Eigen::VectorXd r(static_cast<Eigen::Index>(n_points));
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n_points), np);
  model(p, r, jac);
  double cost = r.squaredNorm();
  Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::VectorXd g = jac.transpose() * r;
  double mu = 1e-3 * jtj.diagonal().maxCoeff();
  double nu = 2.0;
  Eigen::VectorXd r_new(r.size());
  Eigen::MatrixXd jac_new(jac.rows(), jac.cols());

  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    if (cost == 0.0 || g.lpNorm<Eigen::Infinity>() == 0.0) {
      converged = true;
      break;
    }
    Eigen::MatrixXd a = jtj;
    a.diagonal().array() += mu * jtj.diagonal().array().max(1e-300);
    const Eigen::VectorXd step = a.ldlt().solve(-g);
    if (!step.allFinite()) break;
    const Eigen::VectorXd p_new = p + step;
    model(p_new, r_new, jac_new);
    const double cost_new = r_new.squaredNorm();
    const double predicted = -(step.dot(g) * 2.0 + step.dot(jtj * step));
    const double rho = predicted > 0 ? (cost - cost_new) / predicted : -1.0;
    if (std::isfinite(cost_new) && cost_new <= cost) {
      p = p_new;
      r.swap(r_new);
      jac.swap(jac_new);
      cost = cost_new;
      jtj = jac.transpose() * jac;
      g = jac.transpose() * r;
      mu *= rho > 0 ? std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3)) : 1.0;
      nu = 2.0;
      if (step.norm() <= options.parameter_tolerance * (p.norm() + options.parameter_tolerance)) {
        converged = true;
        ++it;
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) break;
    }
  }
  if (!converged) {
    fail(ErrorCode::fit, "fit did not converge after " + std::to_string(it) +
                             " iterations (residual norm " + std::to_string(std::sqrt(cost)) + ")");
  }
  LmOutcome out;
  out.params = p;
  out.residual_norm = std::sqrt(cost);
  out.iterations = it;
  const double dof = std::max<double>(1.0, static_cast<double>(n_points) - static_cast<double>(np));
  const Eigen::MatrixXd info = jac.transpose() * jac;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(info);
  out.covariance = cod.pseudoInverse() * (cost / dof);
  return out;
}

// Linear least squares for y ~ sum_k c_k basis_k(t); returns coefficients and residual.
Eigen::VectorXd linear_solve(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y, double& residual) {
  const Eigen::VectorXd c = basis.colPivHouseholderQr().solve(y);
  residual = (basis * c - y).squaredNorm();
  return c;
}

double wrap_phase(double phi) {
  phi = std::remainder(phi, kTwoPi);
  if (phi <= -std::numbers::pi) phi += kTwoPi;
  return phi;
}

}  // namespace

FitResult fit_exp_decay(std::span<const double> t, std::span<const double> y, const FitOptions& options) {
  check_series(t, y);
  const auto n = static_cast<Eigen::Index>(t.size());
  const Eigen::Map<const Eigen::VectorXd> tv(t.data(), n);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const double span = t.back() - t.front();

  // Rate scan with amplitude/offset eliminated, from 1/(100 span) to 100/span.
  double best_rate = 1.0 / span;
  double best_res = INFINITY;
  const int cols = options.fit_offset ? 2 : 1;
  Eigen::MatrixXd basis(n, cols);
  for (int k = 0; k <= 200; ++k) {
    const double rate = std::pow(10.0, -2.0 + 4.0 * k / 200.0) / span;
    basis.col(0) = (-rate * (tv.array() - t.front())).exp().matrix();
    if (options.fit_offset) basis.col(1).setOnes();
    double res = 0;
    linear_solve(basis, yv, res);
    if (res < best_res) {
      best_res = res;
      best_rate = rate;
    }
  }
  basis.col(0) = (-best_rate * tv.array()).exp().matrix();
  if (options.fit_offset) basis.col(1).setOnes();
  double res = 0;
  const Eigen::VectorXd c = linear_solve(basis, yv, res);

  Eigen::VectorXd p(options.fit_offset ? 3 : 2);
  p[0] = c[0];
  p[1] = best_rate;
  if (options.fit_offset) p[2] = c[1];

  const bool with_offset = options.fit_offset;
  Model model = [&, with_offset](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const Eigen::ArrayXd e = (-q[1] * tv.array()).exp();
    r = (q[0] * e + (with_offset ? q[2] : 0.0)).matrix() - yv;
    jac.col(0) = e.matrix();
    jac.col(1) = (-q[0] * tv.array() * e).matrix();
    if (with_offset) jac.col(2).setOnes();
  };
  const auto lm = levenberg_marquardt(model, p, t.size(), options);
  if (lm.params[1] < -1e-12 * std::abs(best_rate)) {
    fail(ErrorCode::fit, "fitted decay rate is negative (growing series)");
  }
  FitResult out;
  out.amplitude = lm.params[0];
  out.rate = std::max(0.0, lm.params[1]);
  out.offset = with_offset ? lm.params[2] : 0.0;
  out.covariance = lm.covariance;
  out.residual_norm = lm.residual_norm;
  out.iterations = lm.iterations;
  return out;
}

FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y, const FitOptions& options) {
  check_series(t, y);
  const auto n = static_cast<Eigen::Index>(t.size());
  const Eigen::Map<const Eigen::VectorXd> tv(t.data(), n);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const double span = t.back() - t.front();
  const double mean = yv.mean();
  const Eigen::VectorXd centered = yv.array() - mean;

  // Spectrum peak on a grid four times finer than 1/span, up to the mean
  // Nyquist frequency, then parabolic refinement.
  const double nyquist = 0.5 * static_cast<double>(n - 1) / span;
  const double df = 0.25 / span;
  const int bins = std::max(8, static_cast<int>(std::ceil(nyquist / df)));
  std::vector<double> power(static_cast<std::size_t>(bins) + 1, 0.0);
  for (int k = 1; k <= bins; ++k) {
    const double f = k * df;
    const Eigen::ArrayXd arg = kTwoPi * f * tv.array();
    const double re = (centered.array() * arg.cos()).sum();
    const double im = (centered.array() * arg.sin()).sum();
    power[static_cast<std::size_t>(k)] = re * re + im * im;
  }
  const auto peak = static_cast<int>(std::max_element(power.begin() + 1, power.end()) - power.begin());
  double f0 = peak * df;
  if (peak > 1 && peak < bins) {
    const double a = power[static_cast<std::size_t>(peak - 1)];
    const double b = power[static_cast<std::size_t>(peak)];
    const double c = power[static_cast<std::size_t>(peak + 1)];
    const double denom = a - 2.0 * b + c;
    if (denom < 0) f0 += 0.5 * df * (a - c) / denom;
  }
  if (!(f0 > 0) || power[static_cast<std::size_t>(peak)] <= 0) {
    fail(ErrorCode::degenerate_data, "fit: no oscillation found in the series");
  }
  if (span * f0 < 1.5) {
    fail(ErrorCode::fit, "fit: series spans " + std::to_string(span * f0) +
                             " periods of the starting frequency, need >= 1.5");
  }

  // Log-envelope slope from the per-period maxima of |y - mean|.
  const double period = 1.0 / f0;
  std::vector<double> env_t;
  std::vector<double> env_y;
  for (double start = t.front(); start < t.back(); start += period) {
    double best = 0;
    double best_t = start;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (tv[i] >= start && tv[i] < start + period && std::abs(centered[i]) > best) {
        best = std::abs(centered[i]);
        best_t = tv[i];
      }
    }
    if (best > 0) {
      env_t.push_back(best_t);
      env_y.push_back(std::log(best));
    }
  }
  double rate0 = 0;
  if (env_t.size() >= 2) {
    const double mt = std::accumulate(env_t.begin(), env_t.end(), 0.0) / static_cast<double>(env_t.size());
    const double my = std::accumulate(env_y.begin(), env_y.end(), 0.0) / static_cast<double>(env_y.size());
    double sxy = 0;
    double sxx = 0;
    for (std::size_t i = 0; i < env_t.size(); ++i) {
      sxy += (env_t[i] - mt) * (env_y[i] - my);
      sxx += (env_t[i] - mt) * (env_t[i] - mt);
    }
    rate0 = sxx > 0 ? std::max(0.0, -sxy / sxx) : 0.0;
  }

  // Amplitude and phase by linear least squares at the starting f and rate.
  Eigen::MatrixXd basis(n, options.fit_offset ? 3 : 2);
  const Eigen::ArrayXd damp = (-rate0 * tv.array()).exp();
  basis.col(0) = (damp * (kTwoPi * f0 * tv.array()).cos()).matrix();
  basis.col(1) = (damp * (kTwoPi * f0 * tv.array()).sin()).matrix();
  if (options.fit_offset) basis.col(2).setOnes();
  double res = 0;
  const Eigen::VectorXd c = linear_solve(basis, yv, res);
  // a cos + b sin = A cos(x + phi) with A = hypot(a, b), phi = atan2(-b, a).
  Eigen::VectorXd p(options.fit_offset ? 5 : 4);
  p[0] = std::hypot(c[0], c[1]);
  p[1] = rate0;
  p[2] = f0;
  p[3] = std::atan2(-c[1], c[0]);
  if (options.fit_offset) p[4] = c[2];

  const bool with_offset = options.fit_offset;
  Model model = [&, with_offset](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const Eigen::ArrayXd e = (-q[1] * tv.array()).exp();
    const Eigen::ArrayXd arg = kTwoPi * q[2] * tv.array() + q[3];
    const Eigen::ArrayXd cs = arg.cos();
    const Eigen::ArrayXd sn = arg.sin();
    r = (q[0] * cs * e + (with_offset ? q[4] : 0.0)).matrix() - yv;
    jac.col(0) = (cs * e).matrix();
    jac.col(1) = (-q[0] * tv.array() * cs * e).matrix();
    jac.col(2) = (-q[0] * kTwoPi * tv.array() * sn * e).matrix();
    jac.col(3) = (-q[0] * sn * e).matrix();
    if (with_offset) jac.col(4).setOnes();
  };
  auto lm = levenberg_marquardt(model, p, t.size(), options);

  // A rate below zero means the envelope is flat or beating; hold the rate
  // at its bound and refit the remaining parameters.
  if (lm.params[1] < 0) {
    Model undamped = [&, with_offset](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
      const Eigen::ArrayXd arg = kTwoPi * q[1] * tv.array() + q[2];
      const Eigen::ArrayXd cs = arg.cos();
      r = (q[0] * cs + (with_offset ? q[3] : 0.0)).matrix() - yv;
      jac.col(0) = cs.matrix();
      jac.col(1) = (-q[0] * kTwoPi * tv.array() * arg.sin()).matrix();
      jac.col(2) = (-q[0] * arg.sin()).matrix();
      if (with_offset) jac.col(3).setOnes();
    };
    Eigen::VectorXd q(p.size() - 1);
    q[0] = p[0];
    q[1] = p[2];
    q[2] = p[3];
    if (with_offset) q[3] = p[4];
    const auto fixed = levenberg_marquardt(undamped, q, t.size(), options);
    lm.params[0] = fixed.params[0];
    lm.params[1] = 0.0;
    lm.params[2] = fixed.params[1];
    lm.params[3] = fixed.params[2];
    if (with_offset) lm.params[4] = fixed.params[3];
    lm.covariance = Eigen::MatrixXd::Zero(p.size(), p.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        lm.covariance(i == 0 ? 0 : i + 1, j == 0 ? 0 : j + 1) = fixed.covariance(i, j);
      }
    }
    lm.residual_norm = fixed.residual_norm;
    lm.iterations += fixed.iterations;
  }

  FitResult out;
  double amp = lm.params[0];
  double freq = lm.params[2];
  double phase = lm.params[3];
  if (freq < 0) {
    freq = -freq;
    phase = -phase;
  }
  if (amp < 0) {
    amp = -amp;
    phase += std::numbers::pi;
  }
  out.amplitude = amp;
  out.rate = std::max(0.0, lm.params[1]);
  out.frequency = freq;
  out.phase = wrap_phase(phase);
  out.offset = with_offset ? lm.params[4] : 0.0;
  out.covariance = lm.covariance;
  out.residual_norm = lm.residual_norm;
  out.iterations = lm.iterations;
  return out;
}

}  // namespace kpo
