#include "kpo/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "kpo/error.hpp"
#include "kpo/units.hpp"

namespace kpo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kContinuityTol = 1e-9;

// Closed-form integral of shape(s) over s in [0, u].
double shape_integral(Shape shape, double u) {
  switch (shape) {
    case Shape::constant:
      return u;
    case Shape::sin2_rise:
      return 0.5 * (u - std::sin(kPi * u) / kPi);
    case Shape::sin2_fall:
      return 0.5 * (u + std::sin(kPi * u) / kPi);
    case Shape::sin_bump:
      return (1.0 - std::cos(kPi * u)) / kPi;
    case Shape::sin2_bump:
      return 0.5 * (u - std::sin(2.0 * kPi * u) / (2.0 * kPi));
  }
  return 0.0;
}

double shape_value(Shape shape, double u) {
  switch (shape) {
    case Shape::constant:
      return 1.0;
    case Shape::sin2_rise: {
      const double s = std::sin(0.5 * kPi * u);
      return s * s;
    }
    case Shape::sin2_fall: {
      const double c = std::cos(0.5 * kPi * u);
      return c * c;
    }
    case Shape::sin_bump:
      return std::sin(kPi * u);
    case Shape::sin2_bump: {
      const double s = std::sin(kPi * u);
      return s * s;
    }
  }
  return 0.0;
}

bool finite_envelope(const Envelope& e) { return std::isfinite(e.amplitude) && std::isfinite(e.offset); }

}  // namespace

// ---------------------------------------------------------------------------
// SystemParams

void SystemParams::validate() const {
  for (double v : {kerr, pump, detuning, drive, drive_detuning, drive_phase, kappa}) {
    if (!std::isfinite(v)) fail(ErrorCode::usage, "system parameters must be finite");
  }
  if (kerr <= 0) fail(ErrorCode::usage, "Kerr coefficient must be positive");
  if (kappa < 0) fail(ErrorCode::usage, "loss rate must be non-negative");
  if (dim < 2) fail(ErrorCode::invalid_dimension, "Fock dimension must be >= 2");
}

SystemParams SystemParams::device_defaults() {
  SystemParams p;
  p.kerr = units::from_mhz(3.1);
  p.pump = units::from_mhz(3.13);
  p.detuning = units::from_mhz(1.0);
  p.drive = units::from_mhz(0.65);
  p.dim = 30;
  return p;
}

// ---------------------------------------------------------------------------
// Envelopes

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::constant:
      return "constant";
    case Shape::sin2_rise:
      return "sin2_rise";
    case Shape::sin2_fall:
      return "sin2_fall";
    case Shape::sin_bump:
      return "sin_bump";
    case Shape::sin2_bump:
      return "sin2_bump";
  }
  return "constant";
}

Shape shape_from_string(std::string_view name) {
  for (Shape s : {Shape::constant, Shape::sin2_rise, Shape::sin2_fall, Shape::sin_bump,
                  Shape::sin2_bump}) {
    if (to_string(s) == name) return s;
  }
  fail(ErrorCode::config, "unknown envelope shape '" + std::string(name) + "'");
}

double Envelope::value(double u) const { return offset + amplitude * shape_value(shape, u); }

double Envelope::integral(double u, double duration) const {
  return duration * (offset * u + amplitude * shape_integral(shape, u));
}

// ---------------------------------------------------------------------------
// PulseSchedule

PulseSchedule::PulseSchedule(std::vector<Segment> segments) {
  for (auto& s : segments) append(std::move(s));
}

PulseSchedule& PulseSchedule::append(Segment segment) {
  if (!(segment.duration > 0) || !std::isfinite(segment.duration)) {
    fail(ErrorCode::schedule, "segment duration must be positive and finite");
  }
  starts_.push_back(total_duration());
  segments_.push_back(std::move(segment));
  return *this;
}

PulseSchedule& PulseSchedule::append(const PulseSchedule& other) {
  for (const auto& s : other.segments_) append(s);
  return *this;
}

double PulseSchedule::total_duration() const {
  if (segments_.empty()) return 0.0;
  return starts_.back() + segments_.back().duration;
}

std::size_t PulseSchedule::locate(double t, double& local) const {
  const double total = total_duration();
  // Accept a few ulps of overshoot from accumulated sample grids.
  const double slack = 1e-12 * std::max(1.0, total);
  if (segments_.empty() || t < -slack || t > total + slack) {
    fail(ErrorCode::schedule, "time " + std::to_string(t) + " us outside schedule [0, " +
                                  std::to_string(total) + "]");
  }
  t = std::clamp(t, 0.0, total);
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  std::size_t k = static_cast<std::size_t>(std::distance(starts_.begin(), it));
  k = k == 0 ? 0 : k - 1;
  local = std::min(t - starts_[k], segments_[k].duration);
  return k;
}

double PulseSchedule::frame_phase_at(double t) const {
  double local = 0;
  const std::size_t k = locate(t, local);
  double phase = 0;
  for (std::size_t i = 0; i < k; ++i) {
    phase += 0.5 * segments_[i].chirp.integral(1.0, segments_[i].duration);
  }
  const auto& seg = segments_[k];
  phase += 0.5 * seg.chirp.integral(local / seg.duration, seg.duration);
  return phase;
}

Controls PulseSchedule::controls_at(double t) const {
  double local = 0;
  const std::size_t k = locate(t, local);
  return segment_controls(k, local);
}

Controls PulseSchedule::segment_controls(std::size_t k, double local) const {
  const auto& seg = segments_.at(k);
  local = std::clamp(local, 0.0, seg.duration);
  const double t = starts_[k] + local;
  const double u = local / seg.duration;
  double frame = 0;
  for (std::size_t i = 0; i < k; ++i) {
    frame += 0.5 * segments_[i].chirp.integral(1.0, segments_[i].duration);
  }
  frame += 0.5 * seg.chirp.integral(u, seg.duration);

  Controls c;
  c.pump = seg.pump.value(u);
  c.counterdiabatic = seg.counterdiabatic.value(u);
  c.cd_quadrature = seg.cd_quadrature;
  c.detuning = seg.detuning.value(u) - 0.5 * seg.chirp.value(u);
  if (perturbation_) c.detuning += perturbation_(t);
  c.drive = seg.drive.value(u);
  c.drive_detuning = seg.drive_detuning;
  c.drive_phase = seg.drive_phase - frame;
  return c;
}

void PulseSchedule::set_detuning_perturbation(std::function<double(double)> hook) {
  perturbation_ = std::move(hook);
}

double PulseSchedule::final_pump() const {
  return segments_.empty() ? 0.0 : segments_.back().pump.value(1.0);
}

double PulseSchedule::final_detuning() const {
  return segments_.empty() ? 0.0 : segments_.back().detuning.value(1.0);
}

void PulseSchedule::validate() const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.duration > 0) || !std::isfinite(s.duration)) {
      fail(ErrorCode::schedule, "segment duration must be positive and finite");
    }
    for (const Envelope* e : {&s.pump, &s.counterdiabatic, &s.detuning, &s.chirp, &s.drive}) {
      if (!finite_envelope(*e)) fail(ErrorCode::schedule, "envelope values must be finite");
    }
    if (!std::isfinite(s.drive_detuning) || !std::isfinite(s.drive_phase) ||
        !std::isfinite(s.cd_quadrature)) {
      fail(ErrorCode::schedule, "drive settings must be finite");
    }
    if (i > 0 && !s.jump) {
      const double prev = segments_[i - 1].pump.value(1.0);
      const double next = s.pump.value(0.0);
      if (std::abs(prev - next) > kContinuityTol * std::max(1.0, std::abs(prev))) {
        fail(ErrorCode::schedule, "pump envelope discontinuous at segment " + std::to_string(i) +
                                      " (mark the segment as a jump to allow it)");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Schedule builders

PulseSchedule ramp_schedule(double pump_max, double tau_ramp, bool counterdiabatic,
                            double detuning, double cd_quadrature) {
  if (!(tau_ramp > 0)) fail(ErrorCode::schedule, "ramp time must be positive");
  Segment s;
  s.duration = tau_ramp;
  s.pump = {Shape::sin2_rise, pump_max, 0.0};
  if (counterdiabatic) s.counterdiabatic = {Shape::sin_bump, kCounterdiabaticRatio * pump_max, 0.0};
  s.cd_quadrature = cd_quadrature;
  s.detuning = Envelope::constant(detuning);
  return PulseSchedule({s});
}

Segment hold_segment(double duration, double pump, double detuning) {
  Segment s;
  s.duration = duration;
  s.pump = Envelope::constant(pump);
  s.detuning = Envelope::constant(detuning);
  return s;
}

Segment drive_segment(double duration, double pump, double detuning, double beta,
                      double drive_detuning, double drive_phase) {
  Segment s = hold_segment(duration, pump, detuning);
  s.drive = Envelope::constant(beta);
  s.drive_detuning = drive_detuning;
  s.drive_phase = drive_phase;
  return s;
}

PulseSchedule chirp_schedule(double delta_peak, double tau_z, double pump, double detuning) {
  if (!(tau_z > 0)) fail(ErrorCode::schedule, "chirp time must be positive");
  Segment s = hold_segment(tau_z, pump, detuning);
  s.chirp = {Shape::sin2_bump, delta_peak, 0.0};
  return PulseSchedule({s});
}

PulseSchedule constant_schedule(const SystemParams& params, double duration) {
  return PulseSchedule({drive_segment(duration, params.pump, params.detuning, params.drive,
                                      params.drive_detuning, params.drive_phase)});
}

// ---------------------------------------------------------------------------
// Hamiltonian

void BandedHermitian::apply(const Matrix& x, Matrix& y) const {
  const Eigen::Index n = diag.size();
  y.noalias() = diag.cast<cplx>().asDiagonal() * x;
  if (n > 1) {
    y.bottomRows(n - 1).noalias() += sub1.asDiagonal() * x.topRows(n - 1);
    y.topRows(n - 1).noalias() += sub1.conjugate().asDiagonal() * x.bottomRows(n - 1);
  }
  if (n > 2) {
    y.bottomRows(n - 2).noalias() += sub2.asDiagonal() * x.topRows(n - 2);
    y.topRows(n - 2).noalias() += sub2.conjugate().asDiagonal() * x.bottomRows(n - 2);
  }
}

OperatorMatrix BandedHermitian::dense() const {
  const int n = dim();
  OperatorMatrix h = OperatorMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    h(i + 1, i) = sub1[i];
    h(i, i + 1) = std::conj(sub1[i]);
  }
  for (int i = 0; i + 2 < n; ++i) {
    h(i + 2, i) = sub2[i];
    h(i, i + 2) = std::conj(sub2[i]);
  }
  return h;
}

KpoHamiltonian::KpoHamiltonian(int dim) : dim_(dim) {
  if (dim < 2) fail(ErrorCode::invalid_dimension, "Fock dimension must be >= 2");
  n_ = Eigen::VectorXd::LinSpaced(dim, 0.0, dim - 1.0);
  kerr_diag_ = n_.array() * (n_.array() - 1.0);
  sqrt1_ = (n_.head(dim - 1).array() + 1.0).sqrt();
  sqrt2_ = ((n_.head(std::max(dim - 2, 0)).array() + 1.0) *
            (n_.head(std::max(dim - 2, 0)).array() + 2.0))
               .sqrt();
}

BandedHermitian KpoHamiltonian::at(double kerr, const Controls& c, double t) const {
  BandedHermitian h;
  fill(kerr, c, t, h);
  return h;
}

void KpoHamiltonian::fill(double kerr, const Controls& c, double t, BandedHermitian& h) const {
  h.diag = c.detuning * n_ - 0.5 * kerr * kerr_diag_;
  // <n+1| beta a+ e^{-i(Delta_d t + phi)} |n>
  const cplx drive = c.drive * std::polar(1.0, -(c.drive_detuning * t + c.drive_phase));
  h.sub1 = drive * sqrt1_.cast<cplx>();
  // <n+2| (P/2) a+^2 + (c/2) e^{i q} a+^2 |n>
  const cplx squeeze = 0.5 * c.pump + 0.5 * c.counterdiabatic * std::polar(1.0, c.cd_quadrature);
  h.sub2 = squeeze * sqrt2_.cast<cplx>();
}

OperatorMatrix hamiltonian_at(const SystemParams& params, const PulseSchedule& schedule, double t) {
  params.validate();
  const KpoHamiltonian builder(params.dim);
  return builder.at(params.kerr, schedule.controls_at(t), t).dense();
}

OperatorMatrix static_hamiltonian(double kerr, double pump, double detuning, int dim) {
  Controls c;
  c.pump = pump;
  c.detuning = detuning;
  return KpoHamiltonian(dim).at(kerr, c, 0.0).dense();
}

OperatorMatrix drive_frame_hamiltonian(double kerr, double drive_frame_detuning, double beta, int dim) {
  Controls c;
  c.detuning = drive_frame_detuning;
  c.drive = beta;
  return KpoHamiltonian(dim).at(kerr, c, 0.0).dense();
}

// ---------------------------------------------------------------------------
// Two-level models

TlsVariant tls_variant_from_string(std::string_view name) {
  if (name == "symmetrized") return TlsVariant::symmetrized;
  if (name == "standard") return TlsVariant::standard;
  fail(ErrorCode::usage, "unknown TLS variant '" + std::string(name) + "'");
}

Eigen::Matrix2cd tls_rabi_hamiltonian(TlsVariant variant, double rabi_frequency,
                                      double drive_detuning, double t) {
  // Basis (|g>, |e>): s+ = |e><g| has its entry at (1, 0).
  cplx lower{};  // coefficient of s+
  switch (variant) {
    case TlsVariant::symmetrized:
      lower = 0.25 * rabi_frequency * 2.0 * std::cos(drive_detuning * t);
      break;
    case TlsVariant::standard:
      lower = 0.5 * rabi_frequency * std::polar(1.0, drive_detuning * t);
      break;
  }
  Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
  h(1, 0) = lower;
  h(0, 1) = std::conj(lower);
  return h;
}

// ---------------------------------------------------------------------------
// Cat basis from the model

double classical_cat_amplitude(double kerr, double pump, double detuning) {
  return std::sqrt(std::max(pump + detuning, 0.0) / kerr);
}

namespace {

// Effective size: the real alpha whose analytic even cat best overlaps `state`.
double fit_cat_size(const StateVector& state, double guess) {
  const int dim = state.dim();
  const double hi_bound = std::sqrt(dim / 4.0);
  auto overlap = [&](double a) {
    return std::abs(cat_state(a, Parity::even, dim).inner(state));
  };
  double lo = std::max(0.0, 0.5 * guess);
  double hi = std::min(hi_bound, 1.5 * guess + 0.1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = overlap(x1);
  double f2 = overlap(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = overlap(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = overlap(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CatBasis cat_basis_from_model(const SystemParams& params) {
  params.validate();
  if (!(params.pump > 0)) fail(ErrorCode::usage, "cat basis needs a positive pump amplitude");
  const int dim = params.dim;
  const OperatorMatrix h = static_hamiltonian(params.kerr, params.pump, params.detuning, dim);
  const double alpha_c = classical_cat_amplitude(params.kerr, params.pump, params.detuning);
  const CatBasis analytic = CatBasis::analytic(alpha_c, dim);

  // H conserves parity, so each sector is diagonalized on its own. This keeps
  // the parity exact when the even and odd levels are degenerate.
  auto best_match = [&](const StateVector& target, int offset, double& overlap) {
    std::vector<int> idx;
    for (int n = offset; n < dim; n += 2) idx.push_back(n);
    const auto m = static_cast<Eigen::Index>(idx.size());
    Matrix block(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) block(i, j) = h(idx[i], idx[j]);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(block);
    Vector t(m);
    for (Eigen::Index i = 0; i < m; ++i) t[i] = target[idx[i]];
    const Eigen::VectorXcd ov = es.eigenvectors().adjoint() * t;
    Eigen::Index best = 0;
    overlap = ov.cwiseAbs().maxCoeff(&best);
    Vector v = Vector::Zero(dim);
    for (Eigen::Index i = 0; i < m; ++i) v[idx[i]] = es.eigenvectors()(i, best);
    // Phase so that <target|v> is real positive.
    const cplx proj = target.amplitudes().dot(v);
    v *= std::conj(proj) / std::abs(proj);
    return v;
  };

  double ov_even = 0;
  double ov_odd = 0;
  Vector v_even = best_match(analytic.plus_cat, 0, ov_even);
  Vector v_odd = best_match(analytic.minus_cat, 1, ov_odd);
  if (ov_even < 0.8 || ov_odd < 0.8) {
    fail(ErrorCode::basis, "model eigenstates do not resemble cat states (overlaps " +
                               std::to_string(ov_even) + ", " + std::to_string(ov_odd) + ")");
  }
  v_even.normalize();
  v_odd.normalize();

  StateVector plus(std::move(v_even));
  StateVector minus(std::move(v_odd));
  const double size = fit_cat_size(plus, std::max(alpha_c, 0.05));
  return {std::move(plus), std::move(minus), cplx{size, 0.0}};
}

}  // namespace kpo
