#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "kpo/fockspace.hpp"

namespace kpo {

/// Static device parameters in internal units (rad/us, 1/us).
///
/// Only the frequency differences enter: detuning = omega_K - omega_p/2 and
/// drive_detuning = omega_d - omega_p/2.
struct SystemParams {
  double kerr = 0;            ///< K
  double pump = 0;            ///< P_max, pump amplitude after ramp-up
  double detuning = 0;        ///< Delta
  double drive = 0;           ///< beta
  double drive_detuning = 0;  ///< Delta_d
  double drive_phase = 0;     ///< phi_d (rad)
  double kappa = 0;           ///< single-photon loss rate
  int dim = 30;

  /// Throws ErrorCode::usage on K <= 0, kappa < 0, dim < 2 or non-finite fields.
  void validate() const;

  /// K/2pi = 3.1 MHz, P/2pi = 3.13 MHz, Delta/2pi = 1.0 MHz, beta/2pi = 0.65 MHz.
  static SystemParams device_defaults();
};

/// Normalized pulse shapes over the segment-local coordinate u = t / duration.
enum class Shape {
  constant,   ///< 1
  sin2_rise,  ///< sin^2(pi u / 2)
  sin2_fall,  ///< cos^2(pi u / 2)
  sin_bump,   ///< sin(pi u)
  sin2_bump,  ///< sin^2(pi u)
};

std::string_view to_string(Shape shape);
Shape shape_from_string(std::string_view name);

/// value(u) = offset + amplitude * shape(u)
struct Envelope {
  Shape shape = Shape::constant;
  double amplitude = 0;
  double offset = 0;

  double value(double u) const;
  /// Integral of value over [0, u * duration].
  double integral(double u, double duration) const;

  static Envelope constant(double v) { return {Shape::constant, 0.0, v}; }
  static Envelope zero() { return {}; }
};

/// One piece of a pulse schedule. All envelopes are in absolute internal units.
struct Segment {
  double duration = 0;  ///< us
  Envelope pump;
  /// Counterdiabatic amplitude; combined with the pump through `cd_quadrature`.
  Envelope counterdiabatic;
  /// Phase of the counterdiabatic term relative to the pump; 0 adds it in phase.
  double cd_quadrature = 0;
  Envelope detuning;
  /// Pump frequency excursion delta_p(t) = omega_p'(t) - omega_p.
  Envelope chirp;
  Envelope drive;
  double drive_detuning = 0;
  double drive_phase = 0;
  /// Allow a discontinuity in P(t) at the start of this segment.
  bool jump = false;
};

/// Instantaneous control values at time t.
struct Controls {
  double pump = 0;
  double counterdiabatic = 0;
  double cd_quadrature = 0;
  /// Effective Delta(t) including the chirp shift and any perturbation hook.
  double detuning = 0;
  double drive = 0;
  double drive_detuning = 0;
  /// phi_d minus the frame phase accumulated by earlier chirps.
  double drive_phase = 0;
};

/// Piecewise-smooth control schedule starting at t = 0.
///
/// Pump chirps are represented in the fixed omega_p/2 frame as a shift
/// Delta(t) = Delta_0 - delta_p(t)/2; the frame phase int delta_p/2 dt is
/// carried forward as an offset on every later drive phase.
class PulseSchedule {
 public:
  PulseSchedule() = default;
  explicit PulseSchedule(std::vector<Segment> segments);

  PulseSchedule& append(Segment segment);
  PulseSchedule& append(const PulseSchedule& other);

  const std::vector<Segment>& segments() const { return segments_; }
  double total_duration() const;
  bool empty() const { return segments_.empty(); }

  /// Throws ErrorCode::schedule if t is outside [0, total_duration].
  /// At a boundary the later segment wins.
  Controls controls_at(double t) const;
  /// Controls of segment k at segment-local time `local` (clamped to the
  /// segment), so callers can integrate up to a boundary from the left.
  Controls segment_controls(std::size_t k, double local) const;
  double segment_start(std::size_t k) const { return starts_.at(k); }
  /// int_0^t delta_p(s) / 2 ds
  double frame_phase_at(double t) const;
  double frame_phase_total() const { return frame_phase_at(total_duration()); }

  /// Additive Delta(t) perturbation, e.g. residual AC Stark shift.
  void set_detuning_perturbation(std::function<double(double)> hook);
  bool has_detuning_perturbation() const { return static_cast<bool>(perturbation_); }

  /// Pump and detuning levels at the end of the schedule (hold values for appending).
  double final_pump() const;
  double final_detuning() const;

  /// Checks durations, finiteness and P(t) continuity (1e-9) at boundaries.
  void validate() const;

 private:
  std::size_t locate(double t, double& local) const;

  std::vector<Segment> segments_;
  std::vector<double> starts_;
  std::function<double(double)> perturbation_;
};

/// Pump ramp P_max sin^2(pi t / 2 tau_ramp) with optional counterdiabatic
/// term 0.3 P_max sin(pi t / tau_ramp), at constant detuning.
PulseSchedule ramp_schedule(double pump_max, double tau_ramp, bool counterdiabatic,
                            double detuning, double cd_quadrature = 0.0);

inline constexpr double kCounterdiabaticRatio = 0.3;

/// Constant pump and detuning, no drive.
Segment hold_segment(double duration, double pump, double detuning);

/// Rectangular drive on top of constant pump and detuning.
Segment drive_segment(double duration, double pump, double detuning, double beta,
                      double drive_detuning, double drive_phase);

/// Chirp delta_p(t) = delta_peak sin^2(pi t / tau_z) at constant pump.
PulseSchedule chirp_schedule(double delta_peak, double tau_z, double pump, double detuning);

/// Single constant segment from `params` (pump, detuning, drive fields used as is).
PulseSchedule constant_schedule(const SystemParams& params, double duration);

// ---------------------------------------------------------------------------
// Hamiltonian

/// Hermitian matrix with nonzero entries only on |i - j| <= 2, which is the
/// structure of the rotating-frame KPO Hamiltonian in the Fock basis.
struct BandedHermitian {
  Eigen::VectorXd diag;  ///< H(n, n)
  Vector sub1;           ///< H(n+1, n)
  Vector sub2;           ///< H(n+2, n)

  int dim() const { return static_cast<int>(diag.size()); }
  /// y = H x for a block of column vectors.
  void apply(const Matrix& x, Matrix& y) const;
  OperatorMatrix dense() const;
};

/// Precomputed Fock-space factors for assembling H(t) at a fixed dimension.
class KpoHamiltonian {
 public:
  explicit KpoHamiltonian(int dim);

  int dim() const { return dim_; }

  /// H/hbar = Delta n - (K/2) a+a+aa + (P/2)(a+^2 + a^2) + (c/2)(e^{i q} a+^2 + h.c.)
  ///          + beta (a+ e^{-i(Delta_d t + phi_d)} + h.c.)
  BandedHermitian at(double kerr, const Controls& c, double t) const;
  /// Same as `at`, reusing the storage of `out`.
  void fill(double kerr, const Controls& c, double t, BandedHermitian& out) const;

 private:
  int dim_;
  Eigen::VectorXd n_;
  Eigen::VectorXd kerr_diag_;  ///< n(n-1)
  Eigen::VectorXd sqrt1_;      ///< sqrt(n+1)
  Eigen::VectorXd sqrt2_;      ///< sqrt((n+1)(n+2))
};

/// Dense H(t) for a schedule; Hermitian by construction.
OperatorMatrix hamiltonian_at(const SystemParams& params, const PulseSchedule& schedule, double t);

/// Static rotating-frame Hamiltonian with beta = 0.
OperatorMatrix static_hamiltonian(double kerr, double pump, double detuning, int dim);

/// Drive-frame Hamiltonian for pump-off experiments:
/// Delta_dr n - (K/2) a+a+aa + beta (a+ + a), Delta_dr = omega_K - omega_d.
OperatorMatrix drive_frame_hamiltonian(double kerr, double drive_frame_detuning, double beta, int dim);

// ---------------------------------------------------------------------------
// Two-level comparison models

enum class TlsVariant { symmetrized, standard };

TlsVariant tls_variant_from_string(std::string_view name);

/// 2x2 Hamiltonian in the (|g>, |e>) basis.
///   symmetrized: (Omega/4)(e^{-i D t} + e^{+i D t})(s+ + s-)
///   standard:    (Omega/2)(s+ e^{+i D t} + s- e^{-i D t})
Eigen::Matrix2cd tls_rabi_hamiltonian(TlsVariant variant, double rabi_frequency,
                                      double drive_detuning, double t);

// ---------------------------------------------------------------------------
// Cat basis

/// alpha_c = sqrt((P + Delta) / K), or 0 when P + Delta <= 0.
double classical_cat_amplitude(double kerr, double pump, double detuning);

/// Eigenstates of the static Hamiltonian (beta = 0) with the largest overlap
/// onto the analytic cats at alpha_c, phased so that <Cat(alpha_c)|+-Cat> > 0.
/// Throws ErrorCode::basis if either overlap is below 0.8.
CatBasis cat_basis_from_model(const SystemParams& params);

// ---------------------------------------------------------------------------
// Schedule configuration files (MHz / ns at the boundary)

std::string schedule_to_config(const PulseSchedule& schedule);
PulseSchedule schedule_from_config(std::string_view text);
void save_schedule(const PulseSchedule& schedule, const std::string& path);
PulseSchedule load_schedule(const std::string& path);

}  // namespace kpo
