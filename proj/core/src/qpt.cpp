#include "kpo/qpt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "kpo/error.hpp"
#include "kpo/io.hpp"
#include "kpo/parallel.hpp"
#include "kpo/units.hpp"

namespace kpo {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

Eigen::Vector4cd vec(const Eigen::Matrix2cd& m) {
  return Eigen::Vector4cd(m(0, 0), m(1, 0), m(0, 1), m(1, 1));
}

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  }
  return out;
}

Eigen::Matrix<cplx, Eigen::Dynamic, 2> qubit_frame(const CatBasis& basis) {
  Eigen::Matrix<cplx, Eigen::Dynamic, 2> b(basis.dim(), 2);
  b.col(0) = basis.plus_cat.amplitudes();
  b.col(1) = basis.minus_cat.amplitudes();
  return b;
}

// Gauss-Hermite nodes and weights for a unit-variance normal, via Golub-Welsch.
std::vector<std::pair<double, double>> gauss_hermite(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k < n; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    out.emplace_back(std::sqrt(2.0) * es.eigenvalues()[k], v0 * v0);
  }
  return out;
}

// Static qubit energies <+|H|+> and <-|H|-> at the operating point.
std::pair<double, double> qubit_energies(const SystemParams& params, const CatBasis& basis) {
  const OperatorMatrix h = static_hamiltonian(params.kerr, params.pump, params.detuning, params.dim);
  return {basis.plus_cat.expectation(h), basis.minus_cat.expectation(h)};
}

// Qubit amplitudes of psi after removing the free precession over time t.
Eigen::Vector2cd rotating_frame_amplitudes(const Vector& psi, const CatBasis& basis,
                                           std::pair<double, double> energies, double t) {
  return {basis.plus_cat.amplitudes().dot(psi) * std::polar(1.0, energies.first * t),
          basis.minus_cat.amplitudes().dot(psi) * std::polar(1.0, energies.second * t)};
}

Vector final_state(const SystemParams& params, const PulseSchedule& s, const Vector& psi0,
                   const PropagationOptions& options) {
  SystemParams closed = params;
  closed.kappa = 0;
  const double end = s.total_duration();
  const Trajectory traj = propagate(closed, s, StateVector::unnormalized(psi0), std::span<const double>(&end, 1), options);
  return traj.states().back().amplitudes();
}

}  // namespace

// ---------------------------------------------------------------------------
// Effective qubit and chi

QubitDensity effective_qubit(const DensityMatrix& rho) {
  QubitDensity q;
  q.basis = QubitBasisKind::fock;
  q.m = rho.matrix().topLeftCorner<2, 2>();
  return q;
}

QubitDensity effective_qubit(const DensityMatrix& rho, const CatBasis& basis) {
  check_orthonormal(basis, 1e-8);
  if (basis.dim() != rho.dim()) fail(ErrorCode::invalid_dimension, "basis and state dimensions differ");
  const auto b = qubit_frame(basis);
  QubitDensity q;
  q.basis = QubitBasisKind::cat;
  q.m = b.adjoint() * rho.matrix() * b;
  q.m = 0.5 * (q.m + q.m.adjoint()).eval();
  return q;
}

const std::array<Eigen::Matrix2cd, 4>& chi_basis() {
  static const std::array<Eigen::Matrix2cd, 4> basis = [] {
    Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd x;
    x << 0, 1, 1, 0;
    Eigen::Matrix2cd y;
    y << 0, -kI, kI, 0;
    Eigen::Matrix2cd z;
    z << 1, 0, 0, -1;
    return std::array<Eigen::Matrix2cd, 4>{id, x, Eigen::Matrix2cd(-kI * y), z};
  }();
  return basis;
}

ProcessMatrix chi_matrix(const std::array<QubitDensity, 4>& inputs, const std::array<QubitDensity, 4>& outputs) {
  Eigen::Matrix4cd vin;
  Eigen::Matrix4cd vout;
  for (int j = 0; j < 4; ++j) {
    vin.col(j) = vec(inputs[static_cast<std::size_t>(j)].m);
    vout.col(j) = vec(outputs[static_cast<std::size_t>(j)].m);
  }
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(vin);
  const double smin = svd.singularValues()[3];
  if (smin < 1e-8) {
    fail(ErrorCode::span, "QPT inputs do not span the qubit operator space (smallest singular value " +
                              std::to_string(smin) + ")");
  }
  const Eigen::Matrix4cd super = vout * vin.inverse();

  // vec(E_m rho E_n^dagger) = (conj(E_n) kron E_m) vec(rho)
  const auto& e = chi_basis();
  Eigen::Matrix<cplx, 16, 16> beta;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      const Eigen::Matrix4cd k = kron(e[static_cast<std::size_t>(n)].conjugate(), e[static_cast<std::size_t>(m)]);
      beta.col(m + 4 * n) = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(k.data());
    }
  }
  Eigen::FullPivLU<Eigen::Matrix<cplx, 16, 16>> lu(beta);
  if (lu.rank() < 16) fail(ErrorCode::basis_degeneracy, "operator basis gives a singular beta system");
  const Eigen::Matrix<cplx, 16, 1> s = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(super.data());
  const Eigen::Matrix<cplx, 16, 1> x = lu.solve(s);

  ProcessMatrix out;
  const Eigen::Matrix4cd chi = Eigen::Map<const Eigen::Matrix4cd>(x.data());
  out.antihermitian_residual = (chi - chi.adjoint()).cwiseAbs().maxCoeff();
  out.chi = 0.5 * (chi + chi.adjoint());
  Eigen::Matrix2cd tp = Eigen::Matrix2cd::Zero();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      tp += out.chi(m, n) * e[static_cast<std::size_t>(n)].adjoint() * e[static_cast<std::size_t>(m)];
    }
  }
  out.trace_residual = (tp - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
  return out;
}

ProcessMatrix chi_for_unitary(const Eigen::Matrix2cd& u) {
  const auto& e = chi_basis();
  Eigen::Vector4cd c;
  for (int m = 0; m < 4; ++m) c[m] = 0.5 * (e[static_cast<std::size_t>(m)].adjoint() * u).trace();
  ProcessMatrix out;
  out.chi = c * c.adjoint();
  return out;
}

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& ideal) {
  const double tr = ideal.chi.trace().real();
  if (!(tr > 0)) fail(ErrorCode::usage, "ideal process matrix must have positive trace");
  return (ideal.chi * chi.chi).trace().real() / tr;
}

ProcessMatrix error_process(const ProcessMatrix& chi, const Eigen::Matrix2cd& ideal) {
  const auto& e = chi_basis();
  // U^dagger E_m = sum_k c_km E_k with c_km = Tr(E_k^dagger U^dagger E_m) / 2.
  Eigen::Matrix4cd c;
  for (int k = 0; k < 4; ++k) {
    for (int m = 0; m < 4; ++m) c(k, m) = 0.5 * (e[k].adjoint() * ideal.adjoint() * e[m]).trace();
  }
  ProcessMatrix out = chi;
  out.chi = c * chi.chi * c.adjoint();
  return out;
}

Eigen::Matrix2cd rotation_x(double theta) {
  Eigen::Matrix2cd r;
  r << std::cos(theta / 2), -kI * std::sin(theta / 2), -kI * std::sin(theta / 2), std::cos(theta / 2);
  return r;
}

Eigen::Matrix2cd rotation_z(double theta) {
  Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
  r(0, 0) = std::polar(1.0, -theta / 2);
  r(1, 1) = std::polar(1.0, theta / 2);
  return r;
}

std::array<Eigen::Matrix2cd, 4> standard_inputs() {
  const std::array<Eigen::Vector2cd, 4> kets{Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1),
                                             Eigen::Vector2cd(1, 1) / std::sqrt(2.0),
                                             Eigen::Vector2cd(1, kI) / std::sqrt(2.0)};
  std::array<Eigen::Matrix2cd, 4> out;
  for (std::size_t k = 0; k < 4; ++k) out[k] = kets[k] * kets[k].adjoint();
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

double calibrate_x_half(const SystemParams& params, const CatBasis& basis, double drive,
                        const PropagationOptions& options) {
  if (!(drive > 0)) fail(ErrorCode::calibration, "X/2 calibration needs a positive drive amplitude");
  const double alpha = std::abs(basis.alpha_eff);
  if (!(alpha > 0)) fail(ErrorCode::calibration, "cat basis has zero size");
  const auto energies = qubit_energies(params, basis);
  const Eigen::Vector2cd target = rotation_x(kPi / 2) * Eigen::Vector2cd(1, 0);
  const Vector psi0 = basis.plus_cat.amplitudes();
  auto score_state = [&](const Vector& psi, double t) {
    return std::norm(target.dot(rotating_frame_amplitudes(psi, basis, energies, t)));
  };

  // Coarse scan over one propagation: the state at time t equals the state
  // after a pulse of length t.
  const double estimate = kPi / (8.0 * drive * alpha);
  const int samples = 121;
  std::vector<double> times(samples);
  for (int k = 0; k < samples; ++k) times[static_cast<std::size_t>(k)] = 2.0 * estimate * (k + 1) / samples;
  const PulseSchedule scan({drive_segment(times.back(), params.pump, params.detuning, drive, 0.0, 0.0)});
  SystemParams closed = params;
  closed.kappa = 0;
  const Trajectory traj = propagate(closed, scan, StateVector::unnormalized(psi0), times, options);
  std::size_t best = 0;
  double best_score = -1;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double s = score_state(traj.states()[k].amplitudes(), times[k]);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  if (best_score < 0.5) {
    fail(ErrorCode::calibration, "no drive duration reaches the X/2 target (best overlap " +
                                     std::to_string(best_score) + ")");
  }

  // Golden-section refinement around the scan maximum.
  const double dt = times[1] - times[0];
  double lo = std::max(1e-6, times[best] - dt);
  double hi = times[best] + dt;
  auto score = [&](double t) {
    const PulseSchedule s({drive_segment(t, params.pump, params.detuning, drive, 0.0, 0.0)});
    return score_state(final_state(params, s, psi0, options), t);
  };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = score(x1);
  double f2 = score(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = score(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = score(x1);
    }
  }
  return 0.5 * (lo + hi);
}

double calibrate_z_half(const SystemParams& params, const CatBasis& basis, double tau_z,
                        const PropagationOptions& options) {
  if (!(tau_z > 0)) fail(ErrorCode::calibration, "Z/2 calibration needs tau_z > 0");
  const auto energies = qubit_energies(params, basis);
  const Vector psi0 = (basis.plus_cat.amplitudes() + basis.minus_cat.amplitudes()) / std::sqrt(2.0);
  // Rotation angle of |+Coh> about z beyond the free precession.
  auto angle = [&](double delta) {
    const PulseSchedule s = chirp_schedule(delta, tau_z, params.pump, params.detuning);
    const Eigen::Vector2cd c = rotating_frame_amplitudes(final_state(params, s, psi0, options), basis, energies, tau_z);
    return std::arg(c[1] / c[0]);
  };

  const double target = kPi / 2;
  const double step = units::from_mhz(0.1);
  const double max_delta = 2.0 * (params.pump + params.detuning);
  double prev_delta = 0;
  double prev_angle = 0;  // unwrapped
  double raw_prev = angle(0.0);
  prev_angle = raw_prev;
  for (double d = step; d <= max_delta + 1e-12; d += step) {
    const double raw = angle(d);
    const double next_angle = prev_angle + std::remainder(raw - raw_prev, 2.0 * kPi);
    raw_prev = raw;
    if ((prev_angle - target) * (next_angle - target) <= 0) {
      // Bisection on the unwrapped angle inside the bracket.
      double lo = prev_delta;
      double hi = d;
      double a_lo = prev_angle;
      for (int it = 0; it < 60 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double a_mid = a_lo + std::remainder(angle(mid) - std::remainder(a_lo, 2.0 * kPi), 2.0 * kPi);
        if ((a_lo - target) * (a_mid - target) <= 0) {
          hi = mid;
        } else {
          lo = mid;
          a_lo = a_mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_delta = d;
    prev_angle = next_angle;
  }
  fail(ErrorCode::calibration, "no chirp depth up to " + std::to_string(units::to_mhz(max_delta)) +
                                   " MHz gives a pi/2 rotation in " + std::to_string(tau_z) + " us");
}

// ---------------------------------------------------------------------------
// Experiments

std::string_view to_string(QptKind kind) {
  switch (kind) {
    case QptKind::mapping: return "mapping";
    case QptKind::x_half: return "x_half";
    case QptKind::z_half: return "z_half";
  }
  return "mapping";
}

QptKind qpt_kind_from_string(std::string_view name) {
  if (name == "mapping") return QptKind::mapping;
  if (name == "x_half" || name == "X/2") return QptKind::x_half;
  if (name == "z_half" || name == "Z/2") return QptKind::z_half;
  fail(ErrorCode::usage, "unknown QPT kind '" + std::string(name) + "'");
}

QptResult qpt_experiment(QptKind kind, const SystemParams& params, double kappa, const QptOptions& options) {
  params.validate();
  if (kappa < 0) fail(ErrorCode::usage, "loss rate must be non-negative");
  if (options.detuning_jitter < 0 || options.jitter_nodes < 1) fail(ErrorCode::usage, "invalid jitter settings");

  QptResult result;
  result.kind = kind;
  const CatBasis basis = cat_basis_from_model(params);
  const auto energies = qubit_energies(params, basis);
  const auto b = qubit_frame(basis);

  PulseSchedule schedule;
  Eigen::Matrix2cd frame = Eigen::Matrix2cd::Identity();  // applied as F rho F^dagger
  switch (kind) {
    case QptKind::mapping: {
      schedule = ramp_schedule(params.pump, options.tau_ramp, options.counterdiabatic, params.detuning,
                               options.cd_quadrature);
      const auto cal = calibrate_mapping(params, schedule, basis, options.propagation);
      result.frame_phase = cal.relative_phase();
      frame(1, 1) = std::polar(1.0, -result.frame_phase);
      result.ideal_unitary = Eigen::Matrix2cd::Identity();
      break;
    }
    case QptKind::x_half: {
      const double drive = options.x_drive > 0 ? options.x_drive : params.drive;
      const double t = options.x_duration > 0 ? options.x_duration
                                              : calibrate_x_half(params, basis, drive, options.propagation);
      result.calibrated_value = t;
      schedule.append(drive_segment(t, params.pump, params.detuning, drive, 0.0, 0.0));
      result.ideal_unitary = rotation_x(kPi / 2);
      break;
    }
    case QptKind::z_half: {
      const double delta = options.z_delta_peak > 0
                               ? options.z_delta_peak
                               : calibrate_z_half(params, basis, options.tau_z, options.propagation);
      result.calibrated_value = delta;
      schedule = chirp_schedule(delta, options.tau_z, params.pump, params.detuning);
      result.ideal_unitary = rotation_z(kPi / 2);
      break;
    }
  }
  result.ideal = chi_for_unitary(result.ideal_unitary);
  const double duration = schedule.total_duration();
  result.gate_duration = duration;
  if (kind != QptKind::mapping) {
    frame(0, 0) = std::polar(1.0, energies.first * duration);
    frame(1, 1) = std::polar(1.0, energies.second * duration);
  }

  // Inputs as full-space states.
  const auto inputs2 = standard_inputs();
  const std::array<Eigen::Vector2cd, 4> kets{Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1),
                                             Eigen::Vector2cd(1, 1) / std::sqrt(2.0),
                                             Eigen::Vector2cd(1, kI) / std::sqrt(2.0)};
  std::vector<Vector> initial(4);
  for (std::size_t j = 0; j < 4; ++j) {
    if (kind == QptKind::mapping) {
      initial[j] = Vector::Zero(params.dim);
      initial[j].head<2>() = kets[j];
    } else {
      initial[j] = b * kets[j];
    }
    result.inputs[j].m = inputs2[j];
    result.inputs[j].basis = kind == QptKind::mapping ? QubitBasisKind::fock : QubitBasisKind::cat;
  }

  const auto nodes = options.detuning_jitter > 0 ? gauss_hermite(options.jitter_nodes)
                                                  : std::vector<std::pair<double, double>>{{0.0, 1.0}};
  SystemParams lossy = params;
  lossy.kappa = kappa;
  const double end = duration;
  std::vector<Eigen::Matrix2cd> blocks(4 * nodes.size());
  parallel_for(blocks.size(), options.workers, [&](std::size_t job) {
    const std::size_t j = job % 4;
    const std::size_t k = job / 4;
    PulseSchedule s = schedule;
    const double offset = options.detuning_jitter * nodes[k].first;
    if (offset != 0.0) s.set_detuning_perturbation([offset](double) { return offset; });
    const Trajectory traj =
        propagate(lossy, s, StateVector(initial[j].normalized()), std::span<const double>(&end, 1), options.propagation);
    const QubitDensity q = effective_qubit(traj.density(0), basis);
    blocks[job] = nodes[k].second * q.m;
  });

  double trace_sum = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    for (std::size_t k = 0; k < nodes.size(); ++k) m += blocks[4 * k + j];
    m = frame * m * frame.adjoint();
    result.outputs[j].m = 0.5 * (m + m.adjoint());
    result.outputs[j].basis = QubitBasisKind::cat;
    trace_sum += result.outputs[j].trace();
  }
  result.mean_output_trace = trace_sum / 4.0;
  result.chi = chi_matrix(result.inputs, result.outputs);
  result.fidelity = process_fidelity(result.chi, result.ideal);
  return result;
}

// ---------------------------------------------------------------------------
// I/O

namespace {
const std::array<const char*, 4> kLabels{"I", "X", "-iY", "Z"};
const std::array<const char*, 4> kShort{"I", "X", "Y", "Z"};
}  // namespace

std::string chi_to_json(const ProcessMatrix& chi) {
  using nlohmann::json;
  json re = json::array();
  json im = json::array();
  for (int m = 0; m < 4; ++m) {
    json rr = json::array();
    json ii = json::array();
    for (int n = 0; n < 4; ++n) {
      rr.push_back(chi.chi(m, n).real());
      ii.push_back(chi.chi(m, n).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  json j{{"basis", kLabels},
         {"re", re},
         {"im", im},
         {"antihermitian_residual", chi.antihermitian_residual},
         {"trace_residual", chi.trace_residual}};
  return j.dump(2) + "\n";
}

ProcessMatrix chi_from_json(const std::string& text) {
  using nlohmann::json;
  ProcessMatrix out;
  try {
    const json j = json::parse(text);
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        out.chi(m, n) = {j.at("re").at(m).at(n).get<double>(), j.at("im").at(m).at(n).get<double>()};
      }
    }
    out.antihermitian_residual = j.value("antihermitian_residual", 0.0);
    out.trace_residual = j.value("trace_residual", 0.0);
  } catch (const json::exception& e) {
    fail(ErrorCode::io, std::string("bad chi JSON: ") + e.what());
  }
  return out;
}

std::string chi_to_csv(const ProcessMatrix& chi) {
  CsvTable t;
  t.metadata = {{"basis", "I X -iY Z"}};
  t.header = {"m", "n", "re", "im"};
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      t.rows.push_back({static_cast<double>(m), static_cast<double>(n), chi.chi(m, n).real(), chi.chi(m, n).imag()});
    }
  }
  return to_csv(t);
}

std::string chi_to_svg(const ProcessMatrix& chi, const std::string& title) {
  std::vector<std::string> labels;
  std::vector<double> re;
  std::vector<double> im;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      labels.push_back(std::string(kShort[static_cast<std::size_t>(m)]) + kShort[static_cast<std::size_t>(n)]);
      re.push_back(chi.chi(m, n).real());
      im.push_back(chi.chi(m, n).imag());
    }
  }
  return svg_bar_panels(title, labels, re, im);
}

}  // namespace kpo
