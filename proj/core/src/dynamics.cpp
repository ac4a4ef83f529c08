#include "kpo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kpo/error.hpp"
#include "kpo/parallel.hpp"

namespace kpo {

namespace {

void check_samples(std::span<const double> samples, double total) {
  const double slack = 1e-12 * std::max(1.0, total);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i]) || samples[i] < -slack || samples[i] > total + slack) {
      fail(ErrorCode::schedule, "sample time " + std::to_string(samples[i]) +
                                    " us outside schedule [0, " + std::to_string(total) + "]");
    }
    if (i > 0 && !(samples[i] > samples[i - 1])) {
      fail(ErrorCode::usage, "sample times must be strictly increasing");
    }
  }
}

// Lindblad pieces that do not depend on time: sqrt((m+1)(n+1)) for the jump
// term and (m+n)/2 for the anticommutator with a+a.
struct LossTerms {
  Eigen::MatrixXd jump;
  Eigen::MatrixXd anti;

  explicit LossTerms(int dim) : jump(dim - 1, dim - 1), anti(dim, dim) {
    for (int m = 0; m < dim; ++m) {
      for (int n = 0; n < dim; ++n) {
        anti(m, n) = 0.5 * (m + n);
        if (m + 1 < dim && n + 1 < dim) jump(m, n) = std::sqrt((m + 1.0) * (n + 1.0));
      }
    }
  }
};

// Integrates y through every schedule segment, emitting samples as they are
// reached. `lindblad` selects the master equation (y is rho) over the
// Schrodinger equation (y is a block of column states).
IntegratorStats integrate_schedule(const SystemParams& params, const PulseSchedule& schedule,
                                   Matrix& y, bool lindblad, std::span<const double> samples,
                                   const IntegratorOptions& options, const SampleSink& sink) {
  const KpoHamiltonian builder(params.dim);
  const double kerr = params.kerr;
  const double kappa = params.kappa;
  const LossTerms loss(lindblad ? params.dim : 2);
  const Eigen::Index n = params.dim;
  Dopri5 solver(options);
  BandedHermitian h;
  Matrix hy(y.rows(), y.cols());

  const double total = schedule.total_duration();
  const double slack = 1e-12 * std::max(1.0, total);
  std::size_t next = 0;
  const auto& segments = schedule.segments();
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const double t0 = schedule.segment_start(k);
    const bool last = k + 1 == segments.size();
    const double t1 = last ? total : schedule.segment_start(k + 1);
    std::size_t end = next;
    while (end < samples.size() && (samples[end] <= t1 || (last && samples[end] <= t1 + slack))) {
      ++end;
    }
    // Clamp the sample view to the interval; values within slack are reported as given.
    std::vector<double> local(samples.begin() + static_cast<std::ptrdiff_t>(next),
                              samples.begin() + static_cast<std::ptrdiff_t>(end));
    for (double& s : local) s = std::clamp(s, t0, t1);
    const std::size_t first = next;
    auto emit = [&](std::size_t idx, double, const Matrix& state) {
      if (sink) sink(idx, samples[idx], state);
    };

    MatrixRhs rhs;
    if (lindblad) {
      rhs = [&, k, t0](double t, const Matrix& rho, Matrix& d) {
        builder.fill(kerr, schedule.segment_controls(k, t - t0), t, h);
        h.apply(rho, hy);
        d.noalias() = cplx{0, -1} * (hy - hy.adjoint());
        if (kappa > 0) {
          d.topLeftCorner(n - 1, n - 1).array() +=
              kappa * loss.jump.array() * rho.bottomRightCorner(n - 1, n - 1).array();
          d.array() -= kappa * loss.anti.array() * rho.array();
        }
      };
    } else {
      rhs = [&, k, t0](double t, const Matrix& psi, Matrix& d) {
        builder.fill(kerr, schedule.segment_controls(k, t - t0), t, h);
        h.apply(psi, hy);
        d.noalias() = cplx{0, -1} * hy;
      };
    }
    solver.integrate(rhs, t0, t1, y, local, first, emit);
    next = end;
  }
  return solver.stats();
}

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

TrajectoryMeta make_meta(const IntegratorOptions& o, bool lindblad, const IntegratorStats& stats) {
  TrajectoryMeta meta;
  meta.rtol = o.rtol;
  meta.atol = o.atol;
  meta.lindblad = lindblad;
  meta.stats = stats;
  return meta;
}

Trajectory propagate_density(const SystemParams& params, const PulseSchedule& schedule,
                             const Matrix& rho0, std::span<const double> samples,
                             const PropagationOptions& options) {
  Matrix rho = rho0;
  std::vector<DensityMatrix> out;
  out.reserve(samples.size());
  double drift = 0;
  const auto stats = integrate_schedule(
      params, schedule, rho, true, samples, options.integrator,
      [&](std::size_t, double, const Matrix& r) {
        drift = std::max(drift, std::abs(r.trace().real() - 1.0));
        out.push_back(DensityMatrix::unnormalized(0.5 * (r + r.adjoint())));
      });
  auto meta = make_meta(options.integrator, true, stats);
  meta.max_norm_deviation = drift;
  return Trajectory(to_vector(samples), std::move(out), meta);
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<double> times, std::vector<StateVector> states,
                       TrajectoryMeta meta)
    : times_(std::move(times)), states_(std::move(states)), meta_(meta) {
  if (times_.size() != states_.size()) fail(ErrorCode::usage, "trajectory size mismatch");
}

Trajectory::Trajectory(std::vector<double> times, std::vector<DensityMatrix> states,
                       TrajectoryMeta meta)
    : times_(std::move(times)), densities_(std::move(states)), meta_(meta) {
  if (times_.size() != densities_.size()) fail(ErrorCode::usage, "trajectory size mismatch");
}

DensityMatrix Trajectory::density(std::size_t i) const {
  if (mixed()) return densities_.at(i);
  const Vector& v = states_.at(i).amplitudes();
  return DensityMatrix::unnormalized(v * v.adjoint());
}

std::vector<double> Trajectory::expectation(const OperatorMatrix& op) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    out[i] = mixed() ? densities_[i].expectation(op) : states_[i].expectation(op);
  }
  return out;
}

std::vector<double> Trajectory::population(const StateVector& s) const {
  std::vector<double> out(size());
  const Vector& v = s.amplitudes();
  for (std::size_t i = 0; i < size(); ++i) {
    out[i] = mixed() ? v.dot(densities_[i].matrix() * v).real()
                     : std::norm(v.dot(states_[i].amplitudes()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Propagation

Trajectory propagate(const SystemParams& params, const PulseSchedule& schedule,
                     const StateVector& initial, std::span<const double> sample_times,
                     const PropagationOptions& options) {
  params.validate();
  schedule.validate();
  if (initial.dim() != params.dim) fail(ErrorCode::invalid_dimension, "initial state dimension mismatch");
  check_samples(sample_times, schedule.total_duration());
  if (params.kappa > 0 || options.force_density) {
    const Vector& v = initial.amplitudes();
    return propagate_density(params, schedule, v * v.adjoint(), sample_times, options);
  }
  Matrix psi = initial.amplitudes();
  std::vector<StateVector> out;
  out.reserve(sample_times.size());
  double drift = 0;
  const double norm0 = initial.amplitudes().norm();
  const auto stats = integrate_schedule(
      params, schedule, psi, false, sample_times, options.integrator,
      [&](std::size_t, double, const Matrix& y) {
        drift = std::max(drift, std::abs(y.col(0).norm() - norm0));
        out.push_back(StateVector::unnormalized(y.col(0)));
      });
  auto meta = make_meta(options.integrator, false, stats);
  meta.max_norm_deviation = drift;
  return Trajectory(to_vector(sample_times), std::move(out), meta);
}

Trajectory propagate(const SystemParams& params, const PulseSchedule& schedule,
                     const DensityMatrix& initial, std::span<const double> sample_times,
                     const PropagationOptions& options) {
  params.validate();
  schedule.validate();
  if (initial.dim() != params.dim) fail(ErrorCode::invalid_dimension, "initial state dimension mismatch");
  check_samples(sample_times, schedule.total_duration());
  return propagate_density(params, schedule, initial.matrix(), sample_times, options);
}

std::vector<Matrix> propagator(const SystemParams& params, const PulseSchedule& schedule,
                               std::span<const double> sample_times,
                               const PropagationOptions& options) {
  params.validate();
  schedule.validate();
  check_samples(sample_times, schedule.total_duration());
  Matrix u = Matrix::Identity(params.dim, params.dim);
  std::vector<Matrix> out;
  out.reserve(sample_times.size());
  integrate_schedule(params, schedule, u, false, sample_times, options.integrator,
                     [&](std::size_t, double, const Matrix& y) { out.push_back(y); });
  return out;
}

std::vector<Vector> propagate_dense(const std::function<Matrix(double)>& hamiltonian,
                                    const Vector& initial, std::span<const double> sample_times,
                                    const IntegratorOptions& options) {
  if (sample_times.empty()) return {};
  for (std::size_t i = 1; i < sample_times.size(); ++i) {
    if (!(sample_times[i] > sample_times[i - 1])) {
      fail(ErrorCode::usage, "sample times must be strictly increasing");
    }
  }
  const double t0 = std::min(0.0, sample_times.front());
  Dopri5 solver(options);
  Matrix y = initial;
  std::vector<Vector> out;
  out.reserve(sample_times.size());
  solver.integrate(
      [&](double t, const Matrix& psi, Matrix& d) { d.noalias() = cplx{0, -1} * (hamiltonian(t) * psi); },
      t0, sample_times.back(), y, sample_times, 0,
      [&](std::size_t, double, const Matrix& s) { out.push_back(s.col(0)); });
  return out;
}

ObservableTable trajectory_table(const Trajectory& trajectory,
                                 const std::vector<std::pair<std::string, OperatorMatrix>>& observables) {
  ObservableTable table;
  table.header.push_back("t_us");
  std::vector<std::vector<double>> columns;
  for (const auto& [name, op] : observables) {
    table.header.push_back(name);
    columns.push_back(trajectory.expectation(op));
  }
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    std::vector<double> row{trajectory.times()[i]};
    for (const auto& c : columns) row.push_back(c[i]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Rabi maps

RabiMap rabi_map(const SystemParams& params, RabiKind kind, double amplitude,
                 std::span<const double> detuning_grid, std::span<const double> time_grid,
                 unsigned workers, const PropagationOptions& options) {
  params.validate();
  if (detuning_grid.empty() || time_grid.empty()) fail(ErrorCode::usage, "Rabi map grids must be nonempty");
  const double t_max = *std::max_element(time_grid.begin(), time_grid.end());
  if (!(t_max > 0)) fail(ErrorCode::usage, "Rabi map needs a positive time");

  RabiMap map;
  map.kind = kind;
  map.detunings = to_vector(detuning_grid);
  map.times = to_vector(time_grid);
  map.p0.resize(static_cast<Eigen::Index>(detuning_grid.size()),
                static_cast<Eigen::Index>(time_grid.size()));
  const StateVector vacuum = StateVector::fock(0, params.dim);

  parallel_for(detuning_grid.size(), workers, [&](std::size_t i) {
    Segment seg;
    seg.duration = t_max;
    seg.detuning = Envelope::constant(detuning_grid[i]);
    if (kind == RabiKind::drive) {
      seg.drive = Envelope::constant(amplitude);
    } else {
      seg.pump = Envelope::constant(amplitude);
    }
    const PulseSchedule schedule({seg});
    const Trajectory traj = propagate(params, schedule, vacuum, time_grid, options);
    const auto p = traj.population(vacuum);
    for (std::size_t j = 0; j < p.size(); ++j) {
      map.p0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[j];
    }
  });
  return map;
}

// ---------------------------------------------------------------------------
// Relaxation

namespace {

Matrix map_fock_pair(const SystemParams& params, const PulseSchedule& ramp,
                     const PropagationOptions& options) {
  SystemParams closed = params;
  closed.kappa = 0;
  Matrix y = Matrix::Zero(params.dim, 2);
  y(0, 0) = 1.0;
  y(1, 1) = 1.0;
  const double end = ramp.total_duration();
  Matrix out;
  integrate_schedule(closed, ramp, y, false, std::span<const double>(&end, 1),
                     options.integrator, [&](std::size_t, double, const Matrix& m) { out = m; });
  return out;
}

}  // namespace

MappingCalibration calibrate_mapping(const SystemParams& params, const PulseSchedule& ramp,
                                     const CatBasis& basis, const PropagationOptions& options) {
  params.validate();
  ramp.validate();
  const Matrix mapped = map_fock_pair(params, ramp, options);
  const cplx even = basis.plus_cat.amplitudes().dot(mapped.col(0));
  const cplx odd = basis.minus_cat.amplitudes().dot(mapped.col(1));
  MappingCalibration cal;
  cal.fidelity_even = std::norm(even);
  cal.fidelity_odd = std::norm(odd);
  cal.phase_even = std::arg(even);
  cal.phase_odd = std::arg(odd);
  return cal;
}

RelaxationResult relaxation_experiment(const SystemParams& params, double kappa,
                                       std::span<const double> wait_grid,
                                       const RelaxationOptions& options) {
  params.validate();
  if (kappa < 0) fail(ErrorCode::usage, "loss rate must be non-negative");
  if (wait_grid.empty()) fail(ErrorCode::usage, "wait grid must be nonempty");
  for (std::size_t i = 0; i < wait_grid.size(); ++i) {
    if (wait_grid[i] < 0 || (i > 0 && !(wait_grid[i] > wait_grid[i - 1]))) {
      fail(ErrorCode::usage, "wait grid must be non-negative and strictly increasing");
    }
  }

  RelaxationResult result{to_vector(wait_grid), {}, cat_basis_from_model(params), {}};
  const CatBasis& basis = result.basis;
  const Vector& p = basis.plus_cat.amplitudes();
  const Vector& m = basis.minus_cat.amplitudes();
  const cplx i1{0, 1};
  const std::vector<std::string> names{"+Cat", "+Coh", "+iCat"};
  // Coefficient of the odd component in each prepared state.
  const std::vector<cplx> odd_coeff{0.0, 1.0, i1};

  SystemParams lossy = params;
  lossy.kappa = kappa;
  const double hold = wait_grid.back();

  PulseSchedule schedule;
  double offset = 0;
  MappingCalibration cal;
  Matrix mapped;
  if (options.preparation == Preparation::ramp) {
    schedule = ramp_schedule(params.pump, options.tau_ramp, options.counterdiabatic,
                             params.detuning, options.cd_quadrature);
    mapped = map_fock_pair(params, schedule, options.propagation);
    cal = calibrate_mapping(params, schedule, basis, options.propagation);
    offset = options.tau_ramp;
  }
  if (hold > 0) schedule.append(hold_segment(hold, params.pump, params.detuning));
  if (schedule.empty()) schedule.append(hold_segment(1e-9, params.pump, params.detuning));

  std::vector<double> samples(wait_grid.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = offset + wait_grid[i];

  result.series.resize(names.size());
  result.preparation_fidelity.assign(names.size(), 1.0);
  parallel_for(names.size(), options.workers, [&](std::size_t s) {
    const cplx c = odd_coeff[s];
    const double norm = s == 0 ? 1.0 : std::sqrt(0.5);
    const Vector target = norm * (p + c * m);
    Vector initial;
    if (options.preparation == Preparation::ideal) {
      initial = target;
    } else {
      // Undo the odd-sector phase the ramp adds so the mapped state lands on target.
      const cplx pre = c * std::polar(1.0, -cal.relative_phase());
      initial = Vector::Zero(params.dim);
      initial[0] = norm;
      initial[1] = norm * pre;
      const Vector prepared = mapped.col(0) * initial[0] + mapped.col(1) * initial[1];
      result.preparation_fidelity[s] = std::norm(target.dot(prepared));
    }
    initial.normalize();
    PropagationOptions popt = options.propagation;
    popt.force_density = true;
    const Trajectory traj = propagate(lossy, schedule, StateVector(initial), samples, popt);
    RelaxationSeries series;
    series.initial = names[s];
    for (std::size_t i = 0; i < traj.size(); ++i) {
      series.populations.push_back(cardinal_populations(traj.density(i), basis));
    }
    result.series[s] = std::move(series);
  });
  return result;
}

}  // namespace kpo
