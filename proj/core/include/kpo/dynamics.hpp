#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kpo/fockspace.hpp"
#include "kpo/integrator.hpp"
#include "kpo/model.hpp"

namespace kpo {

struct PropagationOptions {
  IntegratorOptions integrator;
  /// Evolve a density matrix even when kappa = 0.
  bool force_density = false;
};

struct TrajectoryMeta {
  double rtol = 0;
  double atol = 0;
  bool lindblad = false;
  IntegratorStats stats;
  /// max over samples of |norm - 1| (pure) or |Tr rho - 1| (mixed).
  double max_norm_deviation = 0;
};

/// Sampled solution of one propagation. Holds either pure states or density
/// matrices; `density(i)` works for both.
class Trajectory {
 public:
  Trajectory(std::vector<double> times, std::vector<StateVector> states, TrajectoryMeta meta);
  Trajectory(std::vector<double> times, std::vector<DensityMatrix> states, TrajectoryMeta meta);

  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  bool mixed() const { return !densities_.empty(); }
  const std::vector<StateVector>& states() const { return states_; }
  const std::vector<DensityMatrix>& densities() const { return densities_; }
  DensityMatrix density(std::size_t i) const;
  const TrajectoryMeta& meta() const { return meta_; }

  /// Re Tr[op rho(t_i)] per sample.
  std::vector<double> expectation(const OperatorMatrix& op) const;
  /// <s|rho(t_i)|s> per sample.
  std::vector<double> population(const StateVector& s) const;

 private:
  std::vector<double> times_;
  std::vector<StateVector> states_;
  std::vector<DensityMatrix> densities_;
  TrajectoryMeta meta_;
};

/// Propagates under the schedule's H(t) (kerr, kappa and dim come from
/// params; pump, detuning and drive come from the schedule). Pure input with
/// kappa > 0 is promoted to a density matrix. Sample times must be sorted and
/// inside [0, total_duration]; each segment is integrated separately so
/// envelope kinks never fall inside a step.
Trajectory propagate(const SystemParams& params, const PulseSchedule& schedule,
                     const StateVector& initial, std::span<const double> sample_times,
                     const PropagationOptions& options = {});
Trajectory propagate(const SystemParams& params, const PulseSchedule& schedule,
                     const DensityMatrix& initial, std::span<const double> sample_times,
                     const PropagationOptions& options = {});

/// Propagator U(t_i) of the closed-system evolution at each sample time.
std::vector<Matrix> propagator(const SystemParams& params, const PulseSchedule& schedule,
                               std::span<const double> sample_times,
                               const PropagationOptions& options = {});

/// Closed-system propagation of a small dense model, e.g. the two-level
/// comparison Hamiltonians. `hamiltonian(t)` must be Hermitian.
std::vector<Vector> propagate_dense(const std::function<Matrix(double)>& hamiltonian,
                                    const Vector& initial, std::span<const double> sample_times,
                                    const IntegratorOptions& options = {});

/// Columns "t_us" then one column per labelled observable.
struct ObservableTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
ObservableTable trajectory_table(const Trajectory& trajectory,
                                 const std::vector<std::pair<std::string, OperatorMatrix>>& observables);

// ---------------------------------------------------------------------------
// Rabi maps

enum class RabiKind { drive, pump };

struct RabiMap {
  RabiKind kind = RabiKind::drive;
  std::vector<double> detunings;  ///< rad/us (Delta_dr for drive, Delta for pump)
  std::vector<double> times;      ///< us
  Eigen::MatrixXd p0;             ///< P(|0>), rows = detuning, cols = time
};

/// Starting in |0>, records P(|0>) for every (detuning, time) pair.
///   drive: drive-frame H with detuning Delta_dr and drive `amplitude`, P = 0.
///   pump:  rotating-frame H with detuning Delta, rectangular pump `amplitude`, beta = 0.
RabiMap rabi_map(const SystemParams& params, RabiKind kind, double amplitude,
                 std::span<const double> detuning_grid, std::span<const double> time_grid,
                 unsigned workers = 0, const PropagationOptions& options = {});

// ---------------------------------------------------------------------------
// Relaxation

enum class Preparation {
  ramp,   ///< map |0>, |1> and their superpositions through the pump ramp
  ideal,  ///< start directly from the model cat-basis states
};

struct RelaxationOptions {
  Preparation preparation = Preparation::ramp;
  double tau_ramp = 0.3;
  bool counterdiabatic = true;
  double cd_quadrature = 0;
  unsigned workers = 0;
  PropagationOptions propagation;
};

struct RelaxationSeries {
  std::string initial;  ///< "+Cat", "+Coh" or "+iCat"
  std::vector<CardinalPopulations> populations;
};

struct RelaxationResult {
  std::vector<double> waits;  ///< us after preparation
  std::vector<RelaxationSeries> series;
  CatBasis basis;
  /// Overlap |<target|prepared>|^2 of each noiseless preparation (1 for ideal).
  std::vector<double> preparation_fidelity;
};

/// Holds each of |+Cat>, |+Coh>, |+iCat> at the static operating point with
/// loss rate `kappa` and records the six cardinal populations at every wait.
RelaxationResult relaxation_experiment(const SystemParams& params, double kappa,
                                       std::span<const double> wait_grid,
                                       const RelaxationOptions& options = {});

/// Relative phase (rad) that the noiseless ramp imprints on the odd sector:
/// arg<-Cat|U|1> - arg<+Cat|U|0>. Used as a virtual-Z frame correction.
struct MappingCalibration {
  double fidelity_even = 0;  ///< |<+Cat|U|0>|^2
  double fidelity_odd = 0;   ///< |<-Cat|U|1>|^2
  double phase_even = 0;
  double phase_odd = 0;
  double relative_phase() const { return phase_odd - phase_even; }
};
MappingCalibration calibrate_mapping(const SystemParams& params, const PulseSchedule& ramp,
                                     const CatBasis& basis, const PropagationOptions& options = {});

}  // namespace kpo
