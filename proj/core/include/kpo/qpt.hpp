#pragma once

#include <array>
#include <string>
#include <string_view>

#include "kpo/dynamics.hpp"
#include "kpo/fockspace.hpp"
#include "kpo/model.hpp"

namespace kpo {

enum class QubitBasisKind { fock, cat };

/// Unnormalized 2x2 block of a full density matrix; trace < 1 is leakage.
struct QubitDensity {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  QubitBasisKind basis = QubitBasisKind::fock;

  double trace() const { return m.trace().real(); }
};

/// Block in (|0>, |1>).
QubitDensity effective_qubit(const DensityMatrix& rho);
/// Block in (|+Cat>, |-Cat>).
QubitDensity effective_qubit(const DensityMatrix& rho, const CatBasis& basis);

/// Operator basis (I, X, -iY, Z) used to index chi.
const std::array<Eigen::Matrix2cd, 4>& chi_basis();

struct ProcessMatrix {
  Eigen::Matrix4cd chi = Eigen::Matrix4cd::Zero();
  /// max |chi - chi^dagger| before Hermitization.
  double antihermitian_residual = 0;
  /// max |sum_mn chi_mn E_n^dagger E_m - I|, zero for trace-preserving maps.
  double trace_residual = 0;
};

/// Process matrix from four input/output pairs: E(rho) = sum_mn chi_mn E_m rho E_n^dagger.
/// Inputs must span the 2x2 operator space (smallest singular value >= 1e-8).
ProcessMatrix chi_matrix(const std::array<QubitDensity, 4>& inputs, const std::array<QubitDensity, 4>& outputs);

/// Rank-one chi of the unitary channel rho -> U rho U^dagger.
ProcessMatrix chi_for_unitary(const Eigen::Matrix2cd& u);

/// Re Tr[chi_ideal chi] with chi_ideal scaled to unit trace.
double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& ideal);

/// Process matrix of rho -> U^dagger E(rho) U, so that E = error o U. Its
/// diagonal holds the weights of the identity and the X, Y and Z errors.
ProcessMatrix error_process(const ProcessMatrix& chi, const Eigen::Matrix2cd& ideal);

/// exp(-i theta sigma / 2)
Eigen::Matrix2cd rotation_x(double theta);
Eigen::Matrix2cd rotation_z(double theta);

/// Standard preparation set |0>, |1>, |+>, |+i> as 2x2 density matrices.
std::array<Eigen::Matrix2cd, 4> standard_inputs();

// ---------------------------------------------------------------------------
// Experiments

enum class QptKind { mapping, x_half, z_half };
std::string_view to_string(QptKind kind);
QptKind qpt_kind_from_string(std::string_view name);

struct QptOptions {
  double tau_ramp = 0.3;  ///< us
  bool counterdiabatic = true;
  double cd_quadrature = 0;
  /// Resonant drive amplitude for X/2 (rad/us); 0 uses params.drive.
  double x_drive = 0;
  /// X/2 duration (us); 0 calibrates it.
  double x_duration = 0;
  double tau_z = 0.5;  ///< us
  /// Chirp depth for Z/2 (rad/us); 0 calibrates it.
  double z_delta_peak = 0;
  /// Standard deviation of a static detuning offset averaged by Gauss-Hermite quadrature.
  double detuning_jitter = 0;
  int jitter_nodes = 7;
  unsigned workers = 0;
  PropagationOptions propagation;
};

struct QptResult {
  QptKind kind = QptKind::mapping;
  ProcessMatrix chi;
  ProcessMatrix ideal;
  Eigen::Matrix2cd ideal_unitary = Eigen::Matrix2cd::Identity();
  double fidelity = 0;
  std::array<QubitDensity, 4> inputs;
  std::array<QubitDensity, 4> outputs;
  double gate_duration = 0;        ///< us
  double calibrated_value = 0;     ///< X/2 duration (us) or Z/2 chirp depth (rad/us)
  double frame_phase = 0;          ///< virtual-Z correction applied to outputs (rad)
  double mean_output_trace = 0;    ///< 1 - leakage
};

/// Runs one process-tomography experiment.
///   mapping: Fock inputs through the pump ramp; outputs in the cat basis.
///     The even/odd phase of the noiseless ramp is removed as a virtual Z.
///   x_half: resonant drive on cat inputs, duration calibrated on |+Cat>.
///   z_half: pump chirp of length tau_z, depth calibrated for +pi/2.
/// Gate outputs are expressed in the frame that co-rotates with the static
/// qubit splitting, so free precession is not counted as error.
QptResult qpt_experiment(QptKind kind, const SystemParams& params, double kappa, const QptOptions& options = {});

/// Duration (us) of the resonant drive that best maps |+Cat> to R_x(pi/2)|+Cat>.
double calibrate_x_half(const SystemParams& params, const CatBasis& basis, double drive,
                        const PropagationOptions& options = {});
/// Chirp depth (rad/us) that adds a +pi/2 z rotation over tau_z.
double calibrate_z_half(const SystemParams& params, const CatBasis& basis, double tau_z,
                        const PropagationOptions& options = {});

// ---------------------------------------------------------------------------
// I/O

std::string chi_to_json(const ProcessMatrix& chi);
ProcessMatrix chi_from_json(const std::string& text);
std::string chi_to_csv(const ProcessMatrix& chi);
std::string chi_to_svg(const ProcessMatrix& chi, const std::string& title);

}  // namespace kpo
