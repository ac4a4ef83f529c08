#pragma once

#include <string>
#include <vector>

#include "kpo/dynamics.hpp"
#include "kpo/fockspace.hpp"
#include "kpo/model.hpp"

namespace kpo {

/// Uniform rectangular grid over Re(alpha) x Im(alpha).
struct PhaseGrid {
  double re_min = -3, re_max = 3;
  int re_count = 81;
  double im_min = -3, im_max = 3;
  int im_count = 81;

  static PhaseGrid square(double extent, int count) { return {-extent, extent, count, -extent, extent, count}; }

  double re(int j) const;
  double im(int i) const;
  double re_step() const { return (re_max - re_min) / (re_count - 1); }
  double im_step() const { return (im_max - im_min) / (im_count - 1); }
  /// Largest |alpha| on the grid.
  double max_radius() const;
  /// Row-major points, row = Im index.
  std::vector<cplx> points() const;
  void validate() const;
};

struct WignerMap {
  PhaseGrid grid;
  Eigen::MatrixXd values;  ///< rows = Im index, cols = Re index
  std::string source = "ideal";
  bool kerr_corrected = false;

  /// Riemann sum of W over the grid cells.
  double integral() const;
};

/// Matrix of the displaced parity operator D(alpha) Pi D(alpha)^dagger in the
/// Fock basis. Exact matrix elements of the infinite-dimensional operator
/// (no truncated exponential), from a recurrence on D(2 alpha).
Matrix displaced_parity(cplx alpha, int dim);

/// W(alpha) = (2/pi) Tr[D(alpha) Pi D(alpha)^dagger rho] on every grid point.
/// The grid must satisfy max |alpha| <= sqrt(dim).
WignerMap wigner_ideal(const DensityMatrix& rho, const PhaseGrid& grid, unsigned workers = 0);

/// Single point of the ideal map.
double wigner_at(const DensityMatrix& rho, cplx alpha);

// ---------------------------------------------------------------------------
// Simulated displaced-parity measurement

struct TomographyPulse {
  double duration = 0.02;     ///< us, rectangular drive
  double max_amplitude = 0;   ///< rad/us bound on beta; 0 = unbounded
  double pre_delay = 0;       ///< us of free evolution before the pulse
  bool pump_on = false;       ///< keep params.pump on during delay and pulse
};

struct MeasurementRecord {
  std::vector<cplx> points;
  std::vector<double> parity;  ///< <Pi> after each displacement
  TomographyPulse pulse;
  /// Displacement produced per unit drive amplitude by the pulse (computed, not assumed).
  cplx calibration{0, 0};

  /// Parity values scaled to Wigner units, (2/pi) <Pi>.
  std::vector<double> wigner() const;
};

/// For each point the state is propagated under the full Hamiltonian with a
/// rectangular drive resonant with the oscillator, whose amplitude and phase
/// are chosen from the linear-response calibration to displace by -alpha_i;
/// the recorded value is the parity afterwards.
MeasurementRecord simulate_ld_tomography(const SystemParams& params, const DensityMatrix& rho,
                                         const std::vector<cplx>& points, const TomographyPulse& pulse,
                                         unsigned workers = 0, const PropagationOptions& options = {});

/// Map of a record taken on a full grid.
WignerMap record_to_map(const MeasurementRecord& record, const PhaseGrid& grid);

/// rho -> U^dagger rho U with U = exp(-i (Delta n - (K/2) a+a+aa) tau).
DensityMatrix kerr_correct(const DensityMatrix& rho, double kerr, double detuning, double tau_corr);

// ---------------------------------------------------------------------------
// Reconstruction

struct ReconstructionOptions {
  int max_iterations = 5000;
  double tolerance = 1e-9;
  double max_condition = 1e6;
};

struct Reconstruction {
  DensityMatrix rho;
  int iterations = 0;
  double condition = 0;
  double residual_norm = 0;  ///< || A x - w || for the returned state
};

/// Least-squares fit of W(alpha_i) over Hermitian unit-trace matrices,
/// followed by alternating projections onto the PSD cone in the metric of
/// the least-squares problem (ADMM), until both the iterate change and the
/// constraint gap fall below the tolerance.
Reconstruction reconstruct_density(const MeasurementRecord& record, int dim,
                                   const ReconstructionOptions& options = {});

/// Euclidean projection of a Hermitian matrix onto {rho >= 0, Tr rho = 1}.
Matrix project_to_density(const Matrix& hermitian);

/// |alpha| at the maximum of W, refined by a quadratic fit on the 3x3
/// neighbourhood. Throws ErrorCode::grid_extent if the maximum sits on the edge.
double cat_size(const WignerMap& map);

// ---------------------------------------------------------------------------
// I/O

std::string wigner_to_csv(const WignerMap& map);
WignerMap wigner_from_csv(const std::string& text);
std::string record_to_jsonl(const MeasurementRecord& record);
MeasurementRecord record_from_jsonl(const std::string& text);

}  // namespace kpo
