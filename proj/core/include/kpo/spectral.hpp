#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "kpo/fockspace.hpp"

namespace kpo {

/// Eigen-decomposition of the static rotating-frame Hamiltonian (beta = 0).
struct QuasiSpectrum {
  Eigen::VectorXd energies;  ///< rad/us, sorted descending
  std::vector<int> parities;  ///< +1 or -1 per level
  Matrix eigenvectors;        ///< column i belongs to energies[i]
  int even_qubit = -1;        ///< index of E_even^q
  int odd_qubit = -1;         ///< index of E_odd^q

  /// E_odd^q - E_even^q (rad/us)
  double splitting() const { return energies[odd_qubit] - energies[even_qubit]; }
};

struct SpectrumOptions {
  /// Compare the top levels against dim + 10 and fail if they move more than
  /// `convergence_tol` * K.
  bool check_convergence = true;
  int levels_checked = 6;
  double convergence_tol = 1e-6;
};

/// Each parity sector is diagonalized separately, so parity labels are exact
/// even when levels of opposite parity are degenerate. The qubit levels are
/// the ones with the largest overlap onto the analytic cats at
/// alpha_c = sqrt((P + Delta)/K).
QuasiSpectrum quasienergies(double kerr, double pump, double detuning, int dim,
                            const SpectrumOptions& options = {});

/// (E_odd^q - E_even^q) / K with rows indexed by P/K and columns by Delta/K.
Eigen::MatrixXd splitting_surface(double kerr, std::span<const double> p_over_k,
                                  std::span<const double> delta_over_k, int dim,
                                  unsigned workers = 0, const SpectrumOptions& options = {});

/// Distance from the qubit pair to the nearest other quasienergy level (rad/us).
double energy_gap(double kerr, double pump, double detuning, int dim,
                  const SpectrumOptions& options = {});

// ---------------------------------------------------------------------------
// Classical limit

/// Delta |alpha|^2 - (K/2) |alpha|^4 + (P/2)(alpha^2 + alpha*^2)
double classical_energy(cplx alpha, double kerr, double pump, double detuning);

enum class StationaryKind { minimum, maximum, saddle, degenerate };
std::string_view to_string(StationaryKind kind);

struct StationaryPoint {
  cplx alpha;
  double energy = 0;
  StationaryKind kind = StationaryKind::degenerate;
};

/// Newton iterations from a grid of seeds, deduplicated at 1e-6 and
/// classified by the real Hessian in (Re alpha, Im alpha). Sorted by
/// (Re alpha, Im alpha). Throws ErrorCode::numerical if no seed converges.
std::vector<StationaryPoint> stationary_points(double kerr, double pump, double detuning);

struct ClassicalSurface {
  std::vector<double> re;
  std::vector<double> im;
  Eigen::MatrixXd energy;  ///< rows = im index, cols = re index
  std::vector<StationaryPoint> stationary;
};
ClassicalSurface classical_surface(double kerr, double pump, double detuning,
                                   std::span<const double> re, std::span<const double> im);

}  // namespace kpo
