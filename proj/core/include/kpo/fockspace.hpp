#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace kpo {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Dense operator on the truncated Fock space. Dimension is rows() == cols().
using OperatorMatrix = Eigen::MatrixXcd;

/// Pure state in a truncated Fock basis.
///
/// Normalized on construction to 1e-10 unless built through `unnormalized`,
/// in which case `is_normalized()` reports false and callers own the meaning
/// of the norm (e.g. projections used for leakage bookkeeping).
class StateVector {
 public:
  explicit StateVector(Vector amplitudes);

  static StateVector unnormalized(Vector amplitudes);
  /// |n> in a space of dimension `dim`.
  static StateVector fock(int n, int dim);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  bool is_normalized() const { return normalized_; }
  cplx operator[](int n) const { return amplitudes_[n]; }

  /// <this|other>
  cplx inner(const StateVector& other) const { return amplitudes_.dot(other.amplitudes_); }
  double expectation(const OperatorMatrix& op) const;

 private:
  StateVector(Vector amplitudes, bool normalized);

  Vector amplitudes_;
  bool normalized_ = true;
};

/// Density matrix in a truncated Fock basis.
///
/// Construction checks hermiticity (1e-10) and unit trace (1e-8).
/// `check_positive` runs the eigenvalue floor check separately since it
/// costs a diagonalization.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);

  static DensityMatrix pure(const StateVector& psi);
  /// Skip the trace check; hermiticity is still enforced.
  static DensityMatrix unnormalized(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  cplx operator()(int i, int j) const { return entries_(i, j); }

  double trace() const { return entries_.trace().real(); }
  double purity() const;
  double expectation(const OperatorMatrix& op) const;
  double min_eigenvalue() const;
  /// Throws if any eigenvalue is below -tol.
  void check_positive(double tol = 1e-8) const;

 private:
  DensityMatrix(Matrix entries, bool check_trace);

  Matrix entries_;
};

struct LadderOps {
  OperatorMatrix annihilation;
  OperatorMatrix creation;
};

/// a[n-1, n] = sqrt(n); creation = a^dagger.
LadderOps ladder_ops(int dim);
OperatorMatrix number_op(int dim);
/// diag((-1)^n)
OperatorMatrix parity_op(int dim);

/// Coherent state with log-space factorials, renormalized after truncation.
/// Requires |alpha|^2 <= dim / 4.
StateVector coherent_state(cplx alpha, int dim);

enum class Parity { even, odd };

/// (|alpha> +- |-alpha>) normalized; exact parity sector by construction.
/// The alpha -> 0 limit is |0> (even) or |1> (odd).
StateVector cat_state(cplx alpha, Parity parity, int dim);

/// exp(alpha a^dagger - alpha^* a) on the truncated space.
OperatorMatrix displacement_op(cplx alpha, int dim);

/// Logical basis of the cat qubit plus the fitted effective cat size.
struct CatBasis {
  StateVector plus_cat;
  StateVector minus_cat;
  cplx alpha_eff;

  /// Analytic cats |+-Cat(alpha)>.
  static CatBasis analytic(cplx alpha, int dim);

  int dim() const { return plus_cat.dim(); }
  StateVector plus_coh() const;
  StateVector minus_coh() const;
  StateVector plus_icat() const;
  StateVector minus_icat() const;

  /// Max deviation of the Gram matrix from identity.
  double orthonormality_error() const;
};

struct CardinalPopulations {
  double plus_cat = 0;
  double minus_cat = 0;
  double plus_coh = 0;
  double minus_coh = 0;
  double plus_icat = 0;
  double minus_icat = 0;

  double z_sum() const { return plus_cat + minus_cat; }
  double z_diff() const { return plus_cat - minus_cat; }
  double x_sum() const { return plus_coh + minus_coh; }
  double x_diff() const { return plus_coh - minus_coh; }
  double y_sum() const { return plus_icat + minus_icat; }
  double y_diff() const { return plus_icat - minus_icat; }
};

/// <c|rho|c> for the six cardinal states of the cat Bloch sphere.
CardinalPopulations cardinal_populations(const DensityMatrix& rho, const CatBasis& basis);

/// Throws ErrorCode::basis unless the two basis states are orthonormal within tol.
void check_orthonormal(const CatBasis& basis, double tol);

/// log(n!) via lgamma.
double log_factorial(int n);

}  // namespace kpo
