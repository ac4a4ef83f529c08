#include "kpo/fockspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "kpo/error.hpp"
#include "kpo/linalg.hpp"

namespace kpo {

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kHermTol = 1e-10;
constexpr double kTraceTol = 1e-8;

void require_dim(int dim) {
  if (dim < 2) {
    fail(ErrorCode::invalid_dimension, "Fock dimension must be >= 2, got " + std::to_string(dim));
  }
}

void require_truncation_safe(cplx alpha, int dim) {
  const double n_mean = std::norm(alpha);
  if (n_mean > dim / 4.0) {
    Error err(ErrorCode::truncation,
              "|alpha|^2 = " + std::to_string(n_mean) + " exceeds dim/4 for dim = " +
                  std::to_string(dim));
    err.required_dim = static_cast<int>(std::ceil(4.0 * n_mean));
    throw err;
  }
}

// Amplitudes alpha^n / sqrt(n!) for the n selected by `keep`, scaled so the
// largest magnitude is 1. Well defined at alpha = 0, where the lowest kept n
// survives.
template <typename Keep>
Vector scaled_power_series(cplx alpha, int dim, Keep keep) {
  Vector v = Vector::Zero(dim);
  const double mag = std::abs(alpha);
  const cplx phase = mag > 0 ? alpha / mag : cplx{1.0, 0.0};
  if (mag == 0.0) {
    for (int n = 0; n < dim; ++n) {
      if (keep(n)) {
        v[n] = 1.0;
        return v;
      }
    }
    return v;
  }
  const double log_mag = std::log(mag);
  double log_max = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < dim; ++n) {
    if (keep(n)) log_max = std::max(log_max, n * log_mag - 0.5 * log_factorial(n));
  }
  cplx phase_n{1.0, 0.0};
  for (int n = 0; n < dim; ++n) {
    if (keep(n)) {
      v[n] = phase_n * std::exp(n * log_mag - 0.5 * log_factorial(n) - log_max);
    }
    phase_n *= phase;
  }
  return v;
}

}  // namespace

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(Vector amplitudes, bool normalized)
    : amplitudes_(std::move(amplitudes)), normalized_(normalized) {
  require_dim(static_cast<int>(amplitudes_.size()));
}

StateVector::StateVector(Vector amplitudes) : StateVector(std::move(amplitudes), true) {
  const double n = amplitudes_.norm();
  if (std::abs(n - 1.0) > kNormTol) {
    fail(ErrorCode::usage, "state vector norm " + std::to_string(n) + " is not 1");
  }
}

StateVector StateVector::unnormalized(Vector amplitudes) {
  return StateVector(std::move(amplitudes), false);
}

StateVector StateVector::fock(int n, int dim) {
  require_dim(dim);
  if (n < 0 || n >= dim) {
    fail(ErrorCode::truncation, "Fock level " + std::to_string(n) + " outside dimension " +
                                    std::to_string(dim));
  }
  Vector v = Vector::Zero(dim);
  v[n] = 1.0;
  return StateVector(std::move(v));
}

double StateVector::expectation(const OperatorMatrix& op) const {
  return amplitudes_.dot(op * amplitudes_).real();
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Matrix entries, bool check_trace) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    fail(ErrorCode::invalid_dimension, "density matrix must be square");
  }
  require_dim(static_cast<int>(entries_.rows()));
  const double herm = hermiticity_error(entries_);
  if (herm > kHermTol) {
    fail(ErrorCode::usage, "density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  if (check_trace && std::abs(trace() - 1.0) > kTraceTol) {
    fail(ErrorCode::usage, "density matrix trace " + std::to_string(trace()) + " is not 1");
  }
}

DensityMatrix::DensityMatrix(Matrix entries) : DensityMatrix(std::move(entries), true) {}

DensityMatrix DensityMatrix::unnormalized(Matrix entries) {
  return DensityMatrix(std::move(entries), false);
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  Matrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
  return psi.is_normalized() ? DensityMatrix(std::move(rho)) : unnormalized(std::move(rho));
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

double DensityMatrix::expectation(const OperatorMatrix& op) const {
  return (op * entries_).trace().real();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::check_positive(double tol) const {
  const double lo = min_eigenvalue();
  if (lo < -tol) {
    fail(ErrorCode::numerical, "density matrix has eigenvalue " + std::to_string(lo));
  }
}

// ---------------------------------------------------------------------------
// Operators

LadderOps ladder_ops(int dim) {
  require_dim(dim);
  OperatorMatrix a = OperatorMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  OperatorMatrix ad = a.adjoint();
  return {std::move(a), std::move(ad)};
}

OperatorMatrix number_op(int dim) {
  require_dim(dim);
  return Eigen::VectorXd::LinSpaced(dim, 0.0, dim - 1.0).cast<cplx>().asDiagonal();
}

OperatorMatrix parity_op(int dim) {
  require_dim(dim);
  Vector d(dim);
  for (int n = 0; n < dim; ++n) d[n] = (n % 2 == 0) ? 1.0 : -1.0;
  return d.asDiagonal();
}

StateVector coherent_state(cplx alpha, int dim) {
  require_dim(dim);
  require_truncation_safe(alpha, dim);
  Vector v = Vector::Zero(dim);
  const double mag = std::abs(alpha);
  const cplx phase = mag > 0 ? alpha / mag : cplx{1.0, 0.0};
  cplx phase_n{1.0, 0.0};
  for (int n = 0; n < dim; ++n) {
    const double log_c = -0.5 * mag * mag +
                         (n == 0 ? 0.0 : n * std::log(mag)) - 0.5 * log_factorial(n);
    v[n] = (mag == 0.0 && n > 0) ? cplx{} : phase_n * std::exp(log_c);
    phase_n *= phase;
  }
  const double norm = v.norm();
  if (std::abs(norm - 1.0) > 1e-8) {
    spdlog::debug("coherent_state: truncation renormalization {:.3e} (alpha = {}{:+}i, dim = {})",
                  1.0 - norm, alpha.real(), alpha.imag(), dim);
  }
  v /= norm;
  return StateVector(std::move(v));
}

StateVector cat_state(cplx alpha, Parity parity, int dim) {
  require_dim(dim);
  require_truncation_safe(alpha, dim);
  const int want = parity == Parity::even ? 0 : 1;
  Vector v = scaled_power_series(alpha, dim, [want](int n) { return n % 2 == want; });
  v.normalize();
  return StateVector(std::move(v));
}

OperatorMatrix displacement_op(cplx alpha, int dim) {
  require_dim(dim);
  require_truncation_safe(alpha, dim);
  if (alpha == cplx{}) return OperatorMatrix::Identity(dim, dim);
  const auto ops = ladder_ops(dim);
  const OperatorMatrix generator = alpha * ops.creation - std::conj(alpha) * ops.annihilation;
  return expm(generator);
}

// ---------------------------------------------------------------------------
// Cat basis and cardinals

CatBasis CatBasis::analytic(cplx alpha, int dim) {
  return {cat_state(alpha, Parity::even, dim), cat_state(alpha, Parity::odd, dim), alpha};
}

namespace {
StateVector combine(const StateVector& p, const StateVector& m, cplx coeff) {
  Vector v = (p.amplitudes() + coeff * m.amplitudes()) / std::sqrt(2.0);
  return StateVector::unnormalized(std::move(v));
}
}  // namespace

StateVector CatBasis::plus_coh() const { return combine(plus_cat, minus_cat, 1.0); }
StateVector CatBasis::minus_coh() const { return combine(plus_cat, minus_cat, -1.0); }
StateVector CatBasis::plus_icat() const { return combine(plus_cat, minus_cat, cplx{0, 1}); }
StateVector CatBasis::minus_icat() const { return combine(plus_cat, minus_cat, cplx{0, -1}); }

double CatBasis::orthonormality_error() const {
  const double e1 = std::abs(plus_cat.amplitudes().squaredNorm() - 1.0);
  const double e2 = std::abs(minus_cat.amplitudes().squaredNorm() - 1.0);
  const double e3 = std::abs(plus_cat.inner(minus_cat));
  return std::max({e1, e2, e3});
}

void check_orthonormal(const CatBasis& basis, double tol) {
  const double err = basis.orthonormality_error();
  if (err > tol) {
    fail(ErrorCode::basis, "cat basis is not orthonormal (deviation " + std::to_string(err) + ")");
  }
}

CardinalPopulations cardinal_populations(const DensityMatrix& rho, const CatBasis& basis) {
  check_orthonormal(basis, 1e-6);
  if (basis.dim() != rho.dim()) {
    fail(ErrorCode::invalid_dimension, "cat basis and density matrix dimensions differ");
  }
  // The cardinals are fixed combinations of the 2x2 block in the cat basis,
  // so compute that block once.
  const Vector& p = basis.plus_cat.amplitudes();
  const Vector& m = basis.minus_cat.amplitudes();
  const Matrix& r = rho.matrix();
  const double pp = p.dot(r * p).real();
  const double mm = m.dot(r * m).real();
  const cplx pm = p.dot(r * m);  // <+|rho|->
  CardinalPopulations out;
  out.plus_cat = pp;
  out.minus_cat = mm;
  out.plus_coh = 0.5 * (pp + mm) + pm.real();
  out.minus_coh = 0.5 * (pp + mm) - pm.real();
  // |+-iCat> = (|+> +- i|->)/sqrt2  =>  <c|rho|c> = (pp + mm)/2 +- Re(i <+|rho|->)
  out.plus_icat = 0.5 * (pp + mm) - pm.imag();
  out.minus_icat = 0.5 * (pp + mm) + pm.imag();
  return out;
}

}  // namespace kpo
