#include "kpo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "kpo/error.hpp"
#include "kpo/model.hpp"
#include "kpo/parallel.hpp"

namespace kpo {

namespace {

struct Level {
  double energy;
  int parity;
  Vector vec;
};

std::vector<Level> sector_levels(const OperatorMatrix& h, int parity) {
  const int dim = static_cast<int>(h.rows());
  std::vector<int> idx;
  for (int n = (parity > 0 ? 0 : 1); n < dim; n += 2) idx.push_back(n);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Matrix block(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) block(i, j) = h(idx[i], idx[j]);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(block);
  std::vector<Level> out;
  for (Eigen::Index k = 0; k < m; ++k) {
    Vector v = Vector::Zero(dim);
    for (Eigen::Index i = 0; i < m; ++i) v[idx[i]] = es.eigenvectors()(i, k);
    out.push_back({es.eigenvalues()[k], parity, std::move(v)});
  }
  return out;
}

QuasiSpectrum diagonalize(double kerr, double pump, double detuning, int dim) {
  const OperatorMatrix h = static_hamiltonian(kerr, pump, detuning, dim);
  auto levels = sector_levels(h, +1);
  auto odd = sector_levels(h, -1);
  levels.insert(levels.end(), std::make_move_iterator(odd.begin()), std::make_move_iterator(odd.end()));
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.energy > b.energy; });

  QuasiSpectrum s;
  s.energies.resize(dim);
  s.eigenvectors.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    s.energies[i] = levels[static_cast<std::size_t>(i)].energy;
    s.parities.push_back(levels[static_cast<std::size_t>(i)].parity);
    s.eigenvectors.col(i) = levels[static_cast<std::size_t>(i)].vec;
  }

  const double alpha_c = classical_cat_amplitude(kerr, pump, detuning);
  // The analytic reference needs |alpha|^2 <= dim/4; beyond that the
  // truncation is too small for a cat of this size anyway.
  const CatBasis ref = CatBasis::analytic(alpha_c, dim);
  double best_even = -1;
  double best_odd = -1;
  for (int i = 0; i < dim; ++i) {
    const Vector& v = s.eigenvectors.col(i);
    if (s.parities[static_cast<std::size_t>(i)] > 0) {
      const double ov = std::abs(ref.plus_cat.amplitudes().dot(v));
      if (ov > best_even) {
        best_even = ov;
        s.even_qubit = i;
      }
    } else {
      const double ov = std::abs(ref.minus_cat.amplitudes().dot(v));
      if (ov > best_odd) {
        best_odd = ov;
        s.odd_qubit = i;
      }
    }
  }
  return s;
}

}  // namespace

QuasiSpectrum quasienergies(double kerr, double pump, double detuning, int dim,
                            const SpectrumOptions& options) {
  if (!(kerr > 0)) fail(ErrorCode::usage, "Kerr coefficient must be positive");
  if (dim < 2) fail(ErrorCode::invalid_dimension, "Fock dimension must be >= 2");
  QuasiSpectrum s = diagonalize(kerr, pump, detuning, dim);
  if (options.check_convergence) {
    const QuasiSpectrum big = diagonalize(kerr, pump, detuning, dim + 10);
    const int levels = std::min(options.levels_checked, dim);
    const double shift =
        (s.energies.head(levels) - big.energies.head(levels)).cwiseAbs().maxCoeff();
    if (shift > options.convergence_tol * kerr) {
      Error err(ErrorCode::truncation,
                "top quasienergies move by " + std::to_string(shift / kerr) +
                    " K when the dimension grows from " + std::to_string(dim) + " to " +
                    std::to_string(dim + 10));
      err.required_dim = dim + 10;
      throw err;
    }
  }
  return s;
}

Eigen::MatrixXd splitting_surface(double kerr, std::span<const double> p_over_k,
                                  std::span<const double> delta_over_k, int dim, unsigned workers,
                                  const SpectrumOptions& options) {
  if (p_over_k.empty() || delta_over_k.empty()) fail(ErrorCode::usage, "surface grids must be nonempty");
  const auto rows = static_cast<Eigen::Index>(p_over_k.size());
  const auto cols = static_cast<Eigen::Index>(delta_over_k.size());
  Eigen::MatrixXd out(rows, cols);
  parallel_for(p_over_k.size() * delta_over_k.size(), workers, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k / delta_over_k.size());
    const auto j = static_cast<Eigen::Index>(k % delta_over_k.size());
    const auto s = quasienergies(kerr, kerr * p_over_k[static_cast<std::size_t>(i)],
                                 kerr * delta_over_k[static_cast<std::size_t>(j)], dim, options);
    out(i, j) = s.splitting() / kerr;
  });
  return out;
}

double energy_gap(double kerr, double pump, double detuning, int dim, const SpectrumOptions& options) {
  const auto s = quasienergies(kerr, pump, detuning, dim, options);
  double gap = INFINITY;
  for (int i = 0; i < dim; ++i) {
    if (i == s.even_qubit || i == s.odd_qubit) continue;
    for (int q : {s.even_qubit, s.odd_qubit}) {
      gap = std::min(gap, std::abs(s.energies[i] - s.energies[q]));
    }
  }
  return gap;
}

// ---------------------------------------------------------------------------
// Classical limit

double classical_energy(cplx alpha, double kerr, double pump, double detuning) {
  const double r2 = std::norm(alpha);
  return detuning * r2 - 0.5 * kerr * r2 * r2 + pump * (alpha * alpha).real();
}

std::string_view to_string(StationaryKind kind) {
  switch (kind) {
    case StationaryKind::minimum: return "minimum";
    case StationaryKind::maximum: return "maximum";
    case StationaryKind::saddle: return "saddle";
    case StationaryKind::degenerate: return "degenerate";
  }
  return "degenerate";
}

namespace {

struct Derivs {
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
};

Derivs derivatives(double x, double y, double kerr, double pump, double detuning) {
  const double r2 = x * x + y * y;
  Derivs d;
  d.grad << 2.0 * x * (detuning + pump - kerr * r2), 2.0 * y * (detuning - pump - kerr * r2);
  d.hess(0, 0) = 2.0 * (detuning + pump) - 2.0 * kerr * (r2 + 2.0 * x * x);
  d.hess(1, 1) = 2.0 * (detuning - pump) - 2.0 * kerr * (r2 + 2.0 * y * y);
  d.hess(0, 1) = d.hess(1, 0) = -4.0 * kerr * x * y;
  return d;
}

}  // namespace

std::vector<StationaryPoint> stationary_points(double kerr, double pump, double detuning) {
  if (!(kerr > 0)) fail(ErrorCode::usage, "Kerr coefficient must be positive");
  const double radius = 1.5 * std::sqrt((std::abs(pump) + std::abs(detuning)) / kerr) + 1.0;
  const double energy_scale =
      std::max({std::abs(detuning) * radius * radius, 0.5 * kerr * std::pow(radius, 4),
                std::abs(pump) * radius * radius, 1e-300});
  constexpr int kSeeds = 13;
  std::vector<StationaryPoint> found;
  for (int i = 0; i < kSeeds; ++i) {
    for (int j = 0; j < kSeeds; ++j) {
      double x = -radius + 2.0 * radius * i / (kSeeds - 1);
      double y = -radius + 2.0 * radius * j / (kSeeds - 1);
      bool ok = false;
      for (int it = 0; it < 100; ++it) {
        const auto d = derivatives(x, y, kerr, pump, detuning);
        if (d.grad.norm() < 1e-13 * energy_scale) {
          ok = true;
          break;
        }
        const Eigen::Vector2d step = d.hess.fullPivLu().solve(-d.grad);
        if (!step.allFinite()) break;
        x += step[0];
        y += step[1];
        if (std::abs(x) > 10 * radius || std::abs(y) > 10 * radius) break;
      }
      if (!ok) continue;
      // Polish: the zero set is exact on the axes, so snap tiny components.
      if (std::abs(x) < 1e-12 * radius) x = 0.0;
      if (std::abs(y) < 1e-12 * radius) y = 0.0;
      const cplx a{x, y};
      const bool dup = std::any_of(found.begin(), found.end(),
                                   [&](const StationaryPoint& p) { return std::abs(p.alpha - a) < 1e-6; });
      if (dup) continue;
      const auto d = derivatives(x, y, kerr, pump, detuning);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(d.hess);
      const double lo = es.eigenvalues()[0];
      const double hi = es.eigenvalues()[1];
      const double tol = 1e-9 * (std::abs(lo) + std::abs(hi) + kerr);
      StationaryKind kind = StationaryKind::degenerate;
      if (lo > tol) kind = StationaryKind::minimum;
      else if (hi < -tol) kind = StationaryKind::maximum;
      else if (lo < -tol && hi > tol) kind = StationaryKind::saddle;
      found.push_back({a, classical_energy(a, kerr, pump, detuning), kind});
    }
  }
  if (found.empty()) fail(ErrorCode::numerical, "Newton search found no stationary point");
  std::sort(found.begin(), found.end(), [](const StationaryPoint& a, const StationaryPoint& b) {
    if (a.alpha.real() != b.alpha.real()) return a.alpha.real() < b.alpha.real();
    return a.alpha.imag() < b.alpha.imag();
  });
  return found;
}

ClassicalSurface classical_surface(double kerr, double pump, double detuning,
                                   std::span<const double> re, std::span<const double> im) {
  ClassicalSurface s;
  s.re.assign(re.begin(), re.end());
  s.im.assign(im.begin(), im.end());
  s.energy.resize(static_cast<Eigen::Index>(im.size()), static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < im.size(); ++i) {
    for (std::size_t j = 0; j < re.size(); ++j) {
      s.energy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          classical_energy({re[j], im[i]}, kerr, pump, detuning);
    }
  }
  s.stationary = stationary_points(kerr, pump, detuning);
  return s;
}

}  // namespace kpo
