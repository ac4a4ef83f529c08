#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "kpo/dynamics.hpp"
#include "kpo/error.hpp"
#include "kpo/linalg.hpp"
#include "kpo/tomography.hpp"

namespace {

using kpo::cplx;
constexpr double kPi = 3.14159265358979323846;

kpo::DensityMatrix random_state(std::mt19937_64& rng, int dim, int rank, int support) {
  std::normal_distribution<double> g;
  kpo::Matrix m = kpo::Matrix::Zero(dim, dim);
  for (int r = 0; r < rank; ++r) {
    kpo::Vector v = kpo::Vector::Zero(dim);
    for (int n = 0; n < support; ++n) v[n] = cplx(g(rng), g(rng));
    m += v * v.adjoint();
  }
  return kpo::DensityMatrix(m / m.trace());
}

// Closed-form Wigner function of the even cat (|a> + |-a>) for real a.
double even_cat_wigner(double a, cplx beta) {
  const double norm2 = 1.0 / (2.0 * (1.0 + std::exp(-2 * a * a)));
  const double lobes = std::exp(-2 * std::norm(beta - a)) + std::exp(-2 * std::norm(beta + a));
  const double fringe = 2 * std::exp(-2 * std::norm(beta)) * std::cos(4 * a * beta.imag());
  return 2 / kPi * norm2 * (lobes + fringe);
}

TEST(Wigner, OriginIsScaledParity) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto rho = random_state(rng, 20, 1 + i % 3, 8);
    EXPECT_NEAR(kpo::wigner_at(rho, 0.0), 2 / kPi * rho.expectation(kpo::parity_op(20)), 1e-10);
  }
}

TEST(Wigner, EvenCatMatchesClosedForm) {
  const double a = 1.154;
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(a, kpo::Parity::even, 30));
  for (cplx beta : {cplx(0, 0), cplx(0.3, 0.2), cplx(-1.1, 0.05), cplx(0.0, 0.6), cplx(1.5, -0.9)})
    EXPECT_NEAR(kpo::wigner_at(rho, beta), even_cat_wigner(a, beta), 1e-10) << beta;
  const auto odd = kpo::DensityMatrix::pure(kpo::cat_state(a, kpo::Parity::odd, 30));
  EXPECT_NEAR(kpo::wigner_at(rho, 0.0), 2 / kPi, 1e-12);
  EXPECT_NEAR(kpo::wigner_at(odd, 0.0), -2 / kPi, 1e-12);
}

TEST(Wigner, CoherentStateIsGaussian) {
  const cplx a(0.6, -0.4);
  const auto rho = kpo::DensityMatrix::pure(kpo::coherent_state(a, 30));
  for (cplx beta : {cplx(0, 0), cplx(0.6, -0.4), cplx(1.0, 0.5)})
    EXPECT_NEAR(kpo::wigner_at(rho, beta), 2 / kPi * std::exp(-2 * std::norm(beta - a)), 1e-10);
}

TEST(Wigner, DisplacedParityAgreesWithLargeSpaceConstruction) {
  const int dim = 20, big = 80;
  const cplx a(0.8, 0.5);
  const kpo::Matrix d = kpo::displacement_op(a, big);
  const kpo::Matrix ref = (d * kpo::parity_op(big) * d.adjoint()).topLeftCorner(dim, dim);
  EXPECT_LT((kpo::displaced_parity(a, dim) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Wigner, MapIntegratesToOne) {
  const auto grid = kpo::PhaseGrid{};
  std::mt19937_64 rng(3);
  for (int i = 0; i < 3; ++i) {
    const auto rho = random_state(rng, 30, 2, 4);
    ASSERT_LE(rho.expectation(kpo::number_op(30)), 3.0);
    const double integral = kpo::wigner_ideal(rho, grid, 1).integral();
    EXPECT_GE(integral, 0.97);
    EXPECT_LE(integral, 1.01);
  }
}

TEST(Wigner, GridBeyondTruncationIsRejected) {
  const auto rho = kpo::DensityMatrix::pure(kpo::StateVector::fock(0, 4));
  EXPECT_THROW(kpo::wigner_ideal(rho, kpo::PhaseGrid::square(3.0, 11), 1), kpo::Error);
}

TEST(Wigner, WorkerCountDoesNotChangeMap) {
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::odd, 30));
  const auto grid = kpo::PhaseGrid::square(2.5, 21);
  EXPECT_EQ(kpo::wigner_ideal(rho, grid, 1).values, kpo::wigner_ideal(rho, grid, 4).values);
}

TEST(CatSize, MixtureLobesSitAtAlpha) {
  const double a = 1.154;
  const int dim = 30;
  const kpo::Vector e = kpo::cat_state(a, kpo::Parity::even, dim).amplitudes();
  const kpo::Vector o = kpo::cat_state(a, kpo::Parity::odd, dim).amplitudes();
  const kpo::DensityMatrix mix(0.5 * (e * e.adjoint() + o * o.adjoint()));
  const auto grid = kpo::PhaseGrid::square(3.5, 71);
  const double size = kpo::cat_size(kpo::wigner_ideal(mix, grid, 1));
  EXPECT_NEAR(size, a, grid.re_step() + 0.02 * a);
}

TEST(CatSize, MaximumOnEdgeIsRejected) {
  const auto rho = kpo::DensityMatrix::pure(kpo::coherent_state(2.0, 30));
  EXPECT_THROW(kpo::cat_size(kpo::wigner_ideal(rho, kpo::PhaseGrid::square(1.5, 21), 1)), kpo::Error);
}

// Simulated displacement + parity measurement

double rms_vs_ideal(const kpo::SystemParams& p, const kpo::DensityMatrix& rho, double duration) {
  const auto grid = kpo::PhaseGrid::square(1.5, 5);
  kpo::TomographyPulse pulse;
  pulse.duration = duration;
  const auto rec = kpo::simulate_ld_tomography(p, rho, grid.points(), pulse, 1);
  const auto ideal = kpo::wigner_ideal(rho, grid, 1);
  const auto sim = kpo::record_to_map(rec, grid);
  return std::sqrt((sim.values - ideal.values).squaredNorm() / ideal.values.size());
}

TEST(SimulatedTomography, ShorterPulsesApproachIdealMap) {
  auto p = kpo::SystemParams::device_defaults();
  p.dim = 20;
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::even, p.dim));
  const double d40 = rms_vs_ideal(p, rho, 0.04);
  const double d20 = rms_vs_ideal(p, rho, 0.02);
  const double d10 = rms_vs_ideal(p, rho, 0.01);
  const double d5 = rms_vs_ideal(p, rho, 0.005);
  EXPECT_GT(d20, 1e-4);
  EXPECT_GT(d40, d20);
  EXPECT_GT(d20, d10);
  EXPECT_GT(d10, d5);
}

TEST(SimulatedTomography, DriveBoundIsEnforced) {
  auto p = kpo::SystemParams::device_defaults();
  p.dim = 12;
  const auto rho = kpo::DensityMatrix::pure(kpo::StateVector::fock(0, p.dim));
  kpo::TomographyPulse pulse;
  pulse.max_amplitude = 1.0;
  const std::vector<cplx> pts{cplx(1.5, 0)};
  try {
    kpo::simulate_ld_tomography(p, rho, pts, pulse, 1);
    FAIL() << "expected a calibration error";
  } catch (const kpo::Error& e) {
    EXPECT_EQ(e.code(), kpo::ErrorCode::calibration);
  }
}

TEST(KerrCorrection, UndoesFreeKerrEvolution) {
  auto p = kpo::SystemParams::device_defaults();
  const auto psi = kpo::cat_state(1.154, kpo::Parity::even, p.dim);
  const double tau = 0.15;
  const std::vector<double> end{tau};
  const auto free = kpo::PulseSchedule({kpo::hold_segment(tau, 0.0, p.detuning)});
  kpo::PropagationOptions o;
  o.integrator.rtol = 1e-11;
  o.integrator.atol = 1e-13;
  const auto evolved = kpo::propagate(p, free, psi, end, o).density(0);
  const auto back = kpo::kerr_correct(evolved, p.kerr, p.detuning, tau);
  const auto rho0 = kpo::DensityMatrix::pure(psi);
  EXPECT_NEAR(kpo::state_fidelity(back.matrix(), rho0.matrix()), 1.0, 1e-6);

  const auto pumped = kpo::PulseSchedule({kpo::hold_segment(tau, p.pump, p.detuning)});
  const auto with_pump = kpo::propagate(p, pumped, kpo::coherent_state(0.8, p.dim), end, o).density(0);
  const auto partial = kpo::kerr_correct(with_pump, p.kerr, p.detuning, tau);
  const auto start = kpo::DensityMatrix::pure(kpo::coherent_state(0.8, p.dim));
  EXPECT_LT(kpo::state_fidelity(partial.matrix(), start.matrix()), 0.999);
}

// Reconstruction

kpo::MeasurementRecord ideal_record(const kpo::DensityMatrix& rho, const kpo::PhaseGrid& grid) {
  kpo::MeasurementRecord rec;
  rec.points = grid.points();
  const auto map = kpo::wigner_ideal(rho, grid, 1);
  for (int i = 0; i < grid.im_count; ++i)
    for (int j = 0; j < grid.re_count; ++j) rec.parity.push_back(kPi / 2 * map.values(i, j));
  return rec;
}

TEST(Reconstruction, NoiselessCatRoundTrip) {
  const int dim = 20;
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::even, dim));
  const auto rec = kpo::reconstruct_density(ideal_record(rho, kpo::PhaseGrid::square(3.0, 41)), dim);
  EXPECT_GE(kpo::state_fidelity(rec.rho.matrix(), rho.matrix()), 0.99);
  EXPECT_GT(rec.rho.min_eigenvalue(), -1e-9);
  EXPECT_NEAR(rec.rho.trace(), 1.0, 1e-9);
}

TEST(Reconstruction, MixedQubitStateStaysMixed) {
  const int dim = 20;
  const auto basis = kpo::CatBasis::analytic(1.154, dim);
  const kpo::Vector e = basis.plus_cat.amplitudes(), o = basis.minus_cat.amplitudes();
  const kpo::DensityMatrix rho(0.5 * (e * e.adjoint() + o * o.adjoint()));
  const auto rec = kpo::reconstruct_density(ideal_record(rho, kpo::PhaseGrid::square(3.0, 41)), dim);
  EXPECT_LE(rec.rho.purity(), 0.55);
}

TEST(Reconstruction, NoisyCatRoundTrip) {
  const int dim = 20;
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::even, dim));
  auto record = ideal_record(rho, kpo::PhaseGrid::square(3.0, 41));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (double& v : record.parity) v += noise(rng);
  const auto rec = kpo::reconstruct_density(record, dim);
  EXPECT_GE(kpo::state_fidelity(rec.rho.matrix(), rho.matrix()), 0.97);
}

TEST(Reconstruction, ProjectionOntoDensityMatrices) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
  h(0, 0) = 1.2;
  h(1, 1) = 0.1;
  h(2, 2) = -0.4;
  const Eigen::MatrixXcd r = kpo::project_to_density(h);
  EXPECT_NEAR(r.trace().real(), 1.0, 1e-12);
  // Simplex projection of the eigenvalues (1.2, 0.1, -0.4) keeps only the first.
  EXPECT_NEAR(r(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(r(1, 1).real(), 0.0, 1e-12);
  EXPECT_NEAR(r(2, 2).real(), 0.0, 1e-12);
}

TEST(WignerIo, CsvAndRecordRoundTrip) {
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(0.9, kpo::Parity::odd, 20));
  const auto grid = kpo::PhaseGrid::square(2.0, 9);
  const auto map = kpo::wigner_ideal(rho, grid, 1);
  const auto back = kpo::wigner_from_csv(kpo::wigner_to_csv(map));
  EXPECT_EQ(back.values, map.values);
  EXPECT_EQ(back.grid.re_count, grid.re_count);
  EXPECT_DOUBLE_EQ(back.grid.im_max, grid.im_max);

  auto rec = ideal_record(rho, grid);
  rec.calibration = cplx(0.25, -0.5);
  const auto rec2 = kpo::record_from_jsonl(kpo::record_to_jsonl(rec));
  ASSERT_EQ(rec2.points.size(), rec.points.size());
  for (std::size_t i = 0; i < rec.points.size(); ++i) {
    EXPECT_EQ(rec2.points[i], rec.points[i]);
    EXPECT_EQ(rec2.parity[i], rec.parity[i]);
  }
}

}  // namespace
