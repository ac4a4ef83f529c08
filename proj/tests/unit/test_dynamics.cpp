#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "kpo/dynamics.hpp"
#include "kpo/error.hpp"
#include "kpo/fit.hpp"
#include "kpo/integrator.hpp"
#include "kpo/spectral.hpp"
#include "kpo/units.hpp"
#include "oracle_values.hpp"

namespace {

using kpo::cplx;
namespace units = kpo::units;

kpo::SystemParams device() { return kpo::SystemParams::device_defaults(); }

kpo::PropagationOptions tight() {
  kpo::PropagationOptions o;
  o.integrator.rtol = 1e-11;
  o.integrator.atol = 1e-13;
  return o;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

TEST(Dopri5, HarmonicPhaseIsExact) {
  const double w = 7.3;
  kpo::Dopri5 solver({1e-11, 1e-13});
  kpo::Matrix y = kpo::Matrix::Ones(1, 1);
  const auto samples = linspace(0, 10, 11);
  std::vector<cplx> got(samples.size());
  solver.integrate([w](double, const kpo::Matrix& x, kpo::Matrix& d) { d = cplx(0, -w) * x; }, 0, 10, y,
                   samples, 0, [&](std::size_t i, double, const kpo::Matrix& x) { got[i] = x(0, 0); });
  for (std::size_t i = 0; i < samples.size(); ++i)
    EXPECT_LT(std::abs(got[i] - std::exp(cplx(0, -w * samples[i]))), 1e-8) << samples[i];
  EXPECT_GT(solver.stats().accepted, 0u);
}

TEST(Dopri5, LandsExactlyOnSampleTimes) {
  kpo::Dopri5 solver;
  kpo::Matrix y = kpo::Matrix::Ones(1, 1);
  const std::vector<double> samples{0.0, 0.1234567, 0.5, 0.99};
  std::vector<double> seen;
  solver.integrate([](double, const kpo::Matrix& x, kpo::Matrix& d) { d = -x; }, 0, 1, y, samples, 0,
                   [&](std::size_t, double t, const kpo::Matrix&) { seen.push_back(t); });
  ASSERT_EQ(seen.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_EQ(seen[i], samples[i]);
  EXPECT_NEAR(y(0, 0).real(), std::exp(-1.0), 1e-7);
}

TEST(Dopri5, NonFiniteStateIsAnAccuracyError) {
  kpo::Dopri5 solver;
  kpo::Matrix y = kpo::Matrix::Ones(1, 1);
  try {
    solver.integrate([](double t, const kpo::Matrix& x, kpo::Matrix& d) { d = x * (1.0 / (0.5 - t)); }, 0, 1, y,
                     {}, 0, {});
    FAIL() << "expected an error";
  } catch (const kpo::Error& e) {
    EXPECT_TRUE(e.code() == kpo::ErrorCode::accuracy || e.code() == kpo::ErrorCode::stiffness);
  }
}

TEST(Propagate, ParityIsConservedWithoutDrive) {
  const auto p = device();
  const auto ramp = kpo::ramp_schedule(p.pump, 0.3, true, p.detuning);
  const auto times = linspace(0, 0.3, 7);
  const auto traj = kpo::propagate(p, ramp, kpo::StateVector::fock(0, p.dim), times);
  for (double v : traj.expectation(kpo::parity_op(p.dim))) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_LT(traj.meta().max_norm_deviation, 1e-7);
}

TEST(Propagate, PhotonNumberDecaysAtKappa) {
  auto p = device();
  p.kappa = 0.7;
  const auto hold = kpo::PulseSchedule({kpo::hold_segment(2.0, 0.0, p.detuning)});
  const auto times = linspace(0, 2.0, 9);
  const auto traj = kpo::propagate(p, hold, kpo::StateVector::fock(1, p.dim), times, tight());
  ASSERT_TRUE(traj.mixed());
  const auto n = traj.expectation(kpo::number_op(p.dim));
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_NEAR(n[i], std::exp(-p.kappa * times[i]), 1e-9);
}

TEST(Propagate, LindbladKeepsTraceAndPositivity) {
  auto p = device();
  p.kappa = 0.5;
  auto sched = kpo::ramp_schedule(p.pump, 0.3, true, p.detuning);
  sched.append(kpo::drive_segment(0.2, p.pump, p.detuning, p.drive, 0.0, 0.0));
  const auto traj = kpo::propagate(p, sched, kpo::StateVector::fock(1, p.dim), linspace(0, 0.5, 6));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto rho = traj.density(i);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-7);
    EXPECT_GT(rho.min_eigenvalue(), -1e-7);
  }
}

TEST(Propagate, PropagatorIsUnitaryAndMatchesStates) {
  auto p = device();
  p.dim = 14;
  const auto sched = kpo::PulseSchedule({kpo::drive_segment(0.2, p.pump, p.detuning, p.drive, 0.4, 0.3)});
  const std::vector<double> times{0.2};
  const auto u = kpo::propagator(p, sched, times, tight());
  ASSERT_EQ(u.size(), 1u);
  EXPECT_LT((u[0].adjoint() * u[0] - kpo::Matrix::Identity(p.dim, p.dim)).cwiseAbs().maxCoeff(), 1e-7);
  const auto traj = kpo::propagate(p, sched, kpo::StateVector::fock(3, p.dim), times, tight());
  EXPECT_LT((traj.states()[0].amplitudes() - u[0].col(3)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Propagate, SamplesOutsideScheduleAreRejected) {
  const auto p = device();
  const auto hold = kpo::PulseSchedule({kpo::hold_segment(0.1, p.pump, p.detuning)});
  const std::vector<double> times{0.0, 0.2};
  EXPECT_THROW(kpo::propagate(p, hold, kpo::StateVector::fock(0, p.dim), times), kpo::Error);
}

TEST(Propagate, CatRabiParityMatchesReference) {
  const auto p = device();
  const auto basis = kpo::cat_basis_from_model(p);
  struct Point {
    double detuning_mhz, time_us, expected;
  };
  for (const Point& pt : {Point{0.5, 0.3, oracle::kCatRabiParity0}, Point{-0.5, 0.3, oracle::kCatRabiParity1},
                          Point{1.5, 0.7, oracle::kCatRabiParity2}}) {
    const auto sched = kpo::PulseSchedule(
        {kpo::drive_segment(pt.time_us, p.pump, p.detuning, p.drive, units::from_mhz(pt.detuning_mhz), 0.0)});
    const std::vector<double> times{pt.time_us};
    const auto traj = kpo::propagate(p, sched, basis.plus_cat, times, tight());
    EXPECT_NEAR(traj.expectation(kpo::parity_op(p.dim))[0], pt.expected, 1e-7) << pt.detuning_mhz;
  }
}

// Row mean of P(|0>) is lowest where the starting state is resonantly depleted.
int deepest_row(const kpo::RabiMap& map, double lo, double hi) {
  int best = -1;
  double value = 2;
  for (int i = 0; i < map.p0.rows(); ++i) {
    if (map.detunings[i] < lo || map.detunings[i] > hi) continue;
    const double m = map.p0.row(i).mean();
    if (m < value) value = m, best = i;
  }
  return best;
}

TEST(RabiMap, DriveFeaturesAtKerrLadderResonances) {
  auto p = device();
  p.dim = 12;
  const double k = p.kerr;
  std::vector<double> det;
  for (int i = -12; i <= 40; ++i) det.push_back(0.025 * k * i);
  const auto times = linspace(0, 8.0, 41);
  const auto map = kpo::rabi_map(p, kpo::RabiKind::drive, 0.05 * k, det, times, 1);
  const int main = deepest_row(map, det.front(), det.back());
  EXPECT_NEAR(map.detunings[main], 0.0, 0.026 * k);
  const int two_photon = deepest_row(map, 0.3 * k, 0.8 * k);
  EXPECT_NEAR(map.detunings[two_photon], 0.5 * k, 0.051 * k);
  EXPECT_LT(map.p0.row(two_photon).mean() + 0.02, map.p0.row(two_photon - 8).mean());
}

TEST(RabiMap, PumpFeaturesAtKerrLadderResonances) {
  auto p = device();
  p.dim = 14;
  const double k = p.kerr;
  std::vector<double> det;
  for (int i = 0; i <= 80; ++i) det.push_back(0.025 * k * i);
  const auto times = linspace(0, 4.0, 41);
  const auto map = kpo::rabi_map(p, kpo::RabiKind::pump, 0.1 * k, det, times, 1);
  const int three_wave = deepest_row(map, 0.0, det.back());
  EXPECT_NEAR(map.detunings[three_wave], 0.5 * k, 0.051 * k);
  const int four_photon = deepest_row(map, 1.2 * k, 1.8 * k);
  EXPECT_NEAR(map.detunings[four_photon], 1.5 * k, 0.051 * k);
  EXPECT_LT(map.p0.row(four_photon).mean() + 0.01, map.p0.row(four_photon - 8).mean());
}

TEST(Relaxation, ClosedSystemKeepsZAndPrecessesAtSplitting) {
  const auto p = device();
  kpo::RelaxationOptions opts;
  opts.preparation = kpo::Preparation::ideal;
  opts.workers = 1;
  opts.propagation = tight();
  const auto waits = linspace(0, 10.0, 101);
  const auto res = kpo::relaxation_experiment(p, 0.0, waits, opts);
  ASSERT_EQ(res.series.size(), 3u);
  for (const auto& pop : res.series[0].populations) EXPECT_NEAR(pop.z_diff(), 1.0, 1e-6);
  std::vector<double> x;
  for (const auto& pop : res.series[1].populations) x.push_back(pop.x_diff());
  const auto fit = kpo::fit_damped_cosine(waits, x);
  const double split = units::to_mhz(kpo::quasienergies(p.kerr, p.pump, p.detuning, p.dim).splitting());
  EXPECT_NEAR(fit.frequency, split, 1e-4 * split);
  EXPECT_LT(fit.rate, 1e-4);
}

TEST(Relaxation, LossTransfersEvenCatTowardOddCat) {
  const auto p = device();
  kpo::RelaxationOptions opts;
  opts.preparation = kpo::Preparation::ideal;
  opts.workers = 1;
  opts.propagation = tight();
  const std::vector<double> waits{0.0, 0.5, 1.0};
  const auto res = kpo::relaxation_experiment(p, 0.1, waits, opts);
  const auto& z = res.series[0].populations;
  EXPECT_NEAR(z[0].minus_cat, 0.0, 1e-12);
  EXPECT_GT(z[1].minus_cat, 0.0);
  EXPECT_NEAR(z[2].minus_cat, oracle::kRelaxMinusCatAt1us, 1e-6);
}

TEST(Mapping, RampMatchesIndependentPropagation) {
  const auto p = device();
  const auto basis = kpo::cat_basis_from_model(p);
  const auto ramp = kpo::ramp_schedule(p.pump, 0.3, true, p.detuning);
  const auto cal = kpo::calibrate_mapping(p, ramp, basis, tight());
  EXPECT_NEAR(cal.fidelity_even, oracle::kMappingFidelityEven, 1e-7);
  EXPECT_NEAR(cal.fidelity_odd, oracle::kMappingFidelityOdd, 1e-7);
  EXPECT_NEAR(std::remainder(cal.relative_phase() - oracle::kMappingRelativePhase, 2 * std::acos(-1.0)), 0.0, 1e-6);
}

TEST(Fit, ExponentialDecayRoundTrip) {
  const auto t = linspace(0, 15, 61);
  std::vector<double> y;
  for (double s : t) y.push_back(0.45 * std::exp(-s / 4.2) + 0.5);
  const auto fit = kpo::fit_exp_decay(t, y);
  EXPECT_NEAR(fit.time_constant(), 4.2, 1e-6);
  EXPECT_NEAR(fit.offset, 0.5, 1e-8);
}

TEST(Fit, DampedCosineRoundTrip) {
  const auto t = linspace(0, 12, 241);
  std::vector<double> y;
  for (double s : t) y.push_back(0.8 * std::cos(2 * std::acos(-1.0) * 0.317 * s + 0.4) * std::exp(-s / 6.6) + 0.02);
  const auto fit = kpo::fit_damped_cosine(t, y);
  EXPECT_NEAR(fit.frequency, 0.317, 1e-7);
  EXPECT_NEAR(fit.time_constant(), 6.6, 1e-5);
  EXPECT_NEAR(fit.phase, 0.4, 1e-6);
  EXPECT_NEAR(fit.amplitude, 0.8, 1e-6);
}

TEST(Fit, GrowingEnvelopeFallsBackToUndampedModel) {
  const auto t = linspace(0, 10, 201);
  std::vector<double> y;
  for (double s : t) y.push_back(std::cos(2 * std::acos(-1.0) * 0.5 * s) * (1 + 0.01 * s));
  const auto fit = kpo::fit_damped_cosine(t, y);
  EXPECT_EQ(fit.rate, 0.0);
  EXPECT_NEAR(fit.frequency, 0.5, 1e-3);
}

TEST(Fit, ConstantSeriesIsDegenerate) {
  const auto t = linspace(0, 5, 20);
  const std::vector<double> y(20, 0.3);
  for (auto fn : {&kpo::fit_exp_decay, &kpo::fit_damped_cosine}) {
    try {
      fn(t, y, {});
      FAIL() << "expected degenerate_data";
    } catch (const kpo::Error& e) {
      EXPECT_EQ(e.code(), kpo::ErrorCode::degenerate_data);
    }
  }
}

TEST(Fit, TooFewPointsIsRejected) {
  const std::vector<double> t{0, 1, 2}, y{1, 0.5, 0.25};
  EXPECT_THROW(kpo::fit_exp_decay(t, y), kpo::Error);
}

}  // namespace
