#include <vector>

#include <benchmark/benchmark.h>

#include "kpo/dynamics.hpp"
#include "kpo/qpt.hpp"
#include "kpo/spectral.hpp"
#include "kpo/tomography.hpp"

namespace {

kpo::SystemParams device(int dim) {
  auto p = kpo::SystemParams::device_defaults();
  p.dim = dim;
  return p;
}

void BM_Quasienergies(benchmark::State& state) {
  const auto p = device(static_cast<int>(state.range(0)));
  kpo::SpectrumOptions o;
  o.check_convergence = false;
  for (auto _ : state) benchmark::DoNotOptimize(kpo::quasienergies(p.kerr, p.pump, p.detuning, p.dim, o));
}
BENCHMARK(BM_Quasienergies)->Arg(30)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_PropagateRamp(benchmark::State& state) {
  const auto p = device(static_cast<int>(state.range(0)));
  const auto ramp = kpo::ramp_schedule(p.pump, 0.3, true, p.detuning);
  const std::vector<double> end{0.3};
  const auto psi = kpo::StateVector::fock(0, p.dim);
  for (auto _ : state) benchmark::DoNotOptimize(kpo::propagate(p, ramp, psi, end));
}
BENCHMARK(BM_PropagateRamp)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_LindbladHold(benchmark::State& state) {
  auto p = device(static_cast<int>(state.range(0)));
  p.kappa = 0.1;
  const auto hold = kpo::PulseSchedule({kpo::hold_segment(1.0, p.pump, p.detuning)});
  const std::vector<double> end{1.0};
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::even, p.dim));
  for (auto _ : state) benchmark::DoNotOptimize(kpo::propagate(p, hold, rho, end));
}
BENCHMARK(BM_LindbladHold)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_WignerMap(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::even, 30));
  const auto grid = kpo::PhaseGrid::square(3.0, count);
  for (auto _ : state) benchmark::DoNotOptimize(kpo::wigner_ideal(rho, grid, 1));
}
BENCHMARK(BM_WignerMap)->Arg(41)->Arg(81)->Unit(benchmark::kMillisecond);

void BM_Reconstruction(benchmark::State& state) {
  const int dim = 20;
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::even, dim));
  const auto grid = kpo::PhaseGrid::square(3.0, 41);
  const auto map = kpo::wigner_ideal(rho, grid, 1);
  kpo::MeasurementRecord rec;
  rec.points = grid.points();
  for (int i = 0; i < grid.im_count; ++i)
    for (int j = 0; j < grid.re_count; ++j) rec.parity.push_back(1.5707963267948966 * map.values(i, j));
  for (auto _ : state) benchmark::DoNotOptimize(kpo::reconstruct_density(rec, dim));
}
BENCHMARK(BM_Reconstruction)->Unit(benchmark::kMillisecond);

void BM_ChiMatrix(benchmark::State& state) {
  const auto in = kpo::standard_inputs();
  const Eigen::Matrix2cd u = kpo::rotation_x(0.7);
  std::array<kpo::QubitDensity, 4> a, b;
  for (int i = 0; i < 4; ++i) {
    a[i].m = in[i];
    b[i].m = u * in[i] * u.adjoint();
  }
  for (auto _ : state) benchmark::DoNotOptimize(kpo::chi_matrix(a, b));
}
BENCHMARK(BM_ChiMatrix)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
