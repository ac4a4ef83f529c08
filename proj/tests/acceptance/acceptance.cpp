// Acceptance checks for the simulator. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "kpo/dynamics.hpp"
#include "kpo/fit.hpp"
#include "kpo/linalg.hpp"
#include "kpo/qpt.hpp"
#include "kpo/spectral.hpp"
#include "kpo/tomography.hpp"
#include "kpo/units.hpp"

namespace {

namespace units = kpo::units;
using kpo::cplx;
constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str(), secs);
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

kpo::SystemParams device() { return kpo::SystemParams::device_defaults(); }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

kposim::ExperimentResult run_config(const std::string& name, unsigned workers) {
  const auto cfg = kposim::load_config(std::string(KPO_CONFIG_DIR) + "/" + name + ".json", name);
  return kposim::run_experiment(cfg, {workers, false});
}

Outcome splitting() {
  const auto p = device();
  const auto t0 = std::chrono::steady_clock::now();
  const double s = units::to_mhz(kpo::quasienergies(p.kerr, p.pump, p.detuning, 30).splitting());
  const double secs = elapsed_since(t0);
  const bool ok = std::abs(s - 0.318) <= 0.005 && secs < 1.0;
  return {ok, fmt("splitting %.6f MHz (0.318 +- 0.005), %.3f s at dim 30 (< 1 s)", s, secs)};
}

Outcome classical_extrema() {
  const double k = device().kerr;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  int points = 0;
  bool all_found = true;
  for (double pk : linspace(0.5, 3.0, 10)) {
    for (double dk : linspace(0.0, 1.0, 10)) {
      const double ac = kpo::classical_cat_amplitude(k, pk * k, dk * k);
      int found = 0;
      for (const auto& s : kpo::stationary_points(k, pk * k, dk * k)) {
        if (s.kind != kpo::StationaryKind::maximum) continue;
        ++found;
        worst = std::max(worst, std::abs(std::abs(s.alpha) - ac) / ac);
      }
      all_found = all_found && found == 2;
      ++points;
    }
  }
  const double secs = elapsed_since(t0);
  const bool ok = all_found && worst <= 1e-9 && secs < 5.0;
  return {ok, fmt("%d grid points, extrema of -E at +-alpha_c, max relative deviation %.2e (<= 1e-9), %.2f s (< 5 s)",
                  points, worst, secs)};
}

Outcome surface_shape() {
  const double k = device().kerr;
  const auto pk = linspace(0.5, 3.0, 26);
  const std::vector<double> zero{0.0};
  const auto along_p = kpo::splitting_surface(k, pk, zero, 40, 0);
  bool decreasing = true;
  double largest = 0;
  for (int i = 0; i < along_p.rows(); ++i) {
    largest = std::max(largest, std::abs(along_p(i, 0)));
    if (i > 0 && !(std::abs(along_p(i, 0)) < std::abs(along_p(i - 1, 0)))) decreasing = false;
  }
  std::vector<double> dk;
  for (int i = 1; i <= 240; ++i) dk.push_back(0.005 * i);
  const std::vector<double> p101{1.01};
  const auto along_d = kpo::splitting_surface(k, p101, dk, 40, 0);
  int changes = 0;
  double first = NAN;
  for (int j = 1; j < along_d.cols(); ++j) {
    if (along_d(0, j - 1) * along_d(0, j) < 0) {
      if (changes == 0) first = dk[j];
      ++changes;
    }
  }
  return {decreasing && changes >= 1,
          fmt("Delta=0: |splitting|/K <= %.1e on all %zu points, strictly decreasing: %s; "
              "P/K=1.01: %d sign changes in Delta/K (0, 1.2], first near %.3f",
              largest, pk.size(), decreasing ? "yes" : "no (levels exactly degenerate)", changes, first)};
}

Outcome interference() {
  const auto p = device();
  kpo::RelaxationOptions o;
  o.preparation = kpo::Preparation::ideal;
  const auto waits = linspace(0, 12.0, 121);
  const auto res = kpo::relaxation_experiment(p, 0.0, waits, o);
  std::vector<double> x;
  for (const auto& c : res.series[1].populations) x.push_back(c.x_diff());
  const auto fit = kpo::fit_damped_cosine(waits, x);
  const double split = std::abs(units::to_mhz(kpo::quasienergies(p.kerr, p.pump, p.detuning, p.dim).splitting()));
  const double rel = std::abs(fit.frequency - split) / split;
  return {rel <= 0.02, fmt("x-difference from |+Coh> oscillates at %.6f MHz vs splitting %.6f MHz, relative %.2e (<= 0.02)",
                           fit.frequency, split, rel)};
}

Outcome relaxation() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_config("relax", 0);
  const double secs = elapsed_since(t0);
  const double tz = r.summary["T_z_us"].get<double>();
  const std::string transfer = r.summary["initial_transfer"].get<std::string>();
  const bool ok = tz >= 3.2 && tz <= 5.3 && transfer == "+Cat -> -Cat" && secs < 120;
  return {ok, fmt("kappa = 0.1/us: T_z = %.3f us in [3.2, 5.3], initial transfer %s, %.1f s (< 120 s)", tz,
                  transfer.c_str(), secs)};
}

Outcome mapping() {
  const auto p = device();
  const auto basis = kpo::cat_basis_from_model(p);
  const auto ramp = kpo::ramp_schedule(p.pump, 0.3, true, p.detuning);
  const auto cal = kpo::calibrate_mapping(p, ramp, basis);
  const auto q = kpo::qpt_experiment(kpo::QptKind::mapping, p, 0.0);
  const double xx = q.chi.chi(1, 1).real(), zz = q.chi.chi(3, 3).real();
  const bool ok = cal.fidelity_even >= 0.99 && q.fidelity >= 0.95 && xx < 0.01 && zz < 0.01;
  return {ok, fmt("|0> -> +Cat fidelity %.4f (>= 0.99), |1> -> -Cat %.4f, process fidelity %.4f (>= 0.95), "
                  "XX %.2e ZZ %.2e (< 0.01)",
                  cal.fidelity_even, cal.fidelity_odd, q.fidelity, xx, zz)};
}

Outcome cat_rabi_symmetry() {
  const auto r = run_config("tls-compare", 0);
  const double kpo_asym = r.summary["rms_asymmetry_kpo"].get<double>();
  const double sym = r.summary["rms_asymmetry_symmetrized"].get<double>();
  const double stdv = r.summary["rms_asymmetry_standard"].get<double>();
  const double dsym = r.summary["rms_difference_symmetrized"].get<double>();
  const double dstd = r.summary["rms_difference_standard"].get<double>();
  const bool ok = kpo_asym <= 1e-3 && sym <= 1e-3 && stdv > 1e-3 && dsym < dstd;
  return {ok, fmt("RMS asymmetry over Delta_d: KPO %.3e (<= 1e-3), H_Rd %.1e, H_Rs %.3f; "
                  "RMS distance to KPO map: H_Rd %.3f, H_Rs %.3f",
                  kpo_asym, sym, stdv, dsym, dstd)};
}

Outcome wigner_identities() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  double worst = 0;
  const int dim = 30;
  std::vector<kpo::DensityMatrix> states;
  for (int i = 0; i < 20; ++i) {
    kpo::Matrix m = kpo::Matrix::Zero(dim, dim);
    for (int r = 0; r <= i % 3; ++r) {
      kpo::Vector v = kpo::Vector::Zero(dim);
      for (int n = 0; n < 5; ++n) v[n] = cplx(g(rng), g(rng));
      m += v * v.adjoint();
    }
    states.emplace_back(m / m.trace());
  }
  for (const auto& rho : states)
    worst = std::max(worst, std::abs(kpo::wigner_at(rho, 0.0) - 2 / kPi * rho.expectation(kpo::parity_op(dim))));
  states.push_back(kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::even, dim)));
  states.push_back(kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::odd, dim)));
  states.push_back(kpo::DensityMatrix::pure(kpo::coherent_state(cplx(1.0, 1.0), dim)));
  for (int n = 0; n <= 3; ++n) states.push_back(kpo::DensityMatrix::pure(kpo::StateVector::fock(n, dim)));
  double lo = 10, hi = -10;
  int counted = 0;
  for (const auto& rho : states) {
    if (rho.expectation(kpo::number_op(dim)) > 3.0) continue;
    const double integral = kpo::wigner_ideal(rho, kpo::PhaseGrid{}, 0).integral();
    lo = std::min(lo, integral);
    hi = std::max(hi, integral);
    ++counted;
  }
  const bool ok = worst <= 1e-10 && lo >= 0.97 && hi <= 1.01;
  return {ok, fmt("max |W(0) - (2/pi)<Pi>| = %.1e over 20 states (<= 1e-10); integral in [%.5f, %.5f] for %d states "
                  "(within [0.97, 1.01])",
                  worst, lo, hi, counted)};
}

Outcome reconstruction() {
  const int dim = 20;
  const auto rho = kpo::DensityMatrix::pure(kpo::cat_state(1.154, kpo::Parity::even, dim));
  const auto grid = kpo::PhaseGrid::square(3.0, 41);
  const auto map = kpo::wigner_ideal(rho, grid, 0);
  kpo::MeasurementRecord rec;
  rec.points = grid.points();
  for (int i = 0; i < grid.im_count; ++i)
    for (int j = 0; j < grid.re_count; ++j) rec.parity.push_back(kPi / 2 * map.values(i, j));
  const double clean = kpo::state_fidelity(kpo::reconstruct_density(rec, dim).rho.matrix(), rho.matrix());
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (double& v : rec.parity) v += noise(rng);
  const double noisy = kpo::state_fidelity(kpo::reconstruct_density(rec, dim).rho.matrix(), rho.matrix());
  return {clean >= 0.99 && noisy >= 0.97,
          fmt("41x41 record of |+Cat(1.154)>: fidelity %.5f (>= 0.99), with sigma = 0.01 noise %.5f (>= 0.97)", clean,
              noisy)};
}

Outcome qpt_sanity() {
  const auto in = kpo::standard_inputs();
  auto chi_of = [&](const Eigen::Matrix2cd& u) {
    std::array<kpo::QubitDensity, 4> a, b;
    for (int i = 0; i < 4; ++i) {
      a[i].m = in[i];
      b[i].m = u * in[i] * u.adjoint();
    }
    return kpo::chi_matrix(a, b).chi;
  };
  double worst = 0;
  const auto& basis = kpo::chi_basis();
  for (int k = 0; k < 4; ++k) {
    Eigen::Matrix4cd ref = Eigen::Matrix4cd::Zero();
    ref(k, k) = 1;
    worst = std::max(worst, (chi_of(basis[k]) - ref).cwiseAbs().maxCoeff());
  }
  Eigen::Matrix4cd rx = Eigen::Matrix4cd::Zero();
  rx(0, 0) = rx(1, 1) = 0.5;
  rx(0, 1) = cplx(0, 0.5);
  rx(1, 0) = cplx(0, -0.5);
  const double rx_err = (chi_of(kpo::rotation_x(kPi / 2)) - rx).cwiseAbs().maxCoeff();
  return {worst <= 1e-9 && rx_err <= 1e-9,
          fmt("identity and Pauli conjugations one-hot within %.1e, R_x(pi/2) closed form within %.1e (<= 1e-9)", worst,
              rx_err)};
}

Outcome gate_ordering() {
  const auto p = device();
  const auto x = kpo::qpt_experiment(kpo::QptKind::x_half, p, 0.1);
  const auto z = kpo::qpt_experiment(kpo::QptKind::z_half, p, 0.1);
  const auto err = kpo::error_process(z.chi, z.ideal_unitary).chi;
  const double xx = err(1, 1).real(), yy = err(2, 2).real(), zz = err(3, 3).real();
  const bool x_dominant = xx > yy && xx > zz;
  const bool ok = z.fidelity < x.fidelity && x_dominant;
  return {ok, fmt("kappa = 0.1/us: F(Z/2, %.0f ns) = %.4f < F(X/2, %.1f ns) = %.4f; Z/2 error weights XX %.4f, YY %.4f, "
                  "ZZ %.4f (X-type dominant: %s)",
                  units::to_ns(z.gate_duration), z.fidelity, units::to_ns(x.gate_duration), x.fidelity, xx, yy, zz,
                  x_dominant ? "yes" : "no")};
}

Outcome energy_gap() {
  const auto p = device();
  const double g = kpo::energy_gap(p.kerr, p.pump, p.detuning, p.dim) / p.kerr;
  return {g >= 1.2 && g <= 1.6, fmt("gap/K = %.4f in [1.2, 1.6]", g)};
}

Outcome determinism() {
  const std::vector<std::string> names{"quasi-surface", "wigner", "map-cat", "cat-size", "qpt"};
  int files = 0;
  std::string mismatch;
  for (const auto& name : names) {
    const auto a = run_config(name, 1);
    const auto b = run_config(name, 2);
    const bool same_summary = a.summary.dump(2) == b.summary.dump(2);
    bool same_files = a.files.size() == b.files.size();
    for (std::size_t i = 0; same_files && i < a.files.size(); ++i)
      same_files = a.files[i].name == b.files[i].name && a.files[i].content == b.files[i].content;
    if (!same_summary || !same_files) mismatch += " " + name;
    files += static_cast<int>(a.files.size()) + 1;
  }
  return {mismatch.empty(), fmt("%d CSV/JSON outputs from %zu experiments, reruns with 1 and 2 workers %s", files,
                                names.size(), mismatch.empty() ? "byte-identical" : ("differ in" + mismatch).c_str())};
}

}  // namespace

int main() {
  criterion(1, "quasienergy splitting", splitting);
  criterion(2, "classical extrema", classical_extrema);
  criterion(3, "splitting surface shape", surface_shape);
  criterion(4, "closed-system interference", interference);
  criterion(5, "relaxation", relaxation);
  criterion(6, "noiseless mapping", mapping);
  criterion(7, "cat Rabi symmetry", cat_rabi_symmetry);
  criterion(8, "Wigner identities", wigner_identities);
  criterion(9, "reconstruction round trip", reconstruction);
  criterion(10, "process tomography sanity", qpt_sanity);
  criterion(11, "gate fidelity ordering", gate_ordering);
  criterion(12, "energy gap", energy_gap);
  criterion(13, "determinism", determinism);
  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
