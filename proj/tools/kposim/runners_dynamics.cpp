#include <algorithm>
#include <cmath>

#include "experiments.hpp"
#include "kpo/dynamics.hpp"
#include "kpo/error.hpp"
#include "kpo/fit.hpp"
#include "kpo/parallel.hpp"
#include "kpo/spectral.hpp"
#include "kpo/tomography.hpp"
#include "kpo/units.hpp"

namespace kposim {

using kpo::units::from_mhz;
using kpo::units::from_ns;
using kpo::units::to_mhz;

namespace {

ojson fit_json(const kpo::FitResult& f, bool oscillating) {
  ojson j{{"amplitude", f.amplitude}, {"rate_per_us", f.rate}, {"time_constant_us", number(f.time_constant())}};
  if (oscillating) {
    j["frequency_MHz"] = f.frequency;
    j["phase_rad"] = f.phase;
  }
  j["offset"] = f.offset;
  j["residual_norm"] = f.residual_norm;
  return j;
}

/// Damped-cosine fit that records a failure in the summary instead of aborting the run.
ojson try_cosine(std::span<const double> t, std::span<const double> y, kpo::FitResult* out = nullptr) {
  try {
    const kpo::FitResult f = kpo::fit_damped_cosine(t, y);
    if (out) *out = f;
    return fit_json(f, true);
  } catch (const kpo::Error& e) {
    return ojson{{"error", std::string(kpo::to_string(e.code()))}, {"message", e.what()}};
  }
}

}  // namespace

ExperimentResult run_rabi(const RunConfig& cfg, Section& section, const RunContext& ctx, bool pump) {
  const auto& p = cfg.system;
  const double amplitude_mhz = pump ? section.number("pump_MHz", 1.0) : section.number("beta_MHz", to_mhz(p.drive));
  const auto det_mhz = pump ? section.grid("Delta_MHz", -1.0, 4.0, 51) : section.grid("Delta_dr_MHz", -3.0, 5.0, 81);
  const auto t_ns = section.grid("time_ns", 0.0, 2000.0, 101);
  section.finish();
  if (!(amplitude_mhz > 0)) kpo::fail(kpo::ErrorCode::config, "drive amplitude must be positive");

  const auto dets = scaled(det_mhz, kpo::units::two_pi);
  const auto times = scaled(t_ns, 1e-3);
  const kpo::RabiMap map = kpo::rabi_map(p, pump ? kpo::RabiKind::pump : kpo::RabiKind::drive,
                                         from_mhz(amplitude_mhz), dets, times, ctx.workers, cfg.propagation);

  // Resonance: the detuning row with the lowest time-averaged |0> population.
  Eigen::Index best = 0;
  map.p0.rowwise().mean().minCoeff(&best);
  std::vector<double> p0_row(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) p0_row[j] = map.p0(best, static_cast<Eigen::Index>(j));
  kpo::FitResult fit;
  const ojson fit_summary = try_cosine(times, p0_row, &fit);

  const std::string det_name = pump ? "Delta_MHz" : "Delta_dr_MHz";
  ExperimentResult r;
  kpo::CsvTable table = map_table(det_name, det_mhz, "time_ns", t_ns, "P0", map.p0);
  table.metadata = {{pump ? "pump_MHz" : "beta_MHz", kpo::format_number(amplitude_mhz)}};
  r.files.push_back({"rabi_map.csv", kpo::to_csv(table)});
  if (ctx.svg) {
    kpo::HeatmapStyle style;
    style.title = pump ? "Two-photon Rabi: P(|0>)" : "Single-photon Rabi: P(|0>)";
    style.x_label = "t (ns)";
    style.y_label = pump ? "Delta (MHz)" : "Delta_dr (MHz)";
    style.value_label = "P(|0>)";
    style.x_min = t_ns.front();
    style.x_max = t_ns.back();
    style.y_min = det_mhz.front();
    style.y_max = det_mhz.back();
    r.files.push_back({"rabi_map.svg", kpo::svg_heatmap(map.p0, style)});
  }

  r.summary["system"] = system_json(p);
  r.summary[pump ? "pump_MHz" : "beta_MHz"] = amplitude_mhz;
  r.summary["resonance_MHz"] = det_mhz[static_cast<std::size_t>(best)];
  r.summary["expected_resonance_MHz"] = pump ? to_mhz(p.kerr) / 2.0 : 0.0;
  r.summary["min_P0"] = map.p0.minCoeff();
  r.summary["fit_at_resonance"] = fit_summary;
  r.checked = {{"min_P0", map.p0.minCoeff(), 1e-3}};
  if (fit_summary.contains("frequency_MHz")) r.checked.push_back({"rabi_frequency_MHz", fit.frequency, 1e-3});
  return r;
}

ExperimentResult run_relax(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto& p = cfg.system;
  const double kappa = section.number("kappa_per_us", p.kappa > 0 ? p.kappa : 0.1);
  const auto wait_ns = section.grid("wait_ns", 0.0, 12000.0, 121);
  kpo::RelaxationOptions opt;
  const std::string prep = section.text("preparation", "ideal", {"ideal", "ramp"});
  opt.preparation = prep == "ramp" ? kpo::Preparation::ramp : kpo::Preparation::ideal;
  opt.tau_ramp = from_ns(section.number("tau_ramp_ns", 300.0));
  opt.counterdiabatic = section.boolean("counterdiabatic", true);
  opt.cd_quadrature = section.number("cd_quadrature_rad", 0.0);
  section.finish();
  if (kappa < 0) kpo::fail(kpo::ErrorCode::config, "'relax.kappa_per_us' must be non-negative");
  opt.workers = ctx.workers;
  opt.propagation = cfg.propagation;

  const auto waits = scaled(wait_ns, 1e-3);
  const kpo::RelaxationResult res = kpo::relaxation_experiment(p, kappa, waits, opt);
  const kpo::QuasiSpectrum spectrum = kpo::quasienergies(p.kerr, p.pump, p.detuning, p.dim);
  const double split = to_mhz(spectrum.splitting());

  ExperimentResult r;
  const std::vector<std::string> files{"plus_cat", "plus_coh", "plus_icat"};
  std::vector<std::vector<double>> z(3), x(3), y(3);
  for (std::size_t s = 0; s < res.series.size(); ++s) {
    kpo::CsvTable t;
    t.metadata = {{"initial", res.series[s].initial}, {"kappa_per_us", kpo::format_number(kappa)}};
    t.header = {"t_us", "+Cat", "-Cat", "+Coh", "-Coh", "+iCat", "-iCat"};
    for (std::size_t i = 0; i < waits.size(); ++i) {
      const auto& c = res.series[s].populations[i];
      t.rows.push_back({waits[i], c.plus_cat, c.minus_cat, c.plus_coh, c.minus_coh, c.plus_icat, c.minus_icat});
      z[s].push_back(c.z_diff());
      x[s].push_back(c.x_diff());
      y[s].push_back(c.y_diff());
    }
    r.files.push_back({"populations_" + files[s] + ".csv", kpo::to_csv(t)});
  }

  ojson fits = ojson::object();
  double tz = NAN;
  try {
    const kpo::FitResult fz = kpo::fit_exp_decay(waits, z[0]);
    fits["z_from_plus_cat"] = fit_json(fz, false);
    tz = fz.time_constant();
  } catch (const kpo::Error& e) {
    fits["z_from_plus_cat"] = ojson{{"error", std::string(kpo::to_string(e.code()))}, {"message", e.what()}};
  }
  kpo::FitResult fx;
  kpo::FitResult fy;
  fits["x_from_plus_coh"] = try_cosine(waits, x[1], &fx);
  fits["y_from_plus_icat"] = try_cosine(waits, y[2], &fy);

  // Direction of the first loss event: single-photon loss flips parity.
  const auto& first = res.series[0].populations;
  const bool parity_flip = first.size() > 1 && first[1].minus_cat > first[0].minus_cat;

  if (ctx.svg) {
    const std::vector<std::string> labels{"z: P(+Cat) - P(-Cat)", "x: P(+Coh) - P(-Coh)", "y: P(+iCat) - P(-iCat)"};
    std::vector<kpo::LineSeries> lines{{labels[0], waits, z[0]}, {labels[1], waits, x[1]}, {labels[2], waits, y[2]}};
    r.files.push_back({"relaxation.svg", kpo::svg_lines("Relaxation in the cat basis", "t (us)", "population difference", lines)});
  }

  r.summary["system"] = system_json(p);
  r.summary["kappa_per_us"] = kappa;
  r.summary["preparation"] = prep;
  r.summary["preparation_fidelity"] = res.preparation_fidelity;
  r.summary["T_z_us"] = number(tz);
  r.summary["T_x_us"] = fits["x_from_plus_coh"].contains("frequency_MHz") ? number(fx.time_constant()) : ojson(nullptr);
  r.summary["f_x_MHz"] = fits["x_from_plus_coh"].contains("frequency_MHz") ? number(fx.frequency) : ojson(nullptr);
  r.summary["T_y_us"] = fits["y_from_plus_icat"].contains("frequency_MHz") ? number(fy.time_constant()) : ojson(nullptr);
  r.summary["f_y_MHz"] = fits["y_from_plus_icat"].contains("frequency_MHz") ? number(fy.frequency) : ojson(nullptr);
  r.summary["splitting_MHz"] = split;
  if (fits["x_from_plus_coh"].contains("frequency_MHz")) {
    r.summary["f_x_relative_to_splitting"] = std::abs(fx.frequency - std::abs(split)) / std::abs(split);
  }
  r.summary["initial_transfer"] = parity_flip ? "+Cat -> -Cat" : "none";
  r.summary["fits"] = fits;
  if (std::isfinite(tz)) r.checked.push_back({"T_z_us", tz, 0.02});
  if (fits["x_from_plus_coh"].contains("frequency_MHz")) r.checked.push_back({"f_x_MHz", fx.frequency, 1e-3});
  return r;
}

ExperimentResult run_map_cat(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto& p = cfg.system;
  const double tau = from_ns(section.number("tau_ramp_ns", 300.0));
  const bool cd = section.boolean("counterdiabatic", true);
  const double q = section.number("cd_quadrature_rad", 0.0);
  Section g = section.child("grid");
  const double extent = g.number("extent", 3.0);
  const int count = g.integer("count", 81, 3);
  g.finish();
  section.finish();

  const kpo::PulseSchedule ramp = kpo::ramp_schedule(p.pump, tau, cd, p.detuning, q);
  const kpo::CatBasis basis = kpo::cat_basis_from_model(p);
  const kpo::MappingCalibration cal = kpo::calibrate_mapping(p, ramp, basis, cfg.propagation);
  const kpo::PhaseGrid grid = kpo::PhaseGrid::square(extent, count);

  ExperimentResult r;
  const double end = ramp.total_duration();
  const std::vector<std::string> names{"even", "odd"};
  ojson states = ojson::object();
  for (int n = 0; n < 2; ++n) {
    const auto traj = kpo::propagate(p, ramp, kpo::StateVector::fock(n, p.dim), std::span<const double>(&end, 1),
                                     cfg.propagation);
    const kpo::DensityMatrix rho = traj.density(0);
    kpo::WignerMap map = kpo::wigner_ideal(rho, grid, ctx.workers);
    const auto pops = kpo::cardinal_populations(rho, basis);
    r.files.push_back({"wigner_" + names[n] + ".csv", kpo::wigner_to_csv(map)});
    if (ctx.svg) {
      kpo::HeatmapStyle style;
      style.title = "Wigner function after the ramp from |" + std::to_string(n) + ">";
      style.x_label = "Re alpha";
      style.y_label = "Im alpha";
      style.value_label = "W";
      style.x_min = style.y_min = -extent;
      style.x_max = style.y_max = extent;
      style.diverging = true;
      r.files.push_back({"wigner_" + names[n] + ".svg", kpo::svg_heatmap(map.values, style)});
    }
    states[names[n]] = ojson{{"from_fock", n},
                             {"fidelity", n == 0 ? cal.fidelity_even : cal.fidelity_odd},
                             {"qubit_population", pops.z_sum()},
                             {"parity", rho.expectation(kpo::parity_op(p.dim))},
                             {"mean_photon_number", rho.expectation(kpo::number_op(p.dim))},
                             {"W0", kpo::wigner_at(rho, 0.0)},
                             {"W_min", map.values.minCoeff()},
                             {"integral", map.integral()}};
  }

  r.summary["system"] = system_json(p);
  r.summary["tau_ramp_ns"] = kpo::units::to_ns(tau);
  r.summary["counterdiabatic"] = cd;
  r.summary["cd_quadrature_rad"] = q;
  r.summary["alpha_c"] = kpo::classical_cat_amplitude(p.kerr, p.pump, p.detuning);
  r.summary["alpha_eff"] = std::abs(basis.alpha_eff);
  r.summary["relative_phase_rad"] = cal.relative_phase();
  r.summary["states"] = states;
  r.checked = {{"fidelity_even", cal.fidelity_even, 1e-3}, {"fidelity_odd", cal.fidelity_odd, 1e-3}};
  return r;
}

}  // namespace kposim
