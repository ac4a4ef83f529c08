#include <algorithm>
#include <cmath>
#include <numbers>

#include "experiments.hpp"
#include "kpo/dynamics.hpp"
#include "kpo/error.hpp"
#include "kpo/fit.hpp"
#include "kpo/parallel.hpp"
#include "kpo/qpt.hpp"
#include "kpo/spectral.hpp"
#include "kpo/units.hpp"

namespace kposim {

using kpo::units::from_mhz;
using kpo::units::from_ns;
using kpo::units::to_mhz;
using kpo::units::to_ns;

namespace {

constexpr double kPi = std::numbers::pi;

/// <Pi>(t) starting from `initial` under a rectangular drive; one row per
/// (detuning, phase) pair.
Eigen::MatrixXd parity_map(const kpo::SystemParams& p, const kpo::StateVector& initial, double beta,
                           const std::vector<double>& detunings, const std::vector<double>& phases,
                           const std::vector<double>& times, unsigned workers, const kpo::PropagationOptions& opt) {
  const std::size_t rows = detunings.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(times.size()));
  const kpo::OperatorMatrix parity = kpo::parity_op(p.dim);
  kpo::parallel_for(rows, workers, [&](std::size_t i) {
    const kpo::PulseSchedule s({kpo::drive_segment(times.back(), p.pump, p.detuning, beta, detunings[i], phases[i])});
    const auto traj = kpo::propagate(p, s, initial, times, opt);
    const auto values = traj.expectation(parity);
    for (std::size_t j = 0; j < values.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[j];
  });
  return out;
}

kpo::HeatmapStyle parity_style(const std::string& title, const std::string& y_label, const std::vector<double>& y,
                               const std::vector<double>& t_ns) {
  kpo::HeatmapStyle style;
  style.title = title;
  style.x_label = "t (ns)";
  style.y_label = y_label;
  style.value_label = "<Pi>";
  style.x_min = t_ns.front();
  style.x_max = t_ns.back();
  style.y_min = y.front();
  style.y_max = y.back();
  style.diverging = true;
  return style;
}

std::vector<double> positive_times(Section& section, double max_ns, int count) {
  const auto t_ns = section.grid("time_ns", 0.0, max_ns, count);
  if (t_ns.front() < 0) kpo::fail(kpo::ErrorCode::config, "times must be non-negative");
  return t_ns;
}

}  // namespace

ExperimentResult run_cat_rabi(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto& p = cfg.system;
  const double beta_mhz = section.number("beta_MHz", to_mhz(p.drive));
  const auto det_mhz = section.grid("Delta_d_MHz", -2.0, 2.0, 41);
  const auto phases = section.grid("phi_d_rad", 0.0, 2.0 * kPi, 37);
  const double phase_det_mhz = section.number("phase_map_Delta_d_MHz", 0.0);
  const auto t_ns = positive_times(section, 1000.0, 101);
  section.finish();
  if (!(beta_mhz > 0)) kpo::fail(kpo::ErrorCode::config, "'cat-rabi.beta_MHz' must be positive");

  const kpo::CatBasis basis = kpo::cat_basis_from_model(p);
  const auto times = scaled(t_ns, 1e-3);
  const double beta = from_mhz(beta_mhz);
  const Eigen::MatrixXd det_map =
      parity_map(p, basis.plus_cat, beta, scaled(det_mhz, kpo::units::two_pi),
                 std::vector<double>(det_mhz.size(), p.drive_phase), times, ctx.workers, cfg.propagation);
  const Eigen::MatrixXd phase_map = parity_map(p, basis.plus_cat, beta,
                                               std::vector<double>(phases.size(), from_mhz(phase_det_mhz)), phases,
                                               times, ctx.workers, cfg.propagation);
  const double asym = rms_asymmetry(det_mhz, det_map);

  // Rabi rate on resonance; the qubit-space coupling is 2 beta alpha sigma_x.
  std::size_t zero = 0;
  for (std::size_t i = 0; i < det_mhz.size(); ++i) {
    if (std::abs(det_mhz[i]) < std::abs(det_mhz[zero])) zero = i;
  }
  std::vector<double> row(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) row[j] = det_map(static_cast<Eigen::Index>(zero), static_cast<Eigen::Index>(j));
  const double alpha = std::abs(basis.alpha_eff);
  ojson fit_summary;
  double beta_fit = NAN;
  try {
    const auto f = kpo::fit_damped_cosine(times, row);
    beta_fit = f.frequency / (4.0 * alpha);
    fit_summary = {{"frequency_MHz", f.frequency}, {"rate_per_us", f.rate}, {"beta_MHz", beta_fit}};
  } catch (const kpo::Error& e) {
    fit_summary = {{"error", std::string(kpo::to_string(e.code()))}, {"message", e.what()}};
  }

  ExperimentResult r;
  r.files.push_back({"parity_vs_detuning.csv", kpo::to_csv(map_table("Delta_d_MHz", det_mhz, "time_ns", t_ns, "parity", det_map))});
  r.files.push_back({"parity_vs_phase.csv", kpo::to_csv(map_table("phi_d_rad", phases, "time_ns", t_ns, "parity", phase_map))});
  if (ctx.svg) {
    r.files.push_back({"parity_vs_detuning.svg",
                       kpo::svg_heatmap(det_map, parity_style("Cat Rabi: parity vs drive detuning", "Delta_d (MHz)", det_mhz, t_ns))});
    r.files.push_back({"parity_vs_phase.svg",
                       kpo::svg_heatmap(phase_map, parity_style("Cat Rabi: parity vs drive phase", "phi_d (rad)", phases, t_ns))});
  }
  r.summary["system"] = system_json(p);
  r.summary["beta_MHz"] = beta_mhz;
  r.summary["alpha_eff"] = alpha;
  r.summary["rms_asymmetry"] = asym;
  r.summary["resonant_fit"] = fit_summary;
  r.summary["phase_map_min"] = phase_map.minCoeff();
  r.summary["phase_map_max"] = phase_map.maxCoeff();
  r.checked = {{"rms_asymmetry", asym, 1e-3}};
  if (std::isfinite(beta_fit)) r.checked.push_back({"beta_fit_MHz", beta_fit, 2e-3});
  return r;
}

ExperimentResult run_tls_compare(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto& p = cfg.system;
  const double beta_mhz = section.number("beta_MHz", to_mhz(p.drive));
  const auto det_mhz = section.grid("Delta_d_MHz", -2.0, 2.0, 41);
  const auto t_ns = positive_times(section, 1000.0, 101);
  const bool include_kpo = section.boolean("include_kpo", true);
  section.finish();
  if (!(beta_mhz > 0)) kpo::fail(kpo::ErrorCode::config, "'tls-compare.beta_MHz' must be positive");

  const kpo::CatBasis basis = kpo::cat_basis_from_model(p);
  const double alpha = std::abs(basis.alpha_eff);
  const double beta = from_mhz(beta_mhz);
  const double omega = 4.0 * beta * alpha;
  const auto times = scaled(t_ns, 1e-3);
  const auto dets = scaled(det_mhz, kpo::units::two_pi);

  auto tls_map = [&](kpo::TlsVariant variant) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(dets.size()), static_cast<Eigen::Index>(times.size()));
    kpo::parallel_for(dets.size(), ctx.workers, [&](std::size_t i) {
      const double d = dets[i];
      const auto states = kpo::propagate_dense(
          [&](double t) { return kpo::Matrix(kpo::tls_rabi_hamiltonian(variant, omega, d, t)); },
          kpo::Vector::Unit(2, 0), times, cfg.propagation.integrator);
      for (std::size_t j = 0; j < states.size(); ++j) {
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::norm(states[j][0]) - std::norm(states[j][1]);
      }
    });
    return out;
  };
  const Eigen::MatrixXd sym = tls_map(kpo::TlsVariant::symmetrized);
  const Eigen::MatrixXd std_map = tls_map(kpo::TlsVariant::standard);

  ExperimentResult r;
  r.files.push_back({"tls_symmetrized.csv", kpo::to_csv(map_table("Delta_d_MHz", det_mhz, "time_ns", t_ns, "sigma_z", sym))});
  r.files.push_back({"tls_standard.csv", kpo::to_csv(map_table("Delta_d_MHz", det_mhz, "time_ns", t_ns, "sigma_z", std_map))});
  r.summary["system"] = system_json(p);
  r.summary["beta_MHz"] = beta_mhz;
  r.summary["rabi_MHz"] = to_mhz(omega);
  r.summary["rms_asymmetry_symmetrized"] = rms_asymmetry(det_mhz, sym);
  r.summary["rms_asymmetry_standard"] = rms_asymmetry(det_mhz, std_map);
  if (include_kpo) {
    const Eigen::MatrixXd kpo_map = parity_map(p, basis.plus_cat, beta, dets, std::vector<double>(dets.size(), p.drive_phase),
                                               times, ctx.workers, cfg.propagation);
    auto rms = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
      return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
    };
    r.files.push_back({"kpo_parity.csv", kpo::to_csv(map_table("Delta_d_MHz", det_mhz, "time_ns", t_ns, "parity", kpo_map))});
    r.summary["rms_asymmetry_kpo"] = rms_asymmetry(det_mhz, kpo_map);
    r.summary["rms_difference_symmetrized"] = rms(sym, kpo_map);
    r.summary["rms_difference_standard"] = rms(std_map, kpo_map);
    r.checked.push_back({"rms_difference_symmetrized", rms(sym, kpo_map), 2e-3});
    if (ctx.svg) {
      r.files.push_back({"kpo_parity.svg", kpo::svg_heatmap(kpo_map, parity_style("KPO parity", "Delta_d (MHz)", det_mhz, t_ns))});
    }
  }
  if (ctx.svg) {
    r.files.push_back({"tls_symmetrized.svg",
                       kpo::svg_heatmap(sym, parity_style("Two-level model, symmetrized drive", "Delta_d (MHz)", det_mhz, t_ns))});
    r.files.push_back({"tls_standard.svg",
                       kpo::svg_heatmap(std_map, parity_style("Two-level model, standard drive", "Delta_d (MHz)", det_mhz, t_ns))});
  }
  return r;
}

ExperimentResult run_cat_ramsey(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto& p = cfg.system;
  const double x_beta_mhz = section.number("x_drive_MHz", to_mhz(p.drive));
  const double x_duration_ns = section.number("x_duration_ns", 0.0);
  const auto delta_mhz = section.grid("delta_MHz", 0.0, 6.0, 25);
  const auto tau_ns = section.grid("tau_z_ns", 100.0, 1000.0, 10);
  const auto ripple_betas = section.numbers("ripple_beta_MHz", {});
  const auto ripple_ns = section.grid("ripple_time_ns", 0.0, 6000.0, 121);
  section.finish();
  if (!(x_beta_mhz > 0)) kpo::fail(kpo::ErrorCode::config, "'cat-ramsey.x_drive_MHz' must be positive");
  for (double t : tau_ns) {
    if (!(t > 0)) kpo::fail(kpo::ErrorCode::config, "'cat-ramsey.tau_z_ns' values must be positive");
  }
  for (double b : ripple_betas) {
    if (!(b > 0)) kpo::fail(kpo::ErrorCode::config, "'cat-ramsey.ripple_beta_MHz' values must be positive");
  }

  const kpo::CatBasis basis = kpo::cat_basis_from_model(p);
  const double beta = from_mhz(x_beta_mhz);
  const double tx = x_duration_ns > 0 ? from_ns(x_duration_ns) : kpo::calibrate_x_half(p, basis, beta, cfg.propagation);
  const kpo::Segment x_half = kpo::drive_segment(tx, p.pump, p.detuning, beta, 0.0, 0.0);
  const kpo::OperatorMatrix parity = kpo::parity_op(p.dim);

  const std::size_t nd = delta_mhz.size();
  const std::size_t nt = tau_ns.size();
  Eigen::MatrixXd map(static_cast<Eigen::Index>(nd), static_cast<Eigen::Index>(nt));
  kpo::parallel_for(nd * nt, ctx.workers, [&](std::size_t job) {
    const std::size_t i = job / nt;
    const std::size_t j = job % nt;
    kpo::PulseSchedule s({x_half});
    s.append(kpo::chirp_schedule(from_mhz(delta_mhz[i]), from_ns(tau_ns[j]), p.pump, p.detuning));
    s.append(x_half);
    const double end = s.total_duration();
    const auto traj = kpo::propagate(p, s, basis.plus_cat, std::span<const double>(&end, 1), cfg.propagation);
    map(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = traj.expectation(parity)[0];
  });

  ExperimentResult r;
  r.files.push_back({"ramsey.csv", kpo::to_csv(map_table("delta_MHz", delta_mhz, "tau_z_ns", tau_ns, "parity", map))});
  if (ctx.svg) {
    kpo::HeatmapStyle style = parity_style("Ramsey: parity vs chirp depth", "omega_p' - omega_p (MHz)", delta_mhz, tau_ns);
    style.x_label = "tau_Z (ns)";
    r.files.push_back({"ramsey.svg", kpo::svg_heatmap(map, style)});
  }

  // Background ripples: free Ramsey fringes at increasing drive strength.
  ojson ripples = ojson::array();
  if (!ripple_betas.empty()) {
    const double gap = kpo::energy_gap(p.kerr, p.pump, p.detuning, p.dim);
    const auto holds = scaled(ripple_ns, 1e-3);
    std::vector<ojson> entries(ripple_betas.size());
    std::vector<std::vector<double>> curves(ripple_betas.size());
    kpo::parallel_for(ripple_betas.size(), ctx.workers, [&](std::size_t k) {
      const double b = from_mhz(ripple_betas[k]);
      const double t = kpo::calibrate_x_half(p, basis, b, cfg.propagation);
      const kpo::PulseSchedule pulse({kpo::drive_segment(t, p.pump, p.detuning, b, 0.0, 0.0)});
      const double end = pulse.total_duration();
      const kpo::Matrix u = kpo::propagator(p, pulse, std::span<const double>(&end, 1), cfg.propagation).back();
      const auto first = kpo::propagate(p, pulse, basis.plus_cat, std::span<const double>(&end, 1), cfg.propagation);
      const kpo::PulseSchedule hold({kpo::hold_segment(std::max(holds.back(), 1e-9), p.pump, p.detuning)});
      const auto free = kpo::propagate(p, hold, first.density(0), holds, cfg.propagation);
      std::vector<double> fringe(holds.size());
      const kpo::Matrix up = u.adjoint() * parity * u;
      for (std::size_t i = 0; i < holds.size(); ++i) fringe[i] = free.density(i).expectation(up);
      curves[k] = fringe;
      ojson e{{"beta_MHz", ripple_betas[k]}, {"beta_over_gap", b / gap}, {"x_duration_ns", to_ns(t)}};
      try {
        const auto f = kpo::fit_damped_cosine(holds, fringe);
        double worst = 0;
        for (std::size_t i = 0; i < holds.size(); ++i) {
          const double model = f.offset + f.amplitude * std::cos(kpo::units::two_pi * f.frequency * holds[i] + f.phase) *
                                              std::exp(-f.rate * holds[i]);
          worst = std::max(worst, std::abs(fringe[i] - model));
        }
        e["fringe_frequency_MHz"] = f.frequency;
        e["ripple_amplitude"] = worst;
      } catch (const kpo::Error& err) {
        e["ripple_amplitude"] = nullptr;
        e["fit_error"] = err.what();
      }
      entries[k] = e;
    });
    kpo::CsvTable t;
    t.header = {"hold_ns"};
    for (double b : ripple_betas) t.header.push_back("parity_beta_" + kpo::format_number(b) + "_MHz");
    for (std::size_t i = 0; i < holds.size(); ++i) {
      std::vector<double> row{ripple_ns[i]};
      for (const auto& c : curves) row.push_back(c[i]);
      t.rows.push_back(row);
    }
    r.files.push_back({"ripple.csv", kpo::to_csv(t)});
    for (auto& e : entries) ripples.push_back(e);
    r.summary["gap_MHz"] = to_mhz(gap);
  }

  r.summary["system"] = system_json(p);
  r.summary["x_drive_MHz"] = x_beta_mhz;
  r.summary["x_duration_ns"] = to_ns(tx);
  r.summary["parity_min"] = map.minCoeff();
  r.summary["parity_max"] = map.maxCoeff();
  r.summary["ripples"] = ripples;
  r.checked = {{"x_duration_ns", to_ns(tx), 0.05}};
  return r;
}

ExperimentResult run_qpt(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto& p = cfg.system;
  const auto kind_names = section.texts("kinds", {"mapping", "x_half", "z_half"}, {"mapping", "x_half", "z_half"});
  kpo::QptOptions opt;
  const double kappa = section.number("kappa_per_us", p.kappa);
  opt.tau_ramp = from_ns(section.number("tau_ramp_ns", 300.0));
  opt.counterdiabatic = section.boolean("counterdiabatic", true);
  opt.cd_quadrature = section.number("cd_quadrature_rad", 0.0);
  opt.x_drive = from_mhz(section.number("x_drive_MHz", 0.0));
  opt.x_duration = from_ns(section.number("x_duration_ns", 0.0));
  opt.tau_z = from_ns(section.number("tau_z_ns", 500.0));
  opt.z_delta_peak = from_mhz(section.number("z_delta_peak_MHz", 0.0));
  opt.detuning_jitter = from_mhz(section.number("detuning_jitter_MHz", 0.0));
  opt.jitter_nodes = section.integer("jitter_nodes", 7, 1);
  section.finish();
  if (kappa < 0) kpo::fail(kpo::ErrorCode::config, "'qpt.kappa_per_us' must be non-negative");
  if (opt.detuning_jitter < 0) kpo::fail(kpo::ErrorCode::config, "'qpt.detuning_jitter_MHz' must be non-negative");
  opt.workers = ctx.workers;
  opt.propagation = cfg.propagation;

  ExperimentResult r;
  r.summary["system"] = system_json(p);
  r.summary["kappa_per_us"] = kappa;
  ojson results = ojson::object();
  const std::array<const char*, 4> names{"II", "XX", "YY", "ZZ"};
  for (const auto& name : kind_names) {
    const kpo::QptKind kind = kpo::qpt_kind_from_string(name);
    const kpo::QptResult q = kpo::qpt_experiment(kind, p, kappa, opt);
    r.files.push_back({"chi_" + name + ".json", kpo::chi_to_json(q.chi)});
    r.files.push_back({"chi_" + name + ".csv", kpo::chi_to_csv(q.chi)});
    if (ctx.svg) r.files.push_back({"chi_" + name + ".svg", kpo::chi_to_svg(q.chi, "Process matrix: " + name)});

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(q.chi.chi, Eigen::EigenvaluesOnly);
    const kpo::ProcessMatrix error = kpo::error_process(q.chi, q.ideal_unitary);
    ojson diag = ojson::object();
    ojson err = ojson::object();
    std::string dominant = "none";
    double worst = 0;
    for (int m = 0; m < 4; ++m) {
      diag[names[static_cast<std::size_t>(m)]] = q.chi.chi(m, m).real();
      const double e = error.chi(m, m).real();
      err[names[static_cast<std::size_t>(m)]] = e;
      if (m > 0 && e > worst) {
        worst = e;
        dominant = names[static_cast<std::size_t>(m)];
      }
    }
    ojson j{{"fidelity", q.fidelity},
            {"gate_duration_ns", to_ns(q.gate_duration)},
            {"leakage", 1.0 - q.mean_output_trace},
            {"chi_diagonal", diag},
            {"error_weights", err},
            {"dominant_error", dominant},
            {"chi_min_eigenvalue", es.eigenvalues().minCoeff()},
            {"antihermitian_residual", q.chi.antihermitian_residual},
            {"trace_residual", q.chi.trace_residual}};
    if (kind == kpo::QptKind::mapping) j["frame_phase_rad"] = q.frame_phase;
    if (kind == kpo::QptKind::x_half) j["x_duration_ns"] = to_ns(q.calibrated_value);
    if (kind == kpo::QptKind::z_half) j["z_delta_peak_MHz"] = to_mhz(q.calibrated_value);
    results[name] = j;
    r.checked.push_back({name + ".fidelity", q.fidelity, 2e-3});
  }
  r.summary["processes"] = results;
  return r;
}

}  // namespace kposim
