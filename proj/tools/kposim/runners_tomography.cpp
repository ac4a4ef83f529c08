#include <cmath>
#include <numbers>
#include <random>

#include "experiments.hpp"
#include "kpo/dynamics.hpp"
#include "kpo/error.hpp"
#include "kpo/linalg.hpp"
#include "kpo/tomography.hpp"
#include "kpo/units.hpp"

namespace kposim {

using kpo::units::from_mhz;
using kpo::units::from_ns;

namespace {

kpo::DensityMatrix prepare_state(const RunConfig& cfg, Section& s, std::string& label) {
  const auto& p = cfg.system;
  label = s.text("type", "even_cat",
                 {"even_cat", "odd_cat", "coherent", "fock", "model_even_cat", "model_odd_cat", "mapped"});
  const kpo::cplx alpha{s.number("alpha_re", 1.154), s.number("alpha_im", 0.0)};
  const int n = s.integer("n", 0, 0);
  const double tau = from_ns(s.number("tau_ramp_ns", 300.0));
  const bool cd = s.boolean("counterdiabatic", true);
  s.finish();
  if (label == "even_cat") return kpo::DensityMatrix::pure(kpo::cat_state(alpha, kpo::Parity::even, p.dim));
  if (label == "odd_cat") return kpo::DensityMatrix::pure(kpo::cat_state(alpha, kpo::Parity::odd, p.dim));
  if (label == "coherent") return kpo::DensityMatrix::pure(kpo::coherent_state(alpha, p.dim));
  if (label == "fock") return kpo::DensityMatrix::pure(kpo::StateVector::fock(n, p.dim));
  if (label == "mapped") {
    const auto ramp = kpo::ramp_schedule(p.pump, tau, cd, p.detuning);
    const double end = ramp.total_duration();
    return kpo::propagate(p, ramp, kpo::StateVector::fock(n, p.dim), std::span<const double>(&end, 1), cfg.propagation)
        .density(0);
  }
  const kpo::CatBasis basis = kpo::cat_basis_from_model(p);
  return kpo::DensityMatrix::pure(label == "model_even_cat" ? basis.plus_cat : basis.minus_cat);
}

kpo::HeatmapStyle wigner_style(const std::string& title, const kpo::PhaseGrid& g) {
  kpo::HeatmapStyle style;
  style.title = title;
  style.x_label = "Re alpha";
  style.y_label = "Im alpha";
  style.value_label = "W";
  style.x_min = g.re_min;
  style.x_max = g.re_max;
  style.y_min = g.im_min;
  style.y_max = g.im_max;
  style.diverging = true;
  return style;
}

ojson cat_size_json(const kpo::WignerMap& map) {
  try {
    return kpo::cat_size(map);
  } catch (const kpo::Error&) {
    return nullptr;
  }
}

}  // namespace

ExperimentResult run_wigner(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto& p = cfg.system;
  Section state_section = section.child("state");
  std::string label;
  const kpo::DensityMatrix rho = prepare_state(cfg, state_section, label);
  Section g = section.child("grid");
  const double extent = g.number("extent", 3.0);
  const int count = g.integer("count", 81, 3);
  g.finish();
  const std::string mode = section.text("mode", "ideal", {"ideal", "simulated"});
  const double sigma = section.number("noise_sigma", 0.0);
  const bool reconstruct = section.boolean("reconstruct", false);
  const int recon_dim = section.integer("reconstruction_dim", std::min(10, p.dim), 2);
  const double kerr_tau = from_ns(section.number("kerr_correct_ns", 0.0));
  Section ps = section.child("pulse");
  kpo::TomographyPulse pulse;
  pulse.duration = from_ns(ps.number("duration_ns", 20.0));
  pulse.max_amplitude = from_mhz(ps.number("max_beta_MHz", 0.0));
  pulse.pre_delay = from_ns(ps.number("pre_delay_ns", 0.0));
  pulse.pump_on = ps.boolean("pump_on", false);
  ps.finish();
  section.finish();
  if (sigma < 0) kpo::fail(kpo::ErrorCode::config, "'wigner.noise_sigma' must be non-negative");
  if (recon_dim > p.dim) kpo::fail(kpo::ErrorCode::config, "'wigner.reconstruction_dim' exceeds system.dim");

  const kpo::PhaseGrid grid = kpo::PhaseGrid::square(extent, count);
  grid.validate();
  kpo::MeasurementRecord record;
  record.points = grid.points();
  kpo::WignerMap map;
  const kpo::WignerMap ideal = kpo::wigner_ideal(rho, grid, ctx.workers);
  if (mode == "simulated") {
    record = kpo::simulate_ld_tomography(p, rho, record.points, pulse, ctx.workers, cfg.propagation);
  } else {
    record.parity.resize(record.points.size());
    for (int i = 0; i < grid.im_count; ++i) {
      for (int j = 0; j < grid.re_count; ++j) {
        record.parity[static_cast<std::size_t>(i * grid.re_count + j)] = ideal.values(i, j) * std::numbers::pi / 2.0;
      }
    }
  }
  if (sigma > 0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : record.parity) v += noise(rng);
  }
  map = kpo::record_to_map(record, grid);
  map.source = mode;

  ExperimentResult r;
  r.files.push_back({"wigner.csv", kpo::wigner_to_csv(map)});
  if (mode == "simulated" || sigma > 0 || reconstruct) r.files.push_back({"record.jsonl", kpo::record_to_jsonl(record)});
  if (ctx.svg) r.files.push_back({"wigner.svg", kpo::svg_heatmap(map.values, wigner_style("Wigner function (" + mode + ")", grid))});

  r.summary["system"] = system_json(p);
  r.summary["state"] = label;
  r.summary["mode"] = mode;
  r.summary["noise_sigma"] = sigma;
  r.summary["seed"] = cfg.seed;
  r.summary["integral"] = map.integral();
  r.summary["W0_ideal"] = kpo::wigner_at(rho, 0.0);
  r.summary["parity_ideal"] = rho.expectation(kpo::parity_op(p.dim));
  r.summary["max_abs_deviation_from_ideal"] = (map.values - ideal.values).cwiseAbs().maxCoeff();
  r.summary["cat_size"] = cat_size_json(map);
  r.checked = {{"integral", map.integral(), 1e-3}};

  if (reconstruct) {
    const kpo::Reconstruction rec = kpo::reconstruct_density(record, recon_dim);
    kpo::DensityMatrix out = rec.rho;
    if (kerr_tau > 0) out = kpo::kerr_correct(out, p.kerr, p.detuning, kerr_tau);
    kpo::Matrix padded = kpo::Matrix::Zero(p.dim, p.dim);
    padded.topLeftCorner(recon_dim, recon_dim) = out.matrix();
    const double fid = kpo::state_fidelity(padded, rho.matrix());
    const kpo::WignerMap rec_map = kpo::wigner_ideal(kpo::DensityMatrix(padded), grid, ctx.workers);
    r.files.push_back({"wigner_reconstructed.csv", kpo::wigner_to_csv(rec_map)});
    kpo::CsvTable dm;
    dm.header = {"m", "n", "re", "im"};
    for (int m = 0; m < recon_dim; ++m) {
      for (int n = 0; n < recon_dim; ++n) {
        dm.rows.push_back({static_cast<double>(m), static_cast<double>(n), out(m, n).real(), out(m, n).imag()});
      }
    }
    r.files.push_back({"density_reconstructed.csv", kpo::to_csv(dm)});
    if (ctx.svg) {
      r.files.push_back({"wigner_reconstructed.svg",
                         kpo::svg_heatmap(rec_map.values, wigner_style("Wigner function of the reconstruction", grid))});
    }
    r.summary["reconstruction"] = ojson{{"dim", recon_dim},
                                        {"fidelity", fid},
                                        {"purity", out.purity()},
                                        {"condition", rec.condition},
                                        {"iterations", rec.iterations},
                                        {"residual_norm", rec.residual_norm},
                                        {"kerr_correct_ns", kpo::units::to_ns(kerr_tau)}};
    r.checked.push_back({"reconstruction.fidelity", fid, 2e-3});
  }
  return r;
}

}  // namespace kposim
