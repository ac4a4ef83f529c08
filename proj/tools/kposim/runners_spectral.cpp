#include <algorithm>
#include <cmath>
#include <limits>

#include "experiments.hpp"
#include "kpo/error.hpp"
#include "kpo/model.hpp"
#include "kpo/parallel.hpp"
#include "kpo/spectral.hpp"
#include "kpo/tomography.hpp"
#include "kpo/units.hpp"

namespace kposim {

using kpo::units::from_mhz;
using kpo::units::to_mhz;

ExperimentResult run_quasi_surface(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto p_over_k = section.grid("P_over_K", 0.5, 3.0, 26);
  const auto delta_over_k = section.grid("Delta_over_K", 0.0, 1.2, 25);
  const int levels = section.integer("spectrum_levels", 12, 2);
  section.finish();

  const auto& p = cfg.system;
  const kpo::QuasiSpectrum spectrum = kpo::quasienergies(p.kerr, p.pump, p.detuning, p.dim);
  const double gap = kpo::energy_gap(p.kerr, p.pump, p.detuning, p.dim);
  const Eigen::MatrixXd surface = kpo::splitting_surface(p.kerr, p_over_k, delta_over_k, p.dim, ctx.workers);

  ExperimentResult r;
  kpo::CsvTable table = map_table("P_over_K", p_over_k, "Delta_over_K", delta_over_k, "splitting_over_K", surface);
  table.metadata = {{"K_MHz", kpo::format_number(to_mhz(p.kerr))}, {"dim", std::to_string(p.dim)}};
  r.files.push_back({"splitting_surface.csv", kpo::to_csv(table)});

  kpo::CsvTable levels_table;
  levels_table.header = {"index", "energy_MHz", "parity", "qubit"};
  const int shown = std::min<int>(levels, static_cast<int>(spectrum.energies.size()));
  for (int i = 0; i < shown; ++i) {
    const double qubit = i == spectrum.even_qubit ? 1.0 : (i == spectrum.odd_qubit ? -1.0 : 0.0);
    levels_table.rows.push_back({static_cast<double>(i), to_mhz(spectrum.energies[i]),
                                 static_cast<double>(spectrum.parities[static_cast<std::size_t>(i)]), qubit});
  }
  r.files.push_back({"spectrum.csv", kpo::to_csv(levels_table)});

  if (ctx.svg) {
    kpo::HeatmapStyle style;
    style.title = "Qubit splitting (E_odd - E_even) / K";
    style.x_label = "Delta / K";
    style.y_label = "P / K";
    style.value_label = "splitting / K";
    style.x_min = delta_over_k.front();
    style.x_max = delta_over_k.back();
    style.y_min = p_over_k.front();
    style.y_max = p_over_k.back();
    style.diverging = true;
    r.files.push_back({"splitting_surface.svg", kpo::svg_heatmap(surface, style)});
  }

  const double split = to_mhz(spectrum.splitting());
  r.summary["system"] = system_json(p);
  r.summary["splitting_MHz"] = split;
  r.summary["E_even_MHz"] = to_mhz(spectrum.energies[spectrum.even_qubit]);
  r.summary["E_odd_MHz"] = to_mhz(spectrum.energies[spectrum.odd_qubit]);
  r.summary["gap_MHz"] = to_mhz(gap);
  r.summary["gap_over_K"] = gap / p.kerr;
  r.summary["alpha_c"] = kpo::classical_cat_amplitude(p.kerr, p.pump, p.detuning);
  r.summary["surface_min_over_K"] = surface.minCoeff();
  r.summary["surface_max_over_K"] = surface.maxCoeff();
  r.checked = {{"splitting_MHz", split, 1e-4}, {"gap_over_K", gap / p.kerr, 1e-4}};
  return r;
}

ExperimentResult run_cat_size(const RunConfig& cfg, Section& section, const RunContext& ctx) {
  const auto& p0 = cfg.system;
  const auto pump_grid = section.grid("P_MHz", 0.5, 6.0, 12);
  const auto delta_list = section.numbers("Delta_MHz", {kpo::units::to_mhz(p0.detuning)});
  const bool from_wigner = section.boolean("wigner", true);
  Section g = section.child("grid");
  const double extent = g.number("extent", 3.5);
  const int count = g.integer("count", 71, 3);
  g.finish();
  Section surf = section.child("surface");
  const double surf_extent = surf.number("extent", 3.0);
  const int surf_count = surf.integer("count", 61, 3);
  surf.finish();
  section.finish();

  std::vector<double> pumps_mhz;
  std::vector<double> deltas_mhz;
  for (double d : delta_list) {
    for (double pm : pump_grid) {
      pumps_mhz.push_back(pm);
      deltas_mhz.push_back(d);
    }
  }
  const std::size_t n = pumps_mhz.size();
  std::vector<std::array<double, 4>> rows(n);
  kpo::parallel_for(n, ctx.workers, [&](std::size_t i) {
    kpo::SystemParams p = p0;
    p.pump = from_mhz(pumps_mhz[i]);
    p.detuning = from_mhz(deltas_mhz[i]);
    const double ac = kpo::classical_cat_amplitude(p.kerr, p.pump, p.detuning);
    // Stationary points of the classical surface where the cat lobes sit:
    // the two symmetric maxima on the real axis.
    double stationary = 0;
    for (const auto& s : kpo::stationary_points(p.kerr, p.pump, p.detuning)) {
      if (s.kind == kpo::StationaryKind::maximum) stationary = std::max(stationary, std::abs(s.alpha));
    }
    double model = std::numeric_limits<double>::quiet_NaN();
    double wig = std::numeric_limits<double>::quiet_NaN();
    if (ac > 0) {
      const kpo::CatBasis basis = kpo::cat_basis_from_model(p);
      model = std::abs(basis.alpha_eff);
      if (from_wigner) {
        // The even/odd mixture has no fringes, so its maxima sit on the lobes.
        const kpo::Matrix mix = 0.5 * (basis.plus_cat.amplitudes() * basis.plus_cat.amplitudes().adjoint() +
                                       basis.minus_cat.amplitudes() * basis.minus_cat.amplitudes().adjoint());
        const auto map = kpo::wigner_ideal(kpo::DensityMatrix(mix), kpo::PhaseGrid::square(extent, count), 1);
        wig = kpo::cat_size(map);
      }
    }
    rows[i] = {ac, stationary, model, wig};
  });

  ExperimentResult r;
  kpo::CsvTable table;
  table.header = {"Delta_MHz", "P_MHz", "alpha_classical", "alpha_stationary", "alpha_model", "alpha_wigner"};
  double max_rel = 0;
  double max_rel_wigner = 0;
  for (std::size_t i = 0; i < n; ++i) {
    table.rows.push_back({deltas_mhz[i], pumps_mhz[i], rows[i][0], rows[i][1], rows[i][2], rows[i][3]});
    if (rows[i][0] > 0) max_rel = std::max(max_rel, std::abs(rows[i][1] - rows[i][0]) / rows[i][0]);
    if (rows[i][0] > 0 && std::isfinite(rows[i][3])) {
      max_rel_wigner = std::max(max_rel_wigner, std::abs(rows[i][3] - rows[i][0]) / rows[i][0]);
    }
  }
  r.files.push_back({"cat_size.csv", kpo::to_csv(table)});

  std::vector<double> axis(static_cast<std::size_t>(surf_count));
  for (int k = 0; k < surf_count; ++k) axis[static_cast<std::size_t>(k)] = -surf_extent + 2.0 * surf_extent * k / (surf_count - 1);
  const auto surface = kpo::classical_surface(p0.kerr, p0.pump, p0.detuning, axis, axis);
  kpo::CsvTable st = map_table("im", axis, "re", axis, "energy_over_K", surface.energy / p0.kerr);
  r.files.push_back({"classical_surface.csv", kpo::to_csv(st)});

  kpo::CsvTable sp;
  sp.header = {"re", "im", "energy_over_K", "kind"};
  ojson points = ojson::array();
  for (const auto& s : surface.stationary) {
    const double kind = static_cast<double>(static_cast<int>(s.kind));
    sp.rows.push_back({s.alpha.real(), s.alpha.imag(), s.energy / p0.kerr, kind});
    points.push_back({{"re", s.alpha.real()}, {"im", s.alpha.imag()}, {"kind", std::string(kpo::to_string(s.kind))}});
  }
  sp.metadata = {{"kind", "0=minimum 1=maximum 2=saddle 3=degenerate"}};
  r.files.push_back({"stationary_points.csv", kpo::to_csv(sp)});

  if (ctx.svg) {
    kpo::HeatmapStyle style;
    style.title = "Classical energy surface";
    style.x_label = "Re alpha";
    style.y_label = "Im alpha";
    style.value_label = "E / K";
    style.x_min = style.y_min = -surf_extent;
    style.x_max = style.y_max = surf_extent;
    r.files.push_back({"classical_surface.svg", kpo::svg_heatmap(surface.energy / p0.kerr, style)});
    std::vector<kpo::LineSeries> lines(3);
    lines[0].name = "sqrt((P+Delta)/K)";
    lines[1].name = "model cat";
    lines[2].name = "Wigner peak";
    for (std::size_t i = 0; i < n; ++i) {
      if (deltas_mhz[i] != delta_list.front()) continue;
      lines[0].x.push_back(pumps_mhz[i]);
      lines[0].y.push_back(rows[i][0]);
      if (std::isfinite(rows[i][2])) {
        lines[1].x.push_back(pumps_mhz[i]);
        lines[1].y.push_back(rows[i][2]);
      }
      if (std::isfinite(rows[i][3])) {
        lines[2].x.push_back(pumps_mhz[i]);
        lines[2].y.push_back(rows[i][3]);
      }
    }
    r.files.push_back({"cat_size.svg", kpo::svg_lines("Cat size", "P (MHz)", "|alpha|", lines)});
  }

  r.summary["system"] = system_json(p0);
  r.summary["alpha_c"] = kpo::classical_cat_amplitude(p0.kerr, p0.pump, p0.detuning);
  r.summary["max_relative_deviation_stationary"] = max_rel;
  r.summary["max_relative_deviation_wigner"] = max_rel_wigner;
  r.summary["stationary_points"] = points;
  ojson per = ojson::array();
  for (std::size_t i = 0; i < n; ++i) {
    per.push_back({{"Delta_MHz", deltas_mhz[i]},
                   {"P_MHz", pumps_mhz[i]},
                   {"alpha_classical", number(rows[i][0])},
                   {"alpha_model", number(rows[i][2])},
                   {"alpha_wigner", number(rows[i][3])}});
  }
  r.summary["sizes"] = per;
  const double last_model = rows.back()[2];
  if (std::isfinite(last_model)) r.checked.push_back({"alpha_model_last", last_model, 1e-3});
  return r;
}

}  // namespace kposim
