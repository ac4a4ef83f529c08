#include "experiments.hpp"

#include <cmath>

#include "kpo/error.hpp"
#include "kpo/units.hpp"

namespace kposim {

using kpo::ErrorCode;
using kpo::fail;

ExperimentResult run_experiment(const RunConfig& cfg, const RunContext& ctx) {
  static const nlohmann::json empty = nlohmann::json::object();
  const auto& e = cfg.experiment;
  Section section(cfg.root.contains(e) ? cfg.root.at(e) : empty, e);
  if (e == "rabi-drive") return run_rabi(cfg, section, ctx, false);
  if (e == "rabi-pump") return run_rabi(cfg, section, ctx, true);
  if (e == "map-cat") return run_map_cat(cfg, section, ctx);
  if (e == "cat-size") return run_cat_size(cfg, section, ctx);
  if (e == "relax") return run_relax(cfg, section, ctx);
  if (e == "quasi-surface") return run_quasi_surface(cfg, section, ctx);
  if (e == "cat-rabi") return run_cat_rabi(cfg, section, ctx);
  if (e == "cat-ramsey") return run_cat_ramsey(cfg, section, ctx);
  if (e == "tls-compare") return run_tls_compare(cfg, section, ctx);
  if (e == "qpt") return run_qpt(cfg, section, ctx);
  if (e == "wigner") return run_wigner(cfg, section, ctx);
  fail(ErrorCode::config, "unknown experiment '" + e + "'");
}

ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson system_json(const kpo::SystemParams& p) {
  using kpo::units::to_mhz;
  return ojson{{"K_MHz", to_mhz(p.kerr)},
               {"P_MHz", to_mhz(p.pump)},
               {"Delta_MHz", to_mhz(p.detuning)},
               {"beta_MHz", to_mhz(p.drive)},
               {"Delta_d_MHz", to_mhz(p.drive_detuning)},
               {"phi_d_rad", p.drive_phase},
               {"kappa_per_us", p.kappa},
               {"dim", p.dim}};
}

kpo::CsvTable map_table(const std::string& y_name, const std::vector<double>& y, const std::string& x_name,
                        const std::vector<double>& x, const std::string& value_name, const Eigen::MatrixXd& values) {
  kpo::CsvTable t;
  t.header = {y_name, x_name, value_name};
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      t.rows.push_back({y[i], x[j], values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
  }
  return t;
}

double rms_asymmetry(const std::vector<double>& y, const Eigen::MatrixXd& values) {
  const std::size_t n = y.size();
  double scale = 0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(y[i] + y[n - 1 - i]) > 1e-9 * std::max(1.0, scale)) {
      fail(ErrorCode::config, "asymmetry needs a detuning grid symmetric about zero");
    }
  }
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = values.row(static_cast<Eigen::Index>(i)) - values.row(static_cast<Eigen::Index>(n - 1 - i));
    sum += d.squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(values.size()));
}

std::vector<double> scaled(const std::vector<double>& v, double factor) {
  std::vector<double> out(v);
  for (double& x : out) x *= factor;
  return out;
}

}  // namespace kposim
