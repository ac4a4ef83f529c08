#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "kpo/io.hpp"

namespace kposim {

using ojson = nlohmann::ordered_json;

struct OutputFile {
  std::string name;  ///< relative to <out>/<experiment>/
  std::string content;
};

/// A summary value that `--check` compares between the normal run and the
/// refined run (doubled dim, halved tolerances).
struct CheckedValue {
  std::string name;
  double value = 0;
  double tolerance = 0;  ///< absolute
};

struct ExperimentResult {
  std::vector<OutputFile> files;
  ojson summary = ojson::object();
  std::vector<CheckedValue> checked;
};

struct RunContext {
  unsigned workers = 0;
  bool svg = false;
};

/// Reads the experiment's section from cfg.root, rejects unknown keys and
/// runs it. Throws kpo::Error.
ExperimentResult run_experiment(const RunConfig& cfg, const RunContext& ctx);

// Individual runners; `section` is the experiment block of the config.
ExperimentResult run_rabi(const RunConfig& cfg, Section& section, const RunContext& ctx, bool pump);
ExperimentResult run_map_cat(const RunConfig& cfg, Section& section, const RunContext& ctx);
ExperimentResult run_cat_size(const RunConfig& cfg, Section& section, const RunContext& ctx);
ExperimentResult run_relax(const RunConfig& cfg, Section& section, const RunContext& ctx);
ExperimentResult run_quasi_surface(const RunConfig& cfg, Section& section, const RunContext& ctx);
ExperimentResult run_cat_rabi(const RunConfig& cfg, Section& section, const RunContext& ctx);
ExperimentResult run_cat_ramsey(const RunConfig& cfg, Section& section, const RunContext& ctx);
ExperimentResult run_tls_compare(const RunConfig& cfg, Section& section, const RunContext& ctx);
ExperimentResult run_qpt(const RunConfig& cfg, Section& section, const RunContext& ctx);
ExperimentResult run_wigner(const RunConfig& cfg, Section& section, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Shared helpers

/// JSON number, or null when not finite.
ojson number(double v);
ojson system_json(const kpo::SystemParams& p);

/// Long-format table of a map: columns (y_name, x_name, value_name), rows in
/// y-major order.
kpo::CsvTable map_table(const std::string& y_name, const std::vector<double>& y, const std::string& x_name,
                        const std::vector<double>& x, const std::string& value_name, const Eigen::MatrixXd& values);

/// Root-mean-square of values(i, :) - values(n-1-i, :) over all rows; the
/// y grid must be symmetric about zero.
double rms_asymmetry(const std::vector<double>& y, const Eigen::MatrixXd& values);

std::vector<double> scaled(const std::vector<double>& v, double factor);

}  // namespace kposim
