// kposim: experiment runner for the Kerr parametric oscillator model.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "experiments.hpp"
#include "kpo/error.hpp"
#include "kpo/io.hpp"
#include "kpo/parallel.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kPhysics = 3, kIo = 4 };

int exit_code_for(kpo::ErrorCode code) {
  switch (code) {
    case kpo::ErrorCode::config:
    case kpo::ErrorCode::usage: return kConfig;
    case kpo::ErrorCode::io: return kIo;
    default: return kPhysics;
  }
}

int report(int exit_code, const std::string& code, const std::string& message,
           const kposim::ojson& extra = kposim::ojson::object()) {
  kposim::ojson err{{"code", code}, {"message", message}, {"exit_code", exit_code}};
  for (const auto& [k, v] : extra.items()) err[k] = v;
  std::cerr << kposim::ojson{{"error", err}}.dump() << "\n";
  return exit_code;
}

int report(const kpo::Error& e) {
  kposim::ojson extra = kposim::ojson::object();
  if (e.required_dim) extra["required_dim"] = *e.required_dim;
  if (e.at_time) extra["at_time_us"] = *e.at_time;
  return report(exit_code_for(e.code()), std::string(kpo::to_string(e.code())), e.what(), extra);
}

/// Compares the checked values of two runs; returns the block stored in the summary.
kposim::ojson compare_runs(const kposim::ExperimentResult& base, const kposim::ExperimentResult& fine, int dim,
                           bool& passed) {
  std::map<std::string, double> refined;
  for (const auto& c : fine.checked) refined[c.name] = c.value;
  kposim::ojson values = kposim::ojson::array();
  passed = true;
  for (const auto& c : base.checked) {
    const auto it = refined.find(c.name);
    const double other = it == refined.end() ? NAN : it->second;
    const double change = std::abs(other - c.value);
    const bool ok = std::isfinite(change) && change <= c.tolerance;
    passed = passed && ok;
    values.push_back({{"name", c.name},
                      {"value", kposim::number(c.value)},
                      {"refined", kposim::number(other)},
                      {"change", kposim::number(change)},
                      {"tolerance", c.tolerance},
                      {"passed", ok}});
  }
  return {{"refined_dim", dim}, {"passed", passed}, {"values", values}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kposim: Kerr parametric oscillator experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "out";
  unsigned workers = 0;
  bool check = false;
  bool svg = false;
  bool verbose = false;
  for (const auto& name : kposim::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "Output root directory");
    sub->add_option("--workers", workers, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--check", check, "Rerun at doubled dim and halved tolerances and compare");
    sub->add_flag("--svg", svg, "Also write SVG figures");
    sub->add_flag("-v,--verbose", verbose, "Log progress to stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kConfig, "usage", e.what());
  }

  auto logger = spdlog::stderr_color_mt("kposim");
  logger->set_level(verbose ? spdlog::level::info : spdlog::level::warn);
  const std::string experiment = app.get_subcommands().front()->get_name();

  try {
    kposim::RunConfig cfg = kposim::load_config(config_path, experiment);
    kposim::RunContext ctx{workers == 0 ? kpo::default_workers() : workers, svg};
    logger->info("running {} (dim {}, {} workers)", experiment, cfg.system.dim, ctx.workers);
    kposim::ExperimentResult result = kposim::run_experiment(cfg, ctx);

    bool passed = true;
    if (check) {
      kposim::RunConfig fine = cfg;
      fine.system.dim *= 2;
      fine.propagation.integrator.rtol /= 2;
      fine.propagation.integrator.atol /= 2;
      logger->info("check run at dim {}", fine.system.dim);
      const kposim::ExperimentResult refined = kposim::run_experiment(fine, {ctx.workers, false});
      result.summary["check"] = compare_runs(result, refined, fine.system.dim, passed);
    }

    const std::string dir = out_dir + "/" + experiment + "/";
    for (const auto& f : result.files) kpo::write_file(dir + f.name, f.content);
    kpo::write_file(dir + "summary.json", result.summary.dump(2) + "\n");
    logger->info("wrote {} files to {}", result.files.size() + 1, dir);
    if (!passed) {
      return report(kPhysics, "check_failed", "summary values moved more than their tolerance at doubled dim");
    }
    return kOk;
  } catch (const kpo::Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    return report(kPhysics, "internal", e.what());
  }
}
