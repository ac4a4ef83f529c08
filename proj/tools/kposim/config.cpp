#include "config.hpp"

#include <algorithm>
#include <cmath>

#include "kpo/error.hpp"
#include "kpo/io.hpp"
#include "kpo/units.hpp"

namespace kposim {

using kpo::ErrorCode;
using kpo::fail;

namespace {
const json& empty_object() {
  static const json e = json::object();
  return e;
}
}  // namespace

Section::Section(const json& object, std::string path) : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) fail(ErrorCode::config, "'" + path_ + "' must be an object");
}

const json& Section::get(const std::string& key) {
  used_.insert(key);
  return object_.at(key);
}

double Section::number(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_number()) fail(ErrorCode::config, "'" + where(key) + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(ErrorCode::config, "'" + where(key) + "' must be finite");
  return x;
}

double Section::required_number(const std::string& key) {
  if (!has(key)) fail(ErrorCode::config, "missing required key '" + where(key) + "'");
  return number(key, 0.0);
}

int Section::integer(const std::string& key, int fallback, int min_value) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_number_integer()) fail(ErrorCode::config, "'" + where(key) + "' must be an integer");
  const auto x = v.get<long long>();
  if (x < min_value || x > 100000000) {
    fail(ErrorCode::config, "'" + where(key) + "' must be >= " + std::to_string(min_value));
  }
  return static_cast<int>(x);
}

bool Section::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_boolean()) fail(ErrorCode::config, "'" + where(key) + "' must be true or false");
  return v.get<bool>();
}

std::string Section::text(const std::string& key, const std::string& fallback,
                          const std::vector<std::string>& allowed) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_string()) fail(ErrorCode::config, "'" + where(key) + "' must be a string");
  std::string s = v.get<std::string>();
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail(ErrorCode::config, "'" + where(key) + "' must be one of: " + list);
  }
  return s;
}

std::vector<std::string> Section::texts(const std::string& key, const std::vector<std::string>& fallback,
                                        const std::vector<std::string>& allowed) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_array() || v.empty()) fail(ErrorCode::config, "'" + where(key) + "' must be a nonempty array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) fail(ErrorCode::config, "'" + where(key) + "' must contain strings");
    std::string s = e.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      fail(ErrorCode::config, "'" + where(key) + "' contains unknown entry '" + s + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> Section::numbers(const std::string& key, const std::vector<double>& fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_array() || v.empty()) fail(ErrorCode::config, "'" + where(key) + "' must be a nonempty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      fail(ErrorCode::config, "'" + where(key) + "' must contain finite numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> Section::grid(const std::string& key, double min, double max, int count) {
  if (has(key)) {
    Section g(get(key), where(key));
    if (g.has("values")) {
      auto values = g.numbers("values", {});
      g.finish();
      if (values.size() < 2) fail(ErrorCode::config, "'" + where(key) + ".values' needs at least 2 entries");
      return values;
    }
    min = g.number("min", min);
    max = g.number("max", max);
    count = g.integer("count", count, 2);
    g.finish();
  }
  if (count < 2) fail(ErrorCode::config, "'" + where(key) + "' count must be >= 2");
  if (!(max > min)) fail(ErrorCode::config, "'" + where(key) + "' needs max > min");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = min + (max - min) * i / (count - 1);
  return out;
}

Section Section::child(const std::string& key) {
  if (!has(key)) return Section(empty_object(), where(key));
  return Section(get(key), where(key));
}

void Section::finish() const {
  std::string unknown;
  for (const auto& [k, v] : object_.items()) {
    if (!used_.count(k)) unknown += (unknown.empty() ? "'" : ", '") + where(k) + "'";
  }
  if (!unknown.empty()) fail(ErrorCode::config, "unknown key(s) " + unknown);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"rabi-drive", "rabi-pump",    "map-cat",  "cat-size",
                                              "relax",      "quasi-surface", "cat-rabi", "cat-ramsey",
                                              "tls-compare", "qpt",          "wigner"};
  return names;
}

RunConfig load_config(const std::string& path, const std::string& experiment) {
  RunConfig cfg;
  cfg.experiment = experiment;
  const std::string text = kpo::read_file(path);
  try {
    cfg.root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, "cannot parse " + path + ": " + e.what());
  }
  Section top(cfg.root, "");
  for (const auto& name : experiment_names()) {
    if (top.has(name)) top.child(name);  // marks other experiments' sections as known
  }
  if (top.has("experiment")) top.text("experiment", experiment, {experiment});
  const int seed = top.integer("seed", 1, 0);
  cfg.seed = static_cast<std::uint64_t>(seed);

  using kpo::units::from_mhz;
  Section sys = top.child("system");
  kpo::SystemParams p = kpo::SystemParams::device_defaults();
  p.kerr = from_mhz(sys.number("K_MHz", kpo::units::to_mhz(p.kerr)));
  p.pump = from_mhz(sys.number("P_MHz", kpo::units::to_mhz(p.pump)));
  p.detuning = from_mhz(sys.number("Delta_MHz", kpo::units::to_mhz(p.detuning)));
  p.drive = from_mhz(sys.number("beta_MHz", kpo::units::to_mhz(p.drive)));
  p.drive_detuning = from_mhz(sys.number("Delta_d_MHz", 0.0));
  p.drive_phase = sys.number("phi_d_rad", 0.0);
  p.kappa = sys.number("kappa_per_us", 0.0);
  p.dim = sys.integer("dim", p.dim, 2);
  cfg.propagation.integrator.rtol = sys.number("rtol", cfg.propagation.integrator.rtol);
  cfg.propagation.integrator.atol = sys.number("atol", cfg.propagation.integrator.atol);
  sys.finish();
  top.finish();
  if (!(p.kerr > 0)) fail(ErrorCode::config, "'system.K_MHz' must be positive");
  if (p.kappa < 0) fail(ErrorCode::config, "'system.kappa_per_us' must be non-negative");
  if (!(cfg.propagation.integrator.rtol > 0) || !(cfg.propagation.integrator.atol > 0)) {
    fail(ErrorCode::config, "tolerances must be positive");
  }
  cfg.system = p;
  return cfg;
}

}  // namespace kposim
