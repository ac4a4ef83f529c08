#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpo/dynamics.hpp"
#include "kpo/model.hpp"

namespace kposim {

using json = nlohmann::json;

/// Read-once view of a JSON object. Every accessor marks its key as used;
/// `finish` rejects whatever was left, so typos never pass silently.
class Section {
 public:
  Section(const json& object, std::string path);

  bool has(const std::string& key) const { return object_.contains(key); }
  double number(const std::string& key, double fallback);
  double required_number(const std::string& key);
  int integer(const std::string& key, int fallback, int min_value);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed);
  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback,
                                 const std::vector<std::string>& allowed);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  /// {"min": a, "max": b, "count": n} or {"values": [...]}; count >= 2.
  std::vector<double> grid(const std::string& key, double min, double max, int count);
  /// Nested object; an absent key yields an empty section.
  Section child(const std::string& key);

  void finish() const;
  const std::string& path() const { return path_; }

 private:
  const json& get(const std::string& key);
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

/// Parsed configuration shared by all subcommands.
struct RunConfig {
  std::string experiment;
  kpo::SystemParams system;
  kpo::PropagationOptions propagation;
  std::uint64_t seed = 1;
  json root;  ///< kept alive for the experiment section
};

/// Loads `path`, validates the top level and the "system" block. Experiment
/// sections other than `experiment` are allowed and ignored.
RunConfig load_config(const std::string& path, const std::string& experiment);

const std::vector<std::string>& experiment_names();

}  // namespace kposim
