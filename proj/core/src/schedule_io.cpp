#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kpo/error.hpp"
#include "kpo/model.hpp"
#include "kpo/units.hpp"

namespace kpo {

namespace {

using nlohmann::json;

// Envelope keys carry their unit; values are converted at this boundary.
Envelope* envelope_slot(Segment& s, std::string_view key) {
  if (key == "pump_MHz") return &s.pump;
  if (key == "counterdiabatic_MHz") return &s.counterdiabatic;
  if (key == "detuning_MHz") return &s.detuning;
  if (key == "chirp_MHz") return &s.chirp;
  if (key == "drive_MHz") return &s.drive;
  return nullptr;
}

json envelope_to_json(const Envelope& e) {
  if (e.shape == Shape::constant || e.amplitude == 0.0) {
    return units::to_mhz(e.offset + (e.shape == Shape::constant ? e.amplitude : 0.0));
  }
  return json{{"shape", std::string(to_string(e.shape))},
              {"amplitude", units::to_mhz(e.amplitude)},
              {"offset", units::to_mhz(e.offset)}};
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(ErrorCode::config, where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(ErrorCode::config, where + " must be finite");
  return v;
}

Envelope envelope_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return Envelope::constant(units::from_mhz(number(j, where)));
  if (!j.is_object()) fail(ErrorCode::config, where + " must be a number or an envelope object");
  Envelope e;
  for (const auto& [k, v] : j.items()) {
    if (k == "shape") {
      if (!v.is_string()) fail(ErrorCode::config, where + ".shape must be a string");
      e.shape = shape_from_string(v.get<std::string>());
    } else if (k == "amplitude") {
      e.amplitude = units::from_mhz(number(v, where + ".amplitude"));
    } else if (k == "offset") {
      e.offset = units::from_mhz(number(v, where + ".offset"));
    } else {
      fail(ErrorCode::config, "unknown key '" + k + "' in " + where);
    }
  }
  return e;
}

}  // namespace

std::string schedule_to_config(const PulseSchedule& schedule) {
  json segs = json::array();
  for (const auto& s : schedule.segments()) {
    json j;
    j["duration_ns"] = units::to_ns(s.duration);
    j["pump_MHz"] = envelope_to_json(s.pump);
    j["counterdiabatic_MHz"] = envelope_to_json(s.counterdiabatic);
    j["cd_quadrature_rad"] = s.cd_quadrature;
    j["detuning_MHz"] = envelope_to_json(s.detuning);
    j["chirp_MHz"] = envelope_to_json(s.chirp);
    j["drive_MHz"] = envelope_to_json(s.drive);
    j["drive_detuning_MHz"] = units::to_mhz(s.drive_detuning);
    j["drive_phase_rad"] = s.drive_phase;
    j["jump"] = s.jump;
    segs.push_back(std::move(j));
  }
  return json{{"segments", segs}}.dump(2) + "\n";
}

PulseSchedule schedule_from_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, std::string("schedule parse error: ") + e.what());
  }
  if (!root.is_object()) fail(ErrorCode::config, "schedule config must be an object");
  for (const auto& [k, v] : root.items()) {
    if (k != "segments") fail(ErrorCode::config, "unknown key '" + k + "' in schedule");
  }
  if (!root.contains("segments") || !root["segments"].is_array()) {
    fail(ErrorCode::config, "schedule needs a 'segments' array");
  }
  PulseSchedule schedule;
  int index = 0;
  for (const auto& js : root["segments"]) {
    const std::string where = "segments[" + std::to_string(index++) + "]";
    if (!js.is_object()) fail(ErrorCode::config, where + " must be an object");
    Segment s;
    bool have_duration = false;
    for (const auto& [k, v] : js.items()) {
      if (k == "duration_ns") {
        s.duration = units::from_ns(number(v, where + ".duration_ns"));
        have_duration = true;
      } else if (Envelope* slot = envelope_slot(s, k)) {
        *slot = envelope_from_json(v, where + "." + k);
      } else if (k == "cd_quadrature_rad") {
        s.cd_quadrature = number(v, where + "." + k);
      } else if (k == "drive_detuning_MHz") {
        s.drive_detuning = units::from_mhz(number(v, where + "." + k));
      } else if (k == "drive_phase_rad") {
        s.drive_phase = number(v, where + "." + k);
      } else if (k == "jump") {
        if (!v.is_boolean()) fail(ErrorCode::config, where + ".jump must be a boolean");
        s.jump = v.get<bool>();
      } else {
        fail(ErrorCode::config, "unknown key '" + k + "' in " + where);
      }
    }
    if (!have_duration) fail(ErrorCode::config, where + " is missing duration_ns");
    try {
      schedule.append(std::move(s));
    } catch (const Error& e) {
      fail(ErrorCode::config, where + ": " + e.what());
    }
  }
  schedule.validate();
  return schedule;
}

void save_schedule(const PulseSchedule& schedule, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << schedule_to_config(schedule);
  if (!out) fail(ErrorCode::io, "write to '" + path + "' failed");
}

PulseSchedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return schedule_from_config(ss.str());
}

}  // namespace kpo
