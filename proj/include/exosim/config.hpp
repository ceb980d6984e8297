// Harness configuration: one JSON document covering the exoskeleton, the
// wearer, gait laws, controller, calibration and protocol defaults. Omitted
// fields take the documented defaults; validation errors name the exact path
// of the offending field.
#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "exosim/control.hpp"
#include "exosim/core.hpp"
#include "exosim/exo_params.hpp"
#include "exosim/gait.hpp"
#include "exosim/sim_engine.hpp"

namespace exosim {

struct CalibrationConfig {
  double speed_kmh = 3.5;
  double duration_s = 30.0;
  double rate_hz = 100.0;
  double ridge_lambda = 1e-8;
};

struct FullConfig {
  Anthropometrics anthro;
  ExoParams exo = ExoParams::defaults();
  Environment environment;
  GaitTuning gait;
  ControllerConfig controller;
  CalibrationConfig calibration;
  ProtocolDefaults protocol;
  std::optional<Scenario> scenario;  // explicit scenario for `run`
  std::string output_dir = "out";
  std::uint64_t seed = 42;
};

namespace detail {

inline void ensure_keys(const nlohmann::json& j, const std::string& prefix,
                        std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) { ok = true; break; }
    if (!ok)
      throw ConfigError(prefix.empty() ? key : prefix + "." + key, "unknown field");
  }
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& prefix, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(prefix.empty() ? key : prefix + "." + key,
                      std::string("wrong type: ") + e.what());
  }
}

inline void semantic(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) throw ConfigError(path, msg);
}

}  // namespace detail

inline nlohmann::json full_config_to_json(const FullConfig& c) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["anthro"] = {{"height_m", c.anthro.height_m}, {"mass_kg", c.anthro.mass_kg}};
  j["exo"] = {{"shank_length", c.exo.shank_length},
              {"thigh_length", c.exo.thigh_length},
              {"back_length", c.exo.back_length},
              {"back_mass", c.exo.back_mass},
              {"thigh_mass", c.exo.thigh_mass},
              {"shank_mass", c.exo.shank_mass},
              {"foot_mass", c.exo.foot_mass},
              {"shank_com", c.exo.shank_com},
              {"thigh_com", c.exo.thigh_com},
              {"back_com", c.exo.back_com},
              {"shank_inertia", c.exo.shank_inertia},
              {"thigh_inertia", c.exo.thigh_inertia},
              {"back_inertia", c.exo.back_inertia},
              {"foot_inertia", c.exo.foot_inertia},
              {"total_height", c.exo.total_height},
              {"total_mass", c.exo.total_mass},
              {"thigh_cuff_offset", c.exo.thigh_cuff_offset},
              {"shank_cuff_offset", c.exo.shank_cuff_offset}};
  j["environment"] = {{"slope_deg", rad2deg(c.environment.slope_rad)},
                      {"load_mass", c.environment.load_kg},
                      {"gravity", c.environment.gravity}};
  j["gait"] = {{"amp_ref_speed", c.gait.amp_ref_speed},
               {"amp_scale_max", c.gait.amp_scale_max},
               {"cadence_coeff", c.gait.cadence_coeff},
               {"cadence_min", c.gait.cadence_min},
               {"cadence_max", c.gait.cadence_max},
               {"standing_speed", c.gait.standing_speed},
               {"stance_base", c.gait.stance_base},
               {"stance_slope", c.gait.stance_slope},
               {"stance_min", c.gait.stance_min},
               {"stance_max", c.gait.stance_max},
               {"grf_hump", c.gait.grf_hump},
               {"noise_enabled", c.gait.noise_enabled},
               {"noise_sigma", c.gait.noise_sigma}};
  j["controller"] = controller_to_json(c.controller);
  j["calibration"] = {{"speed_kmh", c.calibration.speed_kmh},
                      {"duration_s", c.calibration.duration_s},
                      {"rate_hz", c.calibration.rate_hz},
                      {"ridge_lambda", c.calibration.ridge_lambda}};
  j["protocol"] = {{"slope_deg", rad2deg(c.protocol.slope_rad)},
                   {"ramp_s", c.protocol.ramp_s},
                   {"ramp_row_duration_s", c.protocol.ramp_row_duration_s},
                   {"constant_row_duration_s", c.protocol.constant_row_duration_s},
                   {"fg_distance_m", c.protocol.fg_distance_m},
                   {"fg_cadence_spm", c.protocol.fg_cadence_spm},
                   {"load_kg", c.protocol.load_kg},
                   {"rate_hz", c.protocol.rate_hz}};
  if (c.scenario) j["scenario"] = scenario_to_json(*c.scenario);
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

inline FullConfig full_config_from_json(const nlohmann::json& j) {
  using detail::get_field;
  using detail::semantic;
  detail::ensure_keys(j, "",
                      {"schema_version", "anthro", "exo", "environment", "gait", "controller",
                       "calibration", "protocol", "scenario", "output_dir", "seed"});
  FullConfig c;

  const auto anthro = j.value("anthro", nlohmann::json::object());
  detail::ensure_keys(anthro, "anthro", {"height_m", "mass_kg"});
  c.anthro.height_m = get_field(anthro, "anthro", "height_m", 1.75);
  c.anthro.mass_kg = get_field(anthro, "anthro", "mass_kg", 69.4);
  semantic(c.anthro.height_m > 0.0, "anthro.height_m", "must be > 0");
  semantic(c.anthro.mass_kg > 0.0, "anthro.mass_kg", "must be > 0");

  c.exo = ExoParams::defaults(c.anthro.height_m);
  if (j.contains("exo")) {
    const auto& e = j.at("exo");
    detail::ensure_keys(
        e, "exo",
        {"shank_length", "thigh_length", "back_length", "back_mass", "thigh_mass", "shank_mass",
         "foot_mass", "shank_com", "thigh_com", "back_com", "shank_inertia", "thigh_inertia",
         "back_inertia", "foot_inertia", "total_height", "total_mass", "thigh_cuff_offset",
         "shank_cuff_offset"});
    c.exo.shank_length = get_field(e, "exo", "shank_length", c.exo.shank_length);
    c.exo.thigh_length = get_field(e, "exo", "thigh_length", c.exo.thigh_length);
    c.exo.back_length = get_field(e, "exo", "back_length", c.exo.back_length);
    c.exo.back_mass = get_field(e, "exo", "back_mass", c.exo.back_mass);
    c.exo.thigh_mass = get_field(e, "exo", "thigh_mass", c.exo.thigh_mass);
    c.exo.shank_mass = get_field(e, "exo", "shank_mass", c.exo.shank_mass);
    c.exo.foot_mass = get_field(e, "exo", "foot_mass", c.exo.foot_mass);
    // Geometric derived defaults track overridden lengths unless set explicitly.
    c.exo.shank_com = get_field(e, "exo", "shank_com", 0.5 * c.exo.shank_length);
    c.exo.thigh_com = get_field(e, "exo", "thigh_com", 0.5 * c.exo.thigh_length);
    c.exo.back_com = get_field(e, "exo", "back_com", 0.5 * c.exo.back_length);
    auto rod = [](double m, double l) { return m * l * l / 12.0; };
    c.exo.shank_inertia =
        get_field(e, "exo", "shank_inertia", rod(c.exo.shank_mass, c.exo.shank_length));
    c.exo.thigh_inertia =
        get_field(e, "exo", "thigh_inertia", rod(c.exo.thigh_mass, c.exo.thigh_length));
    c.exo.back_inertia =
        get_field(e, "exo", "back_inertia", rod(c.exo.back_mass, c.exo.back_length));
    c.exo.foot_inertia = get_field(e, "exo", "foot_inertia", c.exo.foot_inertia);
    c.exo.total_height = get_field(e, "exo", "total_height", c.exo.total_height);
    c.exo.total_mass = get_field(e, "exo", "total_mass", c.exo.total_mass);
    c.exo.thigh_cuff_offset =
        get_field(e, "exo", "thigh_cuff_offset", 0.5 * c.exo.thigh_length);
    c.exo.shank_cuff_offset =
        get_field(e, "exo", "shank_cuff_offset", 0.5 * c.exo.shank_length);
  }
  try {
    c.exo.validate();
  } catch (const ValidationError& e) {
    throw ConfigError("exo", e.what());
  }

  const auto env = j.value("environment", nlohmann::json::object());
  detail::ensure_keys(env, "environment", {"slope_deg", "load_mass", "gravity"});
  c.environment.slope_rad = deg2rad(get_field(env, "environment", "slope_deg", 0.0));
  c.environment.load_kg = get_field(env, "environment", "load_mass", 0.0);
  c.environment.gravity = get_field(env, "environment", "gravity", 9.81);
  semantic(c.environment.load_kg >= 0.0, "environment.load_mass", "must be >= 0");
  semantic(std::abs(c.environment.slope_rad) < kPi / 4.0, "environment.slope_deg",
           "must be within (-45, 45)");
  semantic(c.environment.gravity > 0.0, "environment.gravity", "must be > 0");

  const auto g = j.value("gait", nlohmann::json::object());
  detail::ensure_keys(g, "gait",
                      {"amp_ref_speed", "amp_scale_max", "cadence_coeff", "cadence_min",
                       "cadence_max", "standing_speed", "stance_base", "stance_slope",
                       "stance_min", "stance_max", "grf_hump", "noise_enabled", "noise_sigma"});
  c.gait.amp_ref_speed = get_field(g, "gait", "amp_ref_speed", c.gait.amp_ref_speed);
  c.gait.amp_scale_max = get_field(g, "gait", "amp_scale_max", c.gait.amp_scale_max);
  c.gait.cadence_coeff = get_field(g, "gait", "cadence_coeff", c.gait.cadence_coeff);
  c.gait.cadence_min = get_field(g, "gait", "cadence_min", c.gait.cadence_min);
  c.gait.cadence_max = get_field(g, "gait", "cadence_max", c.gait.cadence_max);
  c.gait.standing_speed = get_field(g, "gait", "standing_speed", c.gait.standing_speed);
  c.gait.stance_base = get_field(g, "gait", "stance_base", c.gait.stance_base);
  c.gait.stance_slope = get_field(g, "gait", "stance_slope", c.gait.stance_slope);
  c.gait.stance_min = get_field(g, "gait", "stance_min", c.gait.stance_min);
  c.gait.stance_max = get_field(g, "gait", "stance_max", c.gait.stance_max);
  c.gait.grf_hump = get_field(g, "gait", "grf_hump", c.gait.grf_hump);
  c.gait.noise_enabled = get_field(g, "gait", "noise_enabled", c.gait.noise_enabled);
  c.gait.noise_sigma = get_field(g, "gait", "noise_sigma", c.gait.noise_sigma);
  try {
    c.gait.validate();
  } catch (const ValidationError& e) {
    throw ConfigError("gait", e.what());
  }

  if (j.contains("controller")) {
    const auto& ctl = j.at("controller");
    detail::ensure_keys(ctl, "controller",
                        {"strategy", "ankle_actuated", "fsm_threshold_n", "fsm_dwell_s",
                         "gain_source", "score_clamp"});
    try {
      c.controller = controller_from_json(ctl);
      c.controller.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("controller", e.what());
    }
  }

  const auto cal = j.value("calibration", nlohmann::json::object());
  detail::ensure_keys(cal, "calibration", {"speed_kmh", "duration_s", "rate_hz", "ridge_lambda"});
  c.calibration.speed_kmh = get_field(cal, "calibration", "speed_kmh", 3.5);
  c.calibration.duration_s = get_field(cal, "calibration", "duration_s", 30.0);
  c.calibration.rate_hz = get_field(cal, "calibration", "rate_hz", 100.0);
  c.calibration.ridge_lambda = get_field(cal, "calibration", "ridge_lambda", 1e-8);
  semantic(c.calibration.speed_kmh > 0.0, "calibration.speed_kmh", "must be > 0");
  semantic(c.calibration.duration_s > 0.0, "calibration.duration_s", "must be > 0");
  semantic(c.calibration.rate_hz > 0.0, "calibration.rate_hz", "must be > 0");
  semantic(c.calibration.ridge_lambda >= 0.0, "calibration.ridge_lambda", "must be >= 0");

  const auto pr = j.value("protocol", nlohmann::json::object());
  detail::ensure_keys(pr, "protocol",
                      {"slope_deg", "ramp_s", "ramp_row_duration_s", "constant_row_duration_s",
                       "fg_distance_m", "fg_cadence_spm", "load_kg", "rate_hz"});
  c.protocol.slope_rad = deg2rad(get_field(pr, "protocol", "slope_deg", 10.0));
  c.protocol.ramp_s = get_field(pr, "protocol", "ramp_s", 15.0);
  c.protocol.ramp_row_duration_s = get_field(pr, "protocol", "ramp_row_duration_s", 90.0);
  c.protocol.constant_row_duration_s =
      get_field(pr, "protocol", "constant_row_duration_s", 30.0);
  c.protocol.fg_distance_m = get_field(pr, "protocol", "fg_distance_m", 7.0);
  c.protocol.fg_cadence_spm = get_field(pr, "protocol", "fg_cadence_spm", 96.0);
  c.protocol.load_kg = get_field(pr, "protocol", "load_kg", 10.0);
  c.protocol.rate_hz = get_field(pr, "protocol", "rate_hz", 100.0);
  c.protocol.cadence_coeff = c.gait.cadence_coeff;
  semantic(std::abs(c.protocol.slope_rad) < kPi / 4.0, "protocol.slope_deg",
           "must be within (-45, 45)");
  semantic(c.protocol.ramp_s > 0.0, "protocol.ramp_s", "must be > 0");
  semantic(c.protocol.ramp_row_duration_s > 0.0, "protocol.ramp_row_duration_s", "must be > 0");
  semantic(c.protocol.constant_row_duration_s > 0.0, "protocol.constant_row_duration_s",
           "must be > 0");
  semantic(c.protocol.fg_distance_m > 0.0, "protocol.fg_distance_m", "must be > 0");
  semantic(c.protocol.fg_cadence_spm > 0.0, "protocol.fg_cadence_spm", "must be > 0");
  semantic(c.protocol.load_kg >= 0.0, "protocol.load_kg", "must be >= 0");
  semantic(c.protocol.rate_hz > 0.0, "protocol.rate_hz", "must be > 0");

  if (j.contains("scenario")) {
    try {
      c.scenario = scenario_from_json(j.at("scenario"));
      c.scenario->validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("scenario", e.what());
    }
  }

  c.output_dir = get_field(j, "", "output_dir", std::string("out"));
  semantic(!c.output_dir.empty(), "output_dir", "must not be empty");
  c.seed = get_field(j, "", "seed", std::uint64_t{42});
  return c;
}

/// Parses a configuration document. An empty (or whitespace-only) document
/// yields the full default configuration. Parse errors report line/column.
inline FullConfig load_config(const std::string& text) {
  bool blank = true;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) { blank = false; break; }
  if (blank) return full_config_from_json(nlohmann::json::object());

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is a 1-based offset into the input.
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    throw ConfigError("", "parse error at line " + std::to_string(line) + ", column " +
                              std::to_string(col) + ": " + e.what());
  }
  return full_config_from_json(j);
}

inline std::string serialize_config(const FullConfig& c) {
  return full_config_to_json(c).dump(2) + "\n";
}

}  // namespace exosim
