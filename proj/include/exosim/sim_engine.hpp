// Trial runner: drives the synthetic gait, evaluates both grounded models,
// applies the configured controller and logs residual torques and harness
// forces at the sample rate.
//
// The plant is kinematic: the gait trajectory is prescribed and assistance
// does not alter it. The torque the user must supply (the residual) is the
// compensation target minus the applied assistance, where the target blends
// the two grounded models with the insole-derived support share (independent
// of the strategy under test).
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "exosim/control.hpp"
#include "exosim/core.hpp"
#include "exosim/exo_params.hpp"
#include "exosim/gait.hpp"
#include "exosim/grounded_chain.hpp"
#include "exosim/harness.hpp"

namespace exosim {

struct Anthropometrics {
  double height_m = 1.75;
  double mass_kg = 69.4;

  void validate() const {
    if (!(height_m > 0.0) || !(mass_kg > 0.0))
      throw ValidationError("anthropometrics: height and mass must be > 0");
  }
};

enum class Ground { Treadmill, FlatGround };

/// One experimental trial. Treadmill trials follow a speed sequence with
/// ramped transitions; flat-ground trials walk a fixed distance at a
/// metronome cadence.
struct Scenario {
  std::string name = "trial";
  Ground ground = Ground::Treadmill;
  double slope_rad = 0.0;
  double load_kg = 0.0;
  std::vector<double> speed_levels_kmh;  // treadmill only
  double ramp_s = 15.0;
  double cadence_spm = 96.0;  // flat ground only
  double distance_m = 7.0;    // flat ground only
  double duration_s = 30.0;
  double rate_hz = 100.0;

  void validate() const {
    if (!(duration_s > 0.0)) throw ValidationError("scenario: duration must be > 0");
    if (!(rate_hz > 0.0)) throw ValidationError("scenario: rate must be > 0");
    if (ground == Ground::Treadmill) {
      if (speed_levels_kmh.empty())
        throw ValidationError("scenario: treadmill trials need a speed sequence");
      if (!(ramp_s > 0.0)) throw ValidationError("scenario: ramp duration must be > 0");
      for (double v : speed_levels_kmh)
        if (!(v >= 0.0)) throw ValidationError("scenario: speeds must be >= 0");
    } else {
      if (!(cadence_spm > 0.0))
        throw ValidationError("scenario: flat-ground trials need a metronome cadence");
    }
  }

  long sample_count() const { return static_cast<long>(std::floor(duration_s * rate_hz)); }
};

/// Protocol-wide defaults that the experiment table does not pin down.
struct ProtocolDefaults {
  double slope_rad = deg2rad(10.0);
  double ramp_s = 15.0;
  double ramp_row_duration_s = 90.0;
  double constant_row_duration_s = 30.0;
  double fg_distance_m = 7.0;
  double fg_cadence_spm = 96.0;
  double load_kg = 10.0;
  double rate_hz = 100.0;
  double cadence_coeff = 96.0;  // must match the gait tuning for FG durations
};

/// The eight experimental trials: treadmill speed sequences with and without
/// slope and load, two constant-speed rows, and two metronome flat-ground rows.
inline std::vector<Scenario> protocol_suite(const ProtocolDefaults& d = {}) {
  auto tm = [&](int idx, double slope, double load, std::vector<double> levels, double dur) {
    Scenario s;
    s.name = "trial" + std::to_string(idx);
    s.ground = Ground::Treadmill;
    s.slope_rad = slope;
    s.load_kg = load;
    s.speed_levels_kmh = std::move(levels);
    s.ramp_s = d.ramp_s;
    s.duration_s = dur;
    s.rate_hz = d.rate_hz;
    return s;
  };
  auto fg = [&](int idx, double load) {
    Scenario s;
    s.name = "trial" + std::to_string(idx);
    s.ground = Ground::FlatGround;
    s.load_kg = load;
    s.cadence_spm = d.fg_cadence_spm;
    s.distance_m = d.fg_distance_m;
    const double v = (d.fg_cadence_spm / d.cadence_coeff) * (d.fg_cadence_spm / d.cadence_coeff);
    s.duration_s = d.fg_distance_m / v;
    s.rate_hz = d.rate_hz;
    return s;
  };
  const std::vector<double> full{0, 2, 4, 6, 2, 6};
  const std::vector<double> slope_seq{0, 4};
  return {
      tm(1, 0.0, 0.0, full, d.ramp_row_duration_s),
      tm(2, d.slope_rad, 0.0, slope_seq, d.ramp_row_duration_s),
      tm(3, 0.0, d.load_kg, full, d.ramp_row_duration_s),
      tm(4, d.slope_rad, 0.0, slope_seq, d.ramp_row_duration_s),
      tm(5, 0.0, 0.0, {4}, d.constant_row_duration_s),
      tm(6, 0.0, d.load_kg, {4}, d.constant_row_duration_s),
      fg(7, 0.0),
      fg(8, d.load_kg),
  };
}

/// One logged tick.
struct TrialSample {
  double t = 0.0;
  double phi = 0.0;
  double support_left = 0.5;  // insole-derived left support share
  Vec6 q = Vec6::Zero();
  bool contact_left = false;
  bool contact_right = false;
  double pressure_sum_left = 0.0;
  double pressure_sum_right = 0.0;
  Torques tau_left = Torques::Zero();     // left-grounded model compensation
  Torques tau_right = Torques::Zero();    // right-grounded model compensation
  double gamma_left = 0.5;
  double gamma_right = 0.5;
  Torques commanded = Torques::Zero();    // controller output before the mask
  Torques applied = Torques::Zero();
  Torques residual = Torques::Zero();     // compensation target - applied
  Eigen::Vector4d cuff = Eigen::Vector4d::Zero();  // [l_thigh, l_shank, r_thigh, r_shank]
  bool jac_damped = false;
};

struct RunRecord {
  Scenario scenario;
  ControllerConfig controller;
  std::uint64_t seed = 0;
  std::string weights_ref;  // calibration artifact reference (path or tag)
  std::vector<TrialSample> samples;
};

inline GaitProfile profile_for_scenario(const Scenario& sc, const Anthropometrics& anthro,
                                        const ExoParams& exo, const GaitTuning& tuning,
                                        std::uint64_t seed) {
  const double system_mass = anthro.mass_kg + exo.total_mass + sc.load_kg;
  GaitProfile p;
  if (sc.ground == Ground::Treadmill) {
    p = GaitProfile::speed_sequence(sc.speed_levels_kmh, sc.ramp_s, sc.duration_s,
                                    anthro.height_m, anthro.mass_kg, system_mass);
  } else {
    p = GaitProfile::fixed_cadence(sc.cadence_spm, anthro.height_m, anthro.mass_kg, system_mass);
  }
  p.tuning = tuning;
  p.seed = seed;
  p.validate();
  return p;
}

/// Runs one trial. Blend with regression gains requires trained weights whose
/// joint ordering matches; FSM and insole-gain runs do not.
inline RunRecord run_trial(const Scenario& sc, const ControllerConfig& cfg, const ExoParams& exo,
                           const Anthropometrics& anthro,
                           const std::optional<BlendWeights>& weights, std::uint64_t seed,
                           const GaitTuning& tuning = {}, std::string weights_ref = {}) {
  sc.validate();
  cfg.validate();
  anthro.validate();
  if (cfg.strategy == Strategy::Blend && cfg.gain_source == GainSource::Regression && !weights)
    throw ConfigError("controller.strategy",
                      "Blend strategy with regression gains requires a calibration artifact");

  const Environment env{sc.slope_rad, sc.load_kg, 9.81};
  const GroundedChain lfg = build_grounded_chain(exo, Side::Left, env);
  const GroundedChain rfg = build_grounded_chain(exo, Side::Right, env);
  const HarnessModel harness = HarnessModel::from_params(exo);
  const GaitProfile profile = profile_for_scenario(sc, anthro, exo, tuning, seed);

  RunRecord rec;
  rec.scenario = sc;
  rec.controller = cfg;
  rec.seed = seed;
  rec.weights_ref = std::move(weights_ref);
  const long n = sc.sample_count();
  rec.samples.reserve(n);

  FsmState fsm;
  bool fsm_initialized = false;

  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / sc.rate_hz;
    const GaitSample gs = gait_sample(profile, t);

    TrialSample row;
    row.t = t;
    row.phi = gs.phi;
    row.q = gs.state.q;
    row.contact_left = gs.contact_left;
    row.contact_right = gs.contact_right;
    row.pressure_sum_left = gs.pressure_sum_left();
    row.pressure_sum_right = gs.pressure_sum_right();

    row.tau_left = compensation_torques(lfg, gs.state);
    row.tau_right = compensation_torques(rfg, gs.state);
    if (!all_finite(row.tau_left) || !all_finite(row.tau_right))
      throw NumericalError("run_trial: NaN in dynamics at tick " + std::to_string(k));

    const double psum = row.pressure_sum_left + row.pressure_sum_right;
    const double support = psum > 0.0 ? row.pressure_sum_left / psum : 0.5;
    row.support_left = support;
    const Torques required = support * row.tau_left + (1.0 - support) * row.tau_right;

    BlendGains gains{support, 1.0 - support};
    if (cfg.strategy == Strategy::Blend && cfg.gain_source == GainSource::Regression)
      gains = blend_gains(*weights, gs.state.q);
    if (cfg.strategy == Strategy::Fsm) {
      if (!fsm_initialized) {
        fsm.selection = stance_label(gs) > 0 ? Side::Left : Side::Right;
        fsm_initialized = true;
      }
      fsm = fsm_step(fsm, gs, cfg);
      gains.left = fsm.selection == Side::Left ? 1.0 : 0.0;
      gains.right = 1.0 - gains.left;
    }
    row.gamma_left = gains.left;
    row.gamma_right = gains.right;

    const AppliedTorques ap = assist_torques(cfg, row.tau_left, row.tau_right, gains, fsm.selection);
    row.commanded = cfg.strategy == Strategy::Blend
                        ? blend_torque(row.tau_left, row.tau_right, gains)
                        : (fsm.selection == Side::Left ? row.tau_left : row.tau_right);
    row.applied = ap.torque;
    row.residual = required - row.applied;

    const GroundedChain& active = support >= 0.5 ? lfg : rfg;
    const CuffForces cf = interaction_forces(row.residual, active, gs.state, harness);
    row.cuff = cf.f;
    row.jac_damped = cf.damped;

    rec.samples.push_back(row);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Serialization. CSV: one row per sample, fixed column order, '.' decimal,
// LF line endings, %.17g doubles (lossless round-trip). JSON sidecar carries
// scenario, controller config, seed and the calibration reference.

inline const char* ground_name(Ground g) {
  return g == Ground::Treadmill ? "treadmill" : "flat_ground";
}
inline Ground ground_from_name(const std::string& s) {
  if (s == "treadmill") return Ground::Treadmill;
  if (s == "flat_ground") return Ground::FlatGround;
  throw ConfigError("ground", "unknown ground '" + s + "'");
}
inline const char* strategy_name(Strategy s) { return s == Strategy::Blend ? "blend" : "fsm"; }
inline Strategy strategy_from_name(const std::string& s) {
  if (s == "blend") return Strategy::Blend;
  if (s == "fsm") return Strategy::Fsm;
  throw ConfigError("strategy", "unknown strategy '" + s + "' (expected 'blend' or 'fsm')");
}
inline const char* gain_source_name(GainSource s) {
  return s == GainSource::Regression ? "regression" : "insole";
}
inline GainSource gain_source_from_name(const std::string& s) {
  if (s == "regression") return GainSource::Regression;
  if (s == "insole") return GainSource::Insole;
  throw ConfigError("gain_source", "unknown gain source '" + s + "'");
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["ground"] = ground_name(s.ground);
  j["slope_rad"] = s.slope_rad;
  j["load_kg"] = s.load_kg;
  j["speed_levels_kmh"] = s.speed_levels_kmh;
  j["ramp_s"] = s.ramp_s;
  j["cadence_spm"] = s.cadence_spm;
  j["distance_m"] = s.distance_m;
  j["duration_s"] = s.duration_s;
  j["rate_hz"] = s.rate_hz;
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.name = j.value("name", std::string("trial"));
  s.ground = ground_from_name(j.value("ground", std::string("treadmill")));
  s.slope_rad = j.value("slope_rad", 0.0);
  s.load_kg = j.value("load_kg", 0.0);
  s.speed_levels_kmh = j.value("speed_levels_kmh", std::vector<double>{});
  s.ramp_s = j.value("ramp_s", 15.0);
  s.cadence_spm = j.value("cadence_spm", 96.0);
  s.distance_m = j.value("distance_m", 7.0);
  s.duration_s = j.value("duration_s", 30.0);
  s.rate_hz = j.value("rate_hz", 100.0);
  return s;
}

inline nlohmann::json controller_to_json(const ControllerConfig& c) {
  nlohmann::json j;
  j["strategy"] = strategy_name(c.strategy);
  j["ankle_actuated"] = c.ankle_actuated;
  j["fsm_threshold_n"] = c.fsm_threshold_n;
  j["fsm_dwell_s"] = c.fsm_dwell_s;
  j["gain_source"] = gain_source_name(c.gain_source);
  j["score_clamp"] = "unit";  // Y'q clamped to [-1, 1]; the only supported policy
  return j;
}

inline ControllerConfig controller_from_json(const nlohmann::json& j) {
  ControllerConfig c;
  c.strategy = strategy_from_name(j.value("strategy", std::string("blend")));
  c.ankle_actuated = j.value("ankle_actuated", false);
  c.fsm_threshold_n = j.value("fsm_threshold_n", 50.0);
  c.fsm_dwell_s = j.value("fsm_dwell_s", 0.2);
  c.gain_source = gain_source_from_name(j.value("gain_source", std::string("regression")));
  if (j.contains("score_clamp") && j.at("score_clamp").get<std::string>() != "unit")
    throw ConfigError("controller.score_clamp", "only the 'unit' clamp policy is supported");
  return c;
}

inline std::vector<std::string> run_csv_columns() {
  std::vector<std::string> cols = {"t", "phi", "support_left"};
  for (const char* n : kJointNames) cols.push_back(std::string("q_") + n);
  cols.insert(cols.end(), {"contact_l", "contact_r", "psum_l", "psum_r"});
  for (const char* n : kJointNames) cols.push_back(std::string("tau_lfg_") + n);
  for (const char* n : kJointNames) cols.push_back(std::string("tau_rfg_") + n);
  cols.insert(cols.end(), {"gamma_l", "gamma_r"});
  for (const char* n : kJointNames) cols.push_back(std::string("tau_cmd_") + n);
  for (const char* n : kJointNames) cols.push_back(std::string("tau_applied_") + n);
  for (const char* n : kJointNames) cols.push_back(std::string("residual_") + n);
  cols.insert(cols.end(), {"f_thigh_l", "f_shank_l", "f_thigh_r", "f_shank_r", "jac_damped"});
  return cols;
}

inline void write_run_csv(std::ostream& os, const RunRecord& rec) {
  const auto cols = run_csv_columns();
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  auto put = [&os](double v) {
    os << ",";
    detail::write_g17(os, v);
  };
  for (const TrialSample& s : rec.samples) {
    detail::write_g17(os, s.t);
    put(s.phi);
    put(s.support_left);
    for (int i = 0; i < 6; ++i) put(s.q[i]);
    put(s.contact_left ? 1.0 : 0.0);
    put(s.contact_right ? 1.0 : 0.0);
    put(s.pressure_sum_left);
    put(s.pressure_sum_right);
    for (int i = 0; i < 6; ++i) put(s.tau_left[i]);
    for (int i = 0; i < 6; ++i) put(s.tau_right[i]);
    put(s.gamma_left);
    put(s.gamma_right);
    for (int i = 0; i < 6; ++i) put(s.commanded[i]);
    for (int i = 0; i < 6; ++i) put(s.applied[i]);
    for (int i = 0; i < 6; ++i) put(s.residual[i]);
    for (int i = 0; i < 4; ++i) put(s.cuff[i]);
    put(s.jac_damped ? 1.0 : 0.0);
    os << "\n";
  }
}

/// Parses a run CSV produced by write_run_csv. Validates the header.
inline std::vector<TrialSample> read_run_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("run csv: empty stream");
  {
    const auto cols = run_csv_columns();
    std::ostringstream expect;
    for (size_t i = 0; i < cols.size(); ++i) expect << (i ? "," : "") << cols[i];
    if (line != expect.str())
      throw ValidationError("run csv: unexpected header (schema mismatch)");
  }
  std::vector<TrialSample> out;
  std::vector<double> vals;
  vals.reserve(64);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    vals.clear();
    const char* p = line.c_str();
    char* end = nullptr;
    while (true) {
      vals.push_back(std::strtod(p, &end));
      if (*end == ',') {
        p = end + 1;
      } else {
        break;
      }
    }
    if (vals.size() != run_csv_columns().size())
      throw ValidationError("run csv: wrong column count in a data row");
    TrialSample s;
    int i = 0;
    s.t = vals[i++];
    s.phi = vals[i++];
    s.support_left = vals[i++];
    for (int k = 0; k < 6; ++k) s.q[k] = vals[i++];
    s.contact_left = vals[i++] != 0.0;
    s.contact_right = vals[i++] != 0.0;
    s.pressure_sum_left = vals[i++];
    s.pressure_sum_right = vals[i++];
    for (int k = 0; k < 6; ++k) s.tau_left[k] = vals[i++];
    for (int k = 0; k < 6; ++k) s.tau_right[k] = vals[i++];
    s.gamma_left = vals[i++];
    s.gamma_right = vals[i++];
    for (int k = 0; k < 6; ++k) s.commanded[k] = vals[i++];
    for (int k = 0; k < 6; ++k) s.applied[k] = vals[i++];
    for (int k = 0; k < 6; ++k) s.residual[k] = vals[i++];
    for (int k = 0; k < 4; ++k) s.cuff[k] = vals[i++];
    s.jac_damped = vals[i++] != 0.0;
    out.push_back(s);
  }
  return out;
}

inline nlohmann::json run_sidecar_json(const RunRecord& rec) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["scenario"] = scenario_to_json(rec.scenario);
  j["controller"] = controller_to_json(rec.controller);
  j["seed"] = rec.seed;
  j["weights_ref"] = rec.weights_ref;
  j["sample_count"] = rec.samples.size();
  return j;
}

}  // namespace exosim
