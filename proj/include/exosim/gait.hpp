// Deterministic synthetic gait: joint kinematics from tabulated 3-harmonic
// fits to normative sagittal walking curves, speed-scaled amplitudes, a
// square-root cadence law, and a 4-sensor insole pressure model.
//
// Everything is a pure function of (profile, t). Phase is the exact integral
// of the stride rate over the piecewise-linear speed profile, evaluated in
// closed form, so there is no simulation state and no drift.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <ostream>
#include <vector>

#include "exosim/core.hpp"
#include "exosim/exo_params.hpp"

namespace exosim {

struct SpeedPoint {
  double t = 0.0;  // s
  double v = 0.0;  // m/s
};

/// Gait-law parameters. Defaults reproduce normative walking around 1 m/s.
struct GaitTuning {
  double amp_ref_speed = 1.0;   // m/s at which the reference curves apply
  double amp_scale_max = 1.8;   // amplitude scale cap (keeps joint limits)
  double cadence_coeff = 78.0;  // steps/min per sqrt(m/s)
  double cadence_min = 40.0;    // steps/min
  double cadence_max = 140.0;
  double standing_speed = 0.05;  // below this the phase freezes
  double stance_base = 0.60;     // stance fraction at 1 m/s
  double stance_slope = 0.03;    // decrease per m/s above 1
  double stance_min = 0.555;
  double stance_max = 0.62;
  double grf_hump = 0.15;        // double-hump modulation depth of the load
  bool noise_enabled = false;
  double noise_sigma = 5.0;      // N, per insole sensor

  void validate() const {
    if (!(cadence_coeff > 0.0) || !(cadence_min > 0.0) || !(cadence_max > cadence_min))
      throw ValidationError("gait tuning: cadence law parameters out of range");
    if (!(stance_min > 0.5 && stance_max <= 0.8 && stance_min <= stance_max))
      throw ValidationError("gait tuning: stance fraction bounds must lie in (0.5, 0.8]");
    const double v_lo = (cadence_min / cadence_coeff) * (cadence_min / cadence_coeff);
    if (!(standing_speed > 0.0 && standing_speed < v_lo))
      throw ValidationError("gait tuning: standing_speed must be below the low-cadence clamp speed");
    if (!(amp_ref_speed > 0.0) || !(amp_scale_max > 0.0))
      throw ValidationError("gait tuning: amplitude scale parameters must be > 0");
    if (!(noise_sigma >= 0.0)) throw ValidationError("gait tuning: noise_sigma must be >= 0");
  }
};

/// Immutable description of one walking bout: speed profile, laws, wearer
/// and system mass (for insole load), optional seeded sensor noise.
struct GaitProfile {
  std::vector<SpeedPoint> speed_mps;  // breakpoints, strictly increasing t, t0 = 0
  GaitTuning tuning;
  double subject_height_m = 1.75;
  double subject_mass_kg = 69.4;
  double system_mass_kg = 84.4;  // subject + exo + load; drives insole load
  std::uint64_t seed = 0;

  static GaitProfile constant_speed(double speed_kmh, double subject_height = 1.75,
                                    double subject_mass = 69.4, double system_mass = 84.4) {
    GaitProfile p;
    p.speed_mps = {{0.0, kmh_to_mps(speed_kmh)}};
    p.subject_height_m = subject_height;
    p.subject_mass_kg = subject_mass;
    p.system_mass_kg = system_mass;
    p.validate();
    return p;
  }

  /// Table-2 style sequence: hold each level, ramp to the next over `ramp_s`.
  /// Dwell time is distributed evenly so the last ramp ends within `duration_s`
  /// (the final level is held to the end of the trial).
  static GaitProfile speed_sequence(const std::vector<double>& levels_kmh, double ramp_s,
                                    double duration_s, double subject_height = 1.75,
                                    double subject_mass = 69.4, double system_mass = 84.4) {
    if (levels_kmh.empty()) throw ValidationError("gait profile: empty speed sequence");
    if (!(ramp_s > 0.0)) throw ValidationError("gait profile: ramp duration must be > 0");
    GaitProfile p;
    const int n = static_cast<int>(levels_kmh.size());
    const double ramps = ramp_s * (n - 1);
    const double dwell = std::max(0.0, (duration_s - ramps) / n);
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
      p.speed_mps.push_back({t, kmh_to_mps(levels_kmh[i])});
      t += dwell;
      p.speed_mps.push_back({t, kmh_to_mps(levels_kmh[i])});
      if (i + 1 < n) t += ramp_s;
    }
    p.subject_height_m = subject_height;
    p.subject_mass_kg = subject_mass;
    p.system_mass_kg = system_mass;
    p.validate();
    return p;
  }

  /// Metronome walking: constant speed implied by the cadence law.
  static GaitProfile fixed_cadence(double cadence_spm, double subject_height = 1.75,
                                   double subject_mass = 69.4, double system_mass = 84.4) {
    GaitProfile p;
    const double v = (cadence_spm / p.tuning.cadence_coeff) * (cadence_spm / p.tuning.cadence_coeff);
    p.speed_mps = {{0.0, v}};
    p.subject_height_m = subject_height;
    p.subject_mass_kg = subject_mass;
    p.system_mass_kg = system_mass;
    p.validate();
    return p;
  }

  void validate() const {
    tuning.validate();
    if (speed_mps.empty()) throw ValidationError("gait profile: needs at least one speed point");
    if (speed_mps.front().t != 0.0)
      throw ValidationError("gait profile: first speed breakpoint must be at t=0");
    for (size_t i = 0; i < speed_mps.size(); ++i) {
      if (!(speed_mps[i].v >= 0.0) || !std::isfinite(speed_mps[i].v))
        throw ValidationError("gait profile: speeds must be >= 0");
      if (i > 0 && !(speed_mps[i].t > speed_mps[i - 1].t))
        throw ValidationError("gait profile: breakpoint times must be strictly increasing");
    }
    if (!(subject_mass_kg > 0.0) || !(system_mass_kg > 0.0) || !(subject_height_m > 0.0))
      throw ValidationError("gait profile: anthropometrics must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Speed and phase laws

/// Piecewise-linear speed, m/s; constant after the last breakpoint.
inline double speed_at(const GaitProfile& p, double t) {
  if (!(t >= 0.0)) throw ValidationError("speed_at: t must be >= 0");
  const auto& bp = p.speed_mps;
  if (t <= bp.front().t) return bp.front().v;
  for (size_t i = 1; i < bp.size(); ++i) {
    if (t <= bp[i].t) {
      const double u = (t - bp[i - 1].t) / (bp[i].t - bp[i - 1].t);
      return bp[i - 1].v + u * (bp[i].v - bp[i - 1].v);
    }
  }
  return bp.back().v;
}

/// Right-continuous slope of the speed profile, m/s².
inline double speed_slope_at(const GaitProfile& p, double t) {
  const auto& bp = p.speed_mps;
  for (size_t i = 1; i < bp.size(); ++i) {
    if (t < bp[i].t && t >= bp[i - 1].t)
      return (bp[i].v - bp[i - 1].v) / (bp[i].t - bp[i - 1].t);
  }
  return 0.0;
}

/// Cadence law: steps/min = coeff·sqrt(v), clamped. Phase advance additionally
/// freezes below the standing speed.
inline double cadence_spm(const GaitTuning& g, double v_mps) {
  return std::clamp(g.cadence_coeff * std::sqrt(std::max(0.0, v_mps)), g.cadence_min,
                    g.cadence_max);
}

namespace detail {

// Stride rate (gait cycles per second) as a function of speed.
inline double stride_rate(const GaitTuning& g, double v) {
  if (v < g.standing_speed) return 0.0;
  return cadence_spm(g, v) / 120.0;
}

// Exact integral of the stride rate over a linear speed span v0->v1 lasting dt.
inline double stride_phase_integral(const GaitTuning& g, double v0, double v1, double dt) {
  if (!(dt > 0.0)) return 0.0;
  const double kappa = g.cadence_coeff / 120.0;
  const double v_lo = (g.cadence_min / g.cadence_coeff) * (g.cadence_min / g.cadence_coeff);
  const double v_hi = (g.cadence_max / g.cadence_coeff) * (g.cadence_max / g.cadence_coeff);
  const double r = (v1 - v0) / dt;
  if (r != 0.0) {
    // Split at the first regime boundary strictly inside the span.
    double t_split = dt;
    for (double c : {g.standing_speed, v_lo, v_hi}) {
      const double tc = (c - v0) / r;
      if (tc > 0.0 && tc < t_split &&
          ((v0 < c && v1 > c) || (v0 > c && v1 < c)))
        t_split = tc;
    }
    if (t_split < dt) {
      const double vc = v0 + r * t_split;
      return stride_phase_integral(g, v0, vc, t_split) +
             stride_phase_integral(g, vc, v1, dt - t_split);
    }
  }
  // Uniform regime across the span; classify by the midpoint.
  const double vm = 0.5 * (v0 + v1);
  if (vm < g.standing_speed) return 0.0;
  if (vm < v_lo) return (g.cadence_min / 120.0) * dt;
  if (vm > v_hi) return (g.cadence_max / 120.0) * dt;
  if (r == 0.0) return kappa * std::sqrt(vm) * dt;
  return kappa * (2.0 / (3.0 * r)) * (std::pow(v1, 1.5) - std::pow(v0, 1.5));
}

}  // namespace detail

struct PhaseState {
  double phi_total = 0.0;  // accumulated gait cycles since t=0
  double phi = 0.0;        // fractional cycle in [0,1)
  double rate = 0.0;       // cycles/s
  double accel = 0.0;      // cycles/s²
};

// Phase origin: mid double-support, so quiet standing loads both feet equally.
inline constexpr double kInitialPhase = 0.06;

inline PhaseState phase_at(const GaitProfile& p, double t) {
  if (!(t >= 0.0)) throw ValidationError("phase_at: t must be >= 0");
  const auto& bp = p.speed_mps;
  PhaseState s;
  s.phi_total = kInitialPhase;
  double t_prev = 0.0, v_prev = bp.front().v;
  for (size_t i = 1; i < bp.size() && t_prev < t; ++i) {
    const double t_seg = std::min(bp[i].t, t);
    const double v_seg = speed_at(p, t_seg);
    s.phi_total += detail::stride_phase_integral(p.tuning, v_prev, v_seg, t_seg - t_prev);
    t_prev = t_seg;
    v_prev = v_seg;
  }
  if (t > t_prev)
    s.phi_total += detail::stride_phase_integral(p.tuning, v_prev, v_prev, t - t_prev);

  const double v = speed_at(p, t);
  s.rate = detail::stride_rate(p.tuning, v);
  const double v_lo = (p.tuning.cadence_min / p.tuning.cadence_coeff) *
                      (p.tuning.cadence_min / p.tuning.cadence_coeff);
  const double v_hi = (p.tuning.cadence_max / p.tuning.cadence_coeff) *
                      (p.tuning.cadence_max / p.tuning.cadence_coeff);
  if (v >= v_lo && v <= v_hi && v >= p.tuning.standing_speed)
    s.accel = (p.tuning.cadence_coeff / 120.0) / (2.0 * std::sqrt(v)) * speed_slope_at(p, t);
  s.phi = s.phi_total - std::floor(s.phi_total);
  return s;
}

// ---------------------------------------------------------------------------
// Reference joint curves: 3-harmonic fits to normative sagittal gait at the
// reference speed, degrees, phase 0 = ipsilateral heel strike.

namespace detail {

struct Fourier3 {
  double a0;
  std::array<double, 3> a;  // cos coefficients, harmonics 1..3
  std::array<double, 3> b;  // sin coefficients

  double value(double phi) const {
    double y = a0;
    for (int k = 1; k <= 3; ++k)
      y += a[k - 1] * std::cos(2.0 * kPi * k * phi) + b[k - 1] * std::sin(2.0 * kPi * k * phi);
    return y;
  }
  // d/dphi and d²/dphi².
  double slope(double phi) const {
    double y = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double w = 2.0 * kPi * k;
      y += w * (-a[k - 1] * std::sin(w * phi) + b[k - 1] * std::cos(w * phi));
    }
    return y;
  }
  double curvature(double phi) const {
    double y = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double w = 2.0 * kPi * k;
      y -= w * w * (a[k - 1] * std::cos(w * phi) + b[k - 1] * std::sin(w * phi));
    }
    return y;
  }
};

// Hip flexion ~[-19°, +26°], knee flexion ~[+4°, +60°], ankle dorsiflexion
// ~[-15°, +11°] at the reference speed.
inline constexpr Fourier3 kHipDeg{+5.0484, {+21.6487, -0.8690, -0.2999}, {+2.5290, -3.3067, +0.2583}};
inline constexpr Fourier3 kKneeDeg{+21.9963, {-0.0599, -14.6614, -0.9516}, {-19.2178, +5.4826, +4.1859}};
inline constexpr Fourier3 kAnkleDeg{-0.1785, {-0.7168, +1.3111, -2.2250}, {+7.3564, -6.7219, +0.2886}};

inline double amp_scale(const GaitTuning& g, double v) {
  return std::min(v / g.amp_ref_speed, g.amp_scale_max);
}
inline double amp_scale_slope(const GaitTuning& g, double v) {
  return v < g.amp_ref_speed * g.amp_scale_max ? 1.0 / g.amp_ref_speed : 0.0;
}

inline double stance_fraction(const GaitTuning& g, double v) {
  return std::clamp(g.stance_base - g.stance_slope * (v - 1.0), g.stance_min, g.stance_max);
}

// Left-foot share of the vertical load: 1 in left single support, 0 in right
// single support, linear crossfade across each double-support window.
inline double left_support_share(double phi, double sigma) {
  const double ds = sigma - 0.5;
  if (phi < ds) return phi / ds;
  if (phi < 0.5) return 1.0;
  if (phi < sigma) return 1.0 - (phi - 0.5) / ds;
  return 0.0;
}

inline double wrap01(double x) { return x - std::floor(x); }

// Deterministic N(0,1) keyed by (seed, time bits, channel).
inline double gaussian_noise(std::uint64_t seed, double t, std::uint64_t channel) {
  std::uint64_t tb;
  static_assert(sizeof tb == sizeof t);
  std::memcpy(&tb, &t, sizeof tb);
  const std::uint64_t k = splitmix64(seed ^ splitmix64(tb) ^ (channel * 0x9e3779b97f4a7c15ull));
  const double u1 = std::max(u64_to_unit_double(splitmix64(k)), 1e-300);
  const double u2 = u64_to_unit_double(splitmix64(k ^ 0xD1B54A32D192ED03ull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Samples

/// One tick of synthetic gait. Pressures are per-insole [heel, medial,
/// lateral, toe], N. `support_left` is the generator's ground-truth left
/// stance share (the linear double-support crossfade).
struct GaitSample {
  double t = 0.0;
  double phi = 0.0;
  JointState state;
  bool contact_left = false;
  bool contact_right = false;
  std::array<double, 4> pressure_left{};
  std::array<double, 4> pressure_right{};
  double support_left = 0.5;

  double pressure_sum_left() const {
    return pressure_left[0] + pressure_left[1] + pressure_left[2] + pressure_left[3];
  }
  double pressure_sum_right() const {
    return pressure_right[0] + pressure_right[1] + pressure_right[2] + pressure_right[3];
  }
};

inline GaitSample gait_sample(const GaitProfile& p, double t) {
  const double v = speed_at(p, t);
  const double vdot = speed_slope_at(p, t);
  const PhaseState ph = phase_at(p, t);
  const GaitTuning& g = p.tuning;

  const double s = detail::amp_scale(g, v);
  const double ds_dv = detail::amp_scale_slope(g, v);

  GaitSample out;
  out.t = t;
  out.phi = ph.phi;

  const std::array<const detail::Fourier3*, 3> curves = {&detail::kHipDeg, &detail::kKneeDeg,
                                                         &detail::kAnkleDeg};
  for (int leg = 0; leg < 2; ++leg) {
    const double phi_leg = detail::wrap01(ph.phi + (leg == 0 ? 0.0 : 0.5));
    for (int j = 0; j < 3; ++j) {
      const double ref = deg2rad(curves[j]->value(phi_leg));
      const double ref_p = deg2rad(curves[j]->slope(phi_leg));
      const double ref_pp = deg2rad(curves[j]->curvature(phi_leg));
      const int idx = leg * 3 + j;  // device ordering: l_hip,l_knee,l_ankle,r_hip,...
      out.state.q[idx] = s * ref;
      out.state.qd[idx] = ds_dv * vdot * ref + s * ref_p * ph.rate;
      out.state.qdd[idx] = 2.0 * ds_dv * vdot * ref_p * ph.rate +
                           s * ref_pp * ph.rate * ph.rate + s * ref_p * ph.accel;
    }
  }

  // Insole load model.
  const double sigma = detail::stance_fraction(g, v);
  const double lambda = detail::left_support_share(ph.phi, sigma);
  const double hump_ramp = std::clamp(v / 0.3, 0.0, 1.0);
  const double modulation = 1.0 + g.grf_hump * hump_ramp * std::cos(4.0 * kPi * ph.phi);
  const double w_total = p.system_mass_kg * 9.81;
  const double load_l = w_total * lambda * modulation;
  const double load_r = w_total * (1.0 - lambda) * modulation;
  const double xi_l = ph.phi / sigma;
  const double xi_r = detail::wrap01(ph.phi - 0.5) / sigma;

  auto fill = [&](std::array<double, 4>& pr, double load, double xi, int foot) {
    static constexpr std::array<double, 4> early = {0.4, 0.2, 0.2, 0.2};
    static constexpr std::array<double, 4> late = {0.2, 0.2, 0.2, 0.4};
    const double u = std::clamp(xi, 0.0, 1.0);
    for (int i = 0; i < 4; ++i) {
      double pval = load * ((1.0 - u) * early[i] + u * late[i]);
      if (g.noise_enabled && pval > 0.0)
        pval = std::max(0.0, pval + g.noise_sigma *
                                        detail::gaussian_noise(p.seed, t, foot * 4 + i));
      pr[i] = pval;
    }
  };
  fill(out.pressure_left, load_l, xi_l, 0);
  fill(out.pressure_right, load_r, xi_r, 1);
  out.contact_left = out.pressure_sum_left() > 0.0;
  out.contact_right = out.pressure_sum_right() > 0.0;
  out.support_left = lambda;
  return out;
}

/// Stance class from the insoles: +1 left-foot-grounded, -1 right. Raw
/// labelling; an exact tie goes to -1 by convention.
inline int stance_label(const GaitSample& s) {
  return s.pressure_sum_left() > s.pressure_sum_right() ? +1 : -1;
}

struct CalibrationData {
  Eigen::MatrixXd joint_angles;  // rows = samples, cols = 6 device-order joints
  Eigen::VectorXd labels;        // ±1
  bool degenerate = false;       // all rows identical (e.g. quiet standing)
};

inline CalibrationData make_calibration_dataset(const GaitProfile& p, double duration_s,
                                                double rate_hz) {
  if (!(duration_s > 0.0) || !(rate_hz > 0.0))
    throw ValidationError("calibration dataset: duration and rate must be > 0");
  const long n = static_cast<long>(std::floor(duration_s * rate_hz));
  if (n < kJointCount)
    throw ValidationError("calibration dataset: duration*rate yields fewer samples than joints");
  CalibrationData d;
  d.joint_angles.resize(n, kJointCount);
  d.labels.resize(n);
  d.degenerate = true;
  for (long k = 0; k < n; ++k) {
    const GaitSample s = gait_sample(p, static_cast<double>(k) / rate_hz);
    d.joint_angles.row(k) = s.state.q.transpose();
    d.labels[k] = stance_label(s);
    if (k > 0 && d.degenerate &&
        (d.joint_angles.row(k).array() != d.joint_angles.row(0).array()).any())
      d.degenerate = false;
  }
  return d;
}

// ---------------------------------------------------------------------------
// CSV export (columns: t, phi, q x6, qd x6, qdd x6, pressures x8)

namespace detail {
inline void write_g17(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}
}  // namespace detail

inline void write_gait_csv(std::ostream& os, const GaitProfile& p, double duration_s,
                           double rate_hz) {
  if (!(duration_s > 0.0) || !(rate_hz > 0.0))
    throw ValidationError("gait csv: duration and rate must be > 0");
  os << "t,phi";
  for (const char* n : kJointNames) os << ",q_" << n;
  for (const char* n : kJointNames) os << ",qd_" << n;
  for (const char* n : kJointNames) os << ",qdd_" << n;
  for (const char* f : {"l", "r"})
    for (const char* sens : {"heel", "medial", "lateral", "toe"}) os << ",p_" << f << "_" << sens;
  os << "\n";
  const long n = static_cast<long>(std::floor(duration_s * rate_hz));
  for (long k = 0; k < n; ++k) {
    const GaitSample s = gait_sample(p, static_cast<double>(k) / rate_hz);
    detail::write_g17(os, s.t);
    os << ",";
    detail::write_g17(os, s.phi);
    for (int i = 0; i < 6; ++i) { os << ","; detail::write_g17(os, s.state.q[i]); }
    for (int i = 0; i < 6; ++i) { os << ","; detail::write_g17(os, s.state.qd[i]); }
    for (int i = 0; i < 6; ++i) { os << ","; detail::write_g17(os, s.state.qdd[i]); }
    for (int i = 0; i < 4; ++i) { os << ","; detail::write_g17(os, s.pressure_left[i]); }
    for (int i = 0; i < 4; ++i) { os << ","; detail::write_g17(os, s.pressure_right[i]); }
    os << "\n";
  }
}

}  // namespace exosim
