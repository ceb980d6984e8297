// Geometric and inertial description of the exoskeleton, environment and joint state.
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "exosim/core.hpp"

namespace exosim {

/// Sagittal-plane exoskeleton parameters. The device is left-right symmetric:
/// one set of leg-segment values describes both legs.
struct ExoParams {
  // Segment lengths, m.
  double shank_length = 0.0;
  double thigh_length = 0.0;
  double back_length = 0.0;

  // Per-link masses, kg. Legs are per-side (two thighs, two shanks, two feet).
  double back_mass = 0.0;
  double thigh_mass = 0.0;
  double shank_mass = 0.0;
  double foot_mass = 0.0;

  // COM offsets along the segment from its proximal end, m.
  double shank_com = 0.0;
  double thigh_com = 0.0;
  double back_com = 0.0;

  // Rotational inertia about each segment COM, kg·m².
  double shank_inertia = 0.0;
  double thigh_inertia = 0.0;
  double back_inertia = 0.0;
  double foot_inertia = 0.0;

  double total_height = 0.0;  // m
  double total_mass = 0.0;    // kg

  // Harness attachment distances, m.
  double thigh_cuff_offset = 0.0;  // from hip along the thigh
  double shank_cuff_offset = 0.0;  // from knee along the shank

  /// Placeholder defaults: 15 kg device, segment lengths scaled from the
  /// wearer height (thigh 0.245·H, shank 0.246·H), COM at mid-segment,
  /// rod-model inertias. All overridable via config.
  static ExoParams defaults(double user_height_m = 1.75) {
    ExoParams p;
    p.shank_length = 0.246 * user_height_m;
    p.thigh_length = 0.245 * user_height_m;
    p.total_height = 1.10;
    p.back_length = std::max(0.15, p.total_height - p.shank_length - p.thigh_length);
    p.back_mass = 7.0;
    p.thigh_mass = 2.5;
    p.shank_mass = 1.2;
    p.foot_mass = 0.3;
    p.total_mass = 15.0;
    p.shank_com = 0.5 * p.shank_length;
    p.thigh_com = 0.5 * p.thigh_length;
    p.back_com = 0.5 * p.back_length;
    auto rod = [](double m, double l) { return m * l * l / 12.0; };
    p.shank_inertia = rod(p.shank_mass, p.shank_length);
    p.thigh_inertia = rod(p.thigh_mass, p.thigh_length);
    p.back_inertia = rod(p.back_mass, p.back_length);
    p.foot_inertia = 0.0;  // feet modelled as point masses at the ankle
    p.thigh_cuff_offset = 0.5 * p.thigh_length;
    p.shank_cuff_offset = 0.5 * p.shank_length;
    return p;
  }

  double link_mass_sum() const {
    return back_mass + 2.0 * (thigh_mass + shank_mass + foot_mass);
  }

  /// Throws ValidationError listing every violated invariant.
  void validate() const {
    std::vector<std::string> bad;
    auto positive = [&](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) bad.push_back(std::string(name) + " must be > 0");
    };
    positive(shank_length, "shank_length");
    positive(thigh_length, "thigh_length");
    positive(back_length, "back_length");
    positive(back_mass, "back_mass");
    positive(thigh_mass, "thigh_mass");
    positive(shank_mass, "shank_mass");
    positive(foot_mass, "foot_mass");
    positive(total_height, "total_height");
    positive(total_mass, "total_mass");
    if (std::abs(link_mass_sum() - total_mass) > 1e-9)
      bad.push_back("link masses must sum to total_mass within 1e-9 (sum=" +
                    std::to_string(link_mass_sum()) + ", total=" + std::to_string(total_mass) + ")");
    auto in_segment = [&](double c, double l, const char* name) {
      if (!(c >= 0.0 && c <= l)) bad.push_back(std::string(name) + " must lie within [0, segment length]");
    };
    in_segment(shank_com, shank_length, "shank_com");
    in_segment(thigh_com, thigh_length, "thigh_com");
    in_segment(back_com, back_length, "back_com");
    auto nonneg = [&](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) bad.push_back(std::string(name) + " must be >= 0");
    };
    nonneg(shank_inertia, "shank_inertia");
    nonneg(thigh_inertia, "thigh_inertia");
    nonneg(back_inertia, "back_inertia");
    nonneg(foot_inertia, "foot_inertia");
    in_segment(thigh_cuff_offset, thigh_length, "thigh_cuff_offset");
    in_segment(shank_cuff_offset, shank_length, "shank_cuff_offset");
    if (!bad.empty()) {
      std::ostringstream os;
      os << "invalid ExoParams:";
      for (const auto& b : bad) os << " [" << b << "]";
      throw ValidationError(os.str());
    }
  }
};

/// Walking environment: slope angle (positive = ascending) and carried load.
struct Environment {
  double slope_rad = 0.0;
  double load_kg = 0.0;
  double gravity = 9.81;  // m/s²

  // Load attachment in the back-link frame: at the back-link COM plus a
  // posterior offset, m.
  static constexpr double kLoadPosteriorOffset = 0.10;

  void validate() const {
    if (!(std::abs(slope_rad) < kPi / 4.0))
      throw ValidationError("environment: |slope_rad| must be < pi/4");
    if (!(load_kg >= 0.0) || !std::isfinite(load_kg))
      throw ValidationError("environment: load_kg must be >= 0");
    if (!(gravity > 0.0)) throw ValidationError("environment: gravity must be > 0");
  }
};

struct JointLimits {
  double hip = 2.0;        // |q_hip| <= hip
  double knee_min = 0.0;   // q_knee in [knee_min, knee_max]
  double knee_max = 2.4;
  double ankle = 0.8;      // |q_ankle| <= ankle

  bool within(const Vec6& q) const {
    auto leg_ok = [&](int hip_i, int knee_i, int ankle_i) {
      return std::abs(q[hip_i]) <= hip && q[knee_i] >= knee_min && q[knee_i] <= knee_max &&
             std::abs(q[ankle_i]) <= ankle;
    };
    return leg_ok(kLeftHip, kLeftKnee, kLeftAnkle) && leg_ok(kRightHip, kRightKnee, kRightAnkle);
  }
};

/// Joint angles/velocities/accelerations in device-frame ordering
/// [l_hip, l_knee, l_ankle, r_hip, r_knee, r_ankle]. Grounded-chain ordering
/// is produced explicitly by GroundedChain::to_chain_order.
struct JointState {
  Vec6 q = Vec6::Zero();
  Vec6 qd = Vec6::Zero();
  Vec6 qdd = Vec6::Zero();

  void validate_finite() const {
    if (!all_finite(q) || !all_finite(qd) || !all_finite(qdd))
      throw ValidationError("JointState: entries must be finite");
  }
};

}  // namespace exosim
