// Stance-grounded serial-chain realization of the exoskeleton.
//
// The 6-joint sagittal chain is rooted at the stance ankle and traverses
// stance shank -> stance thigh -> back-link -> swing thigh -> swing shank ->
// swing foot. The back-link is traversed at the pelvis, so its chain length is
// zero while its body (mass, COM up the trunk, optional carried load) hangs
// off the traversal point. The base frame is the stance-foot frame: on a
// slope the frame tilts with the ground and the gravity vector rotates
// instead, which keeps the chain table slope-independent.
#pragma once

#include <array>

#include "exosim/core.hpp"
#include "exosim/exo_params.hpp"
#include "exosim/planar_chain.hpp"

namespace exosim {

// Chain joint indices (fixed traversal order).
enum ChainJoint : int {
  kStanceAnkle = 0,
  kStanceKnee = 1,
  kStanceHip = 2,
  kSwingHip = 3,
  kSwingKnee = 4,
  kSwingAnkle = 5,
};

struct GroundedChain {
  PlanarChain chain;              // joints in chain order, anatomical coordinates
  Side stance = Side::Left;
  std::array<int, 6> device_index{};  // chain index -> device-frame index
  double base_mass = 0.0;         // stance foot, static under the base joint
  ExoParams params;
  Environment env;

  /// Sum of all link masses including the grounded stance foot.
  double total_link_mass() const {
    double m = base_mass;
    for (const auto& l : chain.links) m += l.mass;
    return m;
  }

  Eigen::VectorXd to_chain_order(const Vec6& device) const {
    Eigen::VectorXd v(6);
    for (int i = 0; i < 6; ++i) v[i] = device[device_index[i]];
    return v;
  }

  Vec6 to_device_order(const Eigen::VectorXd& chain_v) const {
    Vec6 v;
    for (int i = 0; i < 6; ++i) v[device_index[i]] = chain_v[i];
    return v;
  }
};

/// Builds the grounded chain for one stance side. Validates inputs, folds the
/// carried load into the back-link inertial data and rotates gravity by the
/// slope angle.
inline GroundedChain build_grounded_chain(const ExoParams& p, Side stance,
                                          const Environment& env) {
  p.validate();
  env.validate();

  GroundedChain g;
  g.stance = stance;
  g.params = p;
  g.env = env;
  g.base_mass = p.foot_mass;

  // Device indices per chain slot. Left stance grounds the left leg.
  if (stance == Side::Left)
    g.device_index = {kLeftAnkle, kLeftKnee, kLeftHip, kRightHip, kRightKnee, kRightAnkle};
  else
    g.device_index = {kRightAnkle, kRightKnee, kRightHip, kLeftHip, kLeftKnee, kLeftAnkle};

  // Rotation of each chain joint per anatomical convention (hip/ankle
  // flexion-positive, knee flexion in [0, 2.4]). Offsets place the q=0 pose
  // in quiet standing: legs vertical, trunk up, both feet at ground height.
  g.chain.joints = {
      PlanarJoint{-1.0, kPi / 2.0},  // stance ankle: shank up, dorsiflexion tips it forward
      PlanarJoint{+1.0, 0.0},        // stance knee
      PlanarJoint{-1.0, 0.0},        // stance hip: trunk relative to stance thigh
      PlanarJoint{+1.0, -kPi},       // swing hip: thigh points down from the pelvis
      PlanarJoint{-1.0, 0.0},        // swing knee
      PlanarJoint{+1.0, kPi / 2.0},  // swing ankle: foot forward when leg hangs straight
  };

  // Back-link body: COM up the trunk from the pelvis; carried load rides at
  // the back COM plus a posterior offset (local +y is posterior when upright).
  PlanarLink back;
  back.length = 0.0;
  back.mass = p.back_mass;
  back.com = Vec2(p.back_com, 0.0);
  back.inertia = p.back_inertia;
  if (env.load_kg > 0.0) {
    const Vec2 load_pos(p.back_com, Environment::kLoadPosteriorOffset);
    const double m = back.mass + env.load_kg;
    const Vec2 com = (back.mass * back.com + env.load_kg * load_pos) / m;
    back.inertia += back.mass * (back.com - com).squaredNorm() +
                    env.load_kg * (load_pos - com).squaredNorm();
    back.mass = m;
    back.com = com;
  }

  const PlanarLink shank{p.shank_length, p.shank_mass, Vec2(p.shank_com, 0.0), p.shank_inertia};
  const PlanarLink thigh{p.thigh_length, p.thigh_mass, Vec2(p.thigh_com, 0.0), p.thigh_inertia};
  const PlanarLink swing_foot{0.0, p.foot_mass, Vec2::Zero(), p.foot_inertia};

  // Stance-side segments are traversed distal-to-proximal; COM offsets are
  // measured from the proximal anatomical end, so they flip on the way up.
  PlanarLink stance_shank = shank;
  stance_shank.com = Vec2(p.shank_length - p.shank_com, 0.0);
  PlanarLink stance_thigh = thigh;
  stance_thigh.com = Vec2(p.thigh_length - p.thigh_com, 0.0);

  g.chain.links = {stance_shank, stance_thigh, back, thigh, shank, swing_foot};

  // Base frame rides the slope; express gravity there.
  g.chain.gravity = rotate(Vec2(0.0, -env.gravity), -env.slope_rad);
  return g;
}

inline ChainFrames grounded_frames(const GroundedChain& g, const JointState& s) {
  s.validate_finite();
  return forward_frames(g.chain, g.to_chain_order(s.q));
}

/// Static gravity-compensation torques, device-frame ordering. Equals the
/// gradient of the chain potential energy.
inline Torques gravity_torques(const GroundedChain& g, const JointState& s) {
  s.validate_finite();
  const Eigen::VectorXd q = g.to_chain_order(s.q);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
  return g.to_device_order(inverse_dynamics(g.chain, q, zero, zero, true));
}

/// Inertial torques M(q)q̈ + C(q,q̇)q̇, no gravity term.
inline Torques inertia_torques(const GroundedChain& g, const JointState& s) {
  s.validate_finite();
  return g.to_device_order(inverse_dynamics(g.chain, g.to_chain_order(s.q),
                                            g.to_chain_order(s.qd), g.to_chain_order(s.qdd),
                                            false));
}

/// Full feed-forward compensation: gravity + inertia. This is τ_L for a
/// left-grounded chain and τ_R for a right-grounded one.
inline Torques compensation_torques(const GroundedChain& g, const JointState& s) {
  s.validate_finite();
  return g.to_device_order(inverse_dynamics(g.chain, g.to_chain_order(s.q),
                                            g.to_chain_order(s.qd), g.to_chain_order(s.qdd),
                                            true));
}

inline double chain_kinetic_energy(const GroundedChain& g, const JointState& s) {
  return kinetic_energy(g.chain, g.to_chain_order(s.q), g.to_chain_order(s.qd));
}

inline double chain_potential_energy(const GroundedChain& g, const JointState& s) {
  return potential_energy(g.chain, g.to_chain_order(s.q));
}

}  // namespace exosim
