// Human-robot interaction forces at the thigh and shank cuffs.
//
// Residual joint torque (what the assistance did not supply) must come from
// the user through the four harness cuffs. Each cuff exerts a single sagittal
// force perpendicular to its segment at the attachment point. The joint-space
// effect is tau = A f with A in R^{6x4}; the reported forces are the
// minimum-norm least-squares solution, the documented canonical distribution.
#pragma once

#include <cmath>

#include "exosim/core.hpp"
#include "exosim/grounded_chain.hpp"

namespace exosim {

struct HarnessModel {
  double thigh_cuff_offset = 0.0;  // from hip along the thigh, m
  double shank_cuff_offset = 0.0;  // from knee along the shank, m

  static HarnessModel from_params(const ExoParams& p) {
    return HarnessModel{p.thigh_cuff_offset, p.shank_cuff_offset};
  }

  void validate(const ExoParams& p) const {
    if (!(thigh_cuff_offset >= 0.0 && thigh_cuff_offset <= p.thigh_length))
      throw ValidationError("harness: thigh cuff offset must lie within the thigh");
    if (!(shank_cuff_offset >= 0.0 && shank_cuff_offset <= p.shank_length))
      throw ValidationError("harness: shank cuff offset must lie within the shank");
  }
};

/// Signed cuff force magnitudes, N, ordered
/// [left thigh, left shank, right thigh, right shank]. Positive along the
/// +90°-rotated segment direction. `damped` flags a rank-deficient solve.
struct CuffForces {
  Eigen::Vector4d f = Eigen::Vector4d::Zero();
  bool damped = false;
};

namespace detail {

struct CuffPoint {
  int link = 0;   // chain link carrying the cuff
  Vec2 pos;       // attachment point, base frame
  Vec2 dir;       // unit force direction (perpendicular to the segment)
};

// Cuff attachment points on the active grounded chain, ordered
// [stance thigh, stance shank, swing thigh, swing shank].
inline std::array<CuffPoint, 4> cuff_points(const GroundedChain& g, const ChainFrames& fr,
                                            const HarnessModel& h) {
  const double lt = g.params.thigh_length;
  const double ls = g.params.shank_length;
  auto on_link = [&](int link, double arc) {
    CuffPoint c;
    c.link = link;
    const Vec2 u = unit_dir(fr.link_angle[link]);
    c.pos = fr.joint_pos[link] + arc * u;
    c.dir = perp(u);
    return c;
  };
  // Stance segments are traversed distal-to-proximal, so anatomical offsets
  // flip; swing segments are proximal-to-distal.
  return {
      on_link(1, lt - h.thigh_cuff_offset),  // stance thigh (from knee end)
      on_link(0, ls - h.shank_cuff_offset),  // stance shank (from ankle end)
      on_link(3, h.thigh_cuff_offset),       // swing thigh (from hip)
      on_link(4, h.shank_cuff_offset),       // swing shank (from knee)
  };
}

// Torque produced about every chain joint by a unit force at each cuff.
inline Eigen::Matrix<double, 6, 4> cuff_torque_map(const GroundedChain& g,
                                                   const ChainFrames& fr,
                                                   const HarnessModel& h) {
  const auto cuffs = cuff_points(g, fr, h);
  Eigen::Matrix<double, 6, 4> a = Eigen::Matrix<double, 6, 4>::Zero();
  for (int c = 0; c < 4; ++c) {
    for (int j = 0; j <= cuffs[c].link; ++j) {
      const double moment = cross2(cuffs[c].pos - fr.joint_pos[j], cuffs[c].dir);
      a(j, c) = g.chain.joints[j].sign * moment;
    }
  }
  return a;
}

}  // namespace detail

/// Minimum-norm cuff forces reproducing the residual torque in the
/// cuff-reachable subspace. Falls back to a damped solve (1e-9) at
/// rank-deficient configurations and flags it.
inline CuffForces interaction_forces(const Torques& residual_device, const GroundedChain& g,
                                     const JointState& s, const HarnessModel& h) {
  if (!all_finite(residual_device)) throw ValidationError("interaction_forces: residual must be finite");
  h.validate(g.params);
  const ChainFrames fr = grounded_frames(g, s);
  const Eigen::Matrix<double, 6, 4> a = detail::cuff_torque_map(g, fr, h);
  const Eigen::VectorXd tau = g.to_chain_order(residual_device);

  CuffForces out;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  if (cod.rank() < 4) {
    out.damped = true;
    const Eigen::Matrix4d gram =
        a.transpose() * a + 1e-9 * Eigen::Matrix4d::Identity();
    Eigen::Vector4d fs = gram.ldlt().solve(a.transpose() * tau);
    out.f = fs;
  } else {
    out.f = cod.solve(tau);
  }

  // Chain cuff order [stance thigh, stance shank, swing thigh, swing shank]
  // -> device order [l_thigh, l_shank, r_thigh, r_shank].
  if (g.stance == Side::Right) {
    std::swap(out.f[0], out.f[2]);
    std::swap(out.f[1], out.f[3]);
  }
  return out;
}

}  // namespace exosim
