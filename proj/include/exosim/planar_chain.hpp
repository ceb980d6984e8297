// Planar serial-chain kinematics and recursive Newton-Euler inverse dynamics.
//
// A chain is a sequence of revolute joints in the sagittal plane. Joint i
// rotates link i relative to link i-1 by  sign_i * q_i + offset_i,  where q_i
// is the anatomical joint variable. Link i extends from joint i to joint i+1
// over `length` along its local +x axis; its COM may sit anywhere in the link
// plane (2-D `com` in the link frame). Torque outputs are conjugate to the
// anatomical q, so energy bookkeeping (tau·qdot) works directly.
#pragma once

#include <vector>

#include "exosim/core.hpp"

namespace exosim {

struct PlanarJoint {
  double sign = 1.0;    // chain rotation per unit of anatomical q
  double offset = 0.0;  // fixed rotation, rad
};

struct PlanarLink {
  double length = 0.0;   // joint-to-joint distance, m
  double mass = 0.0;     // kg
  Vec2 com = Vec2::Zero();  // COM in the link frame, m
  double inertia = 0.0;  // about the COM, kg·m²
};

struct PlanarChain {
  std::vector<PlanarJoint> joints;
  std::vector<PlanarLink> links;
  Vec2 gravity = Vec2(0.0, -9.81);  // base-frame gravity acceleration, m/s²

  int size() const { return static_cast<int>(joints.size()); }
};

/// Pose of every frame of the chain, all in the base frame.
struct ChainFrames {
  std::vector<double> link_angle;  // absolute polar angle of each link
  std::vector<Vec2> joint_pos;     // joint origins; joint_pos[0] is the base
  std::vector<Vec2> com_pos;
  Vec2 tip = Vec2::Zero();         // end of the last link
};

inline ChainFrames forward_frames(const PlanarChain& c, const Eigen::VectorXd& q) {
  const int n = c.size();
  ChainFrames f;
  f.link_angle.resize(n);
  f.joint_pos.resize(n);
  f.com_pos.resize(n);
  double angle = 0.0;
  Vec2 p = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    angle += c.joints[i].sign * q[i] + c.joints[i].offset;
    f.link_angle[i] = angle;
    f.joint_pos[i] = p;
    f.com_pos[i] = p + rotate(c.links[i].com, angle);
    p += c.links[i].length * unit_dir(angle);
  }
  f.tip = p;
  return f;
}

/// Link angular velocities and COM linear velocities (base frame).
struct ChainRates {
  std::vector<double> omega;
  std::vector<Vec2> com_vel;
};

inline ChainRates velocity_frames(const PlanarChain& c, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& qd) {
  const int n = c.size();
  const ChainFrames f = forward_frames(c, q);
  ChainRates r;
  r.omega.resize(n);
  r.com_vel.resize(n);
  double w = 0.0;
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    w += c.joints[i].sign * qd[i];
    r.omega[i] = w;
    r.com_vel[i] = v + w * perp(f.com_pos[i] - f.joint_pos[i]);
    v += w * perp(c.links[i].length * unit_dir(f.link_angle[i]));
  }
  return r;
}

/// Recursive Newton-Euler inverse dynamics. Returns the joint torques that
/// realize the motion (q, qd, qdd); with `with_gravity` the gravity load is
/// included via a fictitious base acceleration, so the q̇=q̈=0 result is the
/// static gravity-compensation torque +∂V/∂q.
inline Eigen::VectorXd inverse_dynamics(const PlanarChain& c, const Eigen::VectorXd& q,
                                        const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd,
                                        bool with_gravity = true) {
  const int n = c.size();
  const ChainFrames frames = forward_frames(c, q);

  // Outward pass: angular rates/accelerations and linear accelerations.
  std::vector<double> omega(n), alpha(n);
  std::vector<Vec2> a_joint(n), a_com(n);
  double w = 0.0, al = 0.0;
  Vec2 a = with_gravity ? Vec2(-c.gravity) : Vec2(Vec2::Zero());
  for (int i = 0; i < n; ++i) {
    w += c.joints[i].sign * qd[i];
    al += c.joints[i].sign * qdd[i];
    omega[i] = w;
    alpha[i] = al;
    a_joint[i] = a;
    const Vec2 rc = frames.com_pos[i] - frames.joint_pos[i];
    a_com[i] = a + al * perp(rc) - w * w * rc;
    const Vec2 rl = c.links[i].length * unit_dir(frames.link_angle[i]);
    a += al * perp(rl) - w * w * rl;
  }

  // Inward pass: joint forces and moments.
  Eigen::VectorXd tau(n);
  Vec2 f_next = Vec2::Zero();
  double n_next = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const Vec2 F = c.links[i].mass * a_com[i];
    const double N = c.links[i].inertia * alpha[i];
    const Vec2 r_com = frames.com_pos[i] - frames.joint_pos[i];
    const Vec2 r_next = c.links[i].length * unit_dir(frames.link_angle[i]);
    const double moment = N + n_next + cross2(r_com, F) + cross2(r_next, f_next);
    f_next = F + f_next;
    n_next = moment;
    tau[i] = c.joints[i].sign * moment;
  }
  return tau;
}

inline double kinetic_energy(const PlanarChain& c, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& qd) {
  const ChainRates r = velocity_frames(c, q, qd);
  double t = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    t += 0.5 * c.links[i].mass * r.com_vel[i].squaredNorm() +
         0.5 * c.links[i].inertia * r.omega[i] * r.omega[i];
  }
  return t;
}

/// Gravitational potential energy, zero at the base origin. Increases when a
/// COM moves against the gravity vector.
inline double potential_energy(const PlanarChain& c, const Eigen::VectorXd& q) {
  const ChainFrames f = forward_frames(c, q);
  double v = 0.0;
  for (int i = 0; i < c.size(); ++i) v -= c.links[i].mass * c.gravity.dot(f.com_pos[i]);
  return v;
}

}  // namespace exosim
