// Test-side oracles and generators, independent of the library internals.
#pragma once

#include <random>
#include <vector>

#include "exosim/planar_chain.hpp"

namespace exosim::test {

// Independent forward kinematics by composing 3x3 homogeneous transforms.
struct HtFrames {
  std::vector<Eigen::Vector2d> joint_pos;
  std::vector<Eigen::Vector2d> com_pos;
  Eigen::Vector2d tip;
};

inline HtFrames homogeneous_fk(const PlanarChain& c, const Eigen::VectorXd& q) {
  auto rot = [](double a) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 0) = std::cos(a);
    m(0, 1) = -std::sin(a);
    m(1, 0) = std::sin(a);
    m(1, 1) = std::cos(a);
    return m;
  };
  auto trans = [](double x, double y) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 2) = x;
    m(1, 2) = y;
    return m;
  };
  HtFrames f;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  for (int i = 0; i < c.size(); ++i) {
    f.joint_pos.emplace_back(t(0, 2), t(1, 2));
    t = t * rot(c.joints[i].sign * q[i] + c.joints[i].offset);
    const Eigen::Vector3d com = t * Eigen::Vector3d(c.links[i].com.x(), c.links[i].com.y(), 1.0);
    f.com_pos.emplace_back(com.x(), com.y());
    t = t * trans(c.links[i].length, 0.0);
  }
  f.tip = Eigen::Vector2d(t(0, 2), t(1, 2));
  return f;
}

inline PlanarChain random_chain(std::mt19937_64& rng, int n, bool planar_com = false) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  PlanarChain c;
  for (int i = 0; i < n; ++i) {
    PlanarJoint j;
    j.sign = u01(rng) < 0.5 ? -1.0 : 1.0;
    j.offset = sym(rng) * kPi;
    c.joints.push_back(j);
    PlanarLink l;
    l.length = 0.1 + u01(rng);
    l.mass = 0.2 + 6.0 * u01(rng);
    l.com = planar_com ? Vec2(l.length * u01(rng), 0.3 * sym(rng))
                       : Vec2(l.length * u01(rng), 0.0);
    l.inertia = 0.2 * u01(rng);
    c.links.push_back(l);
  }
  c.gravity = Vec2(0.0, -9.81);
  return c;
}

// Central finite difference of the chain potential energy.
inline Eigen::VectorXd fd_potential_gradient(const PlanarChain& c, const Eigen::VectorXd& q,
                                             double h = 1e-6) {
  Eigen::VectorXd g(q.size());
  for (int i = 0; i < q.size(); ++i) {
    Eigen::VectorXd qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    g[i] = (potential_energy(c, qp) - potential_energy(c, qm)) / (2.0 * h);
  }
  return g;
}

// Smooth 2-harmonic test trajectory with analytic derivatives.
struct FourierTrajectory {
  Eigen::VectorXd a1, a2, phase;
  double w = 2.0;

  static FourierTrajectory random(std::mt19937_64& rng, int n, double amplitude = 0.6) {
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    FourierTrajectory tr;
    tr.a1.resize(n);
    tr.a2.resize(n);
    tr.phase.resize(n);
    for (int i = 0; i < n; ++i) {
      tr.a1[i] = amplitude * sym(rng);
      tr.a2[i] = 0.4 * amplitude * sym(rng);
      tr.phase[i] = kPi * sym(rng);
    }
    tr.w = 1.0 + std::abs(sym(rng));
    return tr;
  }

  void eval(double t, Eigen::VectorXd& q, Eigen::VectorXd& qd, Eigen::VectorXd& qdd) const {
    const int n = static_cast<int>(a1.size());
    q.resize(n);
    qd.resize(n);
    qdd.resize(n);
    for (int i = 0; i < n; ++i) {
      const double p1 = w * t + phase[i], p2 = 2.0 * w * t + 0.7 * phase[i];
      q[i] = a1[i] * std::sin(p1) + a2[i] * std::sin(p2);
      qd[i] = a1[i] * w * std::cos(p1) + a2[i] * 2.0 * w * std::cos(p2);
      qdd[i] = -a1[i] * w * w * std::sin(p1) - a2[i] * 4.0 * w * w * std::sin(p2);
    }
  }
};

}  // namespace exosim::test
