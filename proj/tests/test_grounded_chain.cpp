#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "exosim/gait.hpp"
#include "exosim/grounded_chain.hpp"
#include "helpers.hpp"

using namespace exosim;

namespace {

JointState random_state(std::mt19937_64& rng, bool with_motion = true) {
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  JointState s;
  for (int i = 0; i < 6; ++i) {
    const bool knee = i == kLeftKnee || i == kRightKnee;
    s.q[i] = knee ? 0.6 + 0.55 * sym(rng) : 0.6 * sym(rng);
    if (with_motion) {
      s.qd[i] = 2.0 * sym(rng);
      s.qdd[i] = 6.0 * sym(rng);
    }
  }
  return s;
}

Vec6 mirror_lr(const Vec6& v) {
  Vec6 m;
  for (int i = 0; i < 3; ++i) {
    m[i] = v[i + 3];
    m[i + 3] = v[i];
  }
  return m;
}

}  // namespace

TEST_CASE("default parameters validate and the chain carries the full device mass") {
  const ExoParams p = ExoParams::defaults();
  REQUIRE_NOTHROW(p.validate());
  REQUIRE(p.link_mass_sum() == Catch::Approx(15.0).margin(1e-12));

  const GroundedChain g = build_grounded_chain(p, Side::Left, Environment{});
  REQUIRE(g.total_link_mass() == Catch::Approx(15.0).margin(1e-12));
}

TEST_CASE("parameter violations are reported by name") {
  ExoParams p = ExoParams::defaults();
  p.thigh_mass = -1.0;
  REQUIRE_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("thigh_mass"));

  ExoParams q = ExoParams::defaults();
  q.back_com = q.back_length + 0.2;
  REQUIRE_THROWS_WITH(q.validate(), Catch::Matchers::ContainsSubstring("back_com"));

  ExoParams r = ExoParams::defaults();
  r.total_mass = 14.0;
  REQUIRE_THROWS_WITH(r.validate(), Catch::Matchers::ContainsSubstring("total_mass"));
}

TEST_CASE("quiet standing pose: joints on the base axis, swing foot grounded") {
  const GroundedChain g = build_grounded_chain(ExoParams::defaults(), Side::Left, Environment{});
  JointState s;  // all zeros
  const ChainFrames f = grounded_frames(g, s);
  for (const Vec2& p : f.joint_pos) REQUIRE(std::abs(p.x()) < 1e-12);
  REQUIRE(std::abs(f.tip.x()) < 1e-12);
  REQUIRE(std::abs(f.tip.y()) < 1e-12);  // swing foot back at ground height

  // Collinear pose: traversed arc length equals the sum of segment lengths.
  double arc = 0.0;
  for (size_t i = 1; i < f.joint_pos.size(); ++i)
    arc += (f.joint_pos[i] - f.joint_pos[i - 1]).norm();
  arc += (f.tip - f.joint_pos.back()).norm();
  double expect = 0.0;
  for (const auto& l : g.chain.links) expect += l.length;
  REQUIRE(arc == Catch::Approx(expect).epsilon(1e-12));

  SECTION("zero gravity torque when every COM sits on the base axis") {
    const Torques tau = gravity_torques(g, s);
    REQUIRE(tau.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("device/chain ordering conversions invert each other") {
  for (Side side : {Side::Left, Side::Right}) {
    const GroundedChain g = build_grounded_chain(ExoParams::defaults(), side, Environment{});
    Vec6 v;
    v << 1, 2, 3, 4, 5, 6;
    REQUIRE((g.to_device_order(g.to_chain_order(v)) - v).cwiseAbs().maxCoeff() == 0.0);
  }
  const GroundedChain gl = build_grounded_chain(ExoParams::defaults(), Side::Left, Environment{});
  REQUIRE(gl.device_index == std::array<int, 6>{kLeftAnkle, kLeftKnee, kLeftHip, kRightHip,
                                                kRightKnee, kRightAnkle});
  const GroundedChain gr = build_grounded_chain(ExoParams::defaults(), Side::Right, Environment{});
  REQUIRE(gr.device_index == std::array<int, 6>{kRightAnkle, kRightKnee, kRightHip, kLeftHip,
                                                kLeftKnee, kLeftAnkle});
}

TEST_CASE("mirrored stance sides produce mirror-symmetric chains and torques") {
  const ExoParams p = ExoParams::defaults();
  const Environment env{0.05, 4.0};
  const GroundedChain gl = build_grounded_chain(p, Side::Left, env);
  const GroundedChain gr = build_grounded_chain(p, Side::Right, env);

  for (int i = 0; i < 6; ++i) {
    REQUIRE(gl.chain.joints[i].sign == gr.chain.joints[i].sign);
    REQUIRE(gl.chain.joints[i].offset == gr.chain.joints[i].offset);
    REQUIRE(gl.chain.links[i].length == gr.chain.links[i].length);
    REQUIRE(gl.chain.links[i].mass == gr.chain.links[i].mass);
    REQUIRE(gl.chain.links[i].com == gr.chain.links[i].com);
  }

  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const JointState s = random_state(rng);
    JointState m;
    m.q = mirror_lr(s.q);
    m.qd = mirror_lr(s.qd);
    m.qdd = mirror_lr(s.qdd);
    const Torques a = compensation_torques(gl, s);
    const Torques b = compensation_torques(gr, m);
    REQUIRE((mirror_lr(b) - a).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("carried load folds into the back link") {
  const ExoParams p = ExoParams::defaults();
  const GroundedChain none = build_grounded_chain(p, Side::Left, Environment{0.0, 0.0});
  const GroundedChain ten = build_grounded_chain(p, Side::Left, Environment{0.0, 10.0});
  REQUIRE(ten.chain.links[2].mass == Catch::Approx(none.chain.links[2].mass + 10.0));

  SECTION("gravity torques are linear in the load mass") {
    std::mt19937_64 rng(47);
    const JointState s = random_state(rng, false);
    const Torques t0 = gravity_torques(none, s);
    const Torques t4 =
        gravity_torques(build_grounded_chain(p, Side::Left, Environment{0.0, 4.0}), s);
    const Torques t10 = gravity_torques(ten, s);
    const Torques extrapolated = t0 + 2.5 * (t4 - t0);
    REQUIRE((t10 - extrapolated).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gravity torques are linear in each link mass") {
  auto with_thigh_mass = [](double m) {
    ExoParams p = ExoParams::defaults();
    p.total_mass += 2.0 * (m - p.thigh_mass);
    p.thigh_mass = m;
    return build_grounded_chain(p, Side::Left, Environment{});
  };
  std::mt19937_64 rng(53);
  const JointState s = random_state(rng, false);
  const Torques t1 = gravity_torques(with_thigh_mass(1.0), s);
  const Torques t2 = gravity_torques(with_thigh_mass(2.0), s);
  const Torques t5 = gravity_torques(with_thigh_mass(5.0), s);
  REQUIRE(((t5 - t1) - 4.0 * (t2 - t1)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("slope equals an explicit world-frame rotation of the chain") {
  const double alpha = deg2rad(10.0);
  const GroundedChain sloped =
      build_grounded_chain(ExoParams::defaults(), Side::Left, Environment{alpha, 3.0});

  // Oracle: tilt the whole chain by alpha and keep gravity world-vertical.
  PlanarChain tilted = sloped.chain;
  tilted.joints[0].offset += alpha;
  tilted.gravity = Vec2(0.0, -9.81);

  std::mt19937_64 rng(59);
  for (int rep = 0; rep < 20; ++rep) {
    const JointState s = random_state(rng);
    const Eigen::VectorXd q = sloped.to_chain_order(s.q);
    const Eigen::VectorXd qd = sloped.to_chain_order(s.qd);
    const Eigen::VectorXd qdd = sloped.to_chain_order(s.qdd);
    const Eigen::VectorXd a = inverse_dynamics(sloped.chain, q, qd, qdd, true);
    const Eigen::VectorXd b = inverse_dynamics(tilted, q, qd, qdd, true);
    REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  }

  SECTION("zero slope reproduces the flat-ground torques") {
    const GroundedChain flat =
        build_grounded_chain(ExoParams::defaults(), Side::Left, Environment{0.0, 3.0});
    const GroundedChain zero =
        build_grounded_chain(ExoParams::defaults(), Side::Left, Environment{-0.0, 3.0});
    const JointState s = random_state(rng);
    REQUIRE((gravity_torques(flat, s) - gravity_torques(zero, s)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("grounded gravity matches the finite-difference gradient with slope and load") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Environment env{0.6 * (u01(rng) - 0.5), 12.0 * u01(rng)};
    const Side side = u01(rng) < 0.5 ? Side::Left : Side::Right;
    const GroundedChain g = build_grounded_chain(ExoParams::defaults(), side, env);
    const JointState s = random_state(rng, false);
    const Eigen::VectorXd q = g.to_chain_order(s.q);
    const Torques tau = gravity_torques(g, s);
    const Eigen::VectorXd fd = test::fd_potential_gradient(g.chain, q);
    const Torques fd_dev = g.to_device_order(fd);
    REQUIRE((tau - fd_dev).norm() < 1e-6 * std::max(1.0, fd_dev.norm()));
  }
}

TEST_CASE("static compensation equals gravity; full compensation adds inertia") {
  const GroundedChain g =
      build_grounded_chain(ExoParams::defaults(), Side::Left, Environment{0.1, 5.0});
  std::mt19937_64 rng(67);
  JointState still = random_state(rng, false);
  REQUIRE((compensation_torques(g, still) - gravity_torques(g, still)).cwiseAbs().maxCoeff() <
          1e-12);

  const JointState moving = random_state(rng);
  const Torques total = compensation_torques(g, moving);
  const Torques parts = gravity_torques(g, moving) + inertia_torques(g, moving);
  REQUIRE((total - parts).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("stance-ankle compensation peak at 3.5 km/h sits in the reported range") {
  const GroundedChain lfg =
      build_grounded_chain(ExoParams::defaults(), Side::Left, Environment{});
  const GaitProfile prof = GaitProfile::constant_speed(3.5);
  double peak = 0.0;
  for (int k = 0; k < 300; ++k) {
    const GaitSample s = gait_sample(prof, 5.0 + 0.01 * k);  // ~2.4 cycles
    if (s.support_left < 0.99) continue;  // left single support only
    const Torques tau = compensation_torques(lfg, s.state);
    peak = std::max(peak, std::abs(tau[kLeftAnkle]));
  }
  REQUIRE(peak > 40.0);
  REQUIRE(peak < 130.0);
}
