#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <random>
#include <sstream>

#include "exosim/gait.hpp"

using namespace exosim;

TEST_CASE("piecewise-linear speed profile") {
  GaitProfile p;
  p.speed_mps = {{0.0, 0.0}, {15.0, kmh_to_mps(2.0)}};
  p.validate();

  REQUIRE(speed_at(p, 0.0) == 0.0);
  REQUIRE(speed_at(p, 7.5) == Catch::Approx(kmh_to_mps(1.0)).epsilon(1e-12));
  REQUIRE(speed_at(p, 15.0) == Catch::Approx(kmh_to_mps(2.0)).epsilon(1e-12));

  SECTION("row-1 sequence holds 6 km/h after the last ramp") {
    const GaitProfile row1 = GaitProfile::speed_sequence({0, 2, 4, 6, 2, 6}, 15.0, 90.0);
    REQUIRE(speed_at(row1, 90.0) == Catch::Approx(kmh_to_mps(6.0)).epsilon(1e-12));
    REQUIRE(speed_at(row1, 500.0) == Catch::Approx(kmh_to_mps(6.0)).epsilon(1e-12));
  }
}

TEST_CASE("quiet standing at zero speed") {
  const GaitProfile p = GaitProfile::constant_speed(0.0);
  for (double t : {0.0, 1.0, 17.3}) {
    const GaitSample s = gait_sample(p, t);
    REQUIRE(s.state.q.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(s.state.qd.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(s.pressure_sum_left() == Catch::Approx(s.pressure_sum_right()).epsilon(1e-12));
    REQUIRE(s.pressure_sum_left() > 0.0);
    REQUIRE(stance_label(s) == -1);  // exact tie resolves to -1
  }
}

TEST_CASE("analytic derivatives match finite differences of q") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (double kmh : {1.0, 3.5, 6.0}) {
    const GaitProfile p = GaitProfile::constant_speed(kmh);
    for (int rep = 0; rep < 40; ++rep) {
      const double t = 1.0 + 20.0 * u01(rng);
      const double h = 1e-5;
      const GaitSample s = gait_sample(p, t);
      const GaitSample sp = gait_sample(p, t + h);
      const GaitSample sm = gait_sample(p, t - h);
      const Vec6 fd_qd = (sp.state.q - sm.state.q) / (2.0 * h);
      REQUIRE((s.state.qd - fd_qd).norm() < 1e-6 * std::max(1.0, fd_qd.norm()));
      const Vec6 fd_qdd = (sp.state.qd - sm.state.qd) / (2.0 * h);
      REQUIRE((s.state.qdd - fd_qdd).norm() < 1e-4 * std::max(1.0, fd_qdd.norm()));
    }
  }

  SECTION("holds on a ramp away from law kinks") {
    const GaitProfile p = GaitProfile::speed_sequence({0, 4}, 15.0, 40.0);
    int checked = 0;
    for (int rep = 0; rep < 200 && checked < 30; ++rep) {
      const double t = 40.0 * u01(rng);
      const double v = speed_at(p, t);
      const double v_lo = 40.0 * 40.0 / (96.0 * 96.0);
      // Stay inside the sqrt-law regime and clear of speed breakpoints.
      if (v < v_lo + 0.02) continue;
      bool near_bp = false;
      for (const auto& b : p.speed_mps)
        if (std::abs(t - b.t) < 1e-3) near_bp = true;
      if (near_bp) continue;
      const double h = 1e-5;
      const GaitSample s = gait_sample(p, t);
      const Vec6 fd_qd =
          (gait_sample(p, t + h).state.q - gait_sample(p, t - h).state.q) / (2.0 * h);
      REQUIRE((s.state.qd - fd_qd).norm() < 1e-6 * std::max(1.0, fd_qd.norm()));
      ++checked;
    }
    REQUIRE(checked == 30);
  }
}

TEST_CASE("gait is periodic at constant speed") {
  const GaitProfile p = GaitProfile::constant_speed(3.5);
  const PhaseState ph = phase_at(p, 10.0);
  const double period = 1.0 / ph.rate;
  for (double t : {2.0, 9.4, 30.0}) {
    const GaitSample a = gait_sample(p, t);
    const GaitSample b = gait_sample(p, t + period);
    REQUIRE((a.state.q - b.state.q).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("cadence grows monotonically with speed") {
  GaitTuning g;
  REQUIRE(cadence_spm(g, kmh_to_mps(3.5)) > cadence_spm(g, kmh_to_mps(1.0)));
  REQUIRE(cadence_spm(g, 0.1) == 40.0);   // low clamp
  REQUIRE(cadence_spm(g, 9.0) == 140.0);  // high clamp
}

TEST_CASE("stance labels from insole sums") {
  GaitSample s;
  s.pressure_left = {400.0, 0.0, 0.0, 0.0};
  s.pressure_right = {0.0, 0.0, 0.0, 0.0};
  REQUIRE(stance_label(s) == +1);
  std::swap(s.pressure_left, s.pressure_right);
  REQUIRE(stance_label(s) == -1);
  s.pressure_left = s.pressure_right;  // exact tie
  REQUIRE(stance_label(s) == -1);
}

TEST_CASE("contact and pressure are consistent over the cycle") {
  const GaitProfile p = GaitProfile::constant_speed(3.5);
  const double sigma_hi = 0.62;  // stance fractions never exceed this
  int single_support_seen = 0;
  for (int k = 0; k < 500; ++k) {
    const GaitSample s = gait_sample(p, 3.0 + 0.01 * k);
    REQUIRE(s.contact_left == (s.pressure_sum_left() > 0.0));
    REQUIRE(s.contact_right == (s.pressure_sum_right() > 0.0));
    REQUIRE((s.contact_left || s.contact_right));
    for (double v : s.pressure_left) REQUIRE(v >= 0.0);
    for (double v : s.pressure_right) REQUIRE(v >= 0.0);
    // Deep single support: contralateral foot fully unloaded.
    if (s.phi > sigma_hi + 0.02 && s.phi < 0.98) {
      REQUIRE(s.pressure_sum_left() == 0.0);
      ++single_support_seen;
    }
  }
  REQUIRE(single_support_seen > 50);
}

TEST_CASE("double-support fraction stays within the configured bounds") {
  for (double kmh : {1.0, 3.5, 6.0}) {
    const GaitProfile p = GaitProfile::constant_speed(kmh);
    const double period = 1.0 / phase_at(p, 10.0).rate;
    int ds = 0;
    const int n = 2000;
    for (int k = 0; k < n; ++k) {
      const GaitSample s = gait_sample(p, 5.0 + period * k / n);
      if (s.contact_left && s.contact_right) ++ds;
    }
    const double frac = static_cast<double>(ds) / n;
    REQUIRE(frac >= 0.10);
    REQUIRE(frac <= 0.25);
  }
}

TEST_CASE("sampling is deterministic, including seeded noise") {
  GaitProfile p = GaitProfile::constant_speed(3.5);
  p.tuning.noise_enabled = true;
  p.seed = 987;
  const GaitSample a = gait_sample(p, 4.32);
  const GaitSample b = gait_sample(p, 4.32);
  REQUIRE(std::memcmp(&a.pressure_left, &b.pressure_left, sizeof a.pressure_left) == 0);
  REQUIRE(std::memcmp(&a.pressure_right, &b.pressure_right, sizeof a.pressure_right) == 0);
  REQUIRE((a.state.q - b.state.q).cwiseAbs().maxCoeff() == 0.0);

  GaitProfile other = p;
  other.seed = 988;
  const GaitSample c = gait_sample(other, 4.32);
  REQUIRE(std::memcmp(&a.pressure_left, &c.pressure_left, sizeof a.pressure_left) != 0);

  SECTION("noise keeps pressures non-negative and respects contact") {
    for (int k = 0; k < 300; ++k) {
      const GaitSample s = gait_sample(p, 0.01 * k);
      for (double v : s.pressure_left) REQUIRE(v >= 0.0);
      REQUIRE(s.contact_left == (s.pressure_sum_left() > 0.0));
    }
  }
}

TEST_CASE("calibration dataset shape and labels") {
  const GaitProfile p = GaitProfile::constant_speed(3.5);
  const CalibrationData d = make_calibration_dataset(p, 30.0, 100.0);
  REQUIRE(d.joint_angles.rows() == 3000);
  REQUIRE(d.joint_angles.cols() == 6);
  REQUIRE(!d.degenerate);
  for (long i = 0; i < d.labels.size(); ++i)
    REQUIRE((d.labels[i] == 1.0 || d.labels[i] == -1.0));

  SECTION("quiet standing yields a degenerate dataset") {
    const CalibrationData still = make_calibration_dataset(GaitProfile::constant_speed(0.0), 1.0, 50.0);
    REQUIRE(still.degenerate);
  }
  SECTION("too little data is rejected") {
    REQUIRE_THROWS_AS(make_calibration_dataset(p, 0.04, 100.0), ValidationError);
  }
}

TEST_CASE("joint trajectories respect the configured limits at all speeds") {
  const JointLimits limits;
  for (double kmh : {0.5, 1.0, 3.5, 6.0, 6.5}) {
    const GaitProfile p = GaitProfile::constant_speed(kmh);
    for (int k = 0; k < 400; ++k) {
      const GaitSample s = gait_sample(p, 2.0 + 0.013 * k);
      REQUIRE(limits.within(s.state.q));
    }
  }
}

TEST_CASE("gait csv export writes the documented schema") {
  const GaitProfile p = GaitProfile::constant_speed(1.0);
  std::ostringstream os;
  write_gait_csv(os, p, 0.1, 100.0);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  REQUIRE(header ==
          "t,phi,q_l_hip,q_l_knee,q_l_ankle,q_r_hip,q_r_knee,q_r_ankle,"
          "qd_l_hip,qd_l_knee,qd_l_ankle,qd_r_hip,qd_r_knee,qd_r_ankle,"
          "qdd_l_hip,qdd_l_knee,qdd_l_ankle,qdd_r_hip,qdd_r_knee,qdd_r_ankle,"
          "p_l_heel,p_l_medial,p_l_lateral,p_l_toe,p_r_heel,p_r_medial,p_r_lateral,p_r_toe");
  int rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  REQUIRE(rows == 10);
}
