// Blend assistance strategy and the FSM-switched baseline.
//
// Blend mixes the two grounded-model torques with convex gains
//   gamma_L = (clamp(Y'q, -1, 1) + 1) / 2,   gamma_R = 1 - gamma_L
// where Y comes from a ridge-regularized least-squares regression of the
// stance class (+1 left grounded, -1 right) on the joint angle vector. The
// FSM baseline hard-switches between the two models on insole thresholds.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "exosim/core.hpp"
#include "exosim/gait.hpp"

namespace exosim {

/// Regression weights mapping joint angles to the stance score, plus
/// training metadata. Joint ordering is the device-frame ordering.
struct BlendWeights {
  Vec6 y = Vec6::Zero();
  double ridge_lambda = 0.0;
  long sample_count = 0;
  double residual_norm = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["joint_order"] = kJointNames;
    j["y"] = std::vector<double>(y.data(), y.data() + 6);
    j["ridge_lambda"] = ridge_lambda;
    j["sample_count"] = sample_count;
    j["residual_norm"] = residual_norm;
    return j;
  }

  static BlendWeights from_json(const nlohmann::json& j) {
    BlendWeights w;
    const auto order = j.at("joint_order").get<std::vector<std::string>>();
    for (int i = 0; i < kJointCount; ++i)
      if (order.at(i) != kJointNames[i])
        throw ConfigError("joint_order", "weights artifact joint ordering does not match [" +
                                             std::string(kJointNames[i]) + "] at index " +
                                             std::to_string(i));
    const auto yv = j.at("y").get<std::vector<double>>();
    if (yv.size() != kJointCount) throw ConfigError("y", "expected 6 weights");
    for (int i = 0; i < kJointCount; ++i) w.y[i] = yv[i];
    w.ridge_lambda = j.at("ridge_lambda").get<double>();
    w.sample_count = j.at("sample_count").get<long>();
    w.residual_norm = j.value("residual_norm", 0.0);
    return w;
  }
};

/// Solves  Y = argmin |QY - c|^2 + lambda |Y|^2  via the normal equations.
/// No intercept: the affine part is the fixed "+1" of the gain law.
inline BlendWeights train_blend_weights(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                                        double lambda = 0.0) {
  const long n = Q.rows();
  if (n != c.size()) throw ValidationError("train: row count of Q must match label count");
  if (n < Q.cols()) throw ValidationError("train: need at least as many samples as joints");
  if (!(lambda >= 0.0)) throw ValidationError("train: ridge lambda must be >= 0");
  for (long i = 0; i < n; ++i)
    if (c[i] != 1.0 && c[i] != -1.0)
      throw ValidationError("train: labels must be +1 or -1 (row " + std::to_string(i) + ")");

  bool degenerate = true;
  for (long i = 1; i < n && degenerate; ++i)
    if ((Q.row(i).array() != Q.row(0).array()).any()) degenerate = false;
  if (degenerate) throw ValidationError("train: degenerate dataset (all joint-angle rows equal)");

  const Eigen::MatrixXd gram =
      Q.transpose() * Q + lambda * Eigen::MatrixXd::Identity(Q.cols(), Q.cols());
  if (lambda == 0.0) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
      throw NumericalError("train: Q'Q is singular with lambda=0; use a ridge lambda > 0");
  }
  BlendWeights w;
  const Eigen::VectorXd y = gram.ldlt().solve(Q.transpose() * c);
  w.y = y;
  w.ridge_lambda = lambda;
  w.sample_count = n;
  w.residual_norm = (Q * y - c).norm();
  return w;
}

/// Convex blend gains. Invariant: both in [0,1] and summing to 1 exactly.
struct BlendGains {
  double left = 0.5;
  double right = 0.5;
};

inline BlendGains blend_gains_from_score(double score) {
  const double s = std::clamp(score, -1.0, 1.0);
  BlendGains g;
  g.left = 0.5 * (s + 1.0);
  g.right = 1.0 - g.left;
  return g;
}

inline BlendGains blend_gains(const BlendWeights& w, const Vec6& q) {
  if (!all_finite(q) || !all_finite(w.y)) throw ValidationError("blend_gains: inputs must be finite");
  return blend_gains_from_score(w.y.dot(q));
}

/// Elementwise convex combination of the two model torques.
inline Torques blend_torque(const Torques& tau_left, const Torques& tau_right,
                            const BlendGains& g) {
  return g.left * tau_left + g.right * tau_right;
}

enum class Strategy { Blend, Fsm };
enum class GainSource {
  Regression,  // gains from the trained weights (the Blend strategy proper)
  Insole,      // gains from the insole load share; the idealized reference
};

struct ControllerConfig {
  Strategy strategy = Strategy::Blend;
  bool ankle_actuated = false;
  double fsm_threshold_n = 50.0;  // insole-sum threshold for FSM switching
  double fsm_dwell_s = 0.2;       // minimum time between FSM switches
  GainSource gain_source = GainSource::Regression;

  void validate() const {
    if (!(fsm_threshold_n > 0.0)) throw ValidationError("controller: fsm_threshold_n must be > 0");
    if (!(fsm_dwell_s >= 0.0)) throw ValidationError("controller: fsm_dwell_s must be >= 0");
  }
};

/// Gait-segmentation state machine: which grounded model is active.
struct FsmState {
  Side selection = Side::Left;
  double last_switch_time = -std::numeric_limits<double>::infinity();
};

/// Switches when the contralateral insole exceeds the threshold while the
/// ipsilateral one is below it and the dwell time has elapsed.
inline FsmState fsm_step(const FsmState& state, const GaitSample& sample,
                         const ControllerConfig& cfg) {
  cfg.validate();
  const double ipsi = state.selection == Side::Left ? sample.pressure_sum_left()
                                                    : sample.pressure_sum_right();
  const double contra = state.selection == Side::Left ? sample.pressure_sum_right()
                                                      : sample.pressure_sum_left();
  FsmState next = state;
  if (contra > cfg.fsm_threshold_n && ipsi < cfg.fsm_threshold_n &&
      sample.t - state.last_switch_time >= cfg.fsm_dwell_s) {
    next.selection = other_side(state.selection);
    next.last_switch_time = sample.t;
  }
  return next;
}

/// Assistance actually applied at the joints: non-actuated joints are exactly 0.
struct AppliedTorques {
  Torques torque = Torques::Zero();
  std::array<bool, kJointCount> actuated{};
};

inline std::array<bool, kJointCount> actuation_mask(bool ankle_actuated) {
  // Hips and knees are always active; ankles only in the actuated-ankle build.
  std::array<bool, kJointCount> m{};
  m[kLeftHip] = m[kLeftKnee] = m[kRightHip] = m[kRightKnee] = true;
  m[kLeftAnkle] = m[kRightAnkle] = ankle_actuated;
  return m;
}

/// Combines the two model torques per the configured strategy (Blend gains or
/// FSM hard selection) and applies the actuation mask.
inline AppliedTorques assist_torques(const ControllerConfig& cfg, const Torques& tau_left,
                                     const Torques& tau_right, const BlendGains& gains,
                                     Side fsm_selection) {
  AppliedTorques out;
  if (cfg.strategy == Strategy::Blend) {
    out.torque = blend_torque(tau_left, tau_right, gains);
  } else {
    out.torque = fsm_selection == Side::Left ? tau_left : tau_right;
  }
  out.actuated = actuation_mask(cfg.ankle_actuated);
  for (int i = 0; i < kJointCount; ++i)
    if (!out.actuated[i]) out.torque[i] = 0.0;
  return out;
}

}  // namespace exosim
