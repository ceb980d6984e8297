// Shared numeric types, joint ordering conventions and error types.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace exosim {

using Vec2 = Eigen::Vector2d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Assistive/compensation torque vector, device-frame joint ordering, N·m.
using Torques = Vec6;

inline constexpr int kJointCount = 6;

// Device-frame joint ordering used by every controller-facing vector.
enum DeviceJoint : int {
  kLeftHip = 0,
  kLeftKnee = 1,
  kLeftAnkle = 2,
  kRightHip = 3,
  kRightKnee = 4,
  kRightAnkle = 5,
};

inline constexpr std::array<const char*, kJointCount> kJointNames = {
    "l_hip", "l_knee", "l_ankle", "r_hip", "r_knee", "r_ankle"};

enum class Side { Left, Right };

inline const char* side_name(Side s) { return s == Side::Left ? "left" : "right"; }
inline Side other_side(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

/// Invariant violation in user-supplied parameters or inputs.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Configuration document problem; `path` names the offending field.
struct ConfigError : std::runtime_error {
  std::string path;
  ConfigError(std::string field_path, const std::string& message)
      : std::runtime_error(field_path.empty() ? message : field_path + ": " + message),
        path(std::move(field_path)) {}
};

/// Numeric failure (singular system, NaN in dynamics, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }
inline constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

/// z-component of the cross product of two in-plane vectors.
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Rotate 90 degrees counterclockwise.
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

/// Unit vector at polar angle `a` (counterclockwise from +x).
inline Vec2 unit_dir(double a) { return Vec2(std::cos(a), std::sin(a)); }

inline Vec2 rotate(const Vec2& v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

// splitmix64; used to derive per-sample noise deterministically from (seed, t, channel).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline double u64_to_unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0,1)
}

}  // namespace exosim
