#pragma once

// Shared value types and error classes for the lcuav library.

#include <cmath>
#include <stdexcept>
#include <string>

namespace lcuav {

/// Point or vector in the mission frame, metres.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(Vec3 a, Vec3 b) = default;
};

inline double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }
inline double horizontal_distance(Vec3 a, Vec3 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// External force exceeds what four rotors at v_max can balance.
class HoverInfeasible : public Error {
 public:
  explicit HoverInfeasible(double force_magnitude, double limit)
      : Error("hover infeasible: |F_e| = " + std::to_string(force_magnitude) +
              " N exceeds rotor limit " + std::to_string(limit) + " N"),
        force(force_magnitude),
        max_force(limit) {}
  double force;
  double max_force;
};

class QuadratureNotConverged : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class NoFeasibleHoverPoint : public Error {
 public:
  using Error::Error;
};

class PlanExceedsBudget : public Error {
 public:
  using Error::Error;
};

class NoFeasibleDelta : public Error {
 public:
  using Error::Error;
};

class NoFeasiblePlan : public Error {
 public:
  using Error::Error;
};

}  // namespace lcuav
