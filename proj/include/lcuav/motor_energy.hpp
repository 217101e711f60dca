#pragma once

/**
 * @file motor_energy.hpp
 * @brief Quadrotor electrical and propulsion energy model.
 *
 * Per-rotor DC motor in steady state:
 *
 *   i_r = (T_f + kappa_0 v^2 + D_f v + J dv/dt) / kappa_T
 *   e_r = R i_r + kappa_E v
 *
 * Expanding sum_r e_r i_r gives a quartic in rotor speed plus four
 * acceleration terms, with coefficients c1..c9 (EnergyConstants).
 *
 * A flight leg is split into five constant-speed stages: orientation changes
 * (1, 3, 5) and displacements (2 vertical, 4 horizontal). During orientation
 * one rotor is off and the others spin at {v, v/sqrt2, v/sqrt2}; during
 * displacement all four run at v_max.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "lcuav/core.hpp"
#include "lcuav/quadrature.hpp"

namespace lcuav {

inline constexpr int kRotorCount = 4;

/// rpm/V motor velocity constant to SI voltage/torque constant (V.s/rad).
inline double torque_constant_from_kv(double kv_rpm_per_volt) { return 9.5493 / kv_rpm_per_volt; }

struct QuadrotorParams {
  double R = 0.2;                              ///< motor resistance [ohm]
  double kappa_E = torque_constant_from_kv(920.0);  ///< voltage constant [V.s/rad]
  double kappa_T = torque_constant_from_kv(920.0);  ///< torque constant [N.m/A]
  double T_f = 0.04;                           ///< friction torque [N.m]
  double kappa_0 = 2.2518e-8;                  ///< drag coefficient [N.m.s^2/rad^2]
  double D_f = 2e-4;                           ///< viscous damping [N.m.s/rad]
  double J = 4.1904e-5;                        ///< rotor inertia [kg.m^2]
  double rho_lift = 3.8305e-6;                 ///< lift coefficient [N.s^2/rad^2]
  double v_max = 1060.0;                       ///< maximal rotor speed [rad/s]
  double mass = 1.3;                           ///< [kg]
  double gravity = 9.8;                        ///< [m/s^2]

  /// Names of every field violating its invariant (empty when valid).
  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    auto positive = [&](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) out.emplace_back(std::string("quad.") + name + " must be > 0");
    };
    positive(R, "R");
    positive(kappa_E, "kappa_E");
    positive(kappa_T, "kappa_T");
    positive(T_f, "T_f");
    positive(kappa_0, "kappa_0");
    positive(D_f, "D_f");
    positive(J, "J");
    positive(rho_lift, "rho_lift");
    positive(v_max, "v_max");
    positive(mass, "mass");
    positive(gravity, "gravity");
    return out;
  }
};

/// Coefficients of the expanded electrical power integrand (each term in W).
struct EnergyConstants {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0, c7 = 0, c8 = 0, c9 = 0;

  /// c1..c5 as a polynomial in rotor speed, lowest order first.
  [[nodiscard]] std::array<double, 5> speed_poly() const { return {c1, c2, c3, c4, c5}; }
};

inline EnergyConstants derive_constants(const QuadrotorParams& p) {
  const double kT = p.kappa_T;
  EnergyConstants c;
  c.c1 = p.R * p.T_f * p.T_f / (kT * kT);
  c.c2 = p.T_f / kT * (p.kappa_E + 2.0 * p.R * p.D_f / kT);
  c.c3 = p.D_f / kT * (p.R * p.D_f / kT + p.kappa_E) + 2.0 * p.R * p.T_f * p.kappa_0 / (kT * kT);
  c.c4 = p.kappa_0 / p.T_f * c.c2;
  c.c5 = p.kappa_0 * p.kappa_0 / (p.T_f * p.T_f) * c.c1;
  c.c6 = 2.0 * p.J / p.T_f * c.c1;
  c.c7 = p.J * p.J / (p.T_f * p.T_f) * c.c1;
  c.c8 = p.J / p.T_f * c.c2;
  // Kept as published; the expansion of R*i^2 would give kappa_0/T_f here.
  // Only the acceleration integrand uses it.
  c.c9 = kT / p.T_f * c.c6;
  return c;
}

/// Current drawn by one rotor [A].
inline double motor_current(double v, double dv_dt, const QuadrotorParams& p) {
  return (p.T_f + p.kappa_0 * v * v + p.D_f * v + p.J * dv_dt) / p.kappa_T;
}

/// Terminal voltage of one rotor [V].
inline double motor_voltage(double i, double v, const QuadrotorParams& p) {
  return p.R * i + p.kappa_E * v;
}

/// Total external force on the hovering airframe, gravity included [N].
struct ExternalForce {
  double fx = 0.0;
  double fy = 0.0;
  double fz = 0.0;

  [[nodiscard]] double magnitude() const { return std::sqrt(fx * fx + fy * fy + fz * fz); }

  static ExternalForce gravity_only(const QuadrotorParams& p) { return {0.0, 0.0, -p.mass * p.gravity}; }

  /// Wind force F_w superposed on gravity: F_e = F_w + m g.
  static ExternalForce from_wind(Vec3 wind, const QuadrotorParams& p) {
    return {wind.x, wind.y, wind.z - p.mass * p.gravity};
  }
};

/// Largest |F_e| four rotors at v_max can balance.
inline double max_tolerable_force(const QuadrotorParams& p) {
  return 4.0 * p.rho_lift * p.v_max * p.v_max;
}

inline double hover_rotor_speed(const ExternalForce& f, const QuadrotorParams& p) {
  const double mag = f.magnitude();
  const double limit = max_tolerable_force(p);
  if (mag > limit) throw HoverInfeasible(mag, limit);
  // Clamp guards the boundary case where rounding lands a hair above v_max.
  return std::min(std::sqrt(mag / (4.0 * p.rho_lift)), p.v_max);
}

/// Sum over rotors of the speed polynomial: 4 * sum_i c_i v^(i-1) [W].
inline double uniform_rotor_power(double v, const EnergyConstants& c) {
  const auto k = c.speed_poly();
  double acc = 0.0;
  double vp = 1.0;
  for (double ci : k) {
    acc += ci * vp;
    vp *= v;
  }
  return kRotorCount * acc;
}

/// Electrical power while hovering against f [W].
inline double hover_power(const ExternalForce& f, const EnergyConstants& c, const QuadrotorParams& p) {
  return uniform_rotor_power(hover_rotor_speed(f, p), c);
}

inline double hover_energy(double delta, const ExternalForce& f, const EnergyConstants& c,
                           const QuadrotorParams& p) {
  return delta * hover_power(f, c, p);
}

/// Control current (sum over rotors) while hovering against f [A].
inline double hover_current(const ExternalForce& f, const QuadrotorParams& p) {
  return kRotorCount * motor_current(hover_rotor_speed(f, p), 0.0, p);
}

// ---------------------------------------------------------------------------
// Stage model

enum class StageKind { orientation, displacement };

struct Stage {
  StageKind kind = StageKind::orientation;
  double duration = 0.0;     ///< [s]
  double rotor_speed = 0.0;  ///< reference rotor speed [rad/s]
};

/// Per-rotor speeds during a stage; NaN marks a rotor that is switched off.
inline std::array<double, kRotorCount> stage_rotor_speeds(StageKind kind, double v) {
  if (kind == StageKind::displacement) return {v, v, v, v};
  const double s = v / std::sqrt(2.0);
  return {v, s, s, std::nan("")};
}

/// Five alternating stages: orientation, displacement, orientation, displacement, orientation.
struct StagePlan {
  std::array<Stage, 5> stages{};

  static constexpr StageKind kind_of(std::size_t index) {
    return index % 2 == 0 ? StageKind::orientation : StageKind::displacement;
  }

  [[nodiscard]] double duration() const {
    double t = 0.0;
    for (const auto& s : stages) t += s.duration;
    return t;
  }

  [[nodiscard]] bool valid(double v_max) const {
    for (std::size_t k = 0; k < stages.size(); ++k) {
      const auto& s = stages[k];
      if (s.kind != kind_of(k) || !(s.duration >= 0.0) || s.rotor_speed > v_max || s.rotor_speed < 0.0) {
        return false;
      }
    }
    return true;
  }
};

inline double stage_energy(StageKind kind, double duration, double v_max, const EnergyConstants& c) {
  const double v = v_max;
  if (kind == StageKind::displacement) return duration * uniform_rotor_power(v, c);
  const double r2 = std::sqrt(2.0);
  const double v2 = v * v;
  return duration * (3.0 * c.c1 + (1.0 + r2) * c.c2 * v + 2.0 * c.c3 * v2 +
                     (1.0 + 1.0 / r2) * c.c4 * v2 * v + 1.5 * c.c5 * v2 * v2);
}

/// Control current (sum over powered rotors) during a stage [A].
inline double stage_current(StageKind kind, double v, const QuadrotorParams& p) {
  double i = 0.0;
  for (double vr : stage_rotor_speeds(kind, v)) {
    if (!std::isnan(vr)) i += motor_current(vr, 0.0, p);
  }
  return i;
}

inline double travel_energy(const StagePlan& plan, const EnergyConstants& c) {
  double e = 0.0;
  for (const auto& s : plan.stages) e += stage_energy(s.kind, s.duration, s.rotor_speed, c);
  return e;
}

/// Charge drawn by the rotors over the whole plan [A.s].
inline double travel_charge(const StagePlan& plan, const QuadrotorParams& p) {
  double q = 0.0;
  for (const auto& s : plan.stages) q += s.duration * stage_current(s.kind, s.rotor_speed, p);
  return q;
}

// ---------------------------------------------------------------------------
// General rotor-speed profiles

/// Linear speed ramp per rotor on [t_begin, t_end]. Unpowered rotors draw nothing.
struct ProfileSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::array<double, kRotorCount> v_begin{};
  std::array<double, kRotorCount> v_end{};
  std::array<bool, kRotorCount> powered{true, true, true, true};
};

class RotorProfile {
 public:
  RotorProfile() = default;
  explicit RotorProfile(std::vector<ProfileSegment> segments) : segments_(std::move(segments)) {}

  void append(const ProfileSegment& s) { segments_.push_back(s); }

  /// Piecewise-constant profile matching a stage plan, starting at t0.
  static RotorProfile from_stage_plan(const StagePlan& plan, double t0 = 0.0) {
    RotorProfile prof;
    double t = t0;
    for (const auto& s : plan.stages) {
      if (s.duration <= 0.0) continue;
      ProfileSegment seg;
      seg.t_begin = t;
      seg.t_end = t + s.duration;
      const auto speeds = stage_rotor_speeds(s.kind, s.rotor_speed);
      for (int r = 0; r < kRotorCount; ++r) {
        seg.powered[r] = !std::isnan(speeds[r]);
        seg.v_begin[r] = seg.v_end[r] = seg.powered[r] ? speeds[r] : 0.0;
      }
      prof.append(seg);
      t = seg.t_end;
    }
    return prof;
  }

  [[nodiscard]] const std::vector<ProfileSegment>& segments() const { return segments_; }

 private:
  std::vector<ProfileSegment> segments_;
};

/// Full power integrand (speed polynomial plus acceleration terms) summed over rotors [W].
inline double power_integrand(const ProfileSegment& seg, double t, const EnergyConstants& c) {
  const double span = seg.t_end - seg.t_begin;
  const double u = span > 0.0 ? (t - seg.t_begin) / span : 0.0;
  double acc = 0.0;
  for (int r = 0; r < kRotorCount; ++r) {
    if (!seg.powered[r]) continue;
    const double v = seg.v_begin[r] + u * (seg.v_end[r] - seg.v_begin[r]);
    const double a = span > 0.0 ? (seg.v_end[r] - seg.v_begin[r]) / span : 0.0;
    const double v2 = v * v;
    acc += c.c1 + c.c2 * v + c.c3 * v2 + c.c4 * v2 * v + c.c5 * v2 * v2;
    acc += a * (c.c6 + c.c7 * a + c.c8 * v + c.c9 * v2);
  }
  return acc;
}

/// Energy drawn by the rotors over [t0, tf] by adaptive quadrature [J].
/// Throws InvalidArgument if the profile leaves part of the window uncovered.
inline double integrate_energy(const RotorProfile& profile, double t0, double tf, const EnergyConstants& c,
                               const quadrature::Options& opt = {}) {
  if (tf < t0) throw InvalidArgument("integrate_energy: tf < t0");
  double covered = 0.0;
  double total = 0.0;
  for (const auto& seg : profile.segments()) {
    const double a = std::max(t0, seg.t_begin);
    const double b = std::min(tf, seg.t_end);
    if (b <= a) continue;
    covered += b - a;
    total += quadrature::integrate([&](double t) { return power_integrand(seg, t, c); }, a, b, opt);
  }
  if (std::abs(covered - (tf - t0)) > 1e-9 * std::max(1.0, tf - t0)) {
    throw InvalidArgument("integrate_energy: profile does not cover [t0, tf]");
  }
  return total;
}

// ---------------------------------------------------------------------------
// Kinematics

/// Stage-duration model: each orientation change lasts t_rot, displacements
/// run at cruise speed speed_factor * v_max.
struct KinematicsConfig {
  double t_rot = 1.0;           ///< [s] per orientation stage
  double speed_factor = 0.02;   ///< [m/rad] cruise speed per unit rotor speed

  [[nodiscard]] double cruise_speed(double v_max) const { return speed_factor * v_max; }

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(t_rot >= 0.0) || !std::isfinite(t_rot)) out.emplace_back("kinematics.t_rot must be >= 0");
    if (!(speed_factor > 0.0) || !std::isfinite(speed_factor)) {
      out.emplace_back("kinematics.speed_factor must be > 0");
    }
    return out;
  }
};

/// Vertical leg first, then horizontal. Orientation stages flank only the
/// displacement legs that actually move; the final stage re-levels the airframe.
inline StagePlan plan_stages(Vec3 from, Vec3 to, const KinematicsConfig& kin, double v_max) {
  StagePlan plan;
  for (std::size_t k = 0; k < plan.stages.size(); ++k) {
    plan.stages[k].kind = StagePlan::kind_of(k);
    plan.stages[k].rotor_speed = v_max;
  }
  if (from == to) return plan;
  const double cruise = kin.cruise_speed(v_max);
  const double vertical = std::abs(to.z - from.z);
  const double horizontal = horizontal_distance(from, to);
  if (vertical > 0.0) {
    plan.stages[0].duration = kin.t_rot;
    plan.stages[1].duration = vertical / cruise;
  }
  if (horizontal > 0.0) {
    plan.stages[2].duration = kin.t_rot;
    plan.stages[3].duration = horizontal / cruise;
  }
  plan.stages[4].duration = kin.t_rot;
  return plan;
}

/// Number of orientation stages plan_stages emits for a leg.
inline int orientation_stage_count(Vec3 from, Vec3 to) {
  if (from == to) return 0;
  return 1 + (to.z != from.z ? 1 : 0) + (horizontal_distance(from, to) > 0.0 ? 1 : 0);
}

/// Manhattan-style leg length covered by displacement stages [m].
inline double displacement_length(Vec3 from, Vec3 to) {
  return std::abs(to.z - from.z) + horizontal_distance(from, to);
}

}  // namespace lcuav
