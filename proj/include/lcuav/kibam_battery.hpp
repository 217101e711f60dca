#pragma once

/**
 * @file kibam_battery.hpp
 * @brief Kinetic battery model (two-well) and the two-battery mission bank.
 *
 * Wells: available charge y1 (height h1 = y1/omega) and bound charge y2
 * (height h2 = y2/(1-omega)). With signed current i (> 0 charging):
 *
 *   dy1/dt =  i + k_F (h2 - h1)
 *   dy2/dt =     -k_F (h2 - h1)
 *
 * For constant i the system has a closed form with rate k' = k_F/(omega(1-omega)).
 * Stepping clamps y1 at omega*B while charging (the excess is discarded) and
 * stops at the discharge cut-off.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lcuav/core.hpp"

namespace lcuav {

struct KibamParams {
  double capacity = 36000.0;  ///< B [A.s]
  double omega = 0.8;         ///< splitting factor
  double k_F = 4.5e-5;        ///< well flow rate [1/s]
  double e_nom = 11.1;        ///< nominal voltage [V]
  double i_ch_max = 10.0;     ///< maximum charge current [A]
  double e_tr = 1.0;          ///< transceiver voltage [V]

  [[nodiscard]] double k_prime() const { return k_F / (omega * (1.0 - omega)); }

  /// 1C charge current for this capacity [A].
  [[nodiscard]] double one_c() const { return capacity / 3600.0; }

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(capacity > 0.0) || !std::isfinite(capacity)) out.emplace_back("battery.capacity must be > 0");
    if (!(omega > 0.0 && omega < 1.0)) out.emplace_back("battery.omega must lie in (0, 1)");
    if (!(k_F > 0.0) || !std::isfinite(k_F)) out.emplace_back("battery.k_F must be > 0");
    if (!(e_nom > 0.0)) out.emplace_back("battery.e_nom must be > 0");
    if (!(e_tr > 0.0)) out.emplace_back("battery.e_tr must be > 0");
    if (!(i_ch_max >= 0.0)) out.emplace_back("battery.i_ch_max must be >= 0");
    // Small slack so 10 A on a 36000 A.s (10 Ah) pack passes the 1C rule.
    if (capacity > 0.0 && i_ch_max > one_c() * (1.0 + 1e-12)) {
      out.emplace_back("battery.i_ch_max must not exceed 1C (capacity/3600 A)");
    }
    return out;
  }
};

struct KibamState {
  double y1 = 0.0;  ///< available charge [A.s]
  double y2 = 0.0;  ///< bound charge [A.s]

  [[nodiscard]] double total() const { return y1 + y2; }
  [[nodiscard]] double h1(const KibamParams& p) const { return y1 / p.omega; }
  [[nodiscard]] double h2(const KibamParams& p) const { return y2 / (1.0 - p.omega); }

  /// Well bounds hold to 1e-9 B.
  [[nodiscard]] bool within_bounds(const KibamParams& p) const {
    const double tol = 1e-9 * p.capacity;
    return y1 >= -tol && y1 <= p.omega * p.capacity + tol && y2 >= -tol &&
           y2 <= (1.0 - p.omega) * p.capacity + tol;
  }
};

inline KibamState init_full(const KibamParams& p) {
  return {p.omega * p.capacity, (1.0 - p.omega) * p.capacity};
}

/// Single-battery state of charge (y1 + y2)/B.
inline double soc(const KibamState& s, const KibamParams& p) { return s.total() / p.capacity; }

/// When a discharging battery stops delivering.
enum class Cutoff {
  available_well,  ///< y1 reaches zero (KiBaM shut-off)
  total_charge,    ///< y1 + y2 reaches zero; y1 may be overdrawn
};

/// Unclamped two-well levels after delta seconds at constant signed current.
inline KibamState closed_form_levels(const KibamState& s, double current, double delta, const KibamParams& p) {
  const double k = p.k_prime();
  const double w = p.omega;
  const double y = s.total();
  const double e = std::exp(-k * delta);
  const double one_minus_e = -std::expm1(-k * delta);
  // k' delta - 1 + e^{-k' delta}, evaluated without cancellation for small k' delta.
  const double kd = k * delta;
  const double ramp = kd < 1e-4 ? kd * kd * (0.5 - kd / 6.0 + kd * kd / 24.0) : kd - one_minus_e;
  KibamState out;
  out.y1 = s.y1 * e + (y * k * w + current) * one_minus_e / k + current * w * ramp / k;
  out.y2 = s.y2 * e + y * (1.0 - w) * one_minus_e + current * (1.0 - w) * ramp / k;
  return out;
}

struct StepResult {
  KibamState state;
  double elapsed = 0.0;                ///< time actually simulated [s]
  bool saturated = false;              ///< y1 was held at omega*B for part of the step
  double discarded_charge = 0.0;       ///< charge current rejected by a full well [A.s]
  std::optional<double> depleted_at;   ///< time-to-empty within the step, if the cut-off fired
};

namespace detail {

// Bisection for the first root of f on [lo, hi], given f(lo) and f(hi) of opposite sign.
template <typename F>
double bisect(const F& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// Saturated charging: y1 pinned at omega B, bound well relaxes toward (1-omega)B.
inline StepResult saturated_step(const KibamState& s, double current, double delta, const KibamParams& p) {
  const double y2_full = (1.0 - p.omega) * p.capacity;
  const double y2 = y2_full - (y2_full - s.y2) * std::exp(-p.k_F * delta / (1.0 - p.omega));
  StepResult r;
  r.state = {p.omega * p.capacity, y2};
  r.elapsed = delta;
  r.saturated = true;
  r.discarded_charge = std::max(0.0, current * delta - (y2 - s.y2) - (r.state.y1 - s.y1));
  return r;
}

}  // namespace detail

/// Advances one battery by delta seconds at constant signed current (> 0 charges).
/// On cut-off the returned state is the state at the time-to-empty and
/// depleted_at is set; elapsed is then shorter than delta.
inline StepResult step_constant_current(const KibamState& start, double current, double delta,
                                        const KibamParams& p, Cutoff cutoff = Cutoff::available_well) {
  if (delta < 0.0) throw InvalidArgument("step_constant_current: negative duration");
  const double y1_full = p.omega * p.capacity;
  StepResult r;
  r.state = start;
  double t = 0.0;
  for (int guard = 0; guard < 4 && t < delta; ++guard) {
    const KibamState s = r.state;
    const double rem = delta - t;
    const double inflow = current + p.k_F * (s.h2(p) - s.h1(p));
    if (current > 0.0 && s.y1 >= y1_full && inflow >= 0.0) {
      const StepResult sat = detail::saturated_step(s, current, rem, p);
      r.state = sat.state;
      r.saturated = true;
      r.discarded_charge += sat.discarded_charge;
      t = delta;
      break;
    }
    const KibamState next = closed_form_levels(s, current, rem, p);
    if (current > 0.0 && next.y1 > y1_full) {
      const auto gap = [&](double tau) { return closed_form_levels(s, current, tau, p).y1 - y1_full; };
      double lo = 0.0;
      if (gap(0.0) >= 0.0) {
        // Starts on the boundary while flowing down; y1 = A + B t + C e^{-k't} dips first.
        const double k = p.k_prime();
        const double C = s.y1 - s.total() * p.omega - current * (1.0 - p.omega) / k;
        const double slope = current * p.omega;
        const double arg = C * k / slope;
        lo = arg > 1.0 ? std::min(std::log(arg) / k, rem) : 0.0;
        if (gap(lo) >= 0.0) {
          const StepResult sat = detail::saturated_step(s, current, rem, p);
          r.state = sat.state;
          r.saturated = true;
          r.discarded_charge += sat.discarded_charge;
          t = delta;
          break;
        }
      }
      const double tau = detail::bisect(gap, lo, rem);
      r.state = {y1_full, closed_form_levels(s, current, tau, p).y2};
      r.saturated = true;
      t += tau;
      continue;
    }
    if (current < 0.0 && cutoff == Cutoff::available_well && next.y1 < 0.0) {
      // y1 is strictly decreasing under constant discharge, so the root is unique.
      double tau = 0.0;
      if (s.y1 > 0.0) {
        tau = detail::bisect([&](double x) { return closed_form_levels(s, current, x, p).y1; }, 0.0, rem);
      }
      r.state = closed_form_levels(s, current, tau, p);
      r.state.y1 = 0.0;
      r.depleted_at = t + tau;
      r.elapsed = t + tau;
      return r;
    }
    if (current < 0.0 && cutoff == Cutoff::total_charge && next.total() < 0.0) {
      const double tau = std::max(0.0, s.total() / -current);
      r.state = closed_form_levels(s, current, tau, p);
      r.depleted_at = t + tau;
      r.elapsed = t + tau;
      return r;
    }
    r.state = next;
    t = delta;
  }
  r.elapsed = delta;
  return r;
}

/// Fixed-step RK4 integration of the well equations; reference for the closed form.
/// The same saturation clamp and cut-off apply, located by linear interpolation
/// within the step where they fire.
inline StepResult step_ode(const KibamState& start, const std::function<double(double)>& current_fn, double delta,
                           const KibamParams& p, double h = 1e-3, Cutoff cutoff = Cutoff::available_well) {
  if (delta < 0.0) throw InvalidArgument("step_ode: negative duration");
  if (!(h > 0.0)) throw InvalidArgument("step_ode: step must be positive");
  const double y1_full = p.omega * p.capacity;
  const double w = p.omega;
  StepResult r;
  auto rhs = [&](double t, double y1, double y2, double& d1, double& d2) {
    const double i = current_fn(t);
    const double flow = p.k_F * (y2 / (1.0 - w) - y1 / w);
    d1 = i + flow;
    d2 = -flow;
    if (y1 >= y1_full && d1 > 0.0) d1 = 0.0;
  };
  double y1 = start.y1;
  double y2 = start.y2;
  double t = 0.0;
  const auto steps = static_cast<long long>(std::ceil(delta / h - 1e-9));
  for (long long n = 0; n < steps; ++n) {
    const double dt = std::min(h, delta - t);
    if (dt <= 0.0) break;
    double a1, a2, b1, b2, c1, c2, d1, d2;
    rhs(t, y1, y2, a1, a2);
    rhs(t + 0.5 * dt, y1 + 0.5 * dt * a1, y2 + 0.5 * dt * a2, b1, b2);
    rhs(t + 0.5 * dt, y1 + 0.5 * dt * b1, y2 + 0.5 * dt * b2, c1, c2);
    rhs(t + dt, y1 + dt * c1, y2 + dt * c2, d1, d2);
    double n1 = y1 + dt / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1);
    double n2 = y2 + dt / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2);
    if (n1 > y1_full) {
      r.saturated = true;
      n1 = y1_full;
    }
    // Charge balance: whatever the clamp rejected never reached either well.
    const double inflow = dt / 6.0 * (current_fn(t) + 4.0 * current_fn(t + 0.5 * dt) + current_fn(t + dt));
    if (r.saturated) r.discarded_charge += std::max(0.0, inflow - ((n1 + n2) - (y1 + y2)));
    const double before = cutoff == Cutoff::available_well ? y1 : y1 + y2;
    const double after = cutoff == Cutoff::available_well ? n1 : n1 + n2;
    if (after < 0.0 && before >= 0.0) {
      const double frac = before > 0.0 ? before / (before - after) : 0.0;
      r.state = {y1 + frac * (n1 - y1), y2 + frac * (n2 - y2)};
      if (cutoff == Cutoff::available_well) r.state.y1 = 0.0;
      r.depleted_at = t + frac * dt;
      r.elapsed = *r.depleted_at;
      return r;
    }
    y1 = n1;
    y2 = n2;
    t += dt;
  }
  r.state = {y1, y2};
  r.elapsed = delta;
  return r;
}

/// Battery discharge current: rotor control current plus transceiver draw [A].
inline double discharge_current(double control_current, double comm_power, const KibamParams& p) {
  return control_current + comm_power / p.e_tr;
}

/// Charge current delivered by received laser power, capped at I_ch [A].
inline double charge_current_from_power(double p0, const KibamParams& p) {
  return std::min(p0 / p.e_nom, p.i_ch_max);
}

// ---------------------------------------------------------------------------
// Two-battery bank

struct BankStepResult {
  std::optional<double> depleted_at;  ///< both batteries cut off at this offset into the step
  double discarded_charge = 0.0;
  bool saturated = false;
  int swaps = 0;
};

/// Two identical batteries: one discharges (motion + communication) while the
/// other takes the charge current. At the start of each step the battery
/// with more usable charge becomes the discharging one; a cut-off mid-step
/// hands the load to the other battery.
class BatteryBank {
 public:
  explicit BatteryBank(const KibamParams& params, Cutoff cutoff = Cutoff::available_well)
      : params_(params), cutoff_(cutoff), cells_{init_full(params), init_full(params)} {}

  [[nodiscard]] const KibamParams& params() const { return params_; }
  [[nodiscard]] Cutoff cutoff() const { return cutoff_; }
  [[nodiscard]] const std::array<KibamState, 2>& cells() const { return cells_; }
  [[nodiscard]] int active() const { return active_; }
  [[nodiscard]] double total_charge() const { return cells_[0].total() + cells_[1].total(); }

  void set_cells(const std::array<KibamState, 2>& cells, int active = 0) {
    cells_ = cells;
    active_ = active;
  }

  /// Charge the cut-off still allows this battery to deliver [A.s].
  [[nodiscard]] double usable(int k) const {
    return cutoff_ == Cutoff::available_well ? cells_[k].y1 : cells_[k].total();
  }

  /// Advances both batteries by delta seconds. discharge and charge are magnitudes (>= 0).
  BankStepResult step(double discharge, double charge, double delta) {
    BankStepResult out;
    if (usable(1 - active_) > usable(active_)) {
      active_ = 1 - active_;
      ++out.swaps;
    }
    double t = 0.0;
    for (int leg = 0; leg < 2 && t < delta; ++leg) {
      const double rem = delta - t;
      const int a = active_;
      const int c = 1 - a;
      if (discharge > 0.0 && usable(a) <= 0.0) {
        out.depleted_at = t;
        return out;
      }
      const StepResult dis = step_constant_current(cells_[a], -discharge, rem, params_, cutoff_);
      const StepResult chg = step_constant_current(cells_[c], charge, dis.elapsed, params_, cutoff_);
      cells_[a] = dis.state;
      cells_[c] = chg.state;
      out.discarded_charge += dis.discarded_charge + chg.discarded_charge;
      out.saturated = out.saturated || dis.saturated || chg.saturated;
      t += dis.elapsed;
      if (dis.depleted_at) {
        if (leg == 1 || usable(c) <= 0.0) {
          out.depleted_at = t;
          return out;
        }
        active_ = c;
        ++out.swaps;
      }
    }
    return out;
  }

 private:
  KibamParams params_;
  Cutoff cutoff_;
  std::array<KibamState, 2> cells_;
  int active_ = 0;
};

/// Battery-perspective state of charge: stored charge over both capacities.
inline double soc(const BatteryBank& bank) {
  return bank.total_charge() / (2.0 * bank.params().capacity);
}

}  // namespace lcuav
