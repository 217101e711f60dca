#pragma once

/**
 * @file mission.hpp
 * @brief Mission scenario, slot-by-slot simulation and state-of-charge perspectives.
 *
 * A mission flies a route w0 -> ... -> wF visiting the hover point (where it
 * hovers and serves the ground device for Delta slots) and optionally one
 * rooftop (where it rests for T' slots). Both dwell sites have laser line of
 * sight; flight legs do not.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lcuav/comm_link.hpp"
#include "lcuav/core.hpp"
#include "lcuav/kibam_battery.hpp"
#include "lcuav/laser_harvest.hpp"
#include "lcuav/motor_energy.hpp"

namespace lcuav {

enum class Perspective { battery, energy, adjusted };

inline std::string_view to_string(Perspective p) {
  switch (p) {
    case Perspective::battery: return "battery";
    case Perspective::energy: return "energy";
    case Perspective::adjusted: return "adjusted";
  }
  return "battery";
}

inline std::optional<Perspective> parse_perspective(std::string_view s) {
  if (s == "battery") return Perspective::battery;
  if (s == "energy") return Perspective::energy;
  if (s == "adjusted") return Perspective::adjusted;
  return std::nullopt;
}

struct Building {
  Vec3 position;        ///< base point [m]
  double height = 0.0;  ///< [m]

  [[nodiscard]] Vec3 rooftop(double clearance = 0.0) const {
    return {position.x, position.y, position.z + height + clearance};
  }
};

/// Calibrated stage-duration model for the default scenario: t_rot = 1 s and
/// the speed factor that makes the direct w0 -> wU -> wF flight last 59.35 s.
inline KinematicsConfig calibrated_kinematics() { return {1.0, 0.0918179355420013}; }

struct Scenario {
  Vec3 w0{0.0, 0.0, 50.0};
  Vec3 wF{2000.0, 0.0, 50.0};
  DlcParams source;
  LinkParams device;
  std::vector<Building> buildings;
  double z_min = 50.0;
  double z_max = 100.0;
  double t_max = 800.0;  ///< budget [slots]
  double eta0 = 0.05;
  double slot = 1.0;     ///< [s]
  QuadrotorParams quad;
  KibamParams battery;
  KinematicsConfig kin = calibrated_kinematics();
  ExternalForce external_force = ExternalForce::gravity_only(QuadrotorParams{});
  double rest_clearance = 0.0;   ///< [m] above the rooftop
  Cutoff cutoff = Cutoff::total_charge;
  bool harvesting = true;        ///< laser source switched on
  bool eta3_literal = false;     ///< use the printed signs of the adjusted SOC
  std::optional<double> flying_voltage;   ///< override of the flight regime voltage [V]
  std::optional<double> hovering_voltage; ///< override of the hover regime voltage [V]

  [[nodiscard]] double budget_seconds() const { return t_max * slot; }

  [[nodiscard]] bool restable(const Building& b) const { return b.height >= z_min && b.height <= z_max; }

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    auto append = [&](const std::vector<std::string>& v) { out.insert(out.end(), v.begin(), v.end()); };
    append(quad.violations());
    append(battery.violations());
    append(kin.violations());
    append(source.violations());
    append(device.violations());
    if (!(z_min <= z_max)) out.emplace_back("scenario.z_min must not exceed z_max");
    if (w0.z < z_min || w0.z > z_max) out.emplace_back("scenario.w0.z must lie in [z_min, z_max]");
    if (wF.z < z_min || wF.z > z_max) out.emplace_back("scenario.wF.z must lie in [z_min, z_max]");
    if (!(t_max > 0.0)) out.emplace_back("scenario.t_max must be > 0");
    if (!(eta0 >= 0.0 && eta0 < 1.0)) out.emplace_back("scenario.eta0 must lie in [0, 1)");
    if (!(slot > 0.0)) out.emplace_back("scenario.slot must be > 0");
    if (flying_voltage && !(*flying_voltage > 0.0)) out.emplace_back("scenario.flying_voltage must be > 0");
    if (hovering_voltage && !(*hovering_voltage > 0.0)) out.emplace_back("scenario.hovering_voltage must be > 0");
    return out;
  }
};

/// Ten buildings evenly spaced along the w0-wF axis, offset toward the device,
/// lowest ones nearest the ends.
inline std::vector<Building> default_buildings(Vec3 w0, Vec3 wF, double lateral_offset = 300.0) {
  constexpr double heights[10] = {60, 60, 80, 80, 100, 100, 80, 80, 60, 60};
  std::vector<Building> out;
  for (int k = 0; k < 10; ++k) {
    const double u = (k + 0.5) / 10.0;
    Vec3 base = w0 + u * (wF - w0);
    base.y += lateral_offset;
    base.z = 0.0;
    out.push_back({base, heights[k]});
  }
  return out;
}

inline Scenario default_scenario() {
  Scenario sc;
  sc.buildings = default_buildings(sc.w0, sc.wF);
  sc.external_force = ExternalForce::gravity_only(sc.quad);
  return sc;
}

// ---------------------------------------------------------------------------
// Routes and plans

enum class DwellKind { none, hover, rest };

/// Ordered waypoints; interior waypoints may be dwell sites.
struct Route {
  std::vector<Vec3> waypoints;
  std::vector<DwellKind> dwell;      ///< per waypoint
  std::optional<std::size_t> building;  ///< index into Scenario::buildings when resting
  std::string label;

  [[nodiscard]] std::size_t legs() const { return waypoints.empty() ? 0 : waypoints.size() - 1; }
};

inline Route direct_route(Vec3 w0, Vec3 hover, Vec3 wF) {
  return {{w0, hover, wF}, {DwellKind::none, DwellKind::hover, DwellKind::none}, std::nullopt, "direct"};
}

/// Route through one rooftop; hover_first selects w0->wU->wb->wF over w0->wb->wU->wF.
inline Route building_route(Vec3 w0, Vec3 hover, Vec3 wF, Vec3 rooftop, std::size_t building, bool hover_first) {
  Route r;
  r.building = building;
  if (hover_first) {
    r.waypoints = {w0, hover, rooftop, wF};
    r.dwell = {DwellKind::none, DwellKind::hover, DwellKind::rest, DwellKind::none};
  } else {
    r.waypoints = {w0, rooftop, hover, wF};
    r.dwell = {DwellKind::none, DwellKind::rest, DwellKind::hover, DwellKind::none};
  }
  r.label = "building " + std::to_string(building) + (hover_first ? " (hover first)" : " (rest first)");
  return r;
}

inline std::vector<StagePlan> route_stage_plans(const Route& r, const Scenario& sc) {
  std::vector<StagePlan> out;
  for (std::size_t k = 0; k + 1 < r.waypoints.size(); ++k) {
    out.push_back(plan_stages(r.waypoints[k], r.waypoints[k + 1], sc.kin, sc.quad.v_max));
  }
  return out;
}

inline double route_flight_time(const Route& r, const Scenario& sc) {
  double t = 0.0;
  for (const auto& leg : route_stage_plans(r, sc)) t += leg.duration();
  return t;
}

struct TrajectoryPlan {
  Route route;
  std::vector<StagePlan> stage_plans;
  Vec3 hover_point;
  int hover_slots = 0;
  std::optional<Building> rest_building;
  int rest_slots = 0;

  [[nodiscard]] double flight_time() const {
    double t = 0.0;
    for (const auto& s : stage_plans) t += s.duration();
    return t;
  }
};

inline TrajectoryPlan make_plan(const Route& route, const Scenario& sc, int hover_slots, int rest_slots) {
  TrajectoryPlan p;
  p.route = route;
  p.stage_plans = route_stage_plans(route, sc);
  for (std::size_t k = 0; k < route.waypoints.size(); ++k) {
    if (route.dwell[k] == DwellKind::hover) p.hover_point = route.waypoints[k];
  }
  p.hover_slots = hover_slots;
  if (route.building) {
    p.rest_building = sc.buildings.at(*route.building);
    p.rest_slots = rest_slots;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Outcomes

struct EnergyBreakdown {
  double flight = 0.0;      ///< E_fl,ov [J]
  double hover_comm = 0.0;  ///< E_hv,ov [J]
  double harvest = 0.0;     ///< E_harv: accepted laser charge at e_nom [J]
};

/// Everything the three SOC definitions need.
struct SocComponents {
  double bank_soc = 1.0;
  EnergyBreakdown energy;
  double e0 = 1.0;  ///< nominal initial energy [J]
  double e1 = 1.0;  ///< initial energy at the flight regime voltage [J]
  double e2 = 1.0;  ///< initial energy at the hover regime voltage [J]
  bool eta3_literal = false;
};

struct SocValues {
  double eta1 = 1.0;
  double eta2 = 1.0;
  double eta3 = 1.0;

  [[nodiscard]] double get(Perspective p) const {
    switch (p) {
      case Perspective::battery: return eta1;
      case Perspective::energy: return eta2;
      case Perspective::adjusted: return eta3;
    }
    return eta1;
  }
};

inline SocValues soc_values(const SocComponents& c) {
  SocValues v;
  const auto& e = c.energy;
  v.eta1 = c.bank_soc;
  v.eta2 = 1.0 - (e.flight + e.hover_comm - e.harvest) / c.e0;
  if (c.eta3_literal) {
    v.eta3 = 1.0 - e.flight / c.e1 + e.hover_comm / c.e2 - e.harvest / c.e0;
  } else {
    v.eta3 = 1.0 - e.flight / c.e1 - e.hover_comm / c.e2 + e.harvest / c.e0;
  }
  return v;
}

inline double soc_perspective(const SocComponents& c, Perspective p) { return soc_values(c).get(p); }

struct MissionOutcome {
  int delta = 0;          ///< hover slots
  int rest_slots = 0;     ///< T'_harv slots
  double flight_time = 0.0;  ///< [s]
  double t_total = 0.0;      ///< [s]
  double eta1 = 1.0;
  double eta2 = 1.0;
  double eta3 = 1.0;
  bool feasible = false;
  EnergyBreakdown energy;
  double flight_charge = 0.0;     ///< [A.s]
  double hover_charge = 0.0;      ///< [A.s]
  double harvested_charge = 0.0;  ///< laser charge the bank accepted [A.s]
  double discarded_charge = 0.0;  ///< [A.s]
  std::optional<double> depletion_event;  ///< mission time of the cut-off [s]
  double hover_efficiency = 0.0;  ///< zeta at the hover point

  [[nodiscard]] double eta(Perspective p) const {
    return SocValues{eta1, eta2, eta3}.get(p);
  }
};

// ---------------------------------------------------------------------------
// Simulation

/// Derived per-route quantities: stage currents, dwell-site currents and powers.
class MissionModel {
 public:
  struct Dwell {
    double discharge = 0.0;   ///< battery discharge current [A]
    double charge = 0.0;      ///< battery charge current [A]
    double power = 0.0;       ///< consumed electrical power counted in E_hv,ov [W]
    double received = 0.0;    ///< received laser power [W]
    double emitted = 0.0;     ///< emitted laser power [W]
    double distance = 0.0;    ///< to the laser source [m]
  };

  struct Snapshot {
    explicit Snapshot(BatteryBank b) : bank(std::move(b)) {}

    BatteryBank bank;
    double time = 0.0;
    EnergyBreakdown energy;
    double flight_charge = 0.0;
    double hover_charge = 0.0;
    double harvested_charge = 0.0;
    double discarded = 0.0;
    std::optional<double> depleted_at;
  };

  MissionModel(const Scenario& sc, const Route& route) : sc_(sc), route_(route) {
    constants_ = derive_constants(sc.quad);
    legs_ = route_stage_plans(route, sc);
    for (const auto& leg : legs_) {
      LegData d;
      for (std::size_t s = 0; s < leg.stages.size(); ++s) {
        d.durations[s] = leg.stages[s].duration;
        d.currents[s] = stage_current(leg.stages[s].kind, leg.stages[s].rotor_speed, sc.quad);
      }
      d.energy = travel_energy(leg, constants_);
      d.charge = travel_charge(leg, sc.quad);
      d.time = leg.duration();
      flight_time_ += d.time;
      flight_energy_ += d.energy;
      flight_charge_ += d.charge;
      leg_data_.push_back(d);
    }
    for (std::size_t k = 0; k < route.waypoints.size(); ++k) {
      if (route.dwell[k] == DwellKind::hover) hover_ = make_dwell(route.waypoints[k], true);
      if (route.dwell[k] == DwellKind::rest) rest_ = make_dwell(route.waypoints[k], false);
    }
  }

  [[nodiscard]] const Scenario& scenario() const { return sc_; }
  [[nodiscard]] const Route& route() const { return route_; }
  [[nodiscard]] double flight_time() const { return flight_time_; }
  [[nodiscard]] std::size_t leg_count() const { return leg_data_.size(); }
  [[nodiscard]] const Dwell& hover() const { return hover_; }
  [[nodiscard]] const Dwell& rest() const { return rest_; }
  [[nodiscard]] bool hover_feasible() const { return !hover_error_; }

  /// Largest Delta + T' the budget allows after the flight legs.
  [[nodiscard]] int dwell_budget() const {
    const double slots = (sc_.budget_seconds() - flight_time_) / sc_.slot;
    return slots < 0.0 ? -1 : static_cast<int>(std::floor(slots + 1e-9));
  }

  [[nodiscard]] Snapshot start() const { return Snapshot(BatteryBank(sc_.battery, sc_.cutoff)); }

  void fly(Snapshot& s, std::size_t leg) const {
    const auto& d = leg_data_.at(leg);
    for (std::size_t k = 0; k < d.durations.size(); ++k) {
      if (d.durations[k] <= 0.0) continue;
      if (!s.depleted_at) {
        const auto r = s.bank.step(d.currents[k], 0.0, d.durations[k]);
        s.discarded += r.discarded_charge;
        if (r.depleted_at) s.depleted_at = s.time + *r.depleted_at;
      }
      s.time += d.durations[k];
    }
    s.energy.flight += d.energy;
    s.flight_charge += d.charge;
  }

  /// Advances n dwell slots at the waypoint of the given kind.
  void dwell(Snapshot& s, DwellKind kind, int n) const {
    if (n <= 0) return;
    if (kind == DwellKind::hover && hover_error_) throw HoverInfeasible(*hover_error_, max_tolerable_force(sc_.quad));
    const Dwell& d = kind == DwellKind::hover ? hover_ : rest_;
    const double dt = sc_.slot;
    // Per-slot accumulation keeps n calls of one slot bit-identical to one call of n.
    for (int k = 0; k < n; ++k) {
      // Only charge the bank actually took counts as harvested; a full well
      // rejects the rest.
      double accepted = 0.0;
      if (!s.depleted_at) {
        const auto r = s.bank.step(d.discharge, d.charge, dt);
        s.discarded += r.discarded_charge;
        accepted = std::max(0.0, d.charge * dt - r.discarded_charge);
        if (r.depleted_at) s.depleted_at = s.time + *r.depleted_at;
      }
      s.time += dt;
      if (kind == DwellKind::hover) {
        s.energy.hover_comm += d.power * dt;
        s.hover_charge += d.discharge * dt;
      }
      s.energy.harvest += accepted * sc_.battery.e_nom;
      s.harvested_charge += accepted;
    }
  }

  /// Terminal check for a finished route: no cut-off and the SOC target met.
  [[nodiscard]] bool meets_target(const Snapshot& s, Perspective persp) const {
    return !s.depleted_at && soc_values(components(s)).get(persp) >= sc_.eta0;
  }

  /// Flies the whole route with the given dwell counts.
  [[nodiscard]] Snapshot run(int hover_slots, int rest_slots) const {
    Snapshot s = start();
    for (std::size_t k = 0; k < route_.waypoints.size(); ++k) {
      if (route_.dwell[k] == DwellKind::hover) dwell(s, DwellKind::hover, hover_slots);
      if (route_.dwell[k] == DwellKind::rest) dwell(s, DwellKind::rest, rest_slots);
      if (k < leg_data_.size()) fly(s, k);
    }
    return s;
  }

  /// Flight regime voltage: energy per coulomb over the route's stages [V].
  [[nodiscard]] double flight_voltage() const {
    if (sc_.flying_voltage) return *sc_.flying_voltage;
    if (flight_charge_ > 0.0) return flight_energy_ / flight_charge_;
    const double v = sc_.quad.v_max;
    return motor_voltage(motor_current(v, 0.0, sc_.quad), v, sc_.quad);
  }

  /// Hover regime voltage: (rotor power + transmit power) per coulomb drawn [V].
  [[nodiscard]] double hover_voltage() const {
    if (sc_.hovering_voltage) return *sc_.hovering_voltage;
    if (hover_.discharge > 0.0) return hover_.power / hover_.discharge;
    return sc_.battery.e_nom;
  }

  [[nodiscard]] SocComponents components(const Snapshot& s) const {
    SocComponents c;
    c.bank_soc = soc(s.bank);
    c.energy = s.energy;
    const double charge = 2.0 * sc_.battery.capacity;
    c.e0 = charge * sc_.battery.e_nom;
    c.e1 = charge * flight_voltage();
    c.e2 = charge * hover_voltage();
    c.eta3_literal = sc_.eta3_literal;
    return c;
  }

  [[nodiscard]] MissionOutcome outcome(const Snapshot& s, int hover_slots, int rest_slots, Perspective persp) const {
    MissionOutcome o;
    o.delta = hover_slots;
    o.rest_slots = rest_slots;
    o.flight_time = flight_time_;
    o.t_total = flight_time_ + (hover_slots + rest_slots) * sc_.slot;
    const SocValues v = soc_values(components(s));
    o.eta1 = v.eta1;
    o.eta2 = v.eta2;
    o.eta3 = v.eta3;
    o.energy = s.energy;
    o.flight_charge = s.flight_charge;
    o.hover_charge = s.hover_charge;
    o.harvested_charge = s.harvested_charge;
    o.discarded_charge = s.discarded;
    o.depletion_event = s.depleted_at;
    o.hover_efficiency = hover_.emitted > 0.0 ? hover_.received / hover_.emitted : 0.0;
    o.feasible = !s.depleted_at && o.t_total <= sc_.budget_seconds() + 1e-9 && v.get(persp) >= sc_.eta0;
    return o;
  }

 private:
  struct LegData {
    std::array<double, 5> durations{};
    std::array<double, 5> currents{};
    double energy = 0.0;
    double charge = 0.0;
    double time = 0.0;
  };

  Dwell make_dwell(Vec3 where, bool hovering) {
    Dwell d;
    d.distance = distance(where, sc_.source.source_pos);
    if (sc_.harvesting) {
      d.emitted = source_power_at(d.distance, sc_.battery, sc_.source);
      d.received = received_power(d.distance, d.emitted, sc_.source);
      d.charge = charge_current_from_power(d.received, sc_.battery);
    }
    if (hovering) {
      try {
        const double p_rotors = hover_power(sc_.external_force, constants_, sc_.quad);
        d.discharge = discharge_current(hover_current(sc_.external_force, sc_.quad), sc_.device.p_u, sc_.battery);
        d.power = p_rotors + sc_.device.p_u;
      } catch (const HoverInfeasible& e) {
        hover_error_ = e.force;
      }
    }
    return d;
  }

  Scenario sc_;
  Route route_;
  EnergyConstants constants_;
  std::vector<StagePlan> legs_;
  std::vector<LegData> leg_data_;
  Dwell hover_;
  Dwell rest_;
  std::optional<double> hover_error_;
  double flight_time_ = 0.0;
  double flight_energy_ = 0.0;
  double flight_charge_ = 0.0;
};

/// Full slot-by-slot simulation of a plan. Battery cut-off shows up as
/// depletion_event with feasible = false. Throws PlanExceedsBudget when the
/// plan's total time exceeds the budget.
inline MissionOutcome simulate_mission(const TrajectoryPlan& plan, const Scenario& sc, Perspective persp) {
  const MissionModel model(sc, plan.route);
  const double total = model.flight_time() + (plan.hover_slots + plan.rest_slots) * sc.slot;
  if (total > sc.budget_seconds() + 1e-9) {
    throw PlanExceedsBudget("plan lasts " + std::to_string(total) + " s, budget is " +
                            std::to_string(sc.budget_seconds()) + " s");
  }
  const auto snap = model.run(plan.hover_slots, plan.rest_slots);
  return model.outcome(snap, plan.hover_slots, plan.rest_slots, persp);
}

}  // namespace lcuav
