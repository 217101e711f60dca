#pragma once

/**
 * @file planner.hpp
 * @brief Hover point, flight graph, hover-time maximisation and benchmark routes.
 *
 * Two cases are solved separately and then combined:
 *  - no rest (direct w0 -> wU -> wF): largest Delta meeting the SOC target;
 *  - resting on one rooftop: exhaustive double loop over (T', Delta).
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lcuav/comm_link.hpp"
#include "lcuav/core.hpp"
#include "lcuav/mission.hpp"

namespace lcuav {

namespace detail {

// Minimises a convex function on [lo, hi] by golden-section search.
template <typename F>
double golden_min(const F& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Hover site at altitude z_min within the comm range d* of the device,
/// minimising |w0 - p| + |p - wF|. Lies on the range sphere unless the
/// straight path already passes inside it.
inline Vec3 hover_point(const Scenario& sc) {
  const double d_star = max_comm_distance(sc.device);
  const Vec3 dev = sc.device.device_pos;
  const double dz = sc.z_min - dev.z;
  if (d_star < std::abs(dz)) {
    throw NoFeasibleHoverPoint("comm range " + std::to_string(d_star) + " m does not reach altitude z_min");
  }
  const double r = std::sqrt(d_star * d_star - dz * dz);
  auto length = [&](double x, double y) {
    const Vec3 p{x, y, sc.z_min};
    return distance(sc.w0, p) + distance(p, sc.wF);
  };
  // The objective is convex and so is the disk; the inner minimum over y is
  // convex in x, so nested one-dimensional searches find the optimum.
  const double tol = 1e-10 * std::max(1.0, r + norm(dev));
  auto best_y = [&](double x) {
    const double half = std::sqrt(std::max(0.0, r * r - (x - dev.x) * (x - dev.x)));
    return detail::golden_min([&](double y) { return length(x, y); }, dev.y - half, dev.y + half, tol);
  };
  const double x = detail::golden_min([&](double x) { return length(x, best_y(x)); }, dev.x - r, dev.x + r, tol);
  const double y = best_y(x);
  if (r <= 0.0 || std::hypot(x - dev.x, y - dev.y) < r * (1.0 - 1e-6)) return {x, y, sc.z_min};
  // On the circle the length is flat to rounding near its minimum, so polish
  // the angle by bisecting on the derivative instead.
  auto slope = [&](double th) {
    const Vec3 p{dev.x + r * std::cos(th), dev.y + r * std::sin(th), sc.z_min};
    const Vec3 a = p - sc.w0, b = p - sc.wF;
    const double na = norm(a), nb = norm(b);
    const double gx = (na > 0 ? a.x / na : 0.0) + (nb > 0 ? b.x / nb : 0.0);
    const double gy = (na > 0 ? a.y / na : 0.0) + (nb > 0 ? b.y / nb : 0.0);
    return -gx * r * std::sin(th) + gy * r * std::cos(th);
  };
  const double th0 = std::atan2(y - dev.y, x - dev.x);
  double lo = th0 - 1e-3, hi = th0 + 1e-3;
  if (slope(lo) >= 0.0 || slope(hi) <= 0.0) return {x, y, sc.z_min};
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  const double th = 0.5 * (lo + hi);
  return {dev.x + r * std::cos(th), dev.y + r * std::sin(th), sc.z_min};
}

// ---------------------------------------------------------------------------
// Flight graph

/// Candidate trajectory graph. Node 0 is w0, 1 is wF, 2 is wU, then one
/// rooftop per restable building.
struct FlightGraph {
  std::vector<Vec3> nodes;
  std::vector<std::size_t> building_of;  ///< building index of each rooftop node (node - 3)
  std::vector<std::vector<double>> cost; ///< flight duration between nodes [s]
  std::vector<Route> routes;             ///< direct, then both orderings per rooftop

  static constexpr std::size_t kStart = 0;
  static constexpr std::size_t kEnd = 1;
  static constexpr std::size_t kHover = 2;

  [[nodiscard]] double route_cost(const std::vector<std::size_t>& path) const {
    double t = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) t += cost[path[k]][path[k + 1]];
    return t;
  }
};

inline FlightGraph build_flight_graph(const Scenario& sc, Vec3 hover) {
  FlightGraph g;
  g.nodes = {sc.w0, sc.wF, hover};
  for (std::size_t b = 0; b < sc.buildings.size(); ++b) {
    if (!sc.restable(sc.buildings[b])) continue;
    g.nodes.push_back(sc.buildings[b].rooftop(sc.rest_clearance));
    g.building_of.push_back(b);
  }
  const std::size_t n = g.nodes.size();
  g.cost.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) g.cost[i][j] = plan_stages(g.nodes[i], g.nodes[j], sc.kin, sc.quad.v_max).duration();
    }
  }
  g.routes.push_back(direct_route(sc.w0, hover, sc.wF));
  for (std::size_t k = 0; k < g.building_of.size(); ++k) {
    const Vec3 roof = g.nodes[3 + k];
    g.routes.push_back(building_route(sc.w0, hover, sc.wF, roof, g.building_of[k], true));
    g.routes.push_back(building_route(sc.w0, hover, sc.wF, roof, g.building_of[k], false));
  }
  return g;
}

inline FlightGraph build_flight_graph(const Scenario& sc) { return build_flight_graph(sc, hover_point(sc)); }

/// Shorter of the two orderings through each restable building (hover first on ties).
inline std::vector<Route> building_candidates(const FlightGraph& g) {
  std::vector<Route> out;
  for (std::size_t k = 0; k < g.building_of.size(); ++k) {
    const std::size_t roof = 3 + k;
    const double hover_first = g.route_cost({FlightGraph::kStart, FlightGraph::kHover, roof, FlightGraph::kEnd});
    const double rest_first = g.route_cost({FlightGraph::kStart, roof, FlightGraph::kHover, FlightGraph::kEnd});
    out.push_back(g.routes[1 + 2 * k + (rest_first < hover_first ? 1 : 0)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solvers

struct PlanResult {
  TrajectoryPlan plan;
  MissionOutcome outcome;
};

/// Largest hover count on the direct route meeting the SOC target.
/// Throws NoFeasibleDelta when the flight alone busts the budget or Delta = 0 fails.
inline PlanResult solve_p3(const Scenario& sc, Perspective persp, std::optional<Vec3> hover = std::nullopt) {
  const Route route = direct_route(sc.w0, hover ? *hover : hover_point(sc), sc.wF);
  const MissionModel model(sc, route);
  const int n = model.dwell_budget();
  if (n < 0) throw NoFeasibleDelta("direct flight alone exceeds the time budget");
  auto ok = [&](int delta) { return model.meets_target(model.run(delta, 0), persp); };
  if (!ok(0)) throw NoFeasibleDelta("SOC target missed even without hovering");
  int lo = 0;  // feasible
  int hi = n;
  if (!ok(hi)) {
    int bad = hi;  // infeasible
    while (bad - lo > 1) {
      const int mid = lo + (bad - lo) / 2;
      (ok(mid) ? lo : bad) = mid;
    }
    hi = lo;
    // Binary search assumes feasibility is a prefix in Delta; confirm the
    // boundary and fall back to a scan from the top if it is not.
    if (!ok(hi) || ok(hi + 1)) {
      hi = n;
      while (hi > 0 && !ok(hi)) --hi;
    }
  }
  PlanResult r;
  r.plan = make_plan(route, sc, hi, 0);
  r.outcome = model.outcome(model.run(hi, 0), hi, 0, persp);
  return r;
}

struct HoverRest {
  int delta = 0;
  int rest = 0;

  friend bool operator==(const HoverRest&, const HoverRest&) = default;
};

/// Exhaustive search over T' = 1..N and Delta = 1..N - T' on a one-building
/// route, N being the dwell budget. Returns the feasible pair with the largest
/// Delta, smallest T' among ties, or (0, 0) when nothing is feasible.
///
/// Snapshots after the first dwell site are reused across the inner loop, so
/// each pair costs one slot plus the final leg rather than a whole mission.
inline HoverRest algorithm1(const MissionModel& model, Perspective persp) {
  const Route& route = model.route();
  if (route.waypoints.size() != 4 || !route.building) {
    throw InvalidArgument("algorithm1: route must visit exactly one rooftop");
  }
  const DwellKind first = route.dwell[1];
  const DwellKind second = route.dwell[2];
  const int n = model.dwell_budget();
  HoverRest best;
  auto consider = [&](int a, int b) {
    const HoverRest pair = first == DwellKind::hover ? HoverRest{a, b} : HoverRest{b, a};
    if (pair.delta > best.delta || (pair.delta == best.delta && pair.rest < best.rest)) best = pair;
  };
  auto outer = model.start();
  model.fly(outer, 0);
  for (int a = 1; a <= n; ++a) {
    model.dwell(outer, first, 1);
    // A cut-off is sticky: every longer schedule from here is infeasible too.
    if (outer.depleted_at) break;
    auto inner = outer;
    model.fly(inner, 1);
    for (int b = 1; b <= n - a; ++b) {
      model.dwell(inner, second, 1);
      if (inner.depleted_at) break;
      auto tail = inner;
      model.fly(tail, 2);
      if (model.meets_target(tail, persp)) consider(a, b);
    }
  }
  return best;
}

/// algorithm1 on the shorter route through building b.
inline HoverRest algorithm1(const Scenario& sc, std::size_t building, Perspective persp) {
  const FlightGraph g = build_flight_graph(sc);
  const auto candidates = building_candidates(g);
  for (const auto& r : candidates) {
    if (r.building == building) return algorithm1(MissionModel(sc, r), persp);
  }
  throw InvalidArgument("algorithm1: building " + std::to_string(building) + " is not restable");
}

inline PlanResult evaluate_pair(const Scenario& sc, const Route& route, HoverRest hr, Perspective persp) {
  const MissionModel model(sc, route);
  PlanResult r;
  r.plan = make_plan(route, sc, hr.delta, hr.rest);
  r.outcome = model.outcome(model.run(hr.delta, hr.rest), hr.delta, hr.rest, persp);
  // (0, 0) is algorithm1's "nothing feasible" marker, not a schedule.
  if (route.building && hr == HoverRest{}) r.outcome.feasible = false;
  return r;
}

struct Solution {
  PlanResult best;
  std::optional<int> delta1;            ///< direct case; empty when infeasible
  int delta2 = 0;                       ///< best resting case (0 when none)
  std::optional<std::size_t> building;  ///< building of the resting case
  HoverRest resting;
};

/// Combines the direct and resting cases. The direct path wins ties.
/// Throws NoFeasiblePlan when neither case yields a feasible schedule.
inline Solution algorithm2(const Scenario& sc, Perspective persp) {
  const Vec3 hover = hover_point(sc);
  const FlightGraph g = build_flight_graph(sc, hover);
  Solution sol;
  std::optional<PlanResult> direct;
  try {
    direct = solve_p3(sc, persp, hover);
    sol.delta1 = direct->outcome.delta;
  } catch (const NoFeasibleDelta&) {
  }
  std::optional<Route> resting_route;
  for (const auto& route : building_candidates(g)) {
    const HoverRest hr = algorithm1(MissionModel(sc, route), persp);
    if (hr.delta > sol.delta2) {
      sol.delta2 = hr.delta;
      sol.resting = hr;
      sol.building = route.building;
      resting_route = route;
    }
  }
  const bool resting_ok = resting_route && sol.delta2 > 0;
  if (!sol.delta1 && !resting_ok) throw NoFeasiblePlan("neither the direct nor any resting route meets the SOC target");
  if (sol.delta1 && (!resting_ok || *sol.delta1 >= sol.delta2)) {
    sol.best = std::move(*direct);
  } else {
    sol.best = evaluate_pair(sc, *resting_route, sol.resting, persp);
  }
  return sol;
}

enum class Benchmark { direct, traj1, traj2 };

inline std::string_view to_string(Benchmark b) {
  switch (b) {
    case Benchmark::direct: return "direct";
    case Benchmark::traj1: return "traj1";
    case Benchmark::traj2: return "traj2";
  }
  return "direct";
}

/// Reference routes: direct; traj1 via the restable building nearest the
/// device; traj2 via the building giving the shortest one-building flight.
/// traj1 and traj2 are scheduled with algorithm1; an infeasible direct case
/// yields an outcome with feasible = false.
inline PlanResult benchmark_trajectory(const Scenario& sc, Benchmark kind, Perspective persp) {
  const Vec3 hover = hover_point(sc);
  if (kind == Benchmark::direct) {
    try {
      return solve_p3(sc, persp, hover);
    } catch (const NoFeasibleDelta&) {
      auto r = evaluate_pair(sc, direct_route(sc.w0, hover, sc.wF), {}, persp);
      r.outcome.feasible = false;
      return r;
    }
  }
  const FlightGraph g = build_flight_graph(sc, hover);
  const auto candidates = building_candidates(g);
  if (candidates.empty()) throw InvalidArgument("benchmark_trajectory: no restable building");
  std::size_t pick = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const auto& a = candidates[k];
    const auto& b = candidates[pick];
    bool better = false;
    if (kind == Benchmark::traj1) {
      const auto key = [&](const Route& r) {
        return distance(sc.buildings[*r.building].rooftop(sc.rest_clearance), sc.device.device_pos);
      };
      better = key(a) < key(b);
    } else {
      better = route_flight_time(a, sc) < route_flight_time(b, sc);
    }
    if (better) pick = k;
  }
  const Route& route = candidates[pick];
  return evaluate_pair(sc, route, algorithm1(MissionModel(sc, route), persp), persp);
}

/// Speed factor making the direct flight last target_seconds with t_rot per
/// orientation stage.
inline KinematicsConfig calibrate_kinematics(const Scenario& sc, double target_seconds, double t_rot = 1.0) {
  const Vec3 hover = hover_point(sc);
  const Vec3 pts[3] = {sc.w0, hover, sc.wF};
  double length = 0.0;
  int turns = 0;
  for (int k = 0; k < 2; ++k) {
    length += displacement_length(pts[k], pts[k + 1]);
    turns += orientation_stage_count(pts[k], pts[k + 1]);
  }
  const double moving = target_seconds - turns * t_rot;
  if (!(moving > 0.0) || !(length > 0.0)) {
    throw InvalidArgument("calibrate_kinematics: target leaves no time for displacement");
  }
  return {t_rot, length / (moving * sc.quad.v_max)};
}

}  // namespace lcuav
