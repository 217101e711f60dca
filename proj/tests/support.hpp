#pragma once

// Helpers shared by the unit and acceptance tests: seeded random scenarios and
// a brute-force planner that enumerates every (route, Delta, T') schedule.

#include <algorithm>
#include <random>
#include <vector>

#include "lcuav/mission.hpp"
#include "lcuav/planner.hpp"

namespace lcuav::fixtures {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Short mission (t_max <= 30 slots, <= 3 buildings) with a battery small
/// enough that the SOC target binds.
inline Scenario small_scenario(std::mt19937_64& rng) {
  Scenario sc;
  sc.z_min = uniform(rng, 20.0, 60.0);
  sc.z_max = sc.z_min + uniform(rng, 10.0, 60.0);
  const double z = uniform(rng, sc.z_min, sc.z_max);
  sc.w0 = {0.0, 0.0, z};
  sc.wF = {uniform(rng, 20.0, 300.0), uniform(rng, -50.0, 50.0), uniform(rng, sc.z_min, sc.z_max)};
  sc.device.device_pos = {uniform(rng, -100.0, 400.0), uniform(rng, -700.0, 700.0), 0.0};
  sc.source.source_pos = {uniform(rng, -100.0, 400.0), uniform(rng, -300.0, 300.0), uniform(rng, 0.0, 80.0)};
  const int buildings = uniform_int(rng, 0, 3);
  for (int b = 0; b < buildings; ++b) {
    const Vec3 base{uniform(rng, -50.0, 350.0), uniform(rng, -400.0, 400.0), 0.0};
    sc.buildings.push_back({base, uniform(rng, sc.z_min - 15.0, sc.z_max + 15.0)});
  }
  sc.t_max = uniform_int(rng, 5, 30);
  sc.eta0 = uniform(rng, 0.0, 0.6);
  sc.quad.T_f = uniform(rng, 0.005, 0.04);
  sc.quad.mass = uniform(rng, 0.3, 1.3);
  sc.external_force = ExternalForce::gravity_only(sc.quad);
  sc.battery.capacity = uniform(rng, 150.0, 2500.0);
  sc.battery.i_ch_max = sc.battery.one_c();
  sc.kin = {uniform(rng, 0.0, 1.0), uniform(rng, 0.05, 0.5)};
  sc.cutoff = uniform_int(rng, 0, 1) == 0 ? Cutoff::total_charge : Cutoff::available_well;
  return sc;
}

inline Perspective random_perspective(std::mt19937_64& rng) {
  return static_cast<Perspective>(uniform_int(rng, 0, 2));
}

/// Largest feasible Delta over the direct route (T' = 0) and every candidate
/// resting route (T' >= 1), each schedule simulated from scratch.
/// No feasible schedule scores 0, the same as hovering for zero slots.
inline int brute_force_delta(const Scenario& sc, Perspective persp) {
  const FlightGraph g = build_flight_graph(sc);
  std::vector<Route> routes{g.routes.front()};
  for (const auto& r : building_candidates(g)) routes.push_back(r);
  int best = 0;
  for (const auto& route : routes) {
    const MissionModel model(sc, route);
    const int n = model.dwell_budget();
    const int min_rest = route.building ? 1 : 0;
    const int max_rest = route.building ? n : 0;
    for (int rest = min_rest; rest <= max_rest; ++rest) {
      for (int delta = 0; delta + rest <= n; ++delta) {
        const auto plan = make_plan(route, sc, delta, rest);
        if (simulate_mission(plan, sc, persp).feasible) best = std::max(best, delta);
      }
    }
  }
  return best;
}

/// algorithm2's Delta with "no feasible plan" scored as 0.
inline int planner_delta(const Scenario& sc, Perspective persp) {
  try {
    return algorithm2(sc, persp).best.outcome.delta;
  } catch (const NoFeasiblePlan&) {
    return 0;
  }
}

}  // namespace lcuav::fixtures
