#pragma once

// Subcommands behind the lcuav tool. Each returns the tables it produced;
// writing them out is left to the caller so tests can inspect them directly.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lcuav/cli/config.hpp"
#include "lcuav/cli/csv.hpp"
#include "lcuav/comm_link.hpp"
#include "lcuav/mission.hpp"
#include "lcuav/planner.hpp"

namespace lcuav::cli {

/// Runs fn(0..n-1) on up to `workers` threads; results keep index order.
/// The first exception (by index) is rethrown after all workers finish.
template <typename T>
std::vector<T> parallel_map(std::size_t n, int workers, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::size_t next = 0;
  std::mutex lock;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> g(lock);
        if (next >= n) return;
        k = next++;
      }
      try {
        slots[k].emplace(fn(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::max(1, workers));
  if (count == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(count, n); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    out.push_back(std::move(*slots[k]));
  }
  return out;
}

/// Named output of a subcommand: file stem and contents.
struct NamedTable {
  std::string name;
  Table table;
};

struct Report {
  std::vector<NamedTable> tables;
  std::vector<std::string> notes;  ///< free-text lines printed after the tables
};

// ---------------------------------------------------------------------------
// Result rows

/// Outcome columns shared by every subcommand.
inline const std::vector<std::string>& outcome_columns() {
  static const std::vector<std::string> cols{
      "status", "feasible", "route", "building", "delta", "rest_slots", "flight_time", "t_total",
      "eta1",   "eta2",     "eta3",  "e_fl",     "e_hv", "e_comm",     "e_harv",      "zeta"};
  return cols;
}

inline std::vector<Cell> outcome_cells(const std::string& status, const PlanResult* r, const Scenario& sc) {
  if (!r) {
    std::vector<Cell> row(outcome_columns().size());
    row[0] = status;
    row[1] = false;
    return row;
  }
  const auto& o = r->outcome;
  Cell building;
  if (r->plan.route.building) building = static_cast<long long>(*r->plan.route.building);
  return {status,
          o.feasible,
          r->plan.route.label,
          building,
          static_cast<long long>(o.delta),
          static_cast<long long>(o.rest_slots),
          o.flight_time,
          o.t_total,
          o.eta1,
          o.eta2,
          o.eta3,
          o.energy.flight,
          o.energy.hover_comm,
          comm_energy(sc.device.p_u, o.delta * sc.slot),
          o.energy.harvest,
          o.hover_efficiency};
}

inline std::string describe(const std::exception& e) {
  std::string s = e.what();
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// ---------------------------------------------------------------------------
// plan

/// Optimal plan plus the three benchmark routes, and the optimal waypoint list.
inline Report cmd_plan(const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  const Perspective persp = cfg.perspective;
  struct Entry {
    std::string approach;
    std::string status;
    std::optional<PlanResult> result;
  };
  const std::vector<std::string> approaches{"optimal", "direct", "traj1", "traj2"};
  // The optimal plan's errors propagate; a benchmark that cannot be built only marks its row.
  auto entries = parallel_map<Entry>(approaches.size(), cfg.workers, [&](std::size_t k) -> Entry {
    if (k == 0) return {approaches[k], "ok", algorithm2(sc, persp).best};
    const Benchmark kind = k == 1 ? Benchmark::direct : k == 2 ? Benchmark::traj1 : Benchmark::traj2;
    try {
      auto r = benchmark_trajectory(sc, kind, persp);
      return {approaches[k], r.outcome.feasible ? "ok" : "infeasible", std::move(r)};
    } catch (const InvalidArgument& e) {
      return {approaches[k], describe(e), std::nullopt};
    }
  });

  Table summary;
  summary.header = {"approach", "perspective", "t_max"};
  for (const auto& c : outcome_columns()) summary.header.push_back(c);
  for (const auto& e : entries) {
    std::vector<Cell> row{e.approach, std::string(to_string(persp)), sc.t_max};
    for (auto& c : outcome_cells(e.status, e.result ? &*e.result : nullptr, sc)) row.push_back(std::move(c));
    summary.rows.push_back(std::move(row));
  }

  Table waypoints;
  waypoints.header = {"index", "x", "y", "z", "dwell", "slots", "leg_flight_time"};
  const auto& plan = entries.front().result->plan;
  for (std::size_t k = 0; k < plan.route.waypoints.size(); ++k) {
    const Vec3 w = plan.route.waypoints[k];
    const DwellKind d = plan.route.dwell[k];
    const char* kind = d == DwellKind::hover ? "hover" : d == DwellKind::rest ? "rest" : "none";
    const long long slots = d == DwellKind::hover ? plan.hover_slots : d == DwellKind::rest ? plan.rest_slots : 0;
    Cell leg;
    if (k < plan.stage_plans.size()) leg = plan.stage_plans[k].duration();
    waypoints.rows.push_back({static_cast<long long>(k), w.x, w.y, w.z, std::string(kind), slots, leg});
  }
  return {{{"plan", std::move(summary)}, {"waypoints", std::move(waypoints)}}, {}};
}

// ---------------------------------------------------------------------------
// reproduce-table2

struct ReferenceRow {
  double t_max = 0.0;
  Perspective perspective = Perspective::battery;
  double delta = 0.0;
  double t_total = 0.0;
  double eta1 = 0.0;  ///< fraction
  double eta2 = 0.0;
  double eta3 = 0.0;

  [[nodiscard]] double eta(Perspective p) const { return SocValues{eta1, eta2, eta3}.get(p); }
};

/// Reads the reference fixture (JSON, comments allowed; eta values in percent).
inline std::vector<ReferenceRow> load_reference(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open reference file", std::nullopt, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json root;
  try {
    root = json::parse(buf.str(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), detail::line_of(buf.str(), e.byte == 0 ? 0 : e.byte - 1), path);
  }
  std::vector<ReferenceRow> out;
  try {
    for (const auto& r : root.at("rows")) {
      ReferenceRow row;
      row.t_max = r.at("t_max").get<double>();
      const auto p = parse_perspective(r.at("perspective").get<std::string>());
      if (!p) throw ParseError("unknown perspective", std::nullopt, path);
      row.perspective = *p;
      row.delta = r.at("delta").get<double>();
      row.t_total = r.at("t_total").get<double>();
      row.eta1 = r.at("eta1_percent").get<double>() / 100.0;
      row.eta2 = r.at("eta2_percent").get<double>() / 100.0;
      row.eta3 = r.at("eta3_percent").get<double>() / 100.0;
      out.push_back(row);
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what(), std::nullopt, path);
  }
  return out;
}

struct ReproducedRow {
  ReferenceRow reference;
  std::optional<MissionOutcome> outcome;
  std::string status = "ok";
};

/// Direct-path optimum for every reference row (same scenario, its t_max and perspective).
inline std::vector<ReproducedRow> reproduce_reference(const RunConfig& cfg, const std::vector<ReferenceRow>& refs) {
  return parallel_map<ReproducedRow>(refs.size(), cfg.workers, [&](std::size_t k) {
    ReproducedRow out;
    out.reference = refs[k];
    Scenario sc = cfg.scenario;
    sc.t_max = refs[k].t_max;
    try {
      out.outcome = solve_p3(sc, refs[k].perspective).outcome;
    } catch (const NoFeasibleDelta& e) {
      out.status = describe(e);
    }
    return out;
  });
}

inline double relative_deviation(double value, double reference) {
  return reference != 0.0 ? (value - reference) / std::abs(reference) : value - reference;
}

inline Report cmd_reproduce_table2(const RunConfig& cfg, const std::string& reference_path) {
  const auto rows = reproduce_reference(cfg, load_reference(reference_path));
  Table t;
  t.header = {"t_max",      "perspective", "status",     "delta",       "delta_ref",   "delta_rel_dev",
              "t_total",    "t_total_ref", "t_rel_dev",  "eta1",        "eta1_ref",    "eta2",
              "eta2_ref",   "eta3",        "eta3_ref",   "eta_target",  "eta_target_ref", "eta_target_dev_pp",
              "flight_time"};
  Report rep;
  for (const auto& r : rows) {
    const auto& ref = r.reference;
    std::vector<Cell> row{ref.t_max, std::string(to_string(ref.perspective)), r.status};
    if (r.outcome) {
      const auto& o = *r.outcome;
      const double eta = o.eta(ref.perspective);
      const double eta_ref = ref.eta(ref.perspective);
      // Delta is reported in seconds of hovering; slots are one slot long each.
      const double delta_s = o.delta * cfg.scenario.slot;
      row.insert(row.end(), {delta_s, ref.delta, relative_deviation(delta_s, ref.delta), o.t_total, ref.t_total,
                             relative_deviation(o.t_total, ref.t_total), o.eta1, ref.eta1, o.eta2, ref.eta2, o.eta3,
                             ref.eta3, eta, eta_ref, 100.0 * (eta - eta_ref), o.flight_time});
      char line[256];
      std::snprintf(line, sizeof line,
                    "t_max=%g %-8s delta %.2f s vs %.2f (%+.2f %%), eta_%s %.2f %% vs %.2f %% (%+.2f pp)", ref.t_max,
                    std::string(to_string(ref.perspective)).c_str(), delta_s, ref.delta,
                    100.0 * relative_deviation(delta_s, ref.delta), std::string(to_string(ref.perspective)).c_str(),
                    100.0 * eta, 100.0 * eta_ref, 100.0 * (eta - eta_ref));
      rep.notes.emplace_back(line);
    } else {
      row.resize(t.header.size());
      row[4] = ref.delta;
      row[7] = ref.t_total;
      row[10] = ref.eta1;
      row[12] = ref.eta2;
      row[14] = ref.eta3;
      row[16] = ref.eta(ref.perspective);
      rep.notes.push_back("t_max=" + format_real(ref.t_max) + " " + std::string(to_string(ref.perspective)) + ": " +
                          r.status);
    }
    t.rows.push_back(std::move(row));
  }
  rep.tables.push_back({"table2", std::move(t)});
  return rep;
}

// ---------------------------------------------------------------------------
// sweep

/// Scenario at one sweep point. `distance` moves the laser source along the
/// line from the hover point through its configured position.
inline Scenario sweep_scenario(const Scenario& base, SweepVariable var, double value) {
  Scenario sc = base;
  // Wind components are read back from the configured force with gravity removed.
  const Vec3 wind{base.external_force.fx, base.external_force.fy,
                  base.external_force.fz + base.quad.mass * base.quad.gravity};
  switch (var) {
    case SweepVariable::wind_x: sc.external_force = ExternalForce::from_wind({value, wind.y, wind.z}, sc.quad); break;
    case SweepVariable::wind_y: sc.external_force = ExternalForce::from_wind({wind.x, value, wind.z}, sc.quad); break;
    case SweepVariable::wind_z: sc.external_force = ExternalForce::from_wind({wind.x, wind.y, value}, sc.quad); break;
    case SweepVariable::distance: {
      const Vec3 hover = hover_point(base);
      Vec3 dir = base.source.source_pos - hover;
      const double len = norm(dir);
      dir = len > 0.0 ? (1.0 / len) * dir : Vec3{0.0, -1.0, 0.0};
      sc.source.source_pos = hover + value * dir;
      break;
    }
    case SweepVariable::v_max: sc.quad.v_max = value; break;
    case SweepVariable::eta0: sc.eta0 = value; break;
    case SweepVariable::battery_size: sc.battery.capacity = value; break;
    case SweepVariable::t_max: sc.t_max = value; break;
  }
  return sc;
}

inline const std::vector<std::string>& sweep_reference_columns() {
  static const std::vector<std::string> cols{"reference_seconds", "hover_force", "e_hv_ref", "source_distance",
                                             "source_power",      "e_harv_ref",  "zeta_ref",
                                             "delta_direct_no_recharge"};
  return cols;
}

/// One sweep point: the optimal plan plus fixed-duration reference quantities.
inline std::vector<Cell> sweep_row(const RunConfig& cfg, double value) {
  const auto& sw = *cfg.sweep;
  const Scenario sc = sweep_scenario(cfg.scenario, sw.variable, value);
  std::vector<Cell> row{std::string(to_string(sw.variable)), value, std::string(to_string(cfg.perspective))};

  const auto problems = sc.violations();
  if (!problems.empty()) {
    std::vector<Cell> out = outcome_cells("invalid: " + problems.front(), nullptr, sc);
    row.insert(row.end(), out.begin(), out.end());
    row.resize(row.size() + sweep_reference_columns().size());
    return row;
  }

  std::optional<PlanResult> best;
  std::string status = "ok";
  try {
    best = algorithm2(sc, cfg.perspective).best;
  } catch (const NoFeasiblePlan&) {
    status = "infeasible";
  } catch (const HoverInfeasible&) {
    status = "hover infeasible";
  } catch (const NoFeasibleHoverPoint&) {
    status = "no hover point";
  }
  for (auto& c : outcome_cells(status, best ? &*best : nullptr, sc)) row.push_back(std::move(c));

  const double ref_s = sw.reference_seconds;
  row.emplace_back(ref_s);
  row.emplace_back(sc.external_force.magnitude());
  try {
    const double e = hover_energy(ref_s, sc.external_force, derive_constants(sc.quad), sc.quad) +
                     comm_energy(sc.device.p_u, ref_s);
    row.emplace_back(e);
  } catch (const HoverInfeasible&) {
    row.emplace_back(std::monostate{});
  }
  std::optional<double> d_source;
  try {
    d_source = distance(hover_point(sc), sc.source.source_pos);
  } catch (const NoFeasibleHoverPoint&) {
  }
  if (d_source) {
    const double ps = source_power_at(*d_source, sc.battery, sc.source);
    const double p0 = received_power(*d_source, ps, sc.source);
    row.emplace_back(*d_source);
    row.emplace_back(ps);
    row.emplace_back(p0 * ref_s);
    row.emplace_back(harvesting_efficiency(*d_source, ps, sc.source));
  } else {
    row.resize(row.size() + 4);
  }
  Scenario bare = sc;
  bare.harvesting = false;
  try {
    row.emplace_back(static_cast<long long>(solve_p3(bare, cfg.perspective).outcome.delta));
  } catch (const Error&) {
    row.emplace_back(std::monostate{});
  }
  return row;
}

inline Report cmd_sweep(const RunConfig& cfg) {
  if (!cfg.sweep) throw ValidationError({"sweep section is required for the sweep command"});
  const auto points = cfg.sweep->points();
  Table t;
  t.header = {"variable", "value", "perspective"};
  for (const auto& c : outcome_columns()) t.header.push_back(c);
  for (const auto& c : sweep_reference_columns()) t.header.push_back(c);
  t.rows = parallel_map<std::vector<Cell>>(points.size(), cfg.workers,
                                           [&](std::size_t k) { return sweep_row(cfg, points[k]); });
  return {{{"sweep_" + std::string(to_string(cfg.sweep->variable)), std::move(t)}}, {}};
}

// ---------------------------------------------------------------------------
// Output

/// Output directory or file could not be written.
class OutputError : public Error {
 public:
  using Error::Error;
};

/// Writes each table as <dir>/<name>.csv.
inline std::vector<std::filesystem::path> write_report(const Report& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  for (const auto& nt : rep.tables) {
    const auto path = dir / (nt.name + ".csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + path.string());
    nt.table.write_csv(out);
    if (!out) throw OutputError("write failed for " + path.string());
    files.push_back(path);
  }
  return files;
}

/// Column-aligned rendering for the terminal; reals at 6 significant digits.
inline void print_table(std::ostream& os, const Table& t) {
  auto text = [](const Cell& c) {
    if (const double* x = std::get_if<double>(&c)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", *x);
      return std::string(buf);
    }
    return render(c);
  };
  std::vector<std::vector<std::string>> cells;
  cells.push_back(t.header);
  for (const auto& r : t.rows) {
    std::vector<std::string> line;
    for (const auto& c : r) line.push_back(text(c));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(t.header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t k = 0; k < line.size() && k < width.size(); ++k) width[k] = std::max(width[k], line[k].size());
  }
  for (const auto& line : cells) {
    for (std::size_t k = 0; k < line.size(); ++k) {
      os << (k ? "  " : "") << line[k];
      if (k + 1 < line.size()) os << std::string(width[k] - line[k].size(), ' ');
    }
    os << '\n';
  }
}

}  // namespace lcuav::cli
