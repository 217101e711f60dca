#pragma once

// Run configuration: JSON (comments allowed) with nested sections
// quad / battery / source / link / scenario / kinematics / sweep.
// Unspecified fields keep the default scenario values; unknown keys are errors.

#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lcuav/mission.hpp"
#include "lcuav/planner.hpp"

namespace lcuav::cli {

using json = nlohmann::json;

/// Malformed file: bad syntax, wrong value type or unknown key.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::optional<std::size_t> line = std::nullopt, std::string field = {})
      : Error(format(what, line, field)), line(line), field(std::move(field)) {}

  std::optional<std::size_t> line;
  std::string field;

 private:
  static std::string format(const std::string& what, std::optional<std::size_t> line, const std::string& field) {
    std::string out = "parse error";
    if (line) out += " at line " + std::to_string(*line);
    if (!field.empty()) out += " in '" + field + "'";
    return out + ": " + what;
  }
};

/// Well-formed file whose values break one or more invariants.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : Error(join(problems)), problems(std::move(problems)) {}

  std::vector<std::string> problems;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& p : v) out += "\n  - " + p;
    return out;
  }
};

enum class SweepVariable { wind_x, wind_y, wind_z, distance, v_max, eta0, battery_size, t_max };

inline constexpr std::array<std::pair<SweepVariable, const char*>, 8> kSweepNames{{
    {SweepVariable::wind_x, "wind_x"},
    {SweepVariable::wind_y, "wind_y"},
    {SweepVariable::wind_z, "wind_z"},
    {SweepVariable::distance, "distance"},
    {SweepVariable::v_max, "v_max"},
    {SweepVariable::eta0, "eta0"},
    {SweepVariable::battery_size, "battery_size"},
    {SweepVariable::t_max, "t_max"},
}};

inline std::string_view to_string(SweepVariable v) {
  for (const auto& [k, name] : kSweepNames) {
    if (k == v) return name;
  }
  return "?";
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::t_max;
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
  double reference_seconds = 100.0;  ///< dwell used for the e_hv_ref / e_harv_ref columns [s]

  /// Points lo, lo + step, ... up to hi (inclusive within a step tolerance).
  [[nodiscard]] std::vector<double> points() const {
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
};

enum class OutputFormat { csv, table };

struct RunConfig {
  Scenario scenario = default_scenario();
  Perspective perspective = Perspective::battery;
  std::optional<SweepSpec> sweep;
  std::string output_dir = "out";
  OutputFormat format = OutputFormat::csv;
  int workers = 1;
  std::optional<double> calibrate_flight_time;  ///< refit speed_factor to this direct flight time [s]

  [[nodiscard]] std::vector<std::string> violations() const {
    auto out = scenario.violations();
    if (sweep) {
      const auto& s = *sweep;
      if (!std::isfinite(s.lo) || !std::isfinite(s.hi) || !std::isfinite(s.step)) {
        out.emplace_back("sweep.range must be finite");
      } else {
        if (!(s.step > 0.0)) out.emplace_back("sweep.range step must be > 0");
        if (!(s.hi >= s.lo)) out.emplace_back("sweep.range must be nonempty (hi >= lo)");
        if (s.step > 0.0 && (s.hi - s.lo) / s.step > 1e6) out.emplace_back("sweep.range has more than 1e6 points");
      }
      if (!(s.reference_seconds >= 0.0)) out.emplace_back("sweep.reference_seconds must be >= 0");
    }
    if (workers < 1) out.emplace_back("workers must be >= 1");
    if (calibrate_flight_time && !(*calibrate_flight_time > 0.0)) {
      out.emplace_back("kinematics.calibrate_flight_time must be > 0");
    }
    for (std::size_t b = 0; b < scenario.buildings.size(); ++b) {
      if (!(scenario.buildings[b].height >= 0.0)) {
        out.emplace_back("scenario.buildings[" + std::to_string(b) + "].height must be >= 0");
      }
    }
    return out;
  }
};

namespace detail {

// Reads one section, rejecting keys it does not know.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ParseError("expected an object", std::nullopt, path_);
  }

  void number(const char* key, double& dst) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ParseError("expected a number", std::nullopt, name(key));
      dst = v->get<double>();
    }
  }

  void number(const char* key, std::optional<double>& dst) {
    if (const json* v = take(key)) {
      if (v->is_null()) {
        dst.reset();
        return;
      }
      if (!v->is_number()) throw ParseError("expected a number or null", std::nullopt, name(key));
      dst = v->get<double>();
    }
  }

  void integer(const char* key, int& dst) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ParseError("expected an integer", std::nullopt, name(key));
      dst = v->get<int>();
    }
  }

  void boolean(const char* key, bool& dst) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ParseError("expected true or false", std::nullopt, name(key));
      dst = v->get<bool>();
    }
  }

  void text(const char* key, std::string& dst) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ParseError("expected a string", std::nullopt, name(key));
      dst = v->get<std::string>();
    }
  }

  void point(const char* key, Vec3& dst) {
    if (const json* v = take(key)) dst = to_point(*v, name(key));
  }

  const json* take(const char* key) {
    seen_.emplace_back(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  [[nodiscard]] std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      bool known = false;
      for (const auto& k : seen_) known = known || k == it.key();
      if (!known) throw ParseError("unknown key", std::nullopt, name(it.key()));
    }
  }

  static Vec3 to_point(const json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 3) throw ParseError("expected [x, y, z]", std::nullopt, field);
    for (const auto& c : v) {
      if (!c.is_number()) throw ParseError("expected [x, y, z]", std::nullopt, field);
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

 private:
  const json& node_;
  std::string path_;
  std::vector<std::string> seen_;
};

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) line += text[k] == '\n' ? 1 : 0;
  return line;
}

inline void read_quad(Section s, QuadrotorParams& q) {
  if (const json* kv = s.take("kv")) {
    if (!kv->is_number() || !(kv->get<double>() > 0.0)) {
      throw ParseError("expected a positive number", std::nullopt, s.name("kv"));
    }
    q.kappa_E = q.kappa_T = torque_constant_from_kv(kv->get<double>());
  }
  s.number("R", q.R);
  s.number("kappa_E", q.kappa_E);
  s.number("kappa_T", q.kappa_T);
  s.number("T_f", q.T_f);
  s.number("kappa_0", q.kappa_0);
  s.number("D_f", q.D_f);
  s.number("J", q.J);
  s.number("rho_lift", q.rho_lift);
  s.number("v_max", q.v_max);
  s.number("mass", q.mass);
  s.number("gravity", q.gravity);
  s.finish();
}

inline void read_battery(Section s, KibamParams& b, Cutoff& cutoff) {
  s.number("capacity", b.capacity);
  s.number("omega", b.omega);
  s.number("k_F", b.k_F);
  s.number("e_nom", b.e_nom);
  s.number("i_ch_max", b.i_ch_max);
  s.number("e_tr", b.e_tr);
  std::string mode;
  s.text("cutoff", mode);
  if (mode == "total") {
    cutoff = Cutoff::total_charge;
  } else if (mode == "available") {
    cutoff = Cutoff::available_well;
  } else if (!mode.empty()) {
    throw ParseError("expected \"total\" or \"available\"", std::nullopt, s.name("cutoff"));
  }
  s.finish();
}

inline void read_source(Section s, DlcParams& d) {
  s.number("a1", d.a1);
  s.number("b1", d.b1);
  s.number("a2", d.a2);
  s.number("b2", d.b2);
  s.number("alpha", d.alpha);
  s.number("p_s", d.p_s);
  s.number("p_s_limit", d.p_s_limit);
  s.number("wavelength_nm", d.wavelength_nm);
  s.point("position", d.source_pos);
  std::string mode;
  s.text("power_mode", mode);
  if (mode == "tracking") {
    d.power_mode = SourcePowerMode::tracking;
  } else if (mode == "fixed") {
    d.power_mode = SourcePowerMode::fixed;
  } else if (!mode.empty()) {
    throw ParseError("expected \"tracking\" or \"fixed\"", std::nullopt, s.name("power_mode"));
  }
  s.finish();
}

inline void read_link(Section s, LinkParams& l) {
  s.number("p_u", l.p_u);
  s.number("n0", l.n0);
  s.number("gamma_th", l.gamma_th);
  if (const json* db = s.take("gamma_th_db")) {
    if (!db->is_number()) throw ParseError("expected a number", std::nullopt, s.name("gamma_th_db"));
    l.gamma_th = db_to_linear(db->get<double>());
  }
  s.number("beta", l.beta);
  s.number("k_factor", l.k_factor);
  s.number("epsilon", l.epsilon);
  s.point("device_position", l.device_pos);
  s.finish();
}

inline void read_scenario(Section s, Scenario& sc) {
  s.point("w0", sc.w0);
  s.point("wF", sc.wF);
  s.number("z_min", sc.z_min);
  s.number("z_max", sc.z_max);
  s.number("t_max", sc.t_max);
  s.number("eta0", sc.eta0);
  s.number("slot", sc.slot);
  s.number("rest_clearance", sc.rest_clearance);
  s.boolean("harvesting", sc.harvesting);
  s.boolean("eta3_literal", sc.eta3_literal);
  s.number("flying_voltage", sc.flying_voltage);
  s.number("hovering_voltage", sc.hovering_voltage);
  const json* wind = s.take("wind");
  const json* force = s.take("external_force");
  if (wind && force) throw ParseError("give either wind or external_force, not both", std::nullopt, s.name("wind"));
  if (wind) sc.external_force = ExternalForce::from_wind(Section::to_point(*wind, s.name("wind")), sc.quad);
  if (force) {
    const Vec3 f = Section::to_point(*force, s.name("external_force"));
    sc.external_force = {f.x, f.y, f.z};
  }
  if (!wind && !force) sc.external_force = ExternalForce::gravity_only(sc.quad);
  const json* offset = s.take("building_offset");
  const json* list = s.take("buildings");
  if (offset && list) throw ParseError("give either buildings or building_offset", std::nullopt, s.name("buildings"));
  if (offset) {
    if (!offset->is_number()) throw ParseError("expected a number", std::nullopt, s.name("building_offset"));
    sc.buildings = default_buildings(sc.w0, sc.wF, offset->get<double>());
  } else if (list) {
    if (!list->is_array()) throw ParseError("expected an array", std::nullopt, s.name("buildings"));
    sc.buildings.clear();
    for (std::size_t k = 0; k < list->size(); ++k) {
      Section b((*list)[k], s.name("buildings[" + std::to_string(k) + "]"));
      Building bld;
      b.point("position", bld.position);
      b.number("height", bld.height);
      b.finish();
      sc.buildings.push_back(bld);
    }
  } else {
    sc.buildings = default_buildings(sc.w0, sc.wF);
  }
  s.finish();
}

inline void read_sweep(Section s, SweepSpec& sw) {
  std::string var;
  s.text("variable", var);
  bool found = false;
  for (const auto& [k, name] : kSweepNames) {
    if (var == name) {
      sw.variable = k;
      found = true;
    }
  }
  if (!found) throw ParseError("unknown sweep variable '" + var + "'", std::nullopt, s.name("variable"));
  const json* range = s.take("range");
  if (!range || !range->is_array() || range->size() != 3) {
    throw ParseError("expected [lo, hi, step]", std::nullopt, s.name("range"));
  }
  for (const auto& c : *range) {
    if (!c.is_number()) throw ParseError("expected [lo, hi, step]", std::nullopt, s.name("range"));
  }
  sw.lo = (*range)[0].get<double>();
  sw.hi = (*range)[1].get<double>();
  sw.step = (*range)[2].get<double>();
  s.number("reference_seconds", sw.reference_seconds);
  s.finish();
}

}  // namespace detail

/// Parses configuration text. Blank text gives the defaults.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  bool blank = true;
  for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) return cfg;

  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), detail::line_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  detail::Section top(root, "");
  Scenario& sc = cfg.scenario;
  // Quad first: gravity-only force and wind both depend on mass and g.
  if (const json* q = top.take("quad")) detail::read_quad({*q, "quad"}, sc.quad);
  if (const json* b = top.take("battery")) detail::read_battery({*b, "battery"}, sc.battery, sc.cutoff);
  if (const json* s = top.take("source")) detail::read_source({*s, "source"}, sc.source);
  if (const json* l = top.take("link")) detail::read_link({*l, "link"}, sc.device);
  if (const json* s = top.take("scenario")) {
    detail::read_scenario({*s, "scenario"}, sc);
  } else {
    sc.external_force = ExternalForce::gravity_only(sc.quad);
  }
  if (const json* k = top.take("kinematics")) {
    detail::Section ks(*k, "kinematics");
    ks.number("t_rot", sc.kin.t_rot);
    ks.number("speed_factor", sc.kin.speed_factor);
    ks.number("calibrate_flight_time", cfg.calibrate_flight_time);
    ks.finish();
  }
  if (const json* s = top.take("sweep")) {
    SweepSpec sw;
    detail::read_sweep({*s, "sweep"}, sw);
    cfg.sweep = sw;
  }
  std::string persp;
  top.text("perspective", persp);
  if (!persp.empty()) {
    const auto p = parse_perspective(persp);
    if (!p) throw ParseError("expected battery, energy or adjusted", std::nullopt, "perspective");
    cfg.perspective = *p;
  }
  top.text("output_dir", cfg.output_dir);
  std::string fmt;
  top.text("format", fmt);
  if (fmt == "table") {
    cfg.format = OutputFormat::table;
  } else if (!fmt.empty() && fmt != "csv") {
    throw ParseError("expected csv or table", std::nullopt, "format");
  }
  top.integer("workers", cfg.workers);
  top.finish();
  return cfg;
}

/// Checks every invariant, refits the kinematics if asked, and throws
/// ValidationError listing all violations at once.
inline void validate(RunConfig& cfg) {
  auto problems = cfg.violations();
  if (!problems.empty()) throw ValidationError(std::move(problems));
  if (cfg.calibrate_flight_time) {
    try {
      cfg.scenario.kin = calibrate_kinematics(cfg.scenario, *cfg.calibrate_flight_time, cfg.scenario.kin.t_rot);
    } catch (const InvalidArgument& e) {
      throw ValidationError({std::string("kinematics.calibrate_flight_time: ") + e.what()});
    }
  }
}

/// Reads, parses and validates a configuration file.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", std::nullopt, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config(buf.str());
  validate(cfg);
  return cfg;
}

}  // namespace lcuav::cli
