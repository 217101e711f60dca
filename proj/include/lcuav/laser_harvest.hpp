#pragma once

// Distributed laser charging: affine photovoltaic fit over an exponentially
// attenuated beam.
//
//   P0 = a1 a2 nu(d) Ps + a2 b1 nu(d) + b2,   nu(d) = exp(-alpha d)
//
// alpha is per kilometre; distances everywhere else are metres.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lcuav/core.hpp"
#include "lcuav/kibam_battery.hpp"
#include "lcuav/quadrature.hpp"

namespace lcuav {

enum class SourcePowerMode {
  fixed,     ///< emit p_s regardless of distance
  tracking,  ///< emit the largest power the battery charge cap allows, up to p_s_limit
};

struct DlcParams {
  double a1 = 0.34;
  double b1 = -1.1;       ///< [W]
  double a2 = 0.5434;
  double b2 = -0.2761;    ///< [W]
  double alpha = 0.1019;  ///< attenuation [1/km]
  double p_s = 100.0;     ///< emitted power in fixed mode [W]
  double p_s_limit = 1000.0;  ///< hardware ceiling in tracking mode [W]
  SourcePowerMode power_mode = SourcePowerMode::tracking;
  Vec3 source_pos{1000.0, 0.0, 50.0};
  double wavelength_nm = 1550.0;

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(a1 > 0.0)) out.emplace_back("source.a1 must be > 0");
    if (!(a2 > 0.0)) out.emplace_back("source.a2 must be > 0");
    if (!(alpha >= 0.0)) out.emplace_back("source.alpha must be >= 0");
    if (!(p_s >= 0.0)) out.emplace_back("source.p_s must be >= 0");
    if (!(p_s_limit >= 0.0)) out.emplace_back("source.p_s_limit must be >= 0");
    return out;
  }
};

inline double transmission_efficiency(double d_m, const DlcParams& p) {
  return std::exp(-p.alpha * d_m / 1000.0);
}

/// Received power for an explicit emitted power; clamped at zero below cut-in [W].
inline double received_power(double d_m, double p_s, const DlcParams& p) {
  const double nu = transmission_efficiency(d_m, p);
  return std::max(0.0, p.a1 * p.a2 * nu * p_s + p.a2 * p.b1 * nu + p.b2);
}

inline double received_power(double d_m, const DlcParams& p) { return received_power(d_m, p.p_s, p); }

/// Harvesting efficiency zeta = P0/Ps (zero when nothing is emitted).
inline double harvesting_efficiency(double d_m, double p_s, const DlcParams& p) {
  return p_s > 0.0 ? received_power(d_m, p_s, p) / p_s : 0.0;
}

/// Efficiency in the limit of large emitted power, a1 a2 nu(d).
inline double asymptotic_efficiency(double d_m, const DlcParams& p) {
  return p.a1 * p.a2 * transmission_efficiency(d_m, p);
}

/// Largest emitted power whose received power stays within I_ch * e_nom [W].
inline double max_source_power(double d_m, const KibamParams& battery, const DlcParams& p) {
  const double nu = transmission_efficiency(d_m, p);
  return (battery.i_ch_max * battery.e_nom - p.a2 * p.b1 * nu - p.b2) / (p.a1 * p.a2 * nu);
}

/// Emitted power the source actually uses toward a receiver at distance d [W].
inline double source_power_at(double d_m, const KibamParams& battery, const DlcParams& p) {
  if (p.power_mode == SourcePowerMode::fixed) return p.p_s;
  return std::min(p.p_s_limit, max_source_power(d_m, battery, p));
}

/// Energy received over [t0, tf] with distance d(t) and emitted power p.p_s [J].
inline double harvested_energy(const std::function<double(double)>& distance_fn, double t0, double tf,
                               const DlcParams& p, const quadrature::Options& opt = {}) {
  if (tf < t0) throw InvalidArgument("harvested_energy: tf < t0");
  return quadrature::integrate([&](double t) { return received_power(distance_fn(t), p); }, t0, tf, opt);
}

}  // namespace lcuav
