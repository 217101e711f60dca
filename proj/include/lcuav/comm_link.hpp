#pragma once

// Air-to-ground Rician link: first-order Marcum Q, outage probability and the
// furthest hover distance meeting an outage target.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lcuav/core.hpp"

namespace lcuav {

struct LinkParams {
  double p_u = 5.0;                        ///< transmit power [W]
  double n0 = 1e-4;                        ///< noise power [W]
  double gamma_th = std::pow(10.0, -1.1);  ///< SNR threshold (linear)
  double beta = 2.0;                       ///< path-loss exponent
  double k_factor = 20.0;                  ///< Rice factor (linear)
  double epsilon = 0.01;                   ///< outage threshold
  Vec3 device_pos{1000.0, 3000.0, 0.0};

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(p_u > 0.0)) out.emplace_back("link.p_u must be > 0");
    if (!(n0 > 0.0)) out.emplace_back("link.n0 must be > 0");
    if (!(gamma_th > 0.0)) out.emplace_back("link.gamma_th must be > 0");
    if (!(beta > 0.0)) out.emplace_back("link.beta must be > 0");
    if (!(k_factor >= 0.0)) out.emplace_back("link.k_factor must be >= 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) out.emplace_back("link.epsilon must lie in (0, 1)");
    return out;
  }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace detail {

/// Exponentially scaled modified Bessel functions I_k(x) e^{-x}, k = 0..n,
/// by Miller's backward recurrence normalised with I_0 + 2 sum I_k = e^x.
inline std::vector<double> scaled_bessel_i(double x, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double span = std::max<double>(n, x);
  int start = static_cast<int>(std::ceil(span + 30.0 + 10.0 * std::sqrt(span + 1.0)));
  start += start % 2;
  double next = 0.0;  // I_{k+1}
  double cur = 1e-300;  // I_k
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = next + (2.0 * k / x) * cur;  // I_{k-1}
    if (k <= n) out[static_cast<std::size_t>(k)] = cur;
    norm += 2.0 * cur;
    next = cur;
    cur = prev;
    if (cur > 1e250) {
      const double s = 1e-250;
      cur *= s;
      next *= s;
      norm *= s;
      for (int j = k; j <= n; ++j) out[static_cast<std::size_t>(j)] *= s;
    }
  }
  out[0] = cur;
  norm += cur;
  for (auto& v : out) v /= norm;
  return out;
}

}  // namespace detail

/// Q1(a, b) by its Bessel series; absolute error below 1e-10.
/// Throws NotConverged if the truncation bound is not met within the term cap.
inline double marcum_q1(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw InvalidArgument("marcum_q1: arguments must be >= 0");
  if (b == 0.0) return 1.0;
  if (a == 0.0) return std::exp(-0.5 * b * b);
  const double x = a * b;
  const double pre = std::exp(-0.5 * (a - b) * (a - b));
  const bool lower = a < b;
  const double ratio = lower ? a / b : b / a;
  constexpr int kMaxTerms = 200000;
  for (int n = static_cast<int>(std::ceil(x + 20.0 + 8.0 * std::sqrt(x + 1.0))); n <= kMaxTerms; n *= 2) {
    const auto ik = detail::scaled_bessel_i(x, n);
    double sum = 0.0;
    double rk = lower ? 1.0 : ratio;
    bool converged = false;
    for (int k = lower ? 0 : 1; k <= n; ++k) {
      const double term = rk * ik[static_cast<std::size_t>(k)];
      sum += term;
      rk *= ratio;
      if (k > x) {
        // I_{k+1}/I_k < x / (k+1 + sqrt(x^2 + (k+1)^2)) bounds the geometric tail.
        const double q = ratio * x / (k + 1.0 + std::hypot(x, k + 1.0));
        if (q < 1.0 && term * q / (1.0 - q) < 1e-17) {
          converged = true;
          break;
        }
      }
    }
    if (converged) {
      const double q = lower ? pre * sum : 1.0 - pre * sum;
      return std::clamp(q, 0.0, 1.0);
    }
  }
  throw NotConverged("marcum_q1: series did not converge");
}

/// Probability that the received SNR falls below gamma_th at distance d [m].
inline double outage_probability(double d, const LinkParams& lp) {
  if (!(d > 0.0)) throw InvalidArgument("outage_probability: distance must be > 0");
  const double K = lp.k_factor;
  const double b2 = 2.0 * lp.gamma_th * (1.0 + K) * lp.n0 * std::pow(d, lp.beta) / lp.p_u;
  return 1.0 - marcum_q1(std::sqrt(2.0 * K), std::sqrt(b2));
}

/// Called with the bracket (lo, hi) after every bisection update.
using BracketObserver = std::function<void(double lo, double hi)>;

/// Distance at which the outage probability equals epsilon [m].
inline double max_comm_distance(const LinkParams& lp, const BracketObserver& observe = {}) {
  const double eps = lp.epsilon;
  double lo = 1e-6;
  double hi = 1.0;
  while (outage_probability(lo, lp) >= eps) {
    lo *= 1e-3;
    if (lo < 1e-300) throw NotConverged("max_comm_distance: no feasible lower bracket");
  }
  while (outage_probability(hi, lp) <= eps) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw NotConverged("max_comm_distance: outage never reaches epsilon");
  }
  if (observe) observe(lo, hi);
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (outage_probability(mid, lp) < eps) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (observe) observe(lo, hi);
  }
  return 0.5 * (lo + hi);
}

/// Transmit energy for a single device at constant power [J].
inline double comm_energy(double p_u, double delta) { return p_u * delta; }

}  // namespace lcuav
