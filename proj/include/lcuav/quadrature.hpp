#pragma once

// Adaptive Simpson quadrature with a global evaluation budget.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "lcuav/core.hpp"

namespace lcuav::quadrature {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_depth = 48;
  std::size_t max_evaluations = 2'000'000;
};

namespace detail {

template <typename F>
struct SimpsonState {
  const F& f;
  Options opt;
  std::size_t evaluations = 0;
  bool depth_exhausted = false;

  double eval(double x) {
    ++evaluations;
    if (evaluations > opt.max_evaluations) {
      throw QuadratureNotConverged("adaptive Simpson exceeded evaluation budget");
    }
    return f(x);
  }

  // Richardson-corrected recursion on [a, b] with cached endpoint/midpoint values.
  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
      return left + right + delta / 15.0;
    }
    if (depth <= 0) {
      depth_exhausted = true;
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }
};

}  // namespace detail

/// Integrates f over [a, b]. Throws QuadratureNotConverged when the
/// recursion depth or evaluation budget is exhausted before the tolerance is met.
template <typename F>
double integrate(const F& f, double a, double b, const Options& opt = {}) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, opt);
  detail::SimpsonState<F> st{f, opt};
  const double fa = st.eval(a);
  const double fb = st.eval(b);
  const double fm = st.eval(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // A coarse first pass sets the absolute target from the integral's scale.
  const double scale = std::max(std::abs(whole), opt.abs_tol);
  const double tol = std::max(opt.rel_tol * scale, opt.abs_tol);
  const double value = st.recurse(a, b, fa, fm, fb, whole, tol, opt.max_depth);
  if (st.depth_exhausted) {
    throw QuadratureNotConverged("adaptive Simpson hit maximum recursion depth");
  }
  return value;
}

}  // namespace lcuav::quadrature
