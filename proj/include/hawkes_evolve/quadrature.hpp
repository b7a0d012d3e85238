#pragma once

#include <cmath>
#include <limits>

namespace hawkes_evolve::quad {

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on [a, b] with absolute tolerance `tol`.
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-10,
                 int max_depth = 40) {
  if (b == a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Integral over [0, inf) of a non-negative function, summed over dyadic
// pieces [0,1], [1,2], [2,4], ... Returns +inf when the pieces stop shrinking.
template <class F>
double integrate_half_line(F&& f, double tol = 1e-10) {
  double total = integrate(f, 0.0, 1.0, tol);
  double lo = 1.0;
  for (int k = 0; k < 80; ++k) {
    const double hi = 2.0 * lo;
    const double piece = integrate(f, lo, hi, tol);
    total += piece;
    if (piece <= tol && piece <= 1e-13 * total && k > 4) return total;
    lo = hi;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace hawkes_evolve::quad
