#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>

#include "modlat/errors.hpp"

namespace modlat {

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0) throw SolverError("adaptive quadrature: subdivision limit reached");
  // Richardson correction; 1/15 factor is the Simpson error ratio between levels.
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Integrates f over [a, b] to |error| <~ rel_tol * |integral| + abs_floor.
// The interval is pre-split into `panels` equal pieces so narrow features
// (clamp kinks, localized overlaps) are seen before adaptivity starts.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol, double abs_floor = 0.0,
                          int panels = 32, int max_depth = 48) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / panels;
  // First pass: crude estimate to set the absolute tolerance scale.
  double crude = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double x0 = a + p * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
    crude += (h / 6.0) * (f(x0) + 4.0 * f(xm) + f(x1));
  }
  double tol = rel_tol * std::abs(crude) + abs_floor;
  if (tol == 0.0) tol = abs_floor > 0 ? abs_floor : 1e-300;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double x0 = a + p * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
    const double f0 = f(x0), f1 = f(x1), fm = f(xm);
    const double whole = detail::simpson(x0, f0, x1, f1, fm);
    total += detail::adaptive_simpson_rec(f, x0, f0, x1, f1, xm, fm, whole, tol / panels, max_depth);
  }
  return total;
}

}  // namespace modlat
