#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "modlat/errors.hpp"

namespace modlat {

struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double first_step = 0.0;  // 0: start from max_step (controller adapts down)
  long max_steps = 400000000L;
};

using OdeRhs = std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;
using OdeObserver = std::function<void(double, const Eigen::VectorXcd&)>;

// Embedded Dormand-Prince 5(4) with FSAL and a hard step-size cap.
// Integrates y from t0 to t1 in place. If `samples` is given (strictly
// increasing, within [t0, t1]) the integrator lands on each sample exactly and
// calls `observer` there. Deterministic: no randomness, fixed evaluation order.
inline long integrate_ode(const OdeRhs& rhs, Eigen::VectorXcd& y, double t0, double t1,
                          const OdeOptions& opt, const std::vector<double>* samples = nullptr,
                          const OdeObserver* observer = nullptr) {
  using Eigen::VectorXcd;
  if (t1 <= t0) return 0;

  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

  const Eigen::Index n = y.size();
  VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);

  double t = t0;
  double h = opt.first_step > 0 ? opt.first_step : std::min(opt.max_step, t1 - t0);
  if (!(h > 0)) throw SolverError("integrate_ode: nonpositive initial step");

  std::size_t next_sample = 0;
  if (samples) {
    while (next_sample < samples->size() && (*samples)[next_sample] <= t0) {
      if (observer && (*samples)[next_sample] == t0) (*observer)(t0, y);
      ++next_sample;
    }
  }

  rhs(t, y, k1);
  long steps = 0;
  bool k1_fresh = true;

  while (t < t1) {
    if (++steps > opt.max_steps) throw SolverError("integrate_ode: step limit exceeded");
    double target = t1;
    if (samples && next_sample < samples->size()) target = std::min(target, (*samples)[next_sample]);
    h = std::min({h, opt.max_step, target - t});
    if (t + h == t) throw SolverError("integrate_ode: step size underflow");
    if (!k1_fresh) rhs(t, y, k1);

    for (;;) {
      ytmp = y + h * (a21 * k1);
      rhs(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      rhs(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + h, ytmp, k6);
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + h, ynew, k7);
      yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double err2 = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double e = std::abs(yerr[i]) / sc;
        err2 += e * e;
      }
      const double err = std::sqrt(err2 / static_cast<double>(n));

      if (err <= 1.0 || h <= 16.0 * std::numeric_limits<double>::epsilon() * std::abs(t)) {
        t += h;
        y.swap(ynew);
        k1.swap(k7);  // FSAL
        k1_fresh = true;
        const double grow = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h = h * std::min(5.0, std::max(0.2, grow));
        break;
      }
      if (++steps > opt.max_steps) throw SolverError("integrate_ode: step limit exceeded");
      h = h * std::min(1.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      k1_fresh = false;  // k1 still valid at unchanged t
    }

    if (samples && next_sample < samples->size() && t >= (*samples)[next_sample]) {
      if (observer) (*observer)(t, y);
      ++next_sample;
    }
  }
  return steps;
}

}  // namespace modlat
