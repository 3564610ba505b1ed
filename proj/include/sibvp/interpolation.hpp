#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "sibvp/errors.hpp"
#include "sibvp/ivp.hpp"

namespace sibvp {

/// Cubic Hermite on one segment with a Fritsch-Carlson style slope limiter:
/// when the endpoint slopes are too large relative to the secant they are
/// scaled back so the interpolant cannot overshoot a monotone data pair.
inline double hermite_eval(double x0, double y0, double m0, double x1,
                           double y1, double m1, double x) {
  const double hx = x1 - x0;
  if (hx == 0.0) return y0;
  const double d = (y1 - y0) / hx;
  if (d == 0.0) {
    m0 = 0.0;
    m1 = 0.0;
  } else {
    const double alpha = m0 / d;
    const double beta = m1 / d;
    if (alpha < 0.0) m0 = 0.0;
    if (beta < 0.0) m1 = 0.0;
    const double r2 = alpha * alpha + beta * beta;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      m0 = tau * alpha * d;
      m1 = tau * beta * d;
    }
  }
  const double t = (x - x0) / hx;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * hx * m0 +
         (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * hx * m1;
}

/// u at a requested x on a stored trace, interpolating on (x, u) pairs with
/// the knot slopes.  The trace must be full and x within its span.
inline double trace_eval_u(const IvpTrace& trace, double x) {
  if (!trace.full || trace.knots.size() < 2) {
    throw SolverError("trace interpolation needs a stored trace");
  }
  const auto& ks = trace.knots;
  if (x < ks.front().x || x > ks.back().x) {
    throw SolverError("interpolation point outside the trace span");
  }
  auto it = std::lower_bound(ks.begin(), ks.end(), x,
                             [](const Knot& k, double v) { return k.x < v; });
  if (it == ks.begin()) return it->u;
  const Knot& k1 = *it;
  const Knot& k0 = *(it - 1);
  const double m0 = std::isfinite(k0.u_prime) ? k0.u_prime : 0.0;
  const double m1 = std::isfinite(k1.u_prime) ? k1.u_prime : 0.0;
  return hermite_eval(k0.x, k0.u, m0, k1.x, k1.u, m1, x);
}

/// The knot of a stored trace closest in x to the request; reproduces the
/// nearest-knot reporting convention for stations inside the inverse phase.
inline const Knot& nearest_knot(const IvpTrace& trace, double x) {
  if (!trace.full || trace.knots.empty()) {
    throw SolverError("nearest-knot lookup needs a stored trace");
  }
  const auto& ks = trace.knots;
  auto it = std::lower_bound(ks.begin(), ks.end(), x,
                             [](const Knot& k, double v) { return k.x < v; });
  if (it == ks.end()) return ks.back();
  if (it == ks.begin()) return ks.front();
  const auto prev = it - 1;
  return (x - prev->x) <= (it->x - x) ? *prev : *it;
}

}  // namespace sibvp
