#pragma once

#include <functional>
#include <utility>

namespace sibvp_test {

// Independent checks for the library: a Runge-Kutta integrator for the step
// ODEs, a self-contained adaptive quadrature, and the closed-form inverse
// solution of the autonomous problem class.  Nothing here calls into the
// code paths under test.

struct RkResult {
  double value;
  double deriv;
};

/// Integrates y'' = (a*t + b) * y, y(0) = d, y'(0) = c from 0 to s with an
/// adaptive Cash-Karp 4(5) pair at the given local tolerance.
RkResult rk_second_order_linear(double a, double b, double c, double d,
                                double s, double tol);

/// Adaptive Simpson, independent of the library's quadrature.
double quad(const std::function<double(double)>& f, double a, double b,
            double tol);

/// x(u) = a + int_0^u d_eta / sqrt(slope^2 + 2*(cosh(lambda*eta) - 1)) for
/// the hyperbolic-sine problem started at u(a) = 0 with slope u'(a).
double troesch_x_of_u(double lambda, double slope, double u);

/// dx/du of the closed form above.
double troesch_xprime_of_u(double lambda, double slope, double u);

/// Inverts the closed form: u with x(u) = x, by safeguarded Newton.
double troesch_u_of_x(double lambda, double slope, double x, double u_hint);

/// Central finite difference with step rel*max(1,|x|).
double central_diff(const std::function<double(double)>& f, double x,
                    double rel = 1e-6);

}  // namespace sibvp_test
