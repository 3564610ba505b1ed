#pragma once

#include <functional>
#include <string>

#include "sibvp/dual.hpp"

namespace sibvp {

/// Two-point problem u'' = N(u, x) * u on [a, b] with u(a) = u_left,
/// u(b) = u_right.  The coefficient partials n_u and n_x feed the step
/// coefficient maps; the second partials are needed whenever step
/// coefficients are differentiated with respect to mesh unknowns (Newton
/// sweeps, slope sensitivities).  Missing second partials fall back to
/// central differences of the first ones.
struct ProblemDef {
  using Fn = std::function<double(double u, double x)>;
  using Fn1 = std::function<double(double u)>;

  Fn n;
  Fn n_u;
  Fn n_x;
  Fn n_uu;  // optional
  Fn n_ux;  // optional
  Fn n_xx;  // optional

  /// Optional closed form of the energy integral int_{u_left}^{u} N(xi)*xi dxi.
  /// Used by the bound constants when present; quadrature otherwise.
  Fn1 phi;
  /// Optional inverse of phi on [u_left, +inf).
  Fn1 phi_inverse;

  double a = 0.0;
  double b = 1.0;
  double u_left = 0.0;
  double u_right = 1.0;

  std::string name;

  double eval_n(double u, double x) const { return n(u, x); }
  double eval_n_u(double u, double x) const { return n_u(u, x); }
  double eval_n_x(double u, double x) const { return n_x ? n_x(u, x) : 0.0; }

  double eval_n_uu(double u, double x) const;
  double eval_n_ux(double u, double x) const;
  double eval_n_xx(double u, double x) const;

  // Dual lifts chain the user-supplied partials, so a march or Newton sweep
  // over Dual2 sees exact derivatives of the coefficient maps.
  Dual2 eval_n(const Dual2& u, const Dual2& x) const {
    return {n(u.val, x.val),
            eval_n_u(u.val, x.val) * u.der + eval_n_x(u.val, x.val) * x.der};
  }
  Dual2 eval_n_u(const Dual2& u, const Dual2& x) const {
    return {n_u(u.val, x.val),
            eval_n_uu(u.val, x.val) * u.der + eval_n_ux(u.val, x.val) * x.der};
  }
  Dual2 eval_n_x(const Dual2& u, const Dual2& x) const {
    if (!n_x) return {0.0, 0.0};
    return {n_x(u.val, x.val),
            eval_n_ux(u.val, x.val) * u.der + eval_n_xx(u.val, x.val) * x.der};
  }
};

/// N(u) = lambda * sinh(lambda*u) / u with the removable singularity at
/// u = 0 filled by its Taylor value lambda^2.
double troesch_n(double lambda, double u);

/// dN/du; odd in u, zero at u = 0.
double troesch_n_u(double lambda, double u);

/// d2N/du2; even in u.
double troesch_n_uu(double lambda, double u);

/// u'' = lambda * sinh(lambda*u) on [0, 1], u(0) = 0, u(1) = 1.
ProblemDef troesch_problem(double lambda);

/// u'' = c * u with constant coefficient; handy for tests and bounds.
ProblemDef constant_coefficient_problem(double c, double a, double b,
                                        double u_left, double u_right);

/// Registry used by the CLI: "troesch" is built in.
ProblemDef make_problem(const std::string& name, double lambda);

}  // namespace sibvp
