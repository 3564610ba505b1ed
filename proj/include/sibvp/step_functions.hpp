#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "sibvp/dual.hpp"
#include "sibvp/errors.hpp"

namespace sibvp {

/// Arguments of the one-step propagators.  U(s) solves
///   u'' = (coef_lin*s + coef_const) * u,   u(0) = value0, u'(0) = slope0,
/// and V(s) solves the same coefficient equation for v' instead of v:
///   v'' = (coef_lin*s + coef_const) * v',  v(0) = value0, v'(0) = slope0.
template <Scalar S>
struct StepArgs {
  S coef_lin;    // linear-in-s part of the ODE coefficient
  S coef_const;  // constant part of the ODE coefficient
  S slope0;      // initial first derivative
  S value0;      // initial value
  double s = 0.0;  // step argument, |s| <= 1
};

template <Scalar S>
struct StepResult {
  S value;            // U(s) or V(s)
  S deriv_s;          // dU/ds or dV/ds at s
  int terms_used = 0;
  double tail_bound = 0.0;  // analytic bound on the next series increment
};

/// Partial derivatives of a step function obtained by dual seeding,
/// one parameter at a time.  d_value and d_deriv follow the parameter
/// order (coef_lin, coef_const, slope0, value0).
struct StepGradient {
  double value = 0.0;
  double deriv_s = 0.0;
  std::array<double, 4> d_value{};
  std::array<double, 4> d_deriv{};
  int terms_used = 0;
};

namespace detail {

inline constexpr int kMaxStepTerms = 50;
// Each U increment gains degree 3 (multiply by a linear polynomial, then
// integrate twice); the final derivative integration adds 3 more.
inline constexpr int kMaxPolyCoeffs = 3 * kMaxStepTerms + 8;

// Dense polynomial in s with scalar coefficients, ascending powers.
// Capacity is fixed so that step evaluation never allocates.
template <Scalar S>
struct StepPoly {
  std::array<S, kMaxPolyCoeffs> c;
  int n = 0;

  void assign_linear(const S& c0, const S& c1) {
    c[0] = c0;
    c[1] = c1;
    n = 2;
  }

  S eval(double s) const {
    S acc = c[n - 1];
    for (int k = n - 2; k >= 0; --k) acc = acc * s + c[k];
    return acc;
  }
};

// t <- double integral from 0 of (a*eta + b) * t(eta).  With p = (a*s + b)*t,
// the result coefficients are q_{k+2} = p_k / ((k+1)(k+2)).  Writing from the
// top index down keeps the update in place.
template <Scalar S>
void integrate_twice_weighted(StepPoly<S>& t, const S& a, const S& b) {
  const int d = t.n;
  for (int k = d; k >= 0; --k) {
    S num = (k < d) ? b * t.c[k] : S(0.0);
    if (k >= 1) num += a * t.c[k - 1];
    t.c[k + 2] = num * (1.0 / ((k + 1.0) * (k + 2.0)));
  }
  t.c[0] = S(0.0);
  t.c[1] = S(0.0);
  t.n = d + 3;
}

// t <- single integral from 0 of (a*eta + b) * t(eta).
template <Scalar S>
void integrate_once_weighted(StepPoly<S>& t, const S& a, const S& b) {
  const int d = t.n;
  for (int k = d; k >= 0; --k) {
    S num = (k < d) ? b * t.c[k] : S(0.0);
    if (k >= 1) num += a * t.c[k - 1];
    t.c[k + 1] = num * (1.0 / (k + 1.0));
  }
  t.c[0] = S(0.0);
  t.n = d + 2;
}

template <Scalar S>
void validate_step_args(const StepArgs<S>& args, double tol) {
  if (!(tol > 0.0)) throw SolverError("step tolerance must be positive");
  if (!(std::abs(args.s) <= 1.0)) {
    throw InvalidStepError("step argument exceeds 1 in magnitude: s = " +
                           std::to_string(args.s));
  }
  if (!std::isfinite(args.s) || !std::isfinite(real_part(args.coef_lin)) ||
      !std::isfinite(real_part(args.coef_const)) ||
      !std::isfinite(real_part(args.slope0)) ||
      !std::isfinite(real_part(args.value0))) {
    throw InvalidStepError("step arguments must be finite");
  }
}

}  // namespace detail

/// Evaluates U by successive approximations.  Each iterate is an exact
/// polynomial in s (the nested integrals are coefficient shifts), so the
/// only error is the series truncation, controlled by the increment bound
///   ||U_{n+1} - U_n|| <= (||A s|| + ||B||)^n (||C s|| + ||D||) |s|^{2n} / (2n)!.
/// Truncation stops at the smallest n with bound <= tol.  deriv_s comes
/// from integrating (A*eta + B) * U_n once and adding slope0.
///
/// forced_terms > 0 pins the truncation depth (used by tests that compare
/// real and dual evaluations at identical depth).
template <Scalar S>
StepResult<S> u_step(const StepArgs<S>& args, double tol, int forced_terms = 0) {
  detail::validate_step_args(args, tol);
  const double s = args.s;
  if (s == 0.0) return {args.value0, args.slope0, 0, 0.0};

  const double coef_mag =
      step_norm(args.coef_lin) * std::abs(s) + step_norm(args.coef_const);
  const double init_mag =
      step_norm(args.slope0) * std::abs(s) + step_norm(args.value0);
  const bool check_bound = forced_terms <= 0;

  detail::StepPoly<S> term;  // increment U_{n+1} - U_n
  detail::StepPoly<S> sum;   // running iterate U_n
  term.assign_linear(args.value0, args.slope0);
  sum = term;

  double bound = coef_mag * init_mag * s * s / 2.0;  // n = 1
  int n = 1;
  const int cap = forced_terms > 0
                      ? std::min(forced_terms, detail::kMaxStepTerms)
                      : detail::kMaxStepTerms;
  while (n < cap) {
    if (check_bound && bound <= tol) break;
    detail::integrate_twice_weighted(term, args.coef_lin, args.coef_const);
    for (int k = 0; k < term.n; ++k) {
      if (k < sum.n)
        sum.c[k] += term.c[k];
      else
        sum.c[k] = term.c[k];
    }
    sum.n = term.n;
    ++n;
    bound *= coef_mag * s * s / ((2.0 * n - 1.0) * (2.0 * n));
  }
  if (check_bound && bound > tol) {
    throw NonConvergenceError("u_step truncation bound " + std::to_string(bound) +
                              " above tolerance at term cap");
  }

  StepResult<S> out;
  out.value = sum.eval(s);
  detail::integrate_once_weighted(sum, args.coef_lin, args.coef_const);
  sum.c[0] += args.slope0;
  out.deriv_s = sum.eval(s);
  out.terms_used = n;
  out.tail_bound = bound;
  return out;
}

/// Evaluates V by the first-derivative recurrence.  The increments of V'
/// are again exact polynomials; truncation uses
///   ||V_{n+1} - V_n|| <= (||A s|| + ||B||)^n ||C|| |s|^{n+1} / n!.
template <Scalar S>
StepResult<S> v_step(const StepArgs<S>& args, double tol, int forced_terms = 0) {
  detail::validate_step_args(args, tol);
  const double s = args.s;
  if (s == 0.0) return {args.value0, args.slope0, 0, 0.0};

  const double coef_mag =
      step_norm(args.coef_lin) * std::abs(s) + step_norm(args.coef_const);
  const double slope_mag = step_norm(args.slope0);
  const bool check_bound = forced_terms <= 0;

  detail::StepPoly<S> term;   // increment V'_{n+1} - V'_n
  detail::StepPoly<S> deriv;  // running iterate V'_n
  term.c[0] = args.slope0;
  term.n = 1;
  deriv = term;

  double bound = coef_mag * slope_mag * s * s / 1.0;  // n = 1: M |C| |s|^2 / 1!
  int n = 1;
  const int cap = forced_terms > 0
                      ? std::min(forced_terms, detail::kMaxStepTerms)
                      : detail::kMaxStepTerms;
  while (n < cap) {
    if (check_bound && bound <= tol) break;
    detail::integrate_once_weighted(term, args.coef_lin, args.coef_const);
    for (int k = 0; k < term.n; ++k) {
      if (k < deriv.n)
        deriv.c[k] += term.c[k];
      else
        deriv.c[k] = term.c[k];
    }
    deriv.n = term.n;
    ++n;
    bound *= coef_mag * std::abs(s) / n;
  }
  if (check_bound && bound > tol) {
    throw NonConvergenceError("v_step truncation bound " + std::to_string(bound) +
                              " above tolerance at term cap");
  }

  StepResult<S> out;
  out.deriv_s = deriv.eval(s);
  // V_n = integral of V'_n from 0 plus value0.
  for (int k = deriv.n - 1; k >= 0; --k) deriv.c[k + 1] = deriv.c[k] / (k + 1.0);
  deriv.c[0] = args.value0;
  deriv.n += 1;
  out.value = deriv.eval(s);
  out.terms_used = n;
  out.tail_bound = bound;
  return out;
}

/// Default step tolerance used by the marchers, scaled to the local state.
inline double default_step_tol(double slope_mag, double value_mag, double s) {
  return 1e-18 * (1.0 + value_mag + slope_mag * std::abs(s));
}

/// Truncation tolerance for V evaluations.  Deep in the inverse phase the
/// slope is many orders below the value, and a value-scaled tolerance lets
/// the series stop before the slope lane has converged; the slope then
/// stalls and the quadratic coefficient feedback blows the march up.
/// Scaling by |slope0 * s| keeps the slope resolved to relative precision.
inline double v_step_tol(double slope_mag, double s) {
  return 1e-18 * slope_mag * std::abs(s) + 1e-300;
}

namespace detail {

template <StepResult<Dual2> (*Step)(const StepArgs<Dual2>&, double, int)>
StepGradient step_gradient(const StepArgs<double>& args, double tol,
                           StepResult<double> (*step_real)(const StepArgs<double>&,
                                                           double, int)) {
  StepGradient g;
  const StepResult<double> base = step_real(args, tol, 0);
  g.value = base.value;
  g.deriv_s = base.deriv_s;
  g.terms_used = base.terms_used;
  for (int i = 0; i < 4; ++i) {
    StepArgs<Dual2> seeded{Dual2(args.coef_lin, i == 0 ? 1.0 : 0.0),
                           Dual2(args.coef_const, i == 1 ? 1.0 : 0.0),
                           Dual2(args.slope0, i == 2 ? 1.0 : 0.0),
                           Dual2(args.value0, i == 3 ? 1.0 : 0.0), args.s};
    const StepResult<Dual2> r = Step(seeded, tol, 0);
    g.d_value[i] = r.value.der;
    g.d_deriv[i] = r.deriv_s.der;
  }
  return g;
}

}  // namespace detail

/// Four extra dual-seeded evaluations give the partials of U with respect
/// to each parameter; the real evaluation supplies value and deriv_s.
inline StepGradient u_step_grad(const StepArgs<double>& args, double tol) {
  return detail::step_gradient<&u_step<Dual2>>(args, tol, &u_step<double>);
}

inline StepGradient v_step_grad(const StepArgs<double>& args, double tol) {
  return detail::step_gradient<&v_step<Dual2>>(args, tol, &v_step<double>);
}

}  // namespace sibvp
