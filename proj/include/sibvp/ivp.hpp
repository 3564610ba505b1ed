#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sibvp/dual.hpp"
#include "sibvp/errors.hpp"
#include "sibvp/problem.hpp"
#include "sibvp/step_functions.hpp"

namespace sibvp {

enum class Regime { Straight, Inverse };

enum class StopReason {
  ReachedXEnd,      // landed on the requested right end
  ReachedUCap,      // blow-up guard tripped
  KnotBudget,       // knot budget exhausted
  NumericOverflow,  // coefficients or state left the representable range
};

/// One mesh quadruple.  In the straight regime x advances by the step and
/// u_prime is primary; in the inverse regime u advances and x_prime is
/// primary.  Whenever both slopes are finite, u_prime * x_prime = 1.
template <Scalar S>
struct KnotT {
  S u_prime;
  S x_prime;
  S u;
  S x;
  Regime regime = Regime::Straight;
};
using Knot = KnotT<double>;

/// Value of the marched solution at a requested interior station.
template <Scalar S>
struct StationSampleT {
  double x_requested = 0.0;
  S x;
  S u;
  S u_prime;
};
using StationSample = StationSampleT<double>;

struct StopRule {
  double x_end = 1.0;
  double u_cap = std::numeric_limits<double>::infinity();
  std::uint64_t knot_budget = 0;  // 0 selects the 1e8/h default guard
  std::vector<double> stations;   // ascending x values to sample
  bool store_trace = true;        // keep every knot, not just the endpoints
};

template <Scalar S>
struct IvpTraceT {
  std::vector<KnotT<S>> knots;  // all knots, or {first, last} when trimmed
  std::vector<StationSampleT<S>> stations;
  double h = 0.0;
  StopReason stop_reason = StopReason::ReachedXEnd;
  std::uint64_t knot_count = 0;  // total generated, including the initial knot
  std::uint64_t first_inverse = npos;  // index of the first inverse knot
  bool full = true;

  KnotT<S> front_knot;
  KnotT<S> back_knot;

  static constexpr std::uint64_t npos = ~std::uint64_t{0};
};
using IvpTrace = IvpTraceT<double>;
using IvpTraceDual = IvpTraceT<Dual2>;

/// Step coefficient maps.  The straight map feeds U with the local
/// linearization of N along the current trajectory direction; the inverse
/// map is its pull-back to the inverse function x(u).
template <Scalar S>
struct StepCoeffs {
  S lin;
  S cst;
};

template <Scalar S>
StepCoeffs<S> straight_coeffs(const ProblemDef& p, const S& u, const S& x,
                              const S& u_prime) {
  const S nu = p.eval_n_u(u, x);
  const S nx = p.eval_n_x(u, x);
  return {nu * u_prime + nx, p.eval_n(u, x)};
}

template <Scalar S>
StepCoeffs<S> inverse_coeffs(const ProblemDef& p, const S& u, const S& x,
                             const S& x_prime) {
  const S n = p.eval_n(u, x);
  const S nu = p.eval_n_u(u, x);
  const S nx = p.eval_n_x(u, x);
  const S xp2 = x_prime * x_prime;
  const S nscript = n * u;  // N(u, x) * u
  return {((nu + nx * x_prime) * u + n) * (-1.0) * xp2 +
              2.0 * (nscript * nscript) * (xp2 * xp2),
          (-1.0) * nscript * xp2};
}

namespace detail {

template <Scalar S>
S safe_recip(const S& v) {
  if (real_part(v) == 0.0) return S(std::numeric_limits<double>::infinity());
  return S(1.0) / v;
}

inline double step_tol_for(double slope_mag, double value_mag, double s) {
  return default_step_tol(slope_mag, value_mag, s);
}

// Finds s in (0, h_star] (or [h_star, 0)) with V(s) landing on target.
// Plain bisection: the bracket is guaranteed by the caller, and 1e-14
// absolute accuracy in s is required.
template <Scalar S>
double solve_inverse_landing(const StepArgs<S>& base, double tol, double h_star,
                             double target) {
  double lo = 0.0, hi = h_star;
  for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    StepArgs<S> a = base;
    a.s = mid;
    const double xm = real_part(v_step(a, tol).value);
    if (xm < target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;  // first point at or past the target
}

}  // namespace detail

/// Marches the switching recurrence from (u0, du0) at x = a with fixed step
/// h until the stop rule fires.  Straight steps advance x by h (the final
/// one is shortened to land exactly on x_end); inverse steps advance u by
/// sign(x')*h and land on x_end by solving V(s) = x_end for the last step.
/// Interior stations are sampled from the local step polynomial without
/// perturbing the knot sequence.
template <Scalar S>
IvpTraceT<S> si_march_generic(const ProblemDef& p, S u0, S du0, double h,
                              const StopRule& stop) {
  if (!(h > 0.0 && h < 1.0)) throw SolverError("march step must lie in (0, 1)");
  if (!std::isfinite(real_part(u0)) || !std::isfinite(real_part(du0))) {
    throw SolverError("march initial data must be finite");
  }

  IvpTraceT<S> trace;
  trace.h = h;
  trace.full = stop.store_trace;
  const std::uint64_t budget =
      stop.knot_budget > 0 ? stop.knot_budget
                           : static_cast<std::uint64_t>(1e8 / h);

  KnotT<S> k;
  k.u = u0;
  k.u_prime = du0;
  k.x = S(p.a);
  k.x_prime = detail::safe_recip(du0);
  k.regime = std::abs(real_part(du0)) <= 1.0 ? Regime::Straight : Regime::Inverse;

  trace.front_knot = k;
  trace.back_knot = k;
  trace.knot_count = 1;
  if (stop.store_trace) trace.knots.push_back(k);
  if (k.regime == Regime::Inverse) trace.first_inverse = 0;

  std::size_t next_station = 0;
  while (next_station < stop.stations.size() &&
         stop.stations[next_station] <= real_part(k.x)) {
    ++next_station;  // stations at or before the start are not sampled
  }

  // Within a straight run x is computed as base + i*h, not accumulated, so
  // the knot positions stay on the exact grid.
  S run_base_x = k.x;
  std::uint64_t run_steps = 0;
  bool terminal = false;

  while (!terminal) {
    if (real_part(k.x) >= stop.x_end) {
      trace.stop_reason = StopReason::ReachedXEnd;
      break;
    }
    if (real_part(k.u) >= stop.u_cap) {
      trace.stop_reason = StopReason::ReachedUCap;
      break;
    }
    if (trace.knot_count >= budget) {
      trace.stop_reason = StopReason::KnotBudget;
      break;
    }

    const bool straight = std::abs(real_part(k.u_prime)) <= 1.0;
    KnotT<S> next;
    try {
      if (straight) {
        if (k.regime == Regime::Inverse || trace.knot_count == 1) {
          run_base_x = k.x;
          run_steps = 0;
        }
        const StepCoeffs<S> c = straight_coeffs(p, k.u, k.x, k.u_prime);
        if (!std::isfinite(real_part(c.lin)) || !std::isfinite(real_part(c.cst))) {
          trace.stop_reason = StopReason::NumericOverflow;
          break;
        }
        const bool clamp = real_part(k.x) + h >= stop.x_end;
        const double s = clamp ? stop.x_end - real_part(k.x) : h;
        StepArgs<S> args{c.lin, c.cst, k.u_prime, k.u, s};
        const double tol = detail::step_tol_for(step_norm(k.u_prime),
                                                step_norm(k.u), s);
        // Sampling at a fixed x makes the local step length depend on the
        // (dual) position of the preceding knot; chain that through.
        const double ds_der = -deriv_part(k.x);
        while (next_station < stop.stations.size() &&
               stop.stations[next_station] <= real_part(k.x) + s) {
          StepArgs<S> sa = args;
          sa.s = stop.stations[next_station] - real_part(k.x);
          const StepResult<S> sr = u_step(sa, tol);
          const double upp =
              (real_part(c.lin) * sa.s + real_part(c.cst)) * real_part(sr.value);
          trace.stations.push_back(
              {stop.stations[next_station], S(stop.stations[next_station]),
               with_der(sr.value,
                        deriv_part(sr.value) + real_part(sr.deriv_s) * ds_der),
               with_der(sr.deriv_s, deriv_part(sr.deriv_s) + upp * ds_der)});
          ++next_station;
        }
        const StepResult<S> r = u_step(args, tol);
        ++run_steps;
        if (clamp) {
          const double upp =
              (real_part(c.lin) * s + real_part(c.cst)) * real_part(r.value);
          next.u = with_der(r.value,
                            deriv_part(r.value) + real_part(r.deriv_s) * ds_der);
          next.u_prime =
              with_der(r.deriv_s, deriv_part(r.deriv_s) + upp * ds_der);
          next.x = S(stop.x_end);
          terminal = true;
        } else {
          next.u = r.value;
          next.u_prime = r.deriv_s;
          next.x = run_base_x + S(static_cast<double>(run_steps) * h);
        }
        next.x_prime = detail::safe_recip(next.u_prime);
        next.regime = Regime::Straight;
      } else {
        const StepCoeffs<S> c = inverse_coeffs(p, k.u, k.x, k.x_prime);
        if (!std::isfinite(real_part(c.lin)) || !std::isfinite(real_part(c.cst))) {
          trace.stop_reason = StopReason::NumericOverflow;
          break;
        }
        const double h_star = real_part(k.x_prime) >= 0.0 ? h : -h;
        StepArgs<S> args{c.lin, c.cst, k.x_prime, k.x, h_star};
        const double tol = v_step_tol(step_norm(k.x_prime), h_star);
        StepResult<S> r = v_step(args, tol);
        double advance = h_star;
        bool landed = false;
        if (real_part(r.value) >= stop.x_end) {
          advance = detail::solve_inverse_landing(args, tol, h_star, stop.x_end);
          args.s = advance;
          r = v_step(args, tol);
          terminal = true;
          landed = true;
        }
        while (next_station < stop.stations.size() &&
               stop.stations[next_station] <= real_part(r.value)) {
          const double s_st = detail::solve_inverse_landing(
              args, tol, advance, stop.stations[next_station]);
          StepArgs<S> sa = args;
          sa.s = s_st;
          const StepResult<S> sr = v_step(sa, tol);
          // s_st solves real(V(s)) = station; the implicit dependence of
          // s_st on the dual state enters through dV/ds.
          const double vps = real_part(sr.deriv_s);
          const double ds_der = vps != 0.0 ? -deriv_part(sr.value) / vps : 0.0;
          const S u_at = with_der(k.u + S(s_st), deriv_part(k.u) + ds_der);
          const double vpp = (real_part(c.lin) * s_st + real_part(c.cst)) * vps;
          const S xp_at =
              with_der(sr.deriv_s, deriv_part(sr.deriv_s) + vpp * ds_der);
          trace.stations.push_back({stop.stations[next_station],
                                    S(stop.stations[next_station]), u_at,
                                    detail::safe_recip(xp_at)});
          ++next_station;
        }
        if (landed) {
          const double vps = real_part(r.deriv_s);
          const double ds_der = vps != 0.0 ? -deriv_part(r.value) / vps : 0.0;
          const double vpp = (real_part(c.lin) * advance + real_part(c.cst)) * vps;
          next.x = with_der(r.value, deriv_part(r.value) + vps * ds_der);
          next.x_prime =
              with_der(r.deriv_s, deriv_part(r.deriv_s) + vpp * ds_der);
          next.u = with_der(k.u + S(advance), deriv_part(k.u) + ds_der);
        } else {
          next.x = r.value;
          next.x_prime = r.deriv_s;
          next.u = k.u + S(advance);
        }
        next.u_prime = detail::safe_recip(next.x_prime);
        next.regime = Regime::Inverse;
      }
    } catch (const RangeError&) {
      trace.stop_reason = StopReason::NumericOverflow;
      break;
    }

    if (!std::isfinite(real_part(next.u)) || !std::isfinite(real_part(next.x))) {
      trace.stop_reason = StopReason::NumericOverflow;
      break;
    }

    if (next.regime == Regime::Inverse &&
        trace.first_inverse == IvpTraceT<S>::npos) {
      trace.first_inverse = trace.knot_count;
    }
    k = next;
    trace.back_knot = k;
    ++trace.knot_count;
    if (stop.store_trace) trace.knots.push_back(k);
    if (terminal) trace.stop_reason = StopReason::ReachedXEnd;
  }

  if (!stop.store_trace) {
    trace.knots.clear();
    trace.knots.push_back(trace.front_knot);
    trace.knots.push_back(trace.back_knot);
  }
  return trace;
}

inline IvpTrace si_march(const ProblemDef& p, double u0, double du0, double h,
                         const StopRule& stop) {
  return si_march_generic<double>(p, u0, du0, h, stop);
}

/// Same recurrence over Dual2; seeding du0.der = 1 propagates the
/// sensitivity of every knot to the initial slope.
inline IvpTraceDual si_march_dual(const ProblemDef& p, Dual2 u0, Dual2 du0,
                                  double h, const StopRule& stop) {
  return si_march_generic<Dual2>(p, u0, du0, h, stop);
}

}  // namespace sibvp
