#include "sibvp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "sibvp/errors.hpp"
#include "sibvp/quadrature.hpp"

namespace sibvp {

namespace {

// Bounds are stated for coefficients independent of x; evaluate N and the
// energy integral along x = a.
double n_of(const ProblemDef& p, double u) { return p.n(u, p.a); }
double n_u_of(const ProblemDef& p, double u) { return p.n_u(u, p.a); }
double n_uu_of(const ProblemDef& p, double u) { return p.eval_n_uu(u, p.a); }

// Phi(u) = int_{u_left}^{u} N(xi) xi dxi, closed form when available.
double phi_of(const ProblemDef& p, double u) {
  if (p.phi) return p.phi(u);
  return integrate_adaptive([&](double xi) { return n_of(p, xi) * xi; },
                            p.u_left, u, 1e-13);
}

double phi_diff(const ProblemDef& p, double lo, double hi) {
  if (p.phi) return p.phi(hi) - p.phi(lo);
  return integrate_adaptive([&](double xi) { return n_of(p, xi) * xi; }, lo,
                            hi, 1e-13);
}

}  // namespace

double compute_S_star(const ProblemDef& p, double u_left, double du_left,
                      double b_minus_a) {
  auto integrand = [&](double eta) {
    return 1.0 / std::sqrt(du_left * du_left + 2.0 * phi_of(p, eta));
  };
  double total = 0.0;
  double lo = u_left;
  double width = 1.0;
  double prev_block = std::numeric_limits<double>::infinity();
  bool cut = false;
  for (int block = 0; block < 64; ++block) {
    const double hi = lo + width;
    const double contribution = integrate_adaptive(integrand, lo, hi, 1e-12);
    total += contribution;
    if (integrand(hi) < 1e-16) {
      cut = true;
      break;
    }
    if (total > b_minus_a) {
      // Already past the clamp; the min below settles the result.
      cut = true;
      break;
    }
    // Doubling blocks of a convergent tail must decay geometrically; a
    // log-divergent integrand yields near-constant contributions.
    if (block >= 8 && contribution > 0.95 * prev_block) {
      throw DivergentIntegralError(
          "energy integral tail does not decay; S* undefined");
    }
    prev_block = contribution;
    lo = hi;
    width *= 2.0;
  }
  if (!cut) {
    throw DivergentIntegralError(
        "energy integral tail did not decay within the block budget");
  }
  return std::min(b_minus_a, total);
}

double compute_M_star(const ProblemDef& p, double epsilon, double du_left) {
  const double one = 1.0 + 3.0 * epsilon;
  const double target = 0.5 * (one * one - du_left * du_left);
  if (target < 0.0) {
    throw NoRootError("M* target below Phi(u_left); no root");
  }
  if (target == 0.0) return p.u_left;
  if (p.phi_inverse) return p.phi_inverse(target);

  double lo = p.u_left;
  double hi = p.u_left + 1.0;
  int grow = 0;
  while (phi_of(p, hi) < target) {
    lo = hi;
    hi = p.u_left + (hi - p.u_left) * 2.0;
    if (++grow > 200) throw NoRootError("Phi never reaches the M* target");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (phi_of(p, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

double golden_max(const std::function<double(double)>& f, double lo,
                  double hi) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    } else {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    }
  }
  return std::max(fc, fd);
}

}  // namespace

LConstants compute_L(const ProblemDef& p, double M_star, double epsilon) {
  const double radius = M_star + epsilon;
  constexpr int kGrid = 4096;
  LConstants out;
  const std::function<double(double)> fs[3] = {
      [&](double u) { return std::abs(n_of(p, u)); },
      [&](double u) { return std::abs(n_u_of(p, u)); },
      [&](double u) { return std::abs(n_uu_of(p, u)); }};
  double* slots[3] = {&out.L0, &out.L1, &out.L2};
  for (int which = 0; which < 3; ++which) {
    double best = 0.0;
    int best_i = 0;
    for (int i = 0; i <= kGrid; ++i) {
      const double u = -radius + 2.0 * radius * i / kGrid;
      const double v = fs[which](u);
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    const double cell = 2.0 * radius / kGrid;
    const double lo = std::max(-radius, -radius + cell * (best_i - 1));
    const double hi = std::min(radius, -radius + cell * (best_i + 1));
    *slots[which] = std::max(best, golden_max(fs[which], lo, hi));
  }
  return out;
}

BoundConstants compute_bound_constants(const ProblemDef& p, double epsilon,
                                       double du_left) {
  if (!(epsilon > 0.0 && epsilon < 1.0 / 6.0)) {
    throw PreconditionError("epsilon must lie strictly inside (0, 1/6)");
  }
  BoundConstants c;
  c.epsilon = epsilon;
  c.u_left = p.u_left;
  c.du_left = du_left;
  c.S_star = compute_S_star(p, p.u_left, du_left, p.b - p.a);
  c.M_star = compute_M_star(p, epsilon, du_left);
  const LConstants l = compute_L(p, c.M_star, epsilon);
  c.L0 = l.L0;
  c.L1 = l.L1;
  c.L2 = l.L2;
  return c;
}

double compute_P_star(double h, const BoundConstants& c) {
  if (!(h > 0.0 && h < 1.0)) throw PreconditionError("P* needs h in (0, 1)");
  const double e_star = std::max(1.0, c.L0 + c.L1 * h);
  const double growth = c.M_star * (c.L1 + h * (c.L1 + c.L2));
  const double pre = 0.5 * h * c.M_star * (c.L2 + c.L1 * c.L0 * c.M_star);
  const double num = std::exp(c.S_star * (e_star + growth)) - 1.0;
  const double den = (1.0 + h * growth) * std::exp(h * e_star) - 1.0;
  return pre * std::exp(h * e_star) * num / den;
}

double BoundConstants::P_star(double h) const { return compute_P_star(h, *this); }

bool BoundConstants::h_restriction_first(double h) const {
  const double p = P_star(h);
  return h < 1.0 && h < std::sqrt(epsilon / p) &&
         h < epsilon / (L0 * M_star);
}

bool BoundConstants::h_restriction_second(double h, double mu) const {
  const double p = P_star(h);
  return h < (1.0 - 2.0 * epsilon) / p && h < 1.0 / (3.0 * mu);
}

MuEstimate compute_mu(const ProblemDef& p, double u_istar, double u_max) {
  if (!(u_max > u_istar)) {
    return {n_of(p, u_istar) * u_istar, false};
  }
  constexpr int kGrid = 8192;
  MuEstimate est;
  double prev_tail = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double u = u_istar + (u_max - u_istar) * i / kGrid;
    const double ratio =
        n_of(p, u) * u / (1.0 + phi_diff(p, u_istar, u));
    est.value = std::max(est.value, ratio);
    if (i == kGrid - kGrid / 8) prev_tail = ratio;
    if (i == kGrid) est.tail_increasing = ratio > prev_tail;
  }
  return est;
}

InversePhaseBounds inverse_phase_bound(const ProblemDef& p,
                                       const BoundConstants& c, double mu,
                                       const IvpTrace& trace, double h) {
  if (!c.h_restriction_first(h) || !c.h_restriction_second(h, mu)) {
    throw PreconditionError(
        "step restrictions violated; inverse-phase bounds not applicable");
  }
  if (trace.first_inverse == IvpTrace::npos || !trace.full) {
    throw PreconditionError("trace has no stored inverse phase");
  }

  const double eps = c.epsilon;
  const double p_star = c.P_star(h);
  const double one2e = 1.0 - 2.0 * eps;
  const double one6e = 1.0 - 6.0 * eps;
  const double u_istar = trace.knots[trace.first_inverse].u;

  auto nn = [&](double u) { return n_of(p, u) * u; };
  auto nn1 = [&](double u) { return n_u_of(p, u) * u + n_of(p, u); };
  auto nn2 = [&](double u) { return n_uu_of(p, u) * u + 2.0 * n_u_of(p, u); };
  auto int_nn = [&](double lo, double hi) { return phi_diff(p, lo, hi); };

  auto exponent_integrand = [&](double z) {
    const double shifted = one6e + int_nn(u_istar - 2.0 * h, z - 2.0 * h);
    const double tail = one2e * one2e + 2.0 * int_nn(u_istar, z);
    const double nv = nn(z);
    return ((nv + h * nn1(z)) / std::sqrt(shifted) +
            2.0 * h * nv * nv / std::pow(shifted, 1.5)) /
           std::sqrt(tail);
  };
  auto curvature_term = [&](double z) {
    const double shifted = one6e + 2.0 * int_nn(u_istar - h, z - h);
    const double tail = one2e * one2e + 2.0 * int_nn(u_istar, z);
    const double nv = nn(z);
    return (nn2(z) / shifted + 6.0 * nn1(z) * nv / (shifted * shifted) +
            8.0 * nv * nv * nv / (shifted * shifted * shifted)) /
           std::sqrt(tail);
  };

  static const GaussRule gauss32(32);
  static const GaussRule gauss8(8);

  InversePhaseBounds out;
  out.u_istar = u_istar;
  const double head = p_star * h * h /
                      (1.0 - p_star * h * h - c.L0 * c.M_star * h);
  const double slope_seed = (c.L0 * c.M_star / (one2e * one2e) + 1.0) *
                            p_star / one2e;

  double exp_arg = 0.0;   // 2 * int g
  double t_single = 0.0;  // int T
  double t_double = 0.0;  // int int T
  double u_prev = u_istar;
  for (std::uint64_t i = trace.first_inverse + 1; i < trace.knot_count; ++i) {
    const double u_i = trace.knots[i].u;
    exp_arg += 2.0 * gauss32.apply(exponent_integrand, u_prev, u_i);
    const double t_base = t_single;
    // inner cumulative of T evaluated at the outer nodes
    t_double += gauss32.apply(
        [&](double eta) {
          return t_base + gauss8.apply(curvature_term, u_prev, eta);
        },
        u_prev, u_i);
    t_single += gauss32.apply(curvature_term, u_prev, u_i);
    const double e_i = std::exp(exp_arg);
    out.u.push_back(u_i);
    out.x_bound.push_back(head + e_i *
                                     (slope_seed * (u_i - u_istar) +
                                      0.5 * t_double) *
                                     h * h);
    out.xp_bound.push_back(e_i * (slope_seed + 0.5 * t_single) * h * h);
    u_prev = u_i;
  }
  return out;
}

}  // namespace sibvp
