#pragma once

#include <vector>

#include "sibvp/ivp.hpp"
#include "sibvp/problem.hpp"

namespace sibvp {

/// A-priori constants of the straight-phase error bound, with the sharper
/// finite-interval and inverse-energy refinements.  epsilon is a free
/// parameter in (0, 1/6).
struct BoundConstants {
  double epsilon = 0.1;
  double S_star = 0.0;
  double M_star = 0.0;
  double L0 = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double u_left = 0.0;
  double du_left = 0.0;

  /// Error-constant P*(h); the straight-phase error bound is h^2 * P*(h).
  double P_star(double h) const;

  /// h < min{1, sqrt(eps/P*), eps/(L0 M*)} — straight phase applicability.
  bool h_restriction_first(double h) const;
  /// h < min{(1-2eps)/P*, 1/(3 mu)} — inverse phase applicability; needs mu.
  bool h_restriction_second(double h, double mu) const;
};

/// Truncated-domain estimate of the supremum defining mu, with the trend of
/// the ratio near the cut recorded (an increasing tail means the reported
/// value understates the supremum).
struct MuEstimate {
  double value = 0.0;
  bool tail_increasing = false;
};

/// min(b - a, integral from u_left to infinity of the reciprocal energy
/// root).  The improper integral is evaluated over geometrically growing
/// blocks with an integrand cutoff at 1e-16.
double compute_S_star(const ProblemDef& p, double u_left, double du_left,
                      double b_minus_a);

/// Solves Phi(u) = ((1+3 eps)^2 - du_left^2) / 2 for u, using the problem's
/// closed-form inverse when present and safeguarded bisection otherwise.
double compute_M_star(const ProblemDef& p, double epsilon, double du_left);

struct LConstants {
  double L0 = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
};

/// Maxima of |N|, |N'|, |N''| over |u| <= M* + eps: dense grid scan with a
/// golden-section polish around the best cell.
LConstants compute_L(const ProblemDef& p, double M_star, double epsilon);

/// All of the above bundled; epsilon must lie strictly inside (0, 1/6).
BoundConstants compute_bound_constants(const ProblemDef& p, double epsilon,
                                       double du_left);

double compute_P_star(double h, const BoundConstants& c);

/// sup over [u_istar, u_max] of N(u)u / (1 + int_{u_istar}^{u} N(xi)xi dxi),
/// sampled on a dense grid.
MuEstimate compute_mu(const ProblemDef& p, double u_istar, double u_max);

struct InversePhaseBounds {
  double u_istar = 0.0;
  std::vector<double> u;         // inverse-phase knot stations
  std::vector<double> x_bound;   // bound on |x_i - x(u_i)|
  std::vector<double> xp_bound;  // bound on |x'_i - x'(u_i)|
};

/// Evaluates the inverse-phase error bounds along the inverse segment of a
/// trace.  Throws PreconditionError when either h restriction fails; the
/// caller reports the bounds as not applicable in that case.
InversePhaseBounds inverse_phase_bound(const ProblemDef& p,
                                       const BoundConstants& c, double mu,
                                       const IvpTrace& trace, double h);

}  // namespace sibvp
