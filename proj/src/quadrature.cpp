#include "sibvp/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "sibvp/errors.hpp"

namespace sibvp {

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = simpson(fa, fm, fb, b - a);
  return adaptive_rec(f, a, b, fa, fm, fb, whole,
                      tol * std::max(1.0, std::abs(whole)), 48);
}

GaussRule::GaussRule(int nodes) {
  if (nodes < 2) nodes = 2;
  nodes_.resize(nodes);
  weights_.resize(nodes);
  // Newton iteration on Legendre polynomials from the Chebyshev initial
  // guess; standard construction of the Gauss-Legendre rule.
  const int m = (nodes + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (nodes + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < nodes; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = nodes * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes_[i] = -x;
    nodes_[nodes - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights_[i] = w;
    weights_[nodes - 1 - i] = w;
  }
}

double GaussRule::integrate(const std::function<double(double)>& f, double a,
                            double b) const {
  return apply(f, a, b);
}

}  // namespace sibvp
