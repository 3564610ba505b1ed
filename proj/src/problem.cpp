#include "sibvp/problem.hpp"

#include <cmath>
#include <stdexcept>

#include "sibvp/errors.hpp"

namespace sibvp {

namespace {

// sinh/cosh overflow just above 710; the products we form downstream may
// still be finite, but the factors are not, so fail loudly here.
constexpr double kSinhOverflow = 709.0;
// Below this the direct formulas lose digits to cancellation; the Taylor
// series is accurate to well under double roundoff with the terms kept.
constexpr double kSeriesThreshold = 1e-3;

void check_arg(double z) {
  if (std::abs(z) > kSinhOverflow) {
    throw RangeError("troesch coefficient overflow: |lambda*u| = " +
                     std::to_string(std::abs(z)));
  }
}

}  // namespace

double troesch_n(double lambda, double u) {
  const double z = lambda * u;
  check_arg(z);
  if (std::abs(z) < kSeriesThreshold) {
    const double z2 = z * z;
    return lambda * lambda *
           (1.0 + z2 * (1.0 / 6.0 + z2 * (1.0 / 120.0 + z2 / 5040.0)));
  }
  return lambda * std::sinh(z) / u;
}

double troesch_n_u(double lambda, double u) {
  const double z = lambda * u;
  check_arg(z);
  if (std::abs(z) < kSeriesThreshold) {
    const double z2 = z * z;
    return lambda * lambda * lambda * z *
           (1.0 / 3.0 + z2 * (1.0 / 30.0 + z2 / 840.0));
  }
  return lambda * (z * std::cosh(z) - std::sinh(z)) / (u * u);
}

double troesch_n_uu(double lambda, double u) {
  const double z = lambda * u;
  check_arg(z);
  const double l4 = lambda * lambda * lambda * lambda;
  if (std::abs(z) < kSeriesThreshold) {
    const double z2 = z * z;
    return l4 * (1.0 / 3.0 + z2 * (1.0 / 10.0 + z2 / 168.0));
  }
  return lambda * ((z * z + 2.0) * std::sinh(z) - 2.0 * z * std::cosh(z)) /
         (u * u * u);
}

double ProblemDef::eval_n_uu(double u, double x) const {
  if (n_uu) return n_uu(u, x);
  const double d = 1e-6 * std::max(1.0, std::abs(u));
  return (n_u(u + d, x) - n_u(u - d, x)) / (2.0 * d);
}

double ProblemDef::eval_n_ux(double u, double x) const {
  if (n_ux) return n_ux(u, x);
  if (!n_x) return 0.0;
  const double d = 1e-6 * std::max(1.0, std::abs(u));
  return (n_x(u + d, x) - n_x(u - d, x)) / (2.0 * d);
}

double ProblemDef::eval_n_xx(double u, double x) const {
  if (n_xx) return n_xx(u, x);
  if (!n_x) return 0.0;
  const double d = 1e-6 * std::max(1.0, std::abs(x));
  return (n_x(u, x + d) - n_x(u, x - d)) / (2.0 * d);
}

ProblemDef troesch_problem(double lambda) {
  if (!(lambda > 0.0)) throw SolverError("troesch requires lambda > 0");
  ProblemDef p;
  p.n = [lambda](double u, double) { return troesch_n(lambda, u); };
  p.n_u = [lambda](double u, double) { return troesch_n_u(lambda, u); };
  p.n_x = nullptr;
  p.n_uu = [lambda](double u, double) { return troesch_n_uu(lambda, u); };
  p.phi = [lambda](double u) { return std::cosh(lambda * u) - 1.0; };
  p.phi_inverse = [lambda](double t) { return std::acosh(t + 1.0) / lambda; };
  p.a = 0.0;
  p.b = 1.0;
  p.u_left = 0.0;
  p.u_right = 1.0;
  p.name = "troesch";
  return p;
}

ProblemDef constant_coefficient_problem(double c, double a, double b,
                                        double u_left, double u_right) {
  ProblemDef p;
  p.n = [c](double, double) { return c; };
  p.n_u = [](double, double) { return 0.0; };
  p.n_uu = [](double, double) { return 0.0; };
  if (c != 0.0) {
    // phi is taken from the left boundary value, matching its use in the
    // bound constants.
    p.phi = [c, u_left](double u) { return 0.5 * c * (u * u - u_left * u_left); };
  }
  p.a = a;
  p.b = b;
  p.u_left = u_left;
  p.u_right = u_right;
  p.name = "constant";
  return p;
}

ProblemDef make_problem(const std::string& name, double lambda) {
  if (name == "troesch") return troesch_problem(lambda);
  throw SolverError("unknown problem name: " + name);
}

}  // namespace sibvp
