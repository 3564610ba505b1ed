#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sibvp/errors.hpp"
#include "sibvp/problem.hpp"

using sibvp::troesch_n;
using sibvp::troesch_n_u;
using sibvp::troesch_n_uu;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace

TEST_CASE("troesch coefficient values") {
  CHECK(troesch_n(2.0, 0.0) == 4.0);  // removable singularity -> lambda^2
  const double direct = 2.0 * std::sinh(2.0);
  const double cross = 2.0 * (std::exp(2.0) - std::exp(-2.0)) / 2.0;
  CHECK(rel_err(troesch_n(2.0, 1.0), direct) < 1e-15);
  CHECK(rel_err(direct, cross) < 1e-14);
}

TEST_CASE("troesch coefficient is even in u") {
  CHECK(rel_err(troesch_n(10.0, 1e-6), troesch_n(10.0, -1e-6)) < 1e-12);
  CHECK(rel_err(troesch_n(3.0, 0.4), troesch_n(3.0, -0.4)) < 1e-14);
}

TEST_CASE("troesch derivative values and symmetry") {
  CHECK(troesch_n_u(2.0, 0.0) == 0.0);
  CHECK(troesch_n_u(7.0, 0.0) == 0.0);
  const double fd = sibvp_test::central_diff(
      [](double u) { return troesch_n(2.0, u); }, 0.5, 1e-6);
  CHECK(rel_err(troesch_n_u(2.0, 0.5), fd) < 1e-7);
  CHECK(std::abs(troesch_n_u(2.0, 0.3) + troesch_n_u(2.0, -0.3)) <
        1e-12 * std::abs(troesch_n_u(2.0, 0.3)));
}

TEST_CASE("troesch second derivative matches finite differences") {
  for (double u : {0.0, 1e-4, 0.2, 0.8}) {
    const double fd = sibvp_test::central_diff(
        [](double t) { return troesch_n_u(2.0, t); }, u, 1e-6);
    CHECK(std::abs(troesch_n_uu(2.0, u) - fd) <=
          1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("coefficient dominates lambda^2 with equality only at zero") {
  const double l2 = 4.0;
  CHECK(troesch_n(2.0, 0.0) == l2);
  for (int i = 1; i <= 64; ++i) {
    const double u = 1.5 * i / 64.0;
    CHECK(troesch_n(2.0, u) > l2);
    CHECK(troesch_n(2.0, -u) > l2);
  }
}

TEST_CASE("series and direct formulas agree at the crossover") {
  for (double lambda : {2.0, 10.0}) {
    const double u = 1e-3 / lambda;  // |z| = 1e-3 exactly at the threshold
    const double below = troesch_n(lambda, std::nextafter(u, 0.0));
    const double above = troesch_n(lambda, std::nextafter(u, 1.0));
    CHECK(rel_err(below, above) < 1e-13);
    // the direct derivative formula cancels to ~z^3/3 at the threshold, so
    // its own roundoff is ~3e-10 relative there
    const double below1 = troesch_n_u(lambda, std::nextafter(u, 0.0));
    const double above1 = troesch_n_u(lambda, std::nextafter(u, 1.0));
    CHECK(rel_err(below1, above1) < 5e-9);
  }
}

TEST_CASE("overflow guard") {
  CHECK_THROWS_AS((void)troesch_n(2.0, 400.0), sibvp::RangeError);
  CHECK_THROWS_AS((void)troesch_n_u(100.0, 7.2), sibvp::RangeError);
}

TEST_CASE("problem definition self-consistency") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  CHECK(p.eval_n_x(0.3, 0.5) == 0.0);  // autonomous
  for (double u : {0.1, 0.45, 0.9}) {
    const double fd = sibvp_test::central_diff(
        [&](double t) { return p.n(t, 0.0); }, u, 1e-6);
    CHECK(rel_err(p.n_u(u, 0.0), fd) < 1e-6);
  }
  // phi and its inverse are mutually consistent
  for (double u : {0.2, 0.7, 1.3}) {
    CHECK(rel_err(p.phi_inverse(p.phi(u)), u) < 1e-12);
  }
  // dual lift carries the chain rule
  const sibvp::Dual2 nd = p.eval_n(sibvp::Dual2(0.4, 1.0), sibvp::Dual2(0.0));
  CHECK(nd.val == p.n(0.4, 0.0));
  CHECK(rel_err(nd.der, p.n_u(0.4, 0.0)) < 1e-15);
}

TEST_CASE("problem registry") {
  CHECK(sibvp::make_problem("troesch", 3.0).name == "troesch");
  CHECK_THROWS_AS((void)sibvp::make_problem("unknown", 1.0),
                  sibvp::SolverError);
}
