#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sibvp/dual.hpp"

using sibvp::Dual2;

namespace {

// 2x2 upper-triangular matrix [ [v, d], [0, v] ]; the dual arithmetic must
// agree with the matrix arithmetic.
struct UpperTri {
  double v, d;
  UpperTri operator*(const UpperTri& o) const {
    return {v * o.v, v * o.d + d * o.v};
  }
  UpperTri operator+(const UpperTri& o) const { return {v + o.v, d + o.d}; }
};

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace

TEST_CASE("dual addition") {
  const Dual2 s = Dual2(1, 2) + Dual2(3, 4);
  CHECK(s.val == 4.0);
  CHECK(s.der == 6.0);
  const Dual2 reals = Dual2(1.5) + Dual2(2.25);
  CHECK(reals.val == 3.75);
  CHECK(reals.der == 0.0);
  const Dual2 z = Dual2(0, 1) + Dual2(0, -1);
  CHECK(z.val == 0.0);
  CHECK(z.der == 0.0);
}

TEST_CASE("dual multiplication") {
  const Dual2 p = Dual2(2, 3) * Dual2(5, 7);
  CHECK(p.val == 10.0);
  CHECK(p.der == 29.0);
  const Dual2 id = Dual2(4.5, -2.5) * Dual2(1, 0);
  CHECK(id.val == 4.5);
  CHECK(id.der == -2.5);
  const Dual2 nil = Dual2(0, 1) * Dual2(0, 1);
  CHECK(nil.val == 0.0);
  CHECK(nil.der == 0.0);
}

TEST_CASE("dual exp") {
  const Dual2 e0 = exp(Dual2(0, 1));
  CHECK(e0.val == 1.0);
  CHECK(e0.der == 1.0);
  const Dual2 two = exp(Dual2(std::log(2.0), 0));
  CHECK(two.val == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(two.der == 0.0);

  for (double x : {-1.0, 0.3, 2.0}) {
    const Dual2 r = exp(Dual2(x, 1));
    const double fd = sibvp_test::central_diff(
        [](double t) { return std::exp(t); }, x, 1e-6);
    CHECK(rel_err(r.der, fd) < 1e-8);
  }
}

TEST_CASE("dual arithmetic matches the 2x2 matrix arithmetic") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Dual2 a(dist(rng), dist(rng));
    const Dual2 b(dist(rng), dist(rng));
    const UpperTri ma{a.val, a.der}, mb{b.val, b.der};
    const Dual2 p = a * b;
    const UpperTri mp = ma * mb;
    CHECK(p.val == mp.v);
    CHECK(p.der == mp.d);
    const Dual2 s = a + b;
    const UpperTri ms = ma + mb;
    CHECK(s.val == ms.v);
    CHECK(s.der == ms.d);
  }
}

TEST_CASE("ring axioms hold to roundoff on random triples") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Dual2 a(dist(rng), dist(rng));
    const Dual2 b(dist(rng), dist(rng));
    const Dual2 c(dist(rng), dist(rng));

    const Dual2 ab_c = (a * b) * c;
    const Dual2 a_bc = a * (b * c);
    CHECK(std::abs(ab_c.val - a_bc.val) <=
          1e-12 * std::max(1.0, std::abs(ab_c.val)));
    CHECK(std::abs(ab_c.der - a_bc.der) <=
          1e-12 * std::max(1.0, std::abs(ab_c.der)));

    const Dual2 comm = a * b - b * a;
    CHECK(std::abs(comm.val) <= 1e-14 * std::max(1.0, std::abs((a * b).val)));
    CHECK(std::abs(comm.der) <= 1e-14 * std::max(1.0, std::abs((a * b).der)));

    const Dual2 dist_l = a * (b + c);
    const Dual2 dist_r = a * b + a * c;
    CHECK(std::abs(dist_l.val - dist_r.val) <=
          1e-12 * std::max(1.0, std::abs(dist_l.val)));
    CHECK(std::abs(dist_l.der - dist_r.der) <=
          1e-12 * std::max(1.0, std::abs(dist_l.der)));
  }
}

TEST_CASE("polynomial evaluation at (a, 1) yields (p(a), p'(a))") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::array<double, 4> c = {dist(rng), dist(rng), dist(rng), dist(rng)};
    const double a = dist(rng);
    const Dual2 x(a, 1);
    const Dual2 p = ((Dual2(c[3]) * x + Dual2(c[2])) * x + Dual2(c[1])) * x +
                    Dual2(c[0]);
    const double pv = ((c[3] * a + c[2]) * a + c[1]) * a + c[0];
    const double pd = (3.0 * c[3] * a + 2.0 * c[2]) * a + c[1];
    CHECK(rel_err(p.val, pv) < 1e-12);
    CHECK(std::abs(p.der - pd) <= 1e-12 * std::max(1.0, std::abs(pd)));
  }
}

TEST_CASE("dual division inverts multiplication") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(0.1, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Dual2 a(dist(rng), dist(rng));
    const Dual2 b(dist(rng), dist(rng));
    const Dual2 q = a / b;
    const Dual2 back = q * b;
    CHECK(rel_err(back.val, a.val) < 1e-13);
    CHECK(std::abs(back.der - a.der) < 1e-12 * std::max(1.0, std::abs(a.der)));
  }
  // d(1/x) = -1/x^2
  const Dual2 r = 1.0 / Dual2(2.0, 1.0);
  CHECK(r.val == 0.5);
  CHECK(r.der == -0.25);
}

TEST_CASE("step norm and real part accessors") {
  CHECK(sibvp::step_norm(-3.0) == 3.0);
  CHECK(sibvp::step_norm(Dual2(1.0, -4.0)) == 4.0);
  CHECK(sibvp::real_part(Dual2(2.5, 9.0)) == 2.5);
  CHECK(sibvp::with_der(Dual2(2.5, 9.0), 1.0).der == 1.0);
  CHECK(sibvp::with_der(3.5, 1.0) == 3.5);
}
