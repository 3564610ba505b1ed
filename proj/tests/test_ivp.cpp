#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "sibvp/interpolation.hpp"
#include "sibvp/ivp.hpp"
#include "sibvp/problem.hpp"

using sibvp::Dual2;
using sibvp::IvpTrace;
using sibvp::Regime;
using sibvp::si_march;
using sibvp::si_march_dual;
using sibvp::StopReason;
using sibvp::StopRule;

namespace {

const double kPaperSlope2 = 0.518621219272419;  // lambda = 2 initial slope

sibvp::ProblemDef line_problem() {
  return sibvp::constant_coefficient_problem(0.0, 0.0, 1.0, 0.0, 1.0);
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace

TEST_CASE("zero coefficient marches along the exact line") {
  StopRule stop;
  stop.x_end = 1.0;
  const IvpTrace t = si_march(line_problem(), 0.0, 0.5, 0.1, stop);
  CHECK(t.stop_reason == StopReason::ReachedXEnd);
  CHECK(std::abs(t.back_knot.u - 0.5) < 1e-12);
  CHECK(t.back_knot.x == 1.0);
  CHECK(std::abs(t.back_knot.u_prime - 0.5) < 1e-12);
  for (const sibvp::Knot& k : t.knots) CHECK(k.regime == Regime::Straight);
}

TEST_CASE("straight-run knots sit on the exact grid") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  StopRule stop;
  stop.x_end = 1.0;
  const double h = 1e-3;
  const IvpTrace t = si_march(p, 0.0, kPaperSlope2, h, stop);
  REQUIRE(t.first_inverse != IvpTrace::npos);
  for (std::uint64_t i = 0; i < t.first_inverse; ++i) {
    CHECK(t.knots[i].x == static_cast<double>(i) * h);
  }
}

TEST_CASE("troesch march lands near the right boundary value") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  StopRule stop;
  stop.x_end = 1.0;
  const IvpTrace t = si_march(p, 0.0, kPaperSlope2, 1e-4, stop);
  CHECK(t.stop_reason == StopReason::ReachedXEnd);
  CHECK(std::abs(t.back_knot.u - 1.0) < 2e-6);
}

TEST_CASE("regime switch follows the slope guard") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  StopRule stop;
  stop.x_end = 1.0;
  const IvpTrace t = si_march(p, 0.0, kPaperSlope2, 1e-3, stop);
  for (std::size_t i = 1; i < t.knots.size(); ++i) {
    const bool prev_small = std::abs(t.knots[i - 1].u_prime) <= 1.0;
    CHECK((t.knots[i].regime == Regime::Straight) == prev_small);
  }
}

TEST_CASE("slope reciprocity holds along the trace") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(5.0);
  StopRule stop;
  stop.x_end = 1.0;
  const IvpTrace t = si_march(p, 0.0, 4.575046141188e-02, 1e-3, stop);
  for (const sibvp::Knot& k : t.knots) {
    if (std::isfinite(k.x_prime) && k.u_prime != 0.0 && k.x_prime != 0.0) {
      CHECK(rel_err(k.u_prime * k.x_prime, 1.0) < 1e-12);
    }
  }
}

TEST_CASE("straight phase converges at second order to the closed form") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  const double slope = 0.5186212192694;  // near-true slope for the IVP
  const double station = 0.4;            // inside the straight phase

  double errs[3];
  const double hs[3] = {4e-3, 2e-3, 1e-3};
  for (int i = 0; i < 3; ++i) {
    StopRule stop;
    stop.x_end = 1.0;
    stop.stations = {station};
    const IvpTrace t = si_march(p, 0.0, slope, hs[i], stop);
    REQUIRE(t.stations.size() == 1);
    const double u_hint = 0.5;
    const double u_exact =
        sibvp_test::troesch_u_of_x(2.0, slope, station, u_hint);
    errs[i] = std::abs(t.stations[0].u - u_exact);
  }
  const double r1 = errs[0] / errs[1];
  const double r2 = errs[1] / errs[2];
  CHECK(r1 > 3.5);
  CHECK(r1 < 4.5);
  CHECK(r2 > 3.5);
  CHECK(r2 < 4.5);
}

TEST_CASE("knot count scales like 1/h") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  double scaled[3];
  const double hs[3] = {1e-2, 1e-3, 1e-4};
  for (int i = 0; i < 3; ++i) {
    StopRule stop;
    stop.x_end = 1.0;
    stop.store_trace = false;
    const IvpTrace t = si_march(p, 0.0, 0.5186212192694, hs[i], stop);
    scaled[i] = static_cast<double>(t.knot_count) * hs[i];
  }
  for (int i = 1; i < 3; ++i) {
    CHECK(std::abs(scaled[i] - scaled[0]) / scaled[0] < 0.05);
  }
}

TEST_CASE("inverse phase keeps a positive non-increasing x slope") {
  for (double lambda : {2.0, 5.0, 10.0}) {
    const sibvp::ProblemDef p = sibvp::troesch_problem(lambda);
    // march from a slope that blows up before x_end to see a long inverse run
    StopRule stop;
    stop.x_end = 1.0;
    stop.u_cap = 11.0;
    const double slope = lambda == 2.0 ? kPaperSlope2 : 0.5;
    const IvpTrace t = si_march(p, 0.0, slope, 1e-3, stop);
    REQUIRE(t.first_inverse != IvpTrace::npos);
    double prev = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = t.first_inverse; i < t.knots.size(); ++i) {
      CHECK(t.knots[i].x_prime >= 0.0);
      CHECK(t.knots[i].x_prime <= prev * (1.0 + 1e-12));
      prev = t.knots[i].x_prime;
    }
  }
}

TEST_CASE("blow-up and budget stops") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  StopRule cap;
  cap.x_end = 1.0;
  cap.u_cap = 11.0;
  const IvpTrace blow = si_march(p, 0.0, 2.0, 1e-3, cap);
  CHECK(blow.stop_reason == StopReason::ReachedUCap);
  CHECK(blow.back_knot.u >= 11.0);

  StopRule tiny;
  tiny.x_end = 1.0;
  tiny.knot_budget = 5;
  const IvpTrace budget = si_march(p, 0.0, 0.5, 1e-3, tiny);
  CHECK(budget.stop_reason == StopReason::KnotBudget);
  CHECK(budget.knot_count == 5);
}

TEST_CASE("stations are sampled in both regimes") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  StopRule stop;
  stop.x_end = 1.0;
  stop.stations = {0.25, 0.5, 0.97};
  const IvpTrace t = si_march(p, 0.0, kPaperSlope2, 1e-3, stop);
  REQUIRE(t.stations.size() == 3);
  for (const auto& s : t.stations) {
    CHECK(rel_err(s.x, s.x_requested) < 1e-12);
    const double u_exact = sibvp_test::troesch_u_of_x(
        2.0, kPaperSlope2, s.x_requested, s.u);
    CHECK(std::abs(s.u - u_exact) < 1e-5);
    // interpolated reporting agrees with the in-step samples
    CHECK(std::abs(sibvp::trace_eval_u(t, s.x_requested) - s.u) < 1e-5);
  }
  // the third station lies in the inverse phase
  CHECK(t.stations[2].u_prime > 1.0);
  const sibvp::Knot& nk = sibvp::nearest_knot(t, 0.97);
  CHECK(std::abs(nk.x - 0.97) < 1e-3);
}

TEST_CASE("dual march: line problem sensitivity") {
  StopRule stop;
  stop.x_end = 1.0;
  const auto t = si_march_dual(line_problem(), Dual2(0.0), Dual2(0.5, 1.0),
                               0.1, stop);
  CHECK(t.back_knot.u.der == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dual march with zero seed reproduces the real march bitwise") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  StopRule stop;
  stop.x_end = 1.0;
  const IvpTrace real = si_march(p, 0.0, kPaperSlope2, 1e-3, stop);
  const auto dual = si_march_dual(p, Dual2(0.0), Dual2(kPaperSlope2, 0.0),
                                  1e-3, stop);
  REQUIRE(real.knots.size() == dual.knots.size());
  for (std::size_t i = 0; i < real.knots.size(); ++i) {
    CHECK(real.knots[i].u == dual.knots[i].u.val);
    CHECK(real.knots[i].x == dual.knots[i].x.val);
    CHECK(real.knots[i].u_prime == dual.knots[i].u_prime.val);
    CHECK(dual.knots[i].u.der == 0.0);
  }
}

TEST_CASE("dual march terminal sensitivity matches finite differences") {
  const sibvp::ProblemDef p = sibvp::troesch_problem(2.0);
  StopRule stop;
  stop.x_end = 1.0;
  const double slope = kPaperSlope2;
  const auto dual = si_march_dual(p, Dual2(0.0), Dual2(slope, 1.0), 1e-3, stop);

  const double delta = 1e-7;
  const IvpTrace up = si_march(p, 0.0, slope + delta, 1e-3, stop);
  const IvpTrace dn = si_march(p, 0.0, slope - delta, 1e-3, stop);
  const double fd = (up.back_knot.u - dn.back_knot.u) / (2.0 * delta);
  CHECK(rel_err(dual.back_knot.u.der, fd) < 1e-5);
}
