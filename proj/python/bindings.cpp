#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sibvp/bounds.hpp"
#include "sibvp/interpolation.hpp"
#include "sibvp/ivp.hpp"
#include "sibvp/problem.hpp"
#include "sibvp/shooting.hpp"
#include "sibvp/step_functions.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

py::dict trace_to_dict(const sibvp::IvpTrace& t) {
  py::dict d;
  std::vector<double> x, u, up, xp;
  std::vector<std::string> regime;
  x.reserve(t.knots.size());
  for (const sibvp::Knot& k : t.knots) {
    x.push_back(k.x);
    u.push_back(k.u);
    up.push_back(k.u_prime);
    xp.push_back(k.x_prime);
    regime.push_back(k.regime == sibvp::Regime::Straight ? "straight"
                                                         : "inverse");
  }
  d["x"] = std::move(x);
  d["u"] = std::move(u);
  d["u_prime"] = std::move(up);
  d["x_prime"] = std::move(xp);
  d["regime"] = std::move(regime);
  d["knot_count"] = t.knot_count;
  d["h"] = t.h;
  switch (t.stop_reason) {
    case sibvp::StopReason::ReachedXEnd: d["stop_reason"] = "x_end"; break;
    case sibvp::StopReason::ReachedUCap: d["stop_reason"] = "u_cap"; break;
    case sibvp::StopReason::KnotBudget: d["stop_reason"] = "budget"; break;
    case sibvp::StopReason::NumericOverflow: d["stop_reason"] = "overflow"; break;
  }
  py::list stations;
  for (const auto& s : t.stations) {
    py::dict row;
    row["x"] = s.x_requested;
    row["u"] = s.u;
    row["u_prime"] = s.u_prime;
    stations.append(row);
  }
  d["stations"] = stations;
  d["first_inverse"] =
      t.first_inverse == sibvp::IvpTrace::npos
          ? py::object(py::none())
          : py::object(py::int_(t.first_inverse));
  return d;
}

}  // namespace

PYBIND11_MODULE(_sibvp, m) {
  m.doc() = "Straight-inverse solver for stiff two-point boundary value problems";

  py::class_<sibvp::ProblemDef>(m, "Problem")
      .def_readonly("a", &sibvp::ProblemDef::a)
      .def_readonly("b", &sibvp::ProblemDef::b)
      .def_readonly("u_left", &sibvp::ProblemDef::u_left)
      .def_readonly("u_right", &sibvp::ProblemDef::u_right)
      .def_readonly("name", &sibvp::ProblemDef::name)
      .def("n", [](const sibvp::ProblemDef& p, double u, double x) {
        return p.n(u, x);
      });

  m.def("troesch", &sibvp::troesch_problem, "lam"_a,
        "Troesch problem with the given lambda");
  m.def(
      "custom_problem",
      [](std::function<double(double, double)> n,
         std::function<double(double, double)> n_u,
         std::function<double(double, double)> n_x, double a, double b,
         double u_left, double u_right) {
        sibvp::ProblemDef p;
        p.n = std::move(n);
        p.n_u = std::move(n_u);
        if (n_x) p.n_x = std::move(n_x);
        p.a = a;
        p.b = b;
        p.u_left = u_left;
        p.u_right = u_right;
        p.name = "custom";
        return p;
      },
      "n"_a, "n_u"_a, "n_x"_a = nullptr, "a"_a = 0.0, "b"_a = 1.0,
      "u_left"_a = 0.0, "u_right"_a = 1.0);

  m.def(
      "u_step",
      [](double coef_lin, double coef_const, double slope0, double value0,
         double s, double tol) {
        const auto r = sibvp::u_step(
            sibvp::StepArgs<double>{coef_lin, coef_const, slope0, value0, s},
            tol);
        return py::make_tuple(r.value, r.deriv_s);
      },
      "coef_lin"_a, "coef_const"_a, "slope0"_a, "value0"_a, "s"_a,
      "tol"_a = 1e-14);
  m.def(
      "v_step",
      [](double coef_lin, double coef_const, double slope0, double value0,
         double s, double tol) {
        const auto r = sibvp::v_step(
            sibvp::StepArgs<double>{coef_lin, coef_const, slope0, value0, s},
            tol);
        return py::make_tuple(r.value, r.deriv_s);
      },
      "coef_lin"_a, "coef_const"_a, "slope0"_a, "value0"_a, "s"_a,
      "tol"_a = 1e-14);

  m.def(
      "si_march",
      [](const sibvp::ProblemDef& p, double u0, double du0, double h,
         double x_end, double u_cap, std::vector<double> stations) {
        sibvp::StopRule stop;
        stop.x_end = x_end;
        stop.u_cap = u_cap;
        stop.stations = std::move(stations);
        return trace_to_dict(sibvp::si_march(p, u0, du0, h, stop));
      },
      "problem"_a, "u0"_a, "du0"_a, "h"_a, "x_end"_a,
      "u_cap"_a = std::numeric_limits<double>::infinity(),
      "stations"_a = std::vector<double>{});

  m.def(
      "simple_shoot",
      [](const sibvp::ProblemDef& p, double h, double slope_lo, double slope_hi,
         std::vector<double> stations) {
        sibvp::ShootingConfig cfg;
        cfg.h = h;
        cfg.slope_lo = slope_lo;
        cfg.slope_hi = slope_hi;
        cfg.stations = std::move(stations);
        const auto r = sibvp::simple_shoot(p, cfg);
        py::dict d;
        d["slope0"] = r.slope0;
        d["residual"] = r.residual;
        d["bisections"] = r.bisections;
        d["trace"] = trace_to_dict(r.trace);
        return d;
      },
      "problem"_a, "h"_a, "slope_lo"_a = 0.0, "slope_hi"_a = 1.0,
      "stations"_a = std::vector<double>{});

  m.def(
      "ms_solve",
      [](const sibvp::ProblemDef& p, double h_bold, double stop_tol,
         int max_sweeps) {
        const auto r = sibvp::ms_solve_auto(p, h_bold, stop_tol, max_sweeps);
        py::dict d;
        d["converged"] = r.converged;
        d["sweeps"] = r.sweeps;
        d["update_norm"] = r.update_norm;
        d["residual_norm"] = r.residual_norm;
        d["slope0"] = r.mesh.points.front().u_prime;
        d["u_prime_b"] = r.mesh.points.back().u_prime;
        d["knots"] = r.mesh.points.size();
        std::vector<double> x, u, up;
        for (const auto& pt : r.mesh.points) {
          x.push_back(pt.x);
          u.push_back(pt.u);
          up.push_back(pt.u_prime);
        }
        d["x"] = std::move(x);
        d["u"] = std::move(u);
        d["u_prime"] = std::move(up);
        return d;
      },
      "problem"_a, "h_bold"_a, "stop_tol"_a = 1e-12, "max_sweeps"_a = 40);

  m.def(
      "bound_constants",
      [](const sibvp::ProblemDef& p, double epsilon, double du_left, double h) {
        const auto c = sibvp::compute_bound_constants(p, epsilon, du_left);
        py::dict d;
        d["epsilon"] = c.epsilon;
        d["S_star"] = c.S_star;
        d["M_star"] = c.M_star;
        d["L0"] = c.L0;
        d["L1"] = c.L1;
        d["L2"] = c.L2;
        d["P_star_at_h"] = c.P_star(h);
        return d;
      },
      "problem"_a, "epsilon"_a, "du_left"_a, "h"_a);

  py::register_exception<sibvp::SolverError>(m, "SolverError");
}
