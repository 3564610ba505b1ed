#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sibvp/bounds.hpp"
#include "sibvp/errors.hpp"
#include "sibvp/interpolation.hpp"
#include "sibvp/io.hpp"
#include "sibvp/ivp.hpp"
#include "sibvp/problem.hpp"
#include "sibvp/shooting.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct CommonOpts {
  std::string problem = "troesch";
  double lambda = 2.0;
  double h = 1e-4;
  std::string out;
  std::string format = "json";
  std::vector<double> stations;
};

std::string canonical_config(const std::string& cmd, const json& j) {
  return cmd + ":" + j.dump();
}

void emit(const std::string& out, const std::string& payload) {
  if (out.empty() || out == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot open output file: " + out);
  f << payload;
}

double march_u_prime_b(const sibvp::IvpTrace& trace) {
  const sibvp::Knot& k = trace.back_knot;
  if (k.regime == sibvp::Regime::Inverse) return 1.0 / k.x_prime;
  return k.u_prime;
}

json solve_one(const sibvp::ProblemDef& p, double lambda, double h,
               const std::string& method, double h_bold,
               const std::vector<double>& stations) {
  json out;
  out["lambda"] = lambda;
  out["h"] = h;
  out["method"] = method;

  if (method == "simple") {
    sibvp::ShootingConfig cfg;
    cfg.h = h;
    cfg.slope_lo = 0.0;
    cfg.slope_hi = p.u_right;
    cfg.stations = stations;
    const sibvp::SimpleShootResult r = sibvp::simple_shoot(p, cfg);
    out["slope0"] = r.slope0;
    out["slope1_inverse"] = r.trace.back_knot.x_prime;
    out["u_prime_b"] = march_u_prime_b(r.trace);
    out["knots"] = r.trace.knot_count;
    out["bisections"] = r.bisections;
    out["residual"] = r.residual;
    json st = json::array();
    for (const auto& s : r.trace.stations) {
      st.push_back({{"x", s.x_requested}, {"u", s.u}});
    }
    out["stations"] = st;
  } else if (method == "multiple") {
    const double hb = h_bold > 0.0 ? h_bold : h;
    const sibvp::MsResult r = sibvp::ms_solve_auto(p, hb, 1e-12, 40);
    if (!r.converged) {
      throw sibvp::SolverError("multiple shooting did not converge");
    }
    out["h_bold"] = hb;
    out["slope0"] = r.mesh.points.front().u_prime;
    out["slope1_inverse"] = 1.0 / r.mesh.points.back().u_prime;
    out["u_prime_b"] = r.mesh.points.back().u_prime;
    out["knots"] = r.mesh.points.size();
    out["sweeps"] = r.sweeps;
    out["residual_norm"] = r.residual_norm;
    // station reporting from a march at the converged slope
    sibvp::StopRule stop;
    stop.x_end = p.b;
    stop.stations = stations;
    stop.store_trace = false;
    const sibvp::IvpTrace t =
        sibvp::si_march(p, p.u_left, r.mesh.points.front().u_prime, hb, stop);
    json st = json::array();
    for (const auto& s : t.stations) {
      st.push_back({{"x", s.x_requested}, {"u", s.u}});
    }
    out["stations"] = st;
  } else {
    throw CLI::ValidationError("--method must be simple or multiple");
  }
  return out;
}

int cmd_solve(const CommonOpts& c, const std::string& method, double h_bold) {
  const sibvp::ProblemDef p = sibvp::make_problem(c.problem, c.lambda);
  const json payload =
      solve_one(p, c.lambda, c.h, method, h_bold, c.stations);
  emit(c.out, payload.dump(2) + "\n");
  return kExitOk;
}

int cmd_march(const CommonOpts& c, double u0, double du0, double x_end,
              double u_cap) {
  const sibvp::ProblemDef p = sibvp::make_problem(c.problem, c.lambda);
  sibvp::StopRule stop;
  stop.x_end = std::isnan(x_end) ? p.b : x_end;
  if (!std::isnan(u_cap)) stop.u_cap = u_cap;
  stop.stations = c.stations;
  const sibvp::IvpTrace trace =
      sibvp::si_march(p, std::isnan(u0) ? p.u_left : u0, du0, c.h, stop);

  json meta;
  meta["problem"] = c.problem;
  meta["lambda"] = c.lambda;
  meta["h"] = c.h;
  meta["du0"] = du0;
  std::ostringstream os;
  sibvp::write_trace_csv(os, trace, canonical_config("march", meta));
  emit(c.out, os.str());
  return kExitOk;
}

int cmd_bounds(const CommonOpts& c, double epsilon, double du0,
               bool per_knot) {
  const sibvp::ProblemDef p = sibvp::make_problem(c.problem, c.lambda);
  double slope = du0;
  if (std::isnan(slope)) {
    sibvp::ShootingConfig cfg;
    cfg.h = c.h;
    cfg.slope_lo = 0.0;
    cfg.slope_hi = p.u_right;
    slope = sibvp::simple_shoot(p, cfg).slope0;
  }
  const sibvp::BoundConstants bc =
      sibvp::compute_bound_constants(p, epsilon, slope);

  sibvp::StopRule stop;
  stop.x_end = p.b;
  const sibvp::IvpTrace trace = sibvp::si_march(p, p.u_left, slope, c.h, stop);

  json out;
  out["epsilon"] = epsilon;
  out["du0"] = slope;
  out["S_star"] = bc.S_star;
  out["M_star"] = bc.M_star;
  out["L0"] = bc.L0;
  out["L1"] = bc.L1;
  out["L2"] = bc.L2;
  out["P_star_at_h"] = bc.P_star(c.h);
  out["h"] = c.h;

  double mu = 0.0;
  bool have_inverse = trace.first_inverse != sibvp::IvpTrace::npos;
  if (have_inverse) {
    const double u_istar = trace.knots[trace.first_inverse].u;
    const sibvp::MuEstimate est =
        sibvp::compute_mu(p, u_istar, u_istar + 20.0 / c.lambda + 10.0);
    mu = est.value;
    out["u_istar"] = u_istar;
    out["mu_estimate"] = est.value;
    out["mu_tail_increasing"] = est.tail_increasing;
  }
  const bool first = bc.h_restriction_first(c.h);
  const bool second = have_inverse && bc.h_restriction_second(c.h, mu);
  out["h_restrictions_satisfied"] =
      json{{"straight", first}, {"inverse", first && second}};

  if (per_knot) {
    if (first && second) {
      const sibvp::InversePhaseBounds b =
          sibvp::inverse_phase_bound(p, bc, mu, trace, c.h);
      json rows = json::array();
      for (std::size_t i = 0; i < b.u.size(); ++i) {
        rows.push_back({{"u", b.u[i]},
                        {"x_bound", b.x_bound[i]},
                        {"xp_bound", b.xp_bound[i]}});
      }
      out["per_knot_bounds"] = rows;
    } else {
      out["per_knot_bounds"] = "not-applicable";
    }
  }
  emit(c.out, out.dump(2) + "\n");
  return kExitOk;
}

struct TableCell {
  bool ok = false;
  double slope = 0.0;
  std::string error;
};

TableCell table1_cell(const std::string& problem, double lambda, double h) {
  TableCell cell;
  try {
    const sibvp::ProblemDef p = sibvp::make_problem(problem, lambda);
    sibvp::ShootingConfig cfg;
    cfg.h = h;
    cfg.slope_lo = 0.0;
    cfg.slope_hi = p.u_right;
    cell.slope = sibvp::simple_shoot(p, cfg).slope0;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

int cmd_tables(const std::string& out_dir, std::vector<double> lambdas,
               std::vector<double> h_grid, int jobs) {
  if (lambdas.empty()) lambdas = {2, 3, 5, 8, 20, 30, 50};
  if (h_grid.empty()) h_grid = {1e-3, 1e-4};
  if (jobs < 1) jobs = 1;

  json meta;
  meta["lambdas"] = lambdas;
  meta["h_grid"] = h_grid;
  const std::string config = canonical_config("tables", meta);

  // table1: initial slopes, one column per step size
  {
    std::vector<std::vector<TableCell>> cells(lambdas.size());
    std::vector<std::future<TableCell>> futures;
    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      cells[i].resize(h_grid.size());
      for (std::size_t j = 0; j < h_grid.size(); ++j) coords.push_back({i, j});
    }
    std::size_t next = 0;
    while (next < coords.size()) {
      const std::size_t batch =
          std::min<std::size_t>(jobs, coords.size() - next);
      futures.clear();
      for (std::size_t k = 0; k < batch; ++k) {
        const auto [i, j] = coords[next + k];
        futures.push_back(std::async(std::launch::async, table1_cell,
                                     "troesch", lambdas[i], h_grid[j]));
      }
      for (std::size_t k = 0; k < batch; ++k) {
        const auto [i, j] = coords[next + k];
        cells[i][j] = futures[k].get();
      }
      next += batch;
    }

    std::ostringstream os;
    std::string header = "lambda";
    for (double h : h_grid) header += ",slope_h=" + sibvp::format_sig15(h);
    sibvp::write_csv_preamble(os, config, header);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      os << sibvp::format_sig15(lambdas[i]);
      for (std::size_t j = 0; j < h_grid.size(); ++j) {
        if (cells[i][j].ok) {
          os << ',' << sibvp::format_sig15(cells[i][j].slope);
        } else {
          os << ",NA(" << cells[i][j].error << ")";
        }
      }
      os << '\n';
    }
    std::ofstream f(out_dir + "/table1.csv");
    f << os.str();
  }

  // table3: lambda = 10 interior stations at the finest grid step
  {
    const double h = h_grid.back();
    std::ostringstream os;
    sibvp::write_csv_preamble(os, config,
                              "x_requested,u,x_nearest_knot,u_nearest_knot");
    try {
      const sibvp::ProblemDef p = sibvp::make_problem("troesch", 10.0);
      sibvp::ShootingConfig cfg;
      cfg.h = h;
      cfg.slope_lo = 0.0;
      cfg.slope_hi = p.u_right;
      cfg.stations = {0.1, 0.2, 0.3, 0.4, 0.5, 0.999};
      const sibvp::SimpleShootResult r = sibvp::simple_shoot(p, cfg);
      for (const auto& s : r.trace.stations) {
        const sibvp::Knot& nk = sibvp::nearest_knot(r.trace, s.x_requested);
        os << sibvp::format_sig15(s.x_requested) << ','
           << sibvp::format_sig15(s.u) << ',' << sibvp::format_sig15(nk.x)
           << ',' << sibvp::format_sig15(nk.u) << '\n';
      }
    } catch (const std::exception& e) {
      os << "NA(" << e.what() << ")\n";
    }
    std::ofstream f(out_dir + "/table3.csv");
    f << os.str();
  }

  // table4: lambda = 100 mesh size and timing scaling
  {
    const double reference_slope = 2.976060781e-43;
    std::ostringstream os;
    sibvp::write_csv_preamble(os, config,
                              "h,knots,cpu_seconds,slope,rel_diff");
    for (double h : h_grid) {
      try {
        const auto start = std::chrono::steady_clock::now();
        const sibvp::MsResult r = sibvp::ms_solve_auto(
            sibvp::make_problem("troesch", 100.0), h, 1e-12, 40);
        const std::chrono::duration<double> dt =
            std::chrono::steady_clock::now() - start;
        const double slope = r.mesh.points.front().u_prime;
        os << sibvp::format_sig15(h) << ',' << r.mesh.points.size() << ','
           << sibvp::format_sig15(dt.count()) << ','
           << sibvp::format_sig15(slope) << ','
           << sibvp::format_sig15(std::abs(slope - reference_slope) /
                                  reference_slope)
           << '\n';
      } catch (const std::exception& e) {
        os << sibvp::format_sig15(h) << ",NA(" << e.what() << "),,,\n";
      }
    }
    std::ofstream f(out_dir + "/table4.csv");
    f << os.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Straight-inverse solver for stiff two-point boundary value problems"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string method = "simple";
  double h_bold = 0.0;
  double u0 = std::numeric_limits<double>::quiet_NaN();
  double du0 = std::numeric_limits<double>::quiet_NaN();
  double x_end = std::numeric_limits<double>::quiet_NaN();
  double u_cap = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.1;
  bool per_knot = false;
  std::string out_dir = ".";
  std::vector<double> lambdas;
  std::vector<double> h_grid;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", common.problem, "problem name (troesch)");
    sub->add_option("--lambda", common.lambda, "problem parameter");
    sub->add_option("--h", common.h, "step size in (0,1)");
    sub->add_option("--out", common.out, "output path ('-' for stdout)");
    sub->add_option("--format", common.format, "output format (csv|json)");
    sub->add_option("--stations", common.stations,
                    "x values to report the solution at")
        ->delimiter(',');
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the boundary value problem");
  add_common(solve);
  solve->add_option("--method", method, "simple|multiple");
  solve->add_option("--h-bold", h_bold, "mesh gap bound for --method multiple");

  CLI::App* march = app.add_subcommand("march", "run the switching marcher");
  add_common(march);
  march->add_option("--u0", u0, "initial value (default: problem left value)");
  march->add_option("--du0", du0, "initial slope")->required();
  march->add_option("--x-end", x_end, "right end of the march");
  march->add_option("--u-cap", u_cap, "blow-up guard");

  CLI::App* bounds = app.add_subcommand("bounds", "error-bound constants");
  add_common(bounds);
  bounds->add_option("--epsilon", epsilon, "bound parameter in (0, 1/6)");
  bounds->add_option("--du0", du0, "initial slope (default: from shooting)");
  bounds->add_flag("--per-knot", per_knot, "emit per-knot inverse-phase bounds");

  CLI::App* tables = app.add_subcommand("tables", "reproduce the benchmark tables");
  tables->add_option("--out-dir", out_dir, "directory for table CSV files");
  tables->add_option("--lambdas", lambdas, "table1 lambda values")->delimiter(',');
  tables->add_option("--h-grid", h_grid, "step sizes")->delimiter(',');
  tables->add_option("--jobs", jobs, "parallel table cells");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(common, method, h_bold);
    if (march->parsed()) return cmd_march(common, u0, du0, x_end, u_cap);
    if (bounds->parsed()) return cmd_bounds(common, epsilon, du0, per_knot);
    if (tables->parsed()) return cmd_tables(out_dir, lambdas, h_grid, jobs);
  } catch (const CLI::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sibvp::SolverError& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
