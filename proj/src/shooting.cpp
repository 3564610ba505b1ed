#include "sibvp/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sibvp/errors.hpp"
#include "sibvp/step_functions.hpp"

namespace sibvp {

namespace {

enum class Trial { Undershoot, Overshoot };

struct TrialOutcome {
  Trial kind;
  double residual;  // finite only when the march reached x_end
};

TrialOutcome classify_slope(const ProblemDef& p, double slope, double h,
                            double u_cap) {
  StopRule stop;
  stop.x_end = p.b;
  stop.u_cap = u_cap;
  stop.store_trace = false;
  const IvpTrace trace = si_march(p, p.u_left, slope, h, stop);
  switch (trace.stop_reason) {
    case StopReason::ReachedUCap:
    case StopReason::NumericOverflow:
      return {Trial::Overshoot, std::numeric_limits<double>::infinity()};
    case StopReason::ReachedXEnd: {
      const double r = trace.back_knot.u - p.u_right;
      return {r > 0.0 ? Trial::Overshoot : Trial::Undershoot, r};
    }
    case StopReason::KnotBudget:
    default:
      throw SolverError("shooting trial exhausted its knot budget");
  }
}

}  // namespace

SimpleShootResult simple_shoot(const ProblemDef& p, const ShootingConfig& cfg) {
  if (!(cfg.slope_lo < cfg.slope_hi)) {
    throw SolverError("shooting bracket must satisfy slope_lo < slope_hi");
  }
  if (!(cfg.residual_tol > 0.0)) {
    throw SolverError("residual tolerance must be positive");
  }
  const double u_cap =
      std::isnan(cfg.u_cap)
          ? p.u_right + 10.0 * std::max(1.0, std::abs(p.u_right))
          : cfg.u_cap;

  const TrialOutcome lo_out = classify_slope(p, cfg.slope_lo, cfg.h, u_cap);
  const TrialOutcome hi_out = classify_slope(p, cfg.slope_hi, cfg.h, u_cap);
  if (lo_out.kind != Trial::Undershoot || hi_out.kind != Trial::Overshoot) {
    throw BadBracketError(
        "bracket does not straddle: lo must undershoot and hi overshoot");
  }

  double lo = cfg.slope_lo;
  double hi = cfg.slope_hi;
  double best_slope = std::abs(lo_out.residual) <= std::abs(hi_out.residual)
                          ? cfg.slope_lo
                          : cfg.slope_hi;
  double best_res = std::min(std::abs(lo_out.residual), std::abs(hi_out.residual));
  int iters = 0;

  while (iters < cfg.max_bisections) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;  // bracket at the floating floor
    ++iters;
    const TrialOutcome out = classify_slope(p, mid, cfg.h, u_cap);
    if (std::isfinite(out.residual) && std::abs(out.residual) < best_res) {
      best_res = std::abs(out.residual);
      best_slope = mid;
    }
    if (std::isfinite(out.residual) && std::abs(out.residual) <= cfg.residual_tol) {
      break;
    }
    if (out.kind == Trial::Undershoot)
      lo = mid;
    else
      hi = mid;
  }

  SimpleShootResult result;
  result.slope0 = best_slope;
  result.bisections = iters;
  StopRule stop;
  stop.x_end = p.b;
  stop.u_cap = u_cap;
  stop.stations = cfg.stations;
  const IvpTrace final_trace = si_march(p, p.u_left, best_slope, cfg.h, stop);
  result.residual = final_trace.back_knot.u - p.u_right;
  result.trace = std::move(const_cast<IvpTrace&>(final_trace));
  return result;
}

MsMesh mesh_from_trace(const IvpTrace& trace, double h_bold,
                       const ProblemDef& p) {
  if (!trace.full || trace.knots.size() < 2) {
    throw SolverError("mesh construction needs a stored trace");
  }
  MsMesh mesh;
  mesh.h_bold = h_bold;
  mesh.points.reserve(trace.knots.size());
  for (const Knot& k : trace.knots) {
    mesh.points.push_back({k.u_prime, k.u, k.x});
  }
  mesh.points.front().u = p.u_left;
  mesh.points.front().x = p.a;
  mesh.points.back().u = p.u_right;
  mesh.points.back().x = p.b;
  refine_mesh(mesh);
  return mesh;
}

void refine_mesh(MsMesh& mesh) {
  const double h_bold = mesh.h_bold;
  std::vector<MsPoint> out;
  out.reserve(mesh.points.size());
  for (std::size_t i = 0; i + 1 < mesh.points.size(); ++i) {
    const MsPoint& a = mesh.points[i];
    const MsPoint& b = mesh.points[i + 1];
    out.push_back(a);
    const double gap =
        std::max(std::abs(b.x - a.x), std::abs(b.u - a.u));
    // The 1e-12 slack keeps roundoff-exact gaps from splitting.
    const int pieces =
        std::max(1, static_cast<int>(std::ceil(gap / h_bold * (1.0 - 1e-12))));
    for (int j = 1; j < pieces; ++j) {
      const double t = static_cast<double>(j) / pieces;
      out.push_back({a.u_prime + t * (b.u_prime - a.u_prime),
                     a.u + t * (b.u - a.u), a.x + t * (b.x - a.x)});
    }
  }
  out.push_back(mesh.points.back());
  mesh.points = std::move(out);
}

MsSystem::MsSystem(const ProblemDef& p, const MsMesh& mesh)
    : problem_(&p), data_(mesh.points) {
  const std::size_t n = data_.size();
  if (n < 2) throw SolverError("mesh must contain at least two points");
  own_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    own_[i] = std::abs(data_[i].u_prime) <= 1.0 ? Regime::Straight
                                                : Regime::Inverse;
  }
  value_col_.assign(n, -1);
  slope_col_.assign(n, -1);
  int col = 0;
  slope_col_[0] = col++;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    value_col_[i] = col++;
    slope_col_[i] = col++;
  }
  slope_col_[n - 1] = col++;
  n_unknowns_ = col;
}

MsSystem ms_build_system(const ProblemDef& p, const MsMesh& mesh) {
  return MsSystem(p, mesh);
}

std::vector<double> MsSystem::initial_unknowns() const {
  std::vector<double> y(n_unknowns_);
  const std::size_t n = data_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (value_col_[i] >= 0) {
      y[value_col_[i]] =
          incoming_regime(i) == Regime::Straight ? data_[i].u : data_[i].x;
    }
    y[slope_col_[i]] = own_[i] == Regime::Straight
                           ? data_[i].u_prime
                           : 1.0 / data_[i].u_prime;
  }
  return y;
}

namespace {

template <Scalar S>
S make_unknown(double v, bool seed);

template <>
double make_unknown<double>(double v, bool) {
  return v;
}

template <>
Dual2 make_unknown<Dual2>(double v, bool seed) {
  return {v, seed ? 1.0 : 0.0};
}

}  // namespace

template <Scalar S>
void MsSystem::eval_pair(std::size_t i, const std::vector<double>& y,
                         int seed_col, S& r0, S& r1) const {
  const ProblemDef& p = *problem_;
  const std::size_t n = data_.size();
  const Regime own = own_[i];
  const Regime prev = incoming_regime(i);

  auto unknown = [&](int col) { return make_unknown<S>(y[col], col == seed_col); };

  // Value pair at knot i: one of (u, x) is the incoming unknown, the other
  // is mesh data; at the boundary both are data.
  S u_i = S(data_[i].u);
  S x_i = S(data_[i].x);
  if (value_col_[i] >= 0) {
    if (prev == Regime::Straight)
      u_i = unknown(value_col_[i]);
    else
      x_i = unknown(value_col_[i]);
  }
  const S slope_i = unknown(slope_col_[i]);

  StepResult<S> step;
  if (own == Regime::Straight) {
    const S coef_lin = p.eval_n_u(u_i, x_i) * slope_i + p.eval_n_x(u_i, x_i);
    const S coef_cst = p.eval_n(u_i, x_i);
    // x at knot i+1 is always data here: the step into it is straight.
    const double x_next = data_[i + 1].x;
    const S s_len = S(x_next) - x_i;
    StepArgs<S> args{coef_lin, coef_cst, slope_i, u_i, real_part(s_len)};
    const double tol = default_step_tol(step_norm(slope_i), step_norm(u_i),
                                        args.s);
    step = u_step(args, tol);
    // The step length itself can carry a seeded derivative (x_i unknown).
    const double s_der = deriv_part(s_len);
    if (s_der != 0.0) {
      const double upp = (real_part(coef_lin) * args.s + real_part(coef_cst)) *
                         real_part(step.value);
      step.value = with_der(step.value,
                            deriv_part(step.value) +
                                real_part(step.deriv_s) * s_der);
      step.deriv_s =
          with_der(step.deriv_s, deriv_part(step.deriv_s) + upp * s_der);
    }
  } else {
    const S xp2 = slope_i * slope_i;
    const S nv = p.eval_n(u_i, x_i);
    const S nscript = nv * u_i;
    const S coef_lin =
        ((p.eval_n_u(u_i, x_i) + p.eval_n_x(u_i, x_i) * slope_i) * u_i + nv) *
            (-1.0) * xp2 +
        2.0 * (nscript * nscript) * (xp2 * xp2);
    const S coef_cst = (-1.0) * nscript * xp2;
    const double u_next = data_[i + 1].u;
    const S s_len = S(u_next) - u_i;
    StepArgs<S> args{coef_lin, coef_cst, slope_i, x_i, real_part(s_len)};
    const double tol = v_step_tol(step_norm(slope_i), args.s);
    step = v_step(args, tol);
    const double s_der = deriv_part(s_len);
    if (s_der != 0.0) {
      const double vpp = (real_part(coef_lin) * args.s + real_part(coef_cst)) *
                         real_part(step.deriv_s);
      step.value = with_der(step.value,
                            deriv_part(step.value) +
                                real_part(step.deriv_s) * s_der);
      step.deriv_s =
          with_der(step.deriv_s, deriv_part(step.deriv_s) + vpp * s_der);
    }
  }

  // Value match.
  S rhs0;
  if (i + 1 == n - 1) {
    rhs0 = S(own == Regime::Straight ? data_[n - 1].u : data_[n - 1].x);
  } else {
    rhs0 = unknown(value_col_[i + 1]);
  }
  r0 = step.value - rhs0;

  // Slope match, with the reciprocal coupling across a regime change.
  const S slope_next = unknown(slope_col_[i + 1]);
  const Regime own_next = own_[i + 1];
  S rhs1 = (own == own_next) ? slope_next : S(1.0) / slope_next;
  r1 = step.deriv_s - rhs1;
}

std::vector<double> MsSystem::residual(const std::vector<double>& y) const {
  const std::size_t n = data_.size();
  std::vector<double> r(2 * (n - 1));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double r0, r1;
    eval_pair<double>(i, y, -1, r0, r1);
    r[2 * i] = r0;
    r[2 * i + 1] = r1;
  }
  return r;
}

void MsSystem::jacobian(const std::vector<double>& y, BandedMatrix& jac) const {
  const std::size_t n = data_.size();
  jac.clear();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    int cols[4] = {value_col_[i], slope_col_[i], value_col_[i + 1],
                   slope_col_[i + 1]};
    for (int c : cols) {
      if (c < 0) continue;
      Dual2 r0, r1;
      eval_pair<Dual2>(i, y, c, r0, r1);
      jac(static_cast<int>(2 * i), c) = r0.der;
      jac(static_cast<int>(2 * i + 1), c) = r1.der;
    }
  }
}

MsMesh MsSystem::apply_unknowns(const std::vector<double>& y) const {
  MsMesh mesh;
  mesh.points = data_;
  const std::size_t n = data_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (value_col_[i] >= 0) {
      if (incoming_regime(i) == Regime::Straight)
        mesh.points[i].u = y[value_col_[i]];
      else
        mesh.points[i].x = y[value_col_[i]];
    }
    const double s = y[slope_col_[i]];
    mesh.points[i].u_prime = own_[i] == Regime::Straight ? s : 1.0 / s;
  }
  return mesh;
}

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Newton steps that push a reciprocally-used slope through zero would blow
// the coupled equations up; they are rejected via the damping loop.
bool slope_crosses_zero(const MsSystem& sys, const std::vector<double>& y0,
                        const std::vector<double>& y1, std::size_t n_points) {
  for (std::size_t i = 0; i < n_points; ++i) {
    const int c = sys.slope_col(i);
    if (c < 0) continue;
    if (y0[c] * y1[c] <= 0.0) return true;
  }
  return false;
}

}  // namespace

SweepStats ms_newton_sweep(const ProblemDef& p, MsMesh& mesh) {
  MsSystem sys(p, mesh);
  const int n_unknowns = sys.unknown_count();
  std::vector<double> y = sys.initial_unknowns();
  std::vector<double> f = sys.residual(y);

  SweepStats stats;
  stats.residual_before = inf_norm(f);

  BandedMatrix jac(n_unknowns, sys.lower_bandwidth(), sys.upper_bandwidth());
  sys.jacobian(y, jac);
  std::vector<int> ipiv(n_unknowns);
  banded_lu_factor(jac, ipiv);
  std::vector<double> delta(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) delta[i] = -f[i];
  banded_lu_solve(jac, ipiv, delta);

  // Full step, halved up to 4 times if the residual grows or a slope used
  // in a reciprocal coupling changes sign.
  const std::size_t n_points = mesh.points.size();
  double eta = 1.0;
  std::vector<double> y_new(y.size());
  std::vector<double> f_new;
  for (int attempt = 0; attempt <= 4; ++attempt) {
    for (std::size_t i = 0; i < y.size(); ++i) y_new[i] = y[i] + eta * delta[i];
    if (!slope_crosses_zero(sys, y, y_new, n_points)) {
      f_new = sys.residual(y_new);
      if (inf_norm(f_new) <= stats.residual_before || attempt == 4) break;
    } else if (attempt == 4) {
      f_new = sys.residual(y_new);
      break;
    }
    eta *= 0.5;
    ++stats.halvings;
  }
  stats.residual_after = inf_norm(f_new);
  stats.update_norm = eta * inf_norm(delta);

  MsMesh next = sys.apply_unknowns(y_new);
  next.h_bold = mesh.h_bold;
  next.iteration = mesh.iteration + 1;

  // Sort by x, then drop knots breaking strict monotonicity (first of an
  // inverted pair wins; the pinned ends always survive).
  std::stable_sort(next.points.begin(), next.points.end(),
                   [](const MsPoint& a, const MsPoint& b) { return a.x < b.x; });
  std::vector<MsPoint> kept;
  kept.reserve(next.points.size());
  kept.push_back(next.points.front());
  for (std::size_t i = 1; i < next.points.size(); ++i) {
    const bool is_last = i + 1 == next.points.size();
    if (next.points[i].x > kept.back().x) {
      kept.push_back(next.points[i]);
    } else if (is_last) {
      // Never lose the right boundary; drop the offender before it instead.
      while (kept.size() > 1 && kept.back().x >= next.points[i].x) {
        kept.pop_back();
      }
      kept.push_back(next.points[i]);
    }
  }
  next.points = std::move(kept);
  refine_mesh(next);

  mesh = std::move(next);
  return stats;
}

MsResult ms_solve(const ProblemDef& p, double h_bold, MsMesh init,
                  double stop_tol, int max_sweeps) {
  init.h_bold = h_bold;
  refine_mesh(init);

  MsResult result;
  result.mesh = std::move(init);
  double prev_update = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const SweepStats stats = ms_newton_sweep(p, result.mesh);
    result.sweeps = sweep + 1;
    result.update_norm = stats.update_norm;
    result.residual_norm = stats.residual_after;
    if (stats.update_norm > 10.0 * prev_update && stats.update_norm > 1.0) {
      throw DivergenceError("newton update norm grew by more than 10x");
    }
    prev_update = std::max(stats.update_norm, 1e-300);
    if (stats.update_norm <= stop_tol) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

MsResult ms_solve_auto(const ProblemDef& p, double h_bold, double stop_tol,
                       int max_sweeps, const ShootingConfig* coarse_cfg) {
  ShootingConfig cfg;
  if (coarse_cfg) cfg = *coarse_cfg;
  cfg.h = std::min(10.0 * h_bold, 0.5);
  cfg.slope_lo = 0.0;
  cfg.slope_hi = std::max(1.0, p.u_right);
  const SimpleShootResult guess = simple_shoot(p, cfg);
  MsMesh init = mesh_from_trace(guess.trace, h_bold, p);
  return ms_solve(p, h_bold, std::move(init), stop_tol, max_sweeps);
}

}  // namespace sibvp
