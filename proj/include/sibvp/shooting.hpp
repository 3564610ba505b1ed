#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sibvp/banded.hpp"
#include "sibvp/ivp.hpp"
#include "sibvp/problem.hpp"

namespace sibvp {

struct ShootingConfig {
  double h = 1e-4;
  double slope_lo = 0.0;
  double slope_hi = 1.0;
  // With the default the bisection runs down to the floating-point floor of
  // the bracket, which is what table reproduction needs.
  double residual_tol = 1e-300;
  int max_bisections = 2000;
  double u_cap = std::numeric_limits<double>::quiet_NaN();  // NaN -> default
  std::vector<double> stations;
};

struct SimpleShootResult {
  double slope0 = 0.0;
  IvpTrace trace;  // full march at slope0, stations sampled
  int bisections = 0;
  double residual = 0.0;  // u(b) - u_right at slope0
};

/// Bisection on the initial slope: a trial march classifies as overshoot
/// when it blows up (u_cap or overflow) or lands above u_right, undershoot
/// when it lands below.  The bracket must straddle.
SimpleShootResult simple_shoot(const ProblemDef& p, const ShootingConfig& cfg);

/// One multiple-shooting mesh row.  u_prime is always the straight slope;
/// the inverse slope is its reciprocal.
struct MsPoint {
  double u_prime = 0.0;
  double u = 0.0;
  double x = 0.0;
};

struct MsMesh {
  std::vector<MsPoint> points;
  double h_bold = 0.0;  // max admissible gap in x and in u
  int iteration = 0;
};

/// Matching system for one mesh: two equations per interval, a value match
/// and a slope match, each dispatched on the regimes of the interval ends.
/// Unknowns per knot: the value written by the incoming step (u after a
/// straight step, x after an inverse one) and the slope in the knot's own
/// regime; boundary knots contribute their slope only.
class MsSystem {
 public:
  MsSystem(const ProblemDef& p, const MsMesh& mesh);

  int unknown_count() const { return n_unknowns_; }
  int lower_bandwidth() const { return 2; }
  int upper_bandwidth() const { return 1; }

  std::vector<double> initial_unknowns() const;
  std::vector<double> residual(const std::vector<double>& y) const;
  void jacobian(const std::vector<double>& y, BandedMatrix& jac) const;

  /// Own regime of the step launched from knot i (selects the U or V branch).
  Regime step_regime(std::size_t i) const { return own_[i]; }
  /// Regime of the step arriving at knot i (selects which value is unknown).
  Regime incoming_regime(std::size_t i) const { return own_[i == 0 ? 0 : i - 1]; }

  int slope_col(std::size_t i) const { return slope_col_[i]; }
  int value_col(std::size_t i) const { return value_col_[i]; }  // -1 at ends

  /// Writes the unknowns back into a copy of the mesh (no sorting here).
  MsMesh apply_unknowns(const std::vector<double>& y) const;

 private:
  template <Scalar S>
  void eval_pair(std::size_t i, const std::vector<double>& y, int seed_col,
                 S& r0, S& r1) const;

  const ProblemDef* problem_;
  std::vector<MsPoint> data_;
  std::vector<Regime> own_;
  std::vector<int> value_col_;
  std::vector<int> slope_col_;
  int n_unknowns_ = 0;
};

MsSystem ms_build_system(const ProblemDef& p, const MsMesh& mesh);

/// Builds an initial mesh from a march, pinning the ends to the boundary
/// data, then refining the gaps to h_bold.
MsMesh mesh_from_trace(const IvpTrace& trace, double h_bold,
                       const ProblemDef& p);

/// Inserts linearly interpolated knots until max(dx, du) <= h_bold on every
/// interval.  Compliant meshes pass through unchanged.
void refine_mesh(MsMesh& mesh);

struct SweepStats {
  double update_norm = 0.0;       // max |Newton update| over the unknowns
  double residual_before = 0.0;   // max |sigma| entering the sweep
  double residual_after = 0.0;
  int halvings = 0;               // damping events
};

/// One generalized-Newton iteration: assemble, banded solve, damped update,
/// write-back, sort, drop non-monotone knots, refine.
SweepStats ms_newton_sweep(const ProblemDef& p, MsMesh& mesh);

struct MsResult {
  MsMesh mesh;
  int sweeps = 0;
  double update_norm = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
};

/// Sweeps until the update norm drops below stop_tol.  A non-converged
/// result carries the last mesh and norms.
MsResult ms_solve(const ProblemDef& p, double h_bold, MsMesh init,
                  double stop_tol, int max_sweeps);

/// Convenience driver: initial guess from simple shooting at 10*h_bold.
MsResult ms_solve_auto(const ProblemDef& p, double h_bold, double stop_tol,
                       int max_sweeps, const ShootingConfig* coarse_cfg = nullptr);

}  // namespace sibvp
