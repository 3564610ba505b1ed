#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace sibvp {

/// Adaptive Simpson integration to a relative/absolute tolerance mix.
/// Recursion depth is capped; smooth integrands reach the tolerance long
/// before the cap.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol);

/// Composite Gauss-Legendre with fixed nodes per panel (node count chosen
/// at construction, default 32).
class GaussRule {
 public:
  explicit GaussRule(int nodes = 32);

  double integrate(const std::function<double(double)>& f, double a,
                   double b) const;

  template <typename F>
  double apply(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      acc += weights_[i] * f(mid + half * nodes_[i]);
    }
    return acc * half;
  }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace sibvp
