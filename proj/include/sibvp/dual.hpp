#pragma once

#include <cmath>
#include <concepts>
#include <ostream>

namespace sibvp {

/// First-order dual number: carries a value and one directional derivative.
///
/// Arithmetic agrees with the 2x2 upper-triangular matrices val*E + der*J,
/// where J is the nilpotent part of a Jordan block.  Seeding der = 1 on one
/// input of a computation and der = 0 on the others yields the partial
/// derivative of the result with respect to that input.
struct Dual2 {
  double val = 0.0;
  double der = 0.0;

  constexpr Dual2() = default;
  constexpr Dual2(double v) : val(v) {}  // reals embed with zero derivative
  constexpr Dual2(double v, double d) : val(v), der(d) {}

  constexpr Dual2& operator+=(const Dual2& o) {
    val += o.val;
    der += o.der;
    return *this;
  }
  constexpr Dual2& operator-=(const Dual2& o) {
    val -= o.val;
    der -= o.der;
    return *this;
  }
  constexpr Dual2& operator*=(const Dual2& o) {
    der = val * o.der + der * o.val;
    val = val * o.val;
    return *this;
  }
};

constexpr Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
constexpr Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
constexpr Dual2 operator-(const Dual2& a) { return {-a.val, -a.der}; }
constexpr Dual2 operator*(Dual2 a, const Dual2& b) { return a *= b; }
constexpr Dual2 operator*(const Dual2& a, double r) { return {a.val * r, a.der * r}; }
constexpr Dual2 operator*(double r, const Dual2& a) { return a * r; }

/// Quotient rule; the caller guarantees a nonzero denominator value.
constexpr Dual2 operator/(const Dual2& a, const Dual2& b) {
  const double v = a.val / b.val;
  return {v, (a.der - v * b.der) / b.val};
}
constexpr Dual2 operator/(const Dual2& a, double r) { return {a.val / r, a.der / r}; }
constexpr Dual2 operator/(double r, const Dual2& b) { return Dual2(r) / b; }

inline Dual2 exp(const Dual2& a) {
  const double e = std::exp(a.val);
  return {e, a.der * e};
}

inline std::ostream& operator<<(std::ostream& os, const Dual2& a) {
  return os << "(" << a.val << ", " << a.der << ")";
}

// double participates in the same generic code paths as Dual2.
inline double exp(double x) { return std::exp(x); }

constexpr double real_part(double x) { return x; }
constexpr double real_part(const Dual2& x) { return x.val; }

constexpr double deriv_part(double) { return 0.0; }
constexpr double deriv_part(const Dual2& x) { return x.der; }

/// Replaces the derivative lane, keeping the value; a no-op for reals.
constexpr double with_der(double v, double) { return v; }
constexpr Dual2 with_der(const Dual2& v, double d) { return {v.val, d}; }

/// Magnitude used by the series truncation bounds: |x| for reals,
/// max(|val|, |der|) for duals.
inline double step_norm(double x) { return std::abs(x); }
inline double step_norm(const Dual2& x) {
  return std::max(std::abs(x.val), std::abs(x.der));
}

/// Commutative algebra over the reals with exp, suitable for the step
/// function recurrences.  Real numbers and Dual2 both model it.
template <typename T>
concept Scalar = std::copyable<T> && requires(T a, T b, double r) {
  { a + b } -> std::convertible_to<T>;
  { a - b } -> std::convertible_to<T>;
  { a * b } -> std::convertible_to<T>;
  { a * r } -> std::convertible_to<T>;
  { a / r } -> std::convertible_to<T>;
  { -a } -> std::convertible_to<T>;
  { exp(a) } -> std::convertible_to<T>;
  { real_part(a) } -> std::convertible_to<double>;
  { step_norm(a) } -> std::convertible_to<double>;
  { T(r) };
};

static_assert(Scalar<double>);
static_assert(Scalar<Dual2>);

}  // namespace sibvp
