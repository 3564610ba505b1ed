#include "sibvp/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sibvp/errors.hpp"

namespace sibvp {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku),
      a_(static_cast<std::size_t>(2 * kl + ku + 1) * n, 0.0) {}

void BandedMatrix::clear() { std::fill(a_.begin(), a_.end(), 0.0); }

void banded_lu_factor(BandedMatrix& m, std::span<int> ipiv) {
  const int n = m.n_;
  const int kl = m.kl_;
  const int ku = m.ku_;
  // Effective upper bandwidth after pivoting grows to kl + ku.
  const int kv = kl + ku;

  for (int j = 0; j < n; ++j) {
    // Pivot search in column j over rows j .. min(j + kl, n - 1).
    const int last = std::min(j + kl, n - 1);
    int piv = j;
    double best = std::abs(m(j, j));
    for (int i = j + 1; i <= last; ++i) {
      const double v = std::abs(m(i, j));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    ipiv[j] = piv;
    if (best == 0.0) {
      throw SingularJacobianError("zero pivot in banded LU at column " +
                                  std::to_string(j));
    }
    if (piv != j) {
      const int jmax = std::min(j + kv, n - 1);
      for (int c = j; c <= jmax; ++c) std::swap(m(j, c), m(piv, c));
    }
    const double inv = 1.0 / m(j, j);
    for (int i = j + 1; i <= last; ++i) {
      const double l = m(i, j) * inv;
      m(i, j) = l;
      const int jmax = std::min(j + kv, n - 1);
      for (int c = j + 1; c <= jmax; ++c) m(i, c) -= l * m(j, c);
    }
  }
}

void banded_lu_solve(const BandedMatrix& m, std::span<const int> ipiv,
                     std::span<double> b) {
  const int n = m.n_;
  const int kl = m.kl_;
  const int kv = m.kl_ + m.ku_;

  for (int j = 0; j < n; ++j) {
    if (ipiv[j] != j) std::swap(b[j], b[ipiv[j]]);
    const int last = std::min(j + kl, n - 1);
    for (int i = j + 1; i <= last; ++i) b[i] -= m(i, j) * b[j];
  }
  for (int i = n - 1; i >= 0; --i) {
    const int jmax = std::min(i + kv, n - 1);
    double acc = b[i];
    for (int j = i + 1; j <= jmax; ++j) acc -= m(i, j) * b[j];
    b[i] = acc / m(i, i);
  }
}

}  // namespace sibvp
