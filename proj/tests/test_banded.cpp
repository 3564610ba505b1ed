#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sibvp/banded.hpp"
#include "sibvp/errors.hpp"

namespace {

// Dense Gaussian elimination with partial pivoting, the oracle.
std::vector<double> dense_solve(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int j = 0; j < n; ++j) {
    int piv = j;
    for (int i = j + 1; i < n; ++i) {
      if (std::abs(a[i][j]) > std::abs(a[piv][j])) piv = i;
    }
    std::swap(a[j], a[piv]);
    std::swap(b[j], b[piv]);
    for (int i = j + 1; i < n; ++i) {
      const double f = a[i][j] / a[j][j];
      for (int c = j; c < n; ++c) a[i][c] -= f * a[j][c];
      b[i] -= f * b[j];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace

TEST_CASE("banded LU matches dense elimination on random systems") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    const int kl = static_cast<int>(rng() % 3);
    const int ku = static_cast<int>(rng() % 3);

    sibvp::BandedMatrix m(n, kl, ku);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
        const double v = dist(rng) + (i == j ? 3.0 : 0.0);
        m(i, j) = v;
        dense[i][j] = v;
      }
    }
    std::vector<double> b(n);
    for (double& v : b) v = dist(rng);

    std::vector<double> x = b;
    std::vector<int> ipiv(n);
    banded_lu_factor(m, ipiv);
    banded_lu_solve(m, ipiv, x);

    const std::vector<double> want = dense_solve(dense, b);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(x[i] - want[i]) <= 1e-10 * std::max(1.0, std::abs(want[i])));
    }
  }
}

TEST_CASE("pivoting handles a zero diagonal") {
  // [[0, 1], [1, 0]] needs the row swap.
  sibvp::BandedMatrix m(2, 1, 1);
  m(0, 0) = 0.0;
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  m(1, 1) = 0.0;
  std::vector<int> ipiv(2);
  banded_lu_factor(m, ipiv);
  std::vector<double> b = {2.0, 3.0};
  banded_lu_solve(m, ipiv, b);
  CHECK(b[0] == doctest::Approx(3.0));
  CHECK(b[1] == doctest::Approx(2.0));
}

TEST_CASE("singular matrix is reported") {
  sibvp::BandedMatrix m(3, 1, 1);
  m(0, 0) = 1.0;
  m(1, 1) = 0.0;  // whole column zero within the band
  m(2, 2) = 1.0;
  std::vector<int> ipiv(3);
  CHECK_THROWS_AS(banded_lu_factor(m, ipiv), sibvp::SingularJacobianError);
}
