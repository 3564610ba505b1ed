#pragma once

#include <span>
#include <vector>

namespace sibvp {

/// Square banded matrix with kl sub- and ku super-diagonals, stored
/// LAPACK-style with kl extra rows for the pivoting fill-in.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  /// Element (i, j); the caller must keep |i - j| within the band.
  double& operator()(int i, int j) { return a_[idx(i, j)]; }
  double operator()(int i, int j) const { return a_[idx(i, j)]; }

  bool in_band(int i, int j) const {
    return j - i <= ku_ && i - j <= kl_;
  }

  void clear();

 private:
  friend void banded_lu_factor(BandedMatrix&, std::span<int>);
  friend void banded_lu_solve(const BandedMatrix&, std::span<const int>,
                              std::span<double>);

  // Row 0 of the storage is the outermost fill-in diagonal; element (i, j)
  // lives at storage row kl + ku + i - j.
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(kl_ + ku_ + i - j) * n_ + j;
  }

  int n_, kl_, ku_;
  std::vector<double> a_;
};

/// In-place LU with partial pivoting confined to the band; ipiv must have
/// size n.  Throws SingularJacobianError on an exactly zero pivot.
void banded_lu_factor(BandedMatrix& m, std::span<int> ipiv);

/// Solves with a factored matrix; b is overwritten by the solution.
void banded_lu_solve(const BandedMatrix& m, std::span<const int> ipiv,
                     std::span<double> b);

}  // namespace sibvp
