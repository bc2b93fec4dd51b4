#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "peaklab/common.hpp"

namespace peaklab {

/// Symmetric tridiagonal matrix: diag (n) and off-diagonal (n - 1).
template <typename Scalar>
struct SymTridiagonal {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector diag;
  Vector off;

  Eigen::Index size() const { return diag.size(); }
};

/// Number of eigenvalues of (T - shift * W) below zero, where W is a positive
/// diagonal weight (pass an empty vector for the identity). Sign count of the
/// LDL^T pivots; tiny pivots are replaced by -pivmin as in LAPACK's stebz.
template <typename Scalar>
int sturm_count(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& diag,
                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& off,
                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& weight, Scalar shift) {
  const Eigen::Index n = diag.size();
  const bool weighted = weight.size() == n;
  Scalar max_off2 = Scalar(1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) max_off2 = std::max(max_off2, off[i] * off[i]);
  const Scalar pivmin = std::numeric_limits<Scalar>::min() * max_off2;

  int count = 0;
  Scalar d = Scalar(1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar w = weighted ? weight[i] : Scalar(1);
    d = diag[i] - shift * w - (i > 0 ? off[i - 1] * off[i - 1] / d : Scalar(0));
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0) ++count;
  }
  return count;
}

template <typename Scalar>
int sturm_count(const SymTridiagonal<Scalar>& t, Scalar shift) {
  return sturm_count<Scalar>(t.diag, t.off, {}, shift);
}

template <typename Scalar>
struct Bracket {
  Scalar lo;
  Scalar hi;
  Scalar value() const { return Scalar(0.5) * (lo + hi); }
  Scalar width() const { return hi - lo; }
};

/// Gershgorin interval containing the whole spectrum of t.
template <typename Scalar>
Bracket<Scalar> gershgorin(const SymTridiagonal<Scalar>& t) {
  const Eigen::Index n = t.size();
  Scalar lo = std::numeric_limits<Scalar>::max();
  Scalar hi = std::numeric_limits<Scalar>::lowest();
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar r = Scalar(0);
    if (i > 0) r += std::abs(t.off[i - 1]);
    if (i + 1 < n) r += std::abs(t.off[i]);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  return {lo, hi};
}

/// Bisection for the k-th smallest eigenvalue (0-based) of t.
///
/// Midpoints are taken in asinh coordinates so a bracket spanning many
/// orders of magnitude (graded grids) collapses in logarithmically many
/// steps. Stops at width <= max(rel_tol * max|end|, abs_tol).
template <typename Scalar>
Bracket<Scalar> bisect_eigenvalue(const SymTridiagonal<Scalar>& t, int k, Scalar rel_tol,
                                  Scalar abs_tol) {
  require(k >= 0 && k < t.size(), "bisect_eigenvalue: index out of range");
  Bracket<Scalar> b = gershgorin(t);
  const Scalar pad = std::max(std::abs(b.lo), std::abs(b.hi)) *
                         Scalar(4) * std::numeric_limits<Scalar>::epsilon() +
                     std::numeric_limits<Scalar>::min();
  b.lo -= pad;
  b.hi += pad;
  for (int it = 0; it < 4000; ++it) {
    const Scalar width = b.hi - b.lo;
    const Scalar scale = std::max(std::abs(b.lo), std::abs(b.hi));
    if (width <= std::max(rel_tol * scale, abs_tol)) break;
    Scalar mid = std::sinh(Scalar(0.5) * (std::asinh(b.lo) + std::asinh(b.hi)));
    if (!(mid > b.lo && mid < b.hi)) mid = b.lo + Scalar(0.5) * width;
    if (!(mid > b.lo && mid < b.hi)) break;
    if (sturm_count(t, mid) <= k)
      b.lo = mid;
    else
      b.hi = mid;
  }
  return b;
}

}  // namespace peaklab
