#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "peaklab/common.hpp"

namespace peaklab {

/// Thrown when a factorization meets a pivot that is zero to working
/// precision; for A - sigma M this means sigma is (numerically) an eigenvalue.
class ZeroPivotError : public Error {
 public:
  using Error::Error;
};

struct Inertia {
  int negative = 0;
  int positive = 0;
};

/// Dense symmetric indefinite P^T S P = L D L^T with Bunch-Kaufman 1x1/2x2
/// pivoting (partial pivoting variant, alpha = (1 + sqrt 17) / 8).
template <typename Scalar>
class BunchKaufman {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BunchKaufman() = default;
  explicit BunchKaufman(const Matrix& s) { compute(s); }

  BunchKaufman& compute(const Matrix& s);

  Eigen::Index rows() const { return a_.rows(); }
  const Inertia& inertia() const { return inertia_; }

  /// Solves S X = B in place.
  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>& b) const;

  template <typename Derived>
  Matrix solve(const Eigen::MatrixBase<Derived>& b) const {
    Matrix x = b;
    solve_in_place(x);
    return x;
  }

 private:
  void swap_sym(Eigen::Index i, Eigen::Index j);

  Matrix a_;                  // L below the pivot blocks, D on them
  std::vector<Eigen::Index> perm_;
  std::vector<int> pivot_size_;  // 1 or 2 at the first index of each block, 0 elsewhere
  Inertia inertia_;
};

template <typename Scalar>
void BunchKaufman<Scalar>::swap_sym(Eigen::Index i, Eigen::Index j) {
  if (i == j) return;
  a_.row(i).swap(a_.row(j));
  a_.col(i).swap(a_.col(j));
  std::swap(perm_[static_cast<size_t>(i)], perm_[static_cast<size_t>(j)]);
}

template <typename Scalar>
BunchKaufman<Scalar>& BunchKaufman<Scalar>::compute(const Matrix& s) {
  using std::abs;
  using std::sqrt;
  require(s.rows() == s.cols(), "BunchKaufman: matrix must be square");
  const Eigen::Index n = s.rows();
  a_ = s;
  perm_.resize(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm_[static_cast<size_t>(i)] = i;
  pivot_size_.assign(static_cast<size_t>(n), 0);
  inertia_ = {};

  const Scalar bk_alpha = (Scalar(1) + sqrt(Scalar(17))) / Scalar(8);
  const Scalar scale = n > 0 ? s.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar tiny = Scalar(4) * Scalar(n) * std::numeric_limits<Scalar>::epsilon() * scale;

  Eigen::Index k = 0;
  while (k < n) {
    const Eigen::Index m = n - k - 1;
    const Scalar absakk = abs(a_(k, k));
    Eigen::Index imax = k;
    Scalar colmax(0);
    if (m > 0) {
      colmax = a_.col(k).tail(m).cwiseAbs().maxCoeff(&imax);
      imax += k + 1;
    }
    if (!(std::max(absakk, colmax) > tiny))
      throw ZeroPivotError("zero pivot in symmetric indefinite factorization; nudge the shift");

    int size = 1;
    Eigen::Index kp = k;
    if (absakk < bk_alpha * colmax) {
      Scalar rowmax(0);
      for (Eigen::Index j = k; j < n; ++j)
        if (j != imax) rowmax = std::max(rowmax, abs(a_(imax, j)));
      if (absakk * rowmax >= bk_alpha * colmax * colmax) {
        kp = k;
      } else if (abs(a_(imax, imax)) >= bk_alpha * rowmax) {
        kp = imax;
      } else {
        size = 2;
        kp = imax;
      }
    }

    if (size == 1) {
      swap_sym(k, kp);
      const Scalar d = a_(k, k);
      if (!(abs(d) > tiny))
        throw ZeroPivotError("zero pivot in symmetric indefinite factorization; nudge the shift");
      (d < 0 ? inertia_.negative : inertia_.positive) += 1;
      if (m > 0) {
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c = a_.col(k).tail(m);
        a_.bottomRightCorner(m, m).noalias() -= c * c.transpose() / d;
        a_.col(k).tail(m) = c / d;
      }
      pivot_size_[static_cast<size_t>(k)] = 1;
      k += 1;
    } else {
      swap_sym(k + 1, kp);
      const Scalar d11 = a_(k, k), d21 = a_(k + 1, k), d22 = a_(k + 1, k + 1);
      const Scalar det = d11 * d22 - d21 * d21;
      if (!(abs(det) > tiny * tiny))
        throw ZeroPivotError("singular 2x2 pivot in symmetric indefinite factorization; nudge the shift");
      if (det < 0) {
        inertia_.negative += 1;
        inertia_.positive += 1;
      } else {
        (d11 + d22 < 0 ? inertia_.negative : inertia_.positive) += 2;
      }
      const Eigen::Index r = n - k - 2;
      if (r > 0) {
        Eigen::Matrix<Scalar, 2, 2> dinv;
        dinv << d22, -d21, -d21, d11;
        dinv /= det;
        const Matrix c = a_.block(k + 2, k, r, 2);
        const Matrix l = c * dinv;
        a_.bottomRightCorner(r, r).noalias() -= l * c.transpose();
        a_.block(k + 2, k, r, 2) = l;
      }
      pivot_size_[static_cast<size_t>(k)] = 2;
      k += 2;
    }
  }
  return *this;
}

template <typename Scalar>
template <typename Derived>
void BunchKaufman<Scalar>::solve_in_place(Eigen::MatrixBase<Derived>& b) const {
  const Eigen::Index n = a_.rows();
  require(b.rows() == n, "BunchKaufman: right-hand side has wrong size");
  Matrix y(n, b.cols());
  for (Eigen::Index i = 0; i < n; ++i) y.row(i) = b.row(perm_[static_cast<size_t>(i)]);

  for (Eigen::Index k = 0; k < n;) {
    const int size = pivot_size_[static_cast<size_t>(k)];
    const Eigen::Index r = n - k - size;
    if (r > 0) y.bottomRows(r).noalias() -= a_.block(k + size, k, r, size) * y.middleRows(k, size);
    k += size;
  }
  for (Eigen::Index k = 0; k < n;) {
    const int size = pivot_size_[static_cast<size_t>(k)];
    if (size == 1) {
      y.row(k) /= a_(k, k);
    } else {
      const Scalar d11 = a_(k, k), d21 = a_(k + 1, k), d22 = a_(k + 1, k + 1);
      const Scalar det = d11 * d22 - d21 * d21;
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        const Scalar y1 = y(k, c), y2 = y(k + 1, c);
        y(k, c) = (d22 * y1 - d21 * y2) / det;
        y(k + 1, c) = (d11 * y2 - d21 * y1) / det;
      }
    }
    k += size;
  }
  std::vector<Eigen::Index> starts;
  for (Eigen::Index k = 0; k < n; k += pivot_size_[static_cast<size_t>(k)]) starts.push_back(k);
  for (auto it = starts.rbegin(); it != starts.rend(); ++it) {
    const Eigen::Index k = *it;
    const int size = pivot_size_[static_cast<size_t>(k)];
    const Eigen::Index r = n - k - size;
    if (r > 0)
      y.middleRows(k, size).noalias() -= a_.block(k + size, k, r, size).transpose() * y.bottomRows(r);
  }
  for (Eigen::Index i = 0; i < n; ++i) b.row(perm_[static_cast<size_t>(i)]) = y.row(i);
}

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern:
/// perm[new] = old.
std::vector<int> reverse_cuthill_mckee(const Eigen::SparseMatrix<double, Eigen::RowMajor>& pattern);

/// Half-bandwidth max |perm^-1(i) - perm^-1(j)| over stored entries.
int bandwidth(const Eigen::SparseMatrix<double, Eigen::RowMajor>& pattern,
              const std::vector<int>& perm);

/// Sparse symmetric indefinite factorization. The matrix is reordered to a
/// narrow band (RCM or natural, whichever is narrower), cut into a block
/// tridiagonal matrix with blocks of the bandwidth, and factored by block
/// LDL^T whose diagonal Schur complements use BunchKaufman. The inertia is the
/// sum of the block inertias.
class SparseLDLT {
 public:
  using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SparseLDLT() = default;
  explicit SparseLDLT(const SparseRow& K) { compute(K); }

  SparseLDLT& compute(const SparseRow& K);

  const Inertia& inertia() const { return inertia_; }
  int bandwidth() const { return band_; }
  Eigen::Index rows() const { return n_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& r) const;

 private:
  Eigen::Index n_ = 0;
  int band_ = 0;
  std::vector<int> perm_;
  std::vector<Eigen::Index> offset_;
  std::vector<BunchKaufman<double>> schur_;
  std::vector<Eigen::MatrixXd> lower_;  // B_i = K_{i,i-1}
  std::vector<Eigen::MatrixXd> w_;      // W_i = S_i^{-1} K_{i,i+1}
  Inertia inertia_;
};

}  // namespace peaklab
