#include "peaklab/eigsolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <limits>

#include <Eigen/Eigenvalues>

#include "peaklab/common.hpp"
#include "peaklab/ldlt.hpp"

namespace peaklab {

namespace {

double norm1(const SparseRow& A) {
  // symmetric, so the max column sum equals the max row sum
  double best = 0.0;
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    double sum = 0.0;
    for (SparseRow::InnerIterator it(A, r); it; ++it) sum += std::abs(it.value());
    best = std::max(best, sum);
  }
  return best;
}

SparseRow shifted(const SymmetricPencil& p, double sigma) {
  SparseRow K = p.A - sigma * p.M;
  K.makeCompressed();
  return K;
}

struct LanczosResult {
  Eigen::VectorXd theta;  // descending
  Eigen::MatrixXd Y;      // M-orthonormal Ritz vectors
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

// Thick-restart Lanczos for T = K^{-1} M in the M inner product, restricted
// to the M-orthogonal complement of the columns of X. Returns the `want`
// largest Ritz values.
class Lanczos {
 public:
  Lanczos(const SparseLDLT& fac, const SparseRow& M, const Eigen::MatrixXd& X, std::mt19937_64& rng)
      : fac_(fac), M_(M), X_(X), MX_(M * X), rng_(rng) {}

  LanczosResult run(int want, int m, double tol, int max_restarts) {
    const Eigen::Index n = M_.rows();
    const Eigen::Index avail = n - X_.cols();
    require(want <= avail, "lanczos: not enough room in the search space");
    m = static_cast<int>(std::min<Eigen::Index>(m, avail));
    m = std::max(m, want);

    V_.setZero(n, m + 1);
    MV_.setZero(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    if (!fresh_vector(0)) throw Error("lanczos: cannot build a start vector");

    LanczosResult out;
    int kept = 0;
    for (int restart = 0;; ++restart) {
      int m_eff = m;
      for (int j = kept; j < m; ++j) {
        Eigen::VectorXd w = fac_.solve(MV_.col(j));
        ++out.iterations;
        const Eigen::VectorXd h = orthogonalize(w, j + 1);
        H.col(j).head(j + 1) = h;
        const double beta = std::sqrt(std::max(0.0, w.dot(M_ * w)));
        if (j + 1 == m) {
          if (beta > 0.0) {
            V_.col(m) = w / beta;
            MV_.col(m) = M_ * V_.col(m);
          }
          H(m, m - 1) = beta;
          break;
        }
        if (beta <= 1e-13 * h.cwiseAbs().maxCoeff()) {
          // invariant subspace: continue with a fresh direction
          H(j + 1, j) = 0.0;
          if (j + 1 >= avail || !fresh_vector(j + 1)) {
            m_eff = j + 1;
            break;
          }
          continue;
        }
        V_.col(j + 1) = w / beta;
        MV_.col(j + 1) = M_ * V_.col(j + 1);
        H(j + 1, j) = beta;
      }

      Eigen::MatrixXd S = H.topLeftCorner(m_eff, m_eff);
      S = (0.5 * (S + S.transpose())).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
      const Eigen::VectorXd& theta = es.eigenvalues();  // ascending
      const Eigen::MatrixXd& Z = es.eigenvectors();
      const double beta = m_eff == m ? H(m, m - 1) : 0.0;

      // Rounding in the solves leaves a residual floor proportional to the
      // largest Ritz value, which dominates when the shift hugs lambda_1.
      bool converged = true;
      const int w_count = std::min(want, m_eff);
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * theta.cwiseAbs().maxCoeff();
      for (int i = 0; i < w_count; ++i) {
        const Eigen::Index c = m_eff - 1 - i;
        if (std::abs(beta * Z(m_eff - 1, c)) > tol * std::abs(theta[c]) + floor) converged = false;
      }
      if (converged || restart >= max_restarts || m_eff < m) {
        out.converged = converged && w_count == want;
        out.restarts = restart;
        out.theta.resize(w_count);
        out.Y.resize(n, w_count);
        for (int i = 0; i < w_count; ++i) {
          const Eigen::Index c = m_eff - 1 - i;
          out.theta[i] = theta[c];
          out.Y.col(i) = V_.leftCols(m_eff) * Z.col(c);
        }
        return out;
      }

      // Keep the leading Ritz vectors; the old residual direction follows them.
      kept = std::min(m - 2, want + (m - want) / 2);
      kept = std::max(kept, std::min(want, m - 1));
      Eigen::MatrixXd Zk(m, kept);
      Eigen::VectorXd tk(kept);
      for (int i = 0; i < kept; ++i) {
        Zk.col(i) = Z.col(m - 1 - i);
        tk[i] = theta[m - 1 - i];
      }
      const Eigen::MatrixXd Vk = V_.leftCols(m) * Zk;
      const Eigen::MatrixXd MVk = MV_.leftCols(m) * Zk;
      const Eigen::VectorXd vres = V_.col(m), mvres = MV_.col(m);
      V_.leftCols(kept) = Vk;
      MV_.leftCols(kept) = MVk;
      V_.col(kept) = vres;
      MV_.col(kept) = mvres;
      H.setZero();
      for (int i = 0; i < kept; ++i) {
        H(i, i) = tk[i];
        H(kept, i) = beta * Zk(m - 1, i);
      }
    }
  }

 private:
  // Two passes of classical Gram-Schmidt against X and V[:, 0:j].
  Eigen::VectorXd orthogonalize(Eigen::VectorXd& w, int j) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(j);
    for (int pass = 0; pass < 2; ++pass) {
      if (X_.cols() > 0) w.noalias() -= X_ * (MX_.transpose() * w);
      const Eigen::VectorXd h = MV_.leftCols(j).transpose() * w;
      w.noalias() -= V_.leftCols(j) * h;
      total += h;
    }
    return total;
  }

  bool fresh_vector(int j) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int attempt = 0; attempt < 3; ++attempt) {
      Eigen::VectorXd v(M_.rows());
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng_);
      const double before = std::sqrt(v.dot(M_ * v));
      orthogonalize(v, j);
      const double norm = std::sqrt(std::max(0.0, v.dot(M_ * v)));
      if (norm > 1e-8 * before) {
        V_.col(j) = v / norm;
        MV_.col(j) = M_ * V_.col(j);
        return true;
      }
    }
    return false;
  }

  const SparseLDLT& fac_;
  const SparseRow& M_;
  const Eigen::MatrixXd& X_;
  Eigen::MatrixXd MX_;
  std::mt19937_64& rng_;
  Eigen::MatrixXd V_, MV_;
};

// Inertia with up to three nudges of sigma on zero pivots; returns the
// count and updates sigma to the value actually used.
int robust_inertia(const SymmetricPencil& p, double& sigma, double nudge) {
  for (int attempt = 0;; ++attempt) {
    try {
      return inertia_count(p, sigma);
    } catch (const ZeroPivotError&) {
      if (attempt >= 3) throw;
      sigma -= nudge * (attempt + 1);
    }
  }
}

// A shift with no eigenvalue below it, pushed toward lambda_1 from below
// until the bracket is a tenth of |lambda_1| (or of the initial step).
double auto_shift(const SymmetricPencil& p, double upper) {
  double rho_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    const double r = std::abs(p.A.coeff(i, i)) / p.M.coeff(i, i);
    if (r > 0.0) rho_min = std::min(rho_min, r);
  }
  if (!std::isfinite(rho_min)) rho_min = 1.0;
  const double step0 = std::max(std::abs(upper), 1e-4 * rho_min);
  auto count_at = [&](double s) {
    try {
      return inertia_count(p, s);
    } catch (const ZeroPivotError&) {
      return 1;  // treat as "not below"
    }
  };
  double step = step0;
  double hi = upper;
  double lo = upper - 0.25 * step;
  for (int it = 0; count_at(lo) > 0; ++it) {
    require(it < 200, "auto shift: no eigenvalue-free shift found");
    hi = lo;
    step *= 4.0;
    lo = upper - step;
  }
  for (int it = 0; it < 40 && hi - lo > 0.1 * std::max(std::abs(lo), step0); ++it) {
    const double mid = 0.5 * (lo + hi);
    (count_at(mid) == 0 ? lo : hi) = mid;
  }
  return lo;
}

struct Pair {
  double lambda;
  Eigen::VectorXd x;
};

}  // namespace

double relative_residual(const SymmetricPencil& p, double lambda, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r = p.A * x - lambda * (p.M * x);
  const double scale = (norm1(p.A) + std::abs(lambda) * norm1(p.M)) * x.norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

int inertia_count(const SymmetricPencil& pencil, double sigma) {
  require(std::isfinite(sigma), "inertia_count: shift must be finite");
  SparseLDLT fac(shifted(pencil, sigma));
  return fac.inertia().negative;
}

Spectrum dense_eigs(const SymmetricPencil& pencil, int k, bool vectors) {
  const Eigen::Index n = pencil.dim();
  require(k >= 1 && k <= n, "dense_eigs: k must lie in [1, n]");
  require(n <= 4000, "dense_eigs: pencil too large for the dense solver");
  const Eigen::MatrixXd A = Eigen::MatrixXd(pencil.A);
  const Eigen::MatrixXd M = Eigen::MatrixXd(pencil.M);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  require(llt.info() == Eigen::Success, "dense_eigs: mass matrix is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M, Eigen::ComputeEigenvectors);
  require(es.info() == Eigen::Success, "dense_eigs: eigensolver failed");
  Spectrum out;
  out.values = es.eigenvalues().head(k);
  out.residuals.resize(k);
  for (int i = 0; i < k; ++i)
    out.residuals[i] = relative_residual(pencil, out.values[i], es.eigenvectors().col(i));
  if (vectors) out.vectors = es.eigenvectors().leftCols(k);
  out.info.method = "dense-generalized";
  if (k < n) {
    out.info.certificate_shift = 0.5 * (es.eigenvalues()[k - 1] + es.eigenvalues()[k]);
    try {
      out.info.inertia_below = inertia_count(pencil, out.info.certificate_shift);
    } catch (const ZeroPivotError&) {
      out.info.inertia_below = -1;
    }
  }
  return out;
}

Spectrum smallest_eigs(const SymmetricPencil& pencil, const EigOptions& o) {
  const Eigen::Index n = pencil.dim();
  require(o.k >= 1 && o.k <= n, "smallest_eigs: k must lie in [1, n]");
  require(o.tol > 0.0, "smallest_eigs: tol must be positive");
  const bool use_dense = o.method == EigMethod::dense ||
                         (o.method == EigMethod::automatic && n <= o.dense_limit) || o.k + 1 > n;
  if (use_dense) return dense_eigs(pencil, o.k, o.vectors);
  require(mass_positive_definite(pencil), "smallest_eigs: mass matrix is not positive definite");

  const double upper = rayleigh(pencil, Eigen::VectorXd::Ones(n));
  double sigma = std::isnan(o.shift) ? auto_shift(pencil, upper) : o.shift;
  const double nudge = 1e-7 * std::max(1.0, std::abs(sigma));
  if (robust_inertia(pencil, sigma, nudge) > 0) sigma = auto_shift(pencil, sigma);

  SparseLDLT fac;
  for (int attempt = 0;; ++attempt) {
    try {
      fac.compute(shifted(pencil, sigma));
      break;
    } catch (const ZeroPivotError&) {
      require(attempt < 3, "smallest_eigs: factorization broke down after 3 shift perturbations");
      sigma -= nudge * (attempt + 1);
    }
  }

  const int m = o.krylov_dim > 0 ? o.krylov_dim : std::max(2 * (o.k + 1) + 10, 30);
  std::mt19937_64 rng(o.seed);
  Spectrum out;
  out.info.method = "shift-invert-lanczos";
  out.info.shift = sigma;

  std::vector<Pair> found;
  double inner_tol = 0.1 * o.tol;
  for (int round = 0; round < 8; ++round) {
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(found.size()));
    for (size_t i = 0; i < found.size(); ++i) X.col(static_cast<Eigen::Index>(i)) = found[i].x;
    const int want = static_cast<int>(std::min<Eigen::Index>(o.k + 1 - static_cast<int>(found.size()) > 0
                                                                 ? o.k + 1 - static_cast<int>(found.size())
                                                                 : 1,
                                                             n - X.cols()));
    Lanczos lanczos(fac, pencil.M, X, rng);
    const LanczosResult r = lanczos.run(want, m, inner_tol, o.max_restarts);
    out.info.iterations += r.iterations;
    out.info.restarts += r.restarts;
    require(r.converged, "smallest_eigs: Lanczos did not converge within " +
                             std::to_string(o.max_restarts) + " restarts");
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) {
      require(r.theta[i] > 0.0, "smallest_eigs: shift is not below the spectrum");
      found.push_back({sigma + 1.0 / r.theta[i], r.Y.col(i)});
    }
    std::sort(found.begin(), found.end(), [](const Pair& a, const Pair& b) { return a.lambda < b.lambda; });

    bool residuals_ok = true;
    for (int i = 0; i < std::min<int>(o.k, static_cast<int>(found.size())); ++i)
      if (relative_residual(pencil, found[static_cast<size_t>(i)].lambda, found[static_cast<size_t>(i)].x) > o.tol)
        residuals_ok = false;
    if (!residuals_ok) {
      // tighten and start over from the same shift
      found.clear();
      inner_tol *= 0.01;
      require(inner_tol > 1e-16, "smallest_eigs: residual tolerance unattainable");
      continue;
    }
    if (static_cast<int>(found.size()) < o.k + 1) continue;

    found.resize(static_cast<size_t>(o.k + 1));
    double cert = 0.5 * (found[static_cast<size_t>(o.k - 1)].lambda + found[static_cast<size_t>(o.k)].lambda);
    const double gap = found[static_cast<size_t>(o.k)].lambda - found[static_cast<size_t>(o.k - 1)].lambda;
    const int count = robust_inertia(pencil, cert, 1e-3 * std::max(gap, 1e-300));
    out.info.certificate_shift = cert;
    out.info.inertia_below = count;
    if (count == o.k) break;
    require(count > o.k, "smallest_eigs: inertia reports fewer eigenvalues than computed");
    // The Krylov space missed some eigenvalues below cert; search the
    // complement of what we have.
    if (round == 7) throw Error("smallest_eigs: count certificate failed");
  }
  require(out.info.inertia_below == o.k, "smallest_eigs: count certificate failed");

  out.values.resize(o.k);
  out.residuals.resize(o.k);
  if (o.vectors) out.vectors.resize(n, o.k);
  for (int i = 0; i < o.k; ++i) {
    const Pair& p = found[static_cast<size_t>(i)];
    out.values[i] = p.lambda;
    out.residuals[i] = relative_residual(pencil, p.lambda, p.x);
    if (o.vectors) out.vectors.col(i) = p.x;
  }
  return out;
}

}  // namespace peaklab
