#include "peaklab/ldlt.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>

namespace peaklab {

namespace {

using Adjacency = std::vector<std::vector<int>>;

Adjacency adjacency(const SparseLDLT::SparseRow& A) {
  Adjacency adj(static_cast<size_t>(A.rows()));
  for (Eigen::Index r = 0; r < A.outerSize(); ++r)
    for (SparseLDLT::SparseRow::InnerIterator it(A, r); it; ++it)
      if (it.col() != r) {
        adj[static_cast<size_t>(r)].push_back(static_cast<int>(it.col()));
        adj[static_cast<size_t>(it.col())].push_back(static_cast<int>(r));
      }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

// BFS levels from `root` restricted to unvisited nodes; returns the last level.
std::vector<int> last_level(const Adjacency& adj, int root, const std::vector<char>& done,
                            int& depth) {
  std::vector<int> level(adj.size(), -1);
  std::vector<int> frontier{root}, last;
  level[static_cast<size_t>(root)] = 0;
  depth = 0;
  while (!frontier.empty()) {
    last = frontier;
    std::vector<int> next;
    for (int v : frontier)
      for (int w : adj[static_cast<size_t>(v)])
        if (!done[static_cast<size_t>(w)] && level[static_cast<size_t>(w)] < 0) {
          level[static_cast<size_t>(w)] = level[static_cast<size_t>(v)] + 1;
          next.push_back(w);
        }
    if (!next.empty()) ++depth;
    frontier.swap(next);
  }
  return last;
}

int pseudo_peripheral(const Adjacency& adj, int start, const std::vector<char>& done) {
  int root = start, depth = 0;
  std::vector<int> last = last_level(adj, root, done, depth);
  for (int guard = 0; guard < 16; ++guard) {
    int best = last.front();
    for (int v : last)
      if (adj[static_cast<size_t>(v)].size() < adj[static_cast<size_t>(best)].size()) best = v;
    int new_depth = 0;
    std::vector<int> new_last = last_level(adj, best, done, new_depth);
    if (new_depth <= depth) break;
    root = best;
    depth = new_depth;
    last = std::move(new_last);
  }
  return root;
}

}  // namespace

std::vector<int> reverse_cuthill_mckee(const SparseLDLT::SparseRow& pattern) {
  const Adjacency adj = adjacency(pattern);
  const size_t n = adj.size();
  std::vector<char> done(n, 0);
  std::vector<int> order;
  order.reserve(n);
  auto degree = [&](int v) { return adj[static_cast<size_t>(v)].size(); };
  while (order.size() < n) {
    int start = -1;
    for (size_t v = 0; v < n; ++v)
      if (!done[v] && (start < 0 || degree(static_cast<int>(v)) < degree(start))) start = static_cast<int>(v);
    const int root = pseudo_peripheral(adj, start, done);
    std::queue<int> queue;
    queue.push(root);
    done[static_cast<size_t>(root)] = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop();
      order.push_back(v);
      std::vector<int> next;
      for (int w : adj[static_cast<size_t>(v)])
        if (!done[static_cast<size_t>(w)]) {
          done[static_cast<size_t>(w)] = 1;
          next.push_back(w);
        }
      std::stable_sort(next.begin(), next.end(), [&](int x, int y) { return degree(x) < degree(y); });
      for (int w : next) queue.push(w);
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

int bandwidth(const SparseLDLT::SparseRow& pattern, const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inv[static_cast<size_t>(perm[i])] = static_cast<int>(i);
  int band = 0;
  for (Eigen::Index r = 0; r < pattern.outerSize(); ++r)
    for (SparseLDLT::SparseRow::InnerIterator it(pattern, r); it; ++it)
      band = std::max(band, std::abs(inv[static_cast<size_t>(r)] - inv[static_cast<size_t>(it.col())]));
  return band;
}

SparseLDLT& SparseLDLT::compute(const SparseRow& K) {
  require(K.rows() == K.cols(), "SparseLDLT: matrix must be square");
  n_ = K.rows();
  require(n_ > 0, "SparseLDLT: empty matrix");

  std::vector<int> natural(static_cast<size_t>(n_));
  for (Eigen::Index i = 0; i < n_; ++i) natural[static_cast<size_t>(i)] = static_cast<int>(i);
  std::vector<int> rcm = reverse_cuthill_mckee(K);
  const int band_natural = peaklab::bandwidth(K, natural);
  const int band_rcm = peaklab::bandwidth(K, rcm);
  if (band_rcm < band_natural) {
    perm_ = std::move(rcm);
    band_ = band_rcm;
  } else {
    perm_ = std::move(natural);
    band_ = band_natural;
  }
  std::vector<int> inv(perm_.size());
  for (size_t i = 0; i < perm_.size(); ++i) inv[static_cast<size_t>(perm_[i])] = static_cast<int>(i);

  const Eigen::Index b = std::max(1, band_);
  const Eigen::Index nb = (n_ + b - 1) / b;
  offset_.resize(static_cast<size_t>(nb + 1));
  for (Eigen::Index I = 0; I <= nb; ++I) offset_[static_cast<size_t>(I)] = std::min(I * b, n_);
  auto size_of = [&](Eigen::Index I) {
    return offset_[static_cast<size_t>(I + 1)] - offset_[static_cast<size_t>(I)];
  };

  std::vector<Eigen::MatrixXd> diag(static_cast<size_t>(nb));
  lower_.assign(static_cast<size_t>(nb), Eigen::MatrixXd());
  for (Eigen::Index I = 0; I < nb; ++I) {
    diag[static_cast<size_t>(I)] = Eigen::MatrixXd::Zero(size_of(I), size_of(I));
    if (I > 0) lower_[static_cast<size_t>(I)] = Eigen::MatrixXd::Zero(size_of(I), size_of(I - 1));
  }
  for (Eigen::Index r = 0; r < K.outerSize(); ++r) {
    for (SparseRow::InnerIterator it(K, r); it; ++it) {
      const Eigen::Index i = inv[static_cast<size_t>(r)], j = inv[static_cast<size_t>(it.col())];
      const Eigen::Index I = i / b, J = j / b;
      if (I == J) {
        diag[static_cast<size_t>(I)](i - offset_[static_cast<size_t>(I)], j - offset_[static_cast<size_t>(J)]) += it.value();
      } else if (I == J + 1) {
        lower_[static_cast<size_t>(I)](i - offset_[static_cast<size_t>(I)], j - offset_[static_cast<size_t>(J)]) += it.value();
      }
    }
  }

  schur_.assign(static_cast<size_t>(nb), BunchKaufman<double>());
  w_.assign(static_cast<size_t>(nb), Eigen::MatrixXd());
  inertia_ = {};
  for (Eigen::Index I = 0; I < nb; ++I) {
    Eigen::MatrixXd S = std::move(diag[static_cast<size_t>(I)]);
    if (I > 0) S.noalias() -= lower_[static_cast<size_t>(I)] * w_[static_cast<size_t>(I - 1)];
    S = 0.5 * (S + S.transpose()).eval();
    schur_[static_cast<size_t>(I)].compute(S);
    inertia_.negative += schur_[static_cast<size_t>(I)].inertia().negative;
    inertia_.positive += schur_[static_cast<size_t>(I)].inertia().positive;
    if (I + 1 < nb)
      w_[static_cast<size_t>(I)] = schur_[static_cast<size_t>(I)].solve(lower_[static_cast<size_t>(I + 1)].transpose());
  }
  return *this;
}

Eigen::VectorXd SparseLDLT::solve(const Eigen::VectorXd& r) const {
  require(r.size() == n_, "SparseLDLT::solve: size mismatch");
  const Eigen::Index nb = static_cast<Eigen::Index>(schur_.size());
  Eigen::VectorXd y(n_);
  for (Eigen::Index i = 0; i < n_; ++i) y[i] = r[perm_[static_cast<size_t>(i)]];

  for (Eigen::Index I = 0; I < nb; ++I) {
    const Eigen::Index o = offset_[static_cast<size_t>(I)];
    const Eigen::Index s = offset_[static_cast<size_t>(I + 1)] - o;
    if (I > 0) {
      const Eigen::Index op = offset_[static_cast<size_t>(I - 1)];
      y.segment(o, s).noalias() -= lower_[static_cast<size_t>(I)] * y.segment(op, o - op);
    }
    auto seg = y.segment(o, s);
    schur_[static_cast<size_t>(I)].solve_in_place(seg);
  }
  for (Eigen::Index I = nb - 2; I >= 0; --I) {
    const Eigen::Index o = offset_[static_cast<size_t>(I)];
    const Eigen::Index s = offset_[static_cast<size_t>(I + 1)] - o;
    const Eigen::Index on = offset_[static_cast<size_t>(I + 1)];
    const Eigen::Index sn = offset_[static_cast<size_t>(I + 2)] - on;
    y.segment(o, s).noalias() -= w_[static_cast<size_t>(I)] * y.segment(on, sn);
  }
  Eigen::VectorXd x(n_);
  for (Eigen::Index i = 0; i < n_; ++i) x[perm_[static_cast<size_t>(i)]] = y[i];
  return x;
}

}  // namespace peaklab
