#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rydosc/basis.hpp"
#include "rydosc/model.hpp"

namespace rydosc {

// Sparse operator in the site basis, CSR with column-sorted rows. The
// Hamiltonian is real symmetric here (sigma_x drive + diagonal fields), so
// values are stored as doubles; states carry the complex structure.
struct SparseOperator {
  int dim = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;
  bool hermitian = true;

  std::size_t nnz() const { return val.size(); }

  double max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
  }

  // y = A x, row-wise with a fixed accumulation order (bit-reproducible).
  void apply(const std::complex<double>* x, std::complex<double>* y) const {
    for (int i = 0; i < dim; ++i) {
      std::complex<double> acc{0.0, 0.0};
      for (int t = row_ptr[i]; t < row_ptr[i + 1]; ++t) acc += val[t] * x[col[t]];
      y[i] = acc;
    }
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y(dim);
    apply(x.data(), y.data());
    return y;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int t = row_ptr[i]; t < row_ptr[i + 1]; ++t) a(i, col[t]) += val[t];
    return a;
  }
};

// Diagonal Rydberg energy of one label:
//   -sum_j Delta_j n_j + sum_{j<k} V_jk n_j n_k,
// with all pairs included (no interaction cutoff).
inline double diagonal_energy(const ChainSpec& spec, const DriveParams& params,
                              Label x) {
  const int n = spec.n_sites;
  double e = 0.0;
  int sites[kMaxSites];
  int n_exc = 0;
  for (int j = 1; j <= n; ++j) {
    if (site_bit(x, j, n)) {
      e -= site_detuning(params, j);
      sites[n_exc++] = j;
    }
  }
  for (int u = 0; u < n_exc; ++u)
    for (int v = u + 1; v < n_exc; ++v)
      e += interaction(params, pair_distance(spec, sites[u], sites[v]));
  return e;
}

// Assembles H = (Omega/2) sum_j sigma_x,j - sum_j Delta_j n_j + sum V n n in
// the given basis. In blockade-restricted mode, sigma_x flips that leave the
// basis are dropped.
inline SparseOperator build_hamiltonian(const ChainSpec& spec,
                                        const DriveParams& params,
                                        const Basis& basis) {
  if (basis.n_sites() != spec.n_sites)
    throw ConfigError("basis/spec site count mismatch");
  const int n = spec.n_sites;
  const std::size_t dim = basis.size();
  SparseOperator op;
  op.dim = static_cast<int>(dim);
  op.hermitian = true;
  op.row_ptr.reserve(dim + 1);
  op.row_ptr.push_back(0);
  op.col.reserve(dim * (n + 1));
  op.val.reserve(dim * (n + 1));

  const double half_omega = 0.5 * params.omega;
  std::vector<std::pair<int, double>> row;
  row.reserve(n + 1);
  for (std::size_t i = 0; i < dim; ++i) {
    const Label x = basis.state(i);
    row.clear();
    row.emplace_back(static_cast<int>(i), diagonal_energy(spec, params, x));
    for (int j = 1; j <= n; ++j) {
      const Label y = x ^ (Label{1} << (n - j));
      const std::ptrdiff_t idx = basis.index_of(y);
      if (idx >= 0) row.emplace_back(static_cast<int>(idx), half_omega);
    }
    std::sort(row.begin(), row.end());
    for (const auto& [c, v] : row) {
      op.col.push_back(c);
      op.val.push_back(v);
    }
    op.row_ptr.push_back(static_cast<int>(op.col.size()));
  }
  return op;
}

// Translation by `shift` sites as a basis permutation: perm[i] is the basis
// index of the translated label. Both T1 and T2 preserve the cyclic blockade
// constraint, so the permutation is total in either mode.
inline std::vector<int> translation_permutation(const Basis& basis, int shift) {
  std::vector<int> perm(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Label y = rotate_right(basis.state(i), shift, basis.n_sites());
    const std::ptrdiff_t idx = basis.index_of(y);
    if (idx < 0) throw ConfigError("translation does not preserve the basis");
    perm[i] = static_cast<int>(idx);
  }
  return perm;
}

// max-entry magnitude of H P - P H for a permutation operator P with
// P |x> = |perm(x)>.
inline double commutator_max_abs(const SparseOperator& h,
                                 const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);

  double worst = 0.0;
  std::vector<std::pair<int, double>> a, b;
  for (int i = 0; i < h.dim; ++i) {
    // (H P)_{i,j} = H_{i, perm(j)}  => entry (i, inv(c)) per H entry (i, c).
    a.clear();
    for (int t = h.row_ptr[i]; t < h.row_ptr[i + 1]; ++t)
      a.emplace_back(inv[h.col[t]], h.val[t]);
    std::sort(a.begin(), a.end());
    // (P H)_{i,j} = H_{inv(i), j}.
    b.clear();
    const int r = inv[i];
    for (int t = h.row_ptr[r]; t < h.row_ptr[r + 1]; ++t)
      b.emplace_back(h.col[t], h.val[t]);

    std::size_t u = 0, v = 0;
    while (u < a.size() || v < b.size()) {
      if (v == b.size() || (u < a.size() && a[u].first < b[v].first)) {
        worst = std::max(worst, std::abs(a[u].second));
        ++u;
      } else if (u == a.size() || b[v].first < a[u].first) {
        worst = std::max(worst, std::abs(b[v].second));
        ++v;
      } else {
        worst = std::max(worst, std::abs(a[u].second - b[v].second));
        ++u;
        ++v;
      }
    }
  }
  return worst;
}

// Entry-wise symmetry defect max|H - H^T|; zero for a faithful assembly.
inline double hermiticity_defect(const SparseOperator& h) {
  double worst = 0.0;
  for (int i = 0; i < h.dim; ++i) {
    for (int t = h.row_ptr[i]; t < h.row_ptr[i + 1]; ++t) {
      const int j = h.col[t];
      // binary search for (j, i)
      double vt = 0.0;
      int lo = h.row_ptr[j], hi = h.row_ptr[j + 1];
      while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (h.col[mid] < i)
          lo = mid + 1;
        else
          hi = mid;
      }
      if (lo < h.row_ptr[j + 1] && h.col[lo] == i) vt = h.val[lo];
      worst = std::max(worst, std::abs(h.val[t] - vt));
    }
  }
  return worst;
}

}  // namespace rydosc
