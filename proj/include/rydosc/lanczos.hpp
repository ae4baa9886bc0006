#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rydosc/errors.hpp"
#include "rydosc/operators.hpp"

namespace rydosc {

struct LanczosOptions {
  int max_subspace = 300;
  int max_restarts = 60;
  double residual_tol = 1e-12;  // relative to the Ritz-value scale
};

// Lowest eigenpair of a real symmetric sparse operator by restarted Lanczos
// with full reorthogonalization. Deterministic for a fixed start vector.
inline std::pair<double, Eigen::VectorXd> lowest_eigenpair(
    const SparseOperator& a, const Eigen::VectorXd& start,
    const LanczosOptions& opts = {}) {
  const int n = a.dim;
  Eigen::VectorXd v = start;
  if (v.norm() == 0.0) throw ConfigError("lanczos: zero start vector");
  v.normalize();

  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int t = a.row_ptr[i]; t < a.row_ptr[i + 1]; ++t)
        acc += a.val[t] * x[a.col[t]];
      y[i] = acc;
    }
    return y;
  };

  const int m_max = std::min(opts.max_subspace, n);
  Eigen::MatrixXd basis(n, m_max);
  std::vector<double> alpha, beta;

  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    alpha.clear();
    beta.clear();
    basis.col(0) = v;
    int m = 0;
    double last_beta = 0.0;
    bool breakdown = false;
    for (int j = 0; j < m_max; ++j) {
      Eigen::VectorXd w = apply(basis.col(j));
      const double aj = basis.col(j).dot(w);
      alpha.push_back(aj);
      w -= aj * basis.col(j);
      if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
      for (int i = 0; i <= j; ++i) w -= basis.col(i).dot(w) * basis.col(i);
      last_beta = w.norm();
      m = j + 1;
      if (last_beta < 1e-13 * std::max(1.0, std::abs(aj))) {
        breakdown = true;  // invariant subspace: Ritz pairs are exact
        break;
      }
      if (j + 1 == m_max) break;
      beta.push_back(last_beta);
      basis.col(j + 1) = w / last_beta;
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const double theta = es.eigenvalues()[0];
    const Eigen::VectorXd s = es.eigenvectors().col(0);
    v = basis.leftCols(m) * s;
    v.normalize();

    const double scale = std::max(std::abs(es.eigenvalues()[0]),
                                  std::abs(es.eigenvalues()[m - 1]));
    const double resid = breakdown ? 0.0 : std::abs(last_beta * s[m - 1]);
    if (breakdown || resid <= opts.residual_tol * std::max(1.0, scale))
      return {theta, v};
  }
  throw AccuracyError("lanczos: ground-state iteration limit reached");
}

}  // namespace rydosc
