#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rydosc/basis.hpp"
#include "rydosc/eigensolve.hpp"
#include "rydosc/lanczos.hpp"
#include "rydosc/operators.hpp"

namespace rydosc {

// Diagonal observables over a basis: magnetization per label and the
// domain-wall count per label (rho n_s on product states).
struct ObservableSet {
  Eigen::VectorXd m_diag;
  Eigen::VectorXd dw_diag;

  static ObservableSet build(const Basis& basis) {
    ObservableSet obs;
    const int n = basis.n_sites();
    obs.m_diag.resize(basis.size());
    obs.dw_diag.resize(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const Label x = basis.state(i);
      obs.m_diag[i] = 1.0 - 2.0 * std::popcount(x) / static_cast<double>(n);
      obs.dw_diag[i] = domain_wall_number(x, n);
    }
    return obs;
  }
};

// (1/n_s) sum_j <sigma_z,j>; 0 on the Z2 product states, +-1 on |0..0>/|1..1>.
inline double measure_magnetization(const Eigen::Ref<const Eigen::VectorXcd>& psi,
                                    const ObservableSet& obs) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    acc += obs.m_diag[i] * std::norm(psi[i]);
  return acc;
}

// <R> n_s, the real-valued number of domain walls.
inline double measure_domain_density(const Eigen::Ref<const Eigen::VectorXcd>& psi,
                                     const ObservableSet& obs) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    acc += obs.dw_diag[i] * std::norm(psi[i]);
  return acc;
}

struct TimeSeries {
  double dt_us = 0.0;
  double t_stop_us = 0.0;
  std::vector<double> t_us;
  std::vector<double> m;
  std::vector<double> m_t;  // mean-subtracted magnetization, filled by transform()
  std::vector<double> rho_ns;
  std::vector<double> energy;
  std::vector<double> norm;

  std::size_t size() const { return t_us.size(); }
};

inline std::size_t sample_count(double t_stop, double dt) {
  return static_cast<std::size_t>(std::floor(t_stop / dt + 1e-9)) + 1;
}

struct KrylovOptions {
  int max_dim = 30;          // subspace cap
  double tol = 1e-10;        // per-sample error estimate bound
  int max_samples_per_subspace = 32;
};

namespace detail {

struct KrylovSubspace {
  int m = 0;
  double beta0 = 0.0;
  double last_beta = 0.0;
  bool breakdown = false;
  Eigen::MatrixXcd v;       // n x m orthonormal
  Eigen::VectorXd evals;    // spectrum of T_m
  Eigen::MatrixXd evecs;
  Eigen::VectorXd sub_evals;  // spectrum of the leading (m-2) minor
  Eigen::MatrixXd sub_evecs;
  Eigen::VectorXd alpha, beta;

  static Eigen::VectorXcd expm_e1(const Eigen::VectorXd& lam,
                                  const Eigen::MatrixXd& q, double tau,
                                  double scale) {
    const int d = static_cast<int>(lam.size());
    Eigen::VectorXd cr(d), ci(d);
    for (int i = 0; i < d; ++i) {
      const double ph = -lam[i] * tau;
      cr[i] = std::cos(ph) * q(0, i);
      ci[i] = std::sin(ph) * q(0, i);
    }
    const Eigen::VectorXd yr = q * cr;
    const Eigen::VectorXd yi = q * ci;
    Eigen::VectorXcd y(d);
    for (int i = 0; i < d; ++i) y[i] = scale * std::complex<double>(yr[i], yi[i]);
    return y;
  }

  // y(tau) = beta0 * Q exp(-i Lambda tau) Q^T e_1 in subspace coordinates.
  Eigen::VectorXcd propagate(double tau) const {
    return expm_e1(evals, evecs, tau, beta0);
  }

  // Same with the (m-2)-dimensional subspace; used as the error reference.
  Eigen::VectorXcd propagate_sub(double tau) const {
    return expm_e1(sub_evals, sub_evecs, tau, beta0);
  }

  double error_estimate(double tau) const {
    if (breakdown) return 0.0;
    if (sub_evals.size() < 1) return std::abs(last_beta) * tau;
    const Eigen::VectorXcd y = propagate(tau);
    const Eigen::VectorXcd ys = propagate_sub(tau);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const std::complex<double> ref =
          (i < ys.size()) ? ys[i] : std::complex<double>(0.0, 0.0);
      acc += std::norm(y[i] - ref);
    }
    return std::sqrt(acc);
  }

  // <H> in the state V y, exact since V' H V = T.
  double energy(const Eigen::VectorXcd& y) const {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += alpha[i] * std::norm(y[i]);
      if (i + 1 < m) acc += 2.0 * beta[i] * (std::conj(y[i]) * y[i + 1]).real();
    }
    return acc;
  }
};

inline KrylovSubspace build_subspace(const SparseOperator& h,
                                     const Eigen::VectorXcd& psi, int max_dim) {
  const int n = h.dim;
  KrylovSubspace k;
  k.beta0 = psi.norm();
  const int m_cap = std::min(max_dim, n);
  k.v.resize(n, m_cap);
  k.alpha.resize(m_cap);
  k.beta.resize(m_cap);
  k.v.col(0) = psi / k.beta0;

  Eigen::VectorXcd w(n);
  for (int j = 0; j < m_cap; ++j) {
    h.apply(k.v.col(j).data(), w.data());
    const double aj = k.v.col(j).dot(w).real();
    k.alpha[j] = aj;
    w -= aj * k.v.col(j);
    if (j > 0) w -= k.beta[j - 1] * k.v.col(j - 1);
    for (int i = 0; i <= j; ++i) w -= k.v.col(i).dot(w) * k.v.col(i);
    k.last_beta = w.norm();
    k.m = j + 1;
    if (k.last_beta < 1e-12 * std::max(1.0, std::abs(aj))) {
      k.breakdown = true;
      break;
    }
    if (j + 1 == m_cap) break;
    k.beta[j] = k.last_beta;
    k.v.col(j + 1) = w / k.last_beta;
  }

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k.m, k.m);
  for (int i = 0; i < k.m; ++i) {
    t(i, i) = k.alpha[i];
    if (i + 1 < k.m) t(i, i + 1) = t(i + 1, i) = k.beta[i];
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    k.evals = es.eigenvalues();
    k.evecs = es.eigenvectors();
  }
  if (k.m > 2 && !k.breakdown) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(k.m - 2, k.m - 2));
    k.sub_evals = es.eigenvalues();
    k.sub_evecs = es.eigenvectors();
  }
  k.alpha.conservativeResize(k.m);
  k.beta.conservativeResize(std::max(0, k.m - 1));
  return k;
}

// Advances psi by exactly tau, bisecting until the subspace error estimate
// meets the tolerance.
inline void advance_exact(const SparseOperator& h, Eigen::VectorXcd& psi,
                          double tau, const KrylovOptions& opts, int depth = 0) {
  if (depth > 24)
    throw AccuracyError("krylov: step error above tolerance after max subspace growth");
  const KrylovSubspace k = build_subspace(h, psi, opts.max_dim);
  if (k.breakdown || k.error_estimate(tau) <= opts.tol) {
    psi = k.v.leftCols(k.m) * k.propagate(tau);
    return;
  }
  advance_exact(h, psi, 0.5 * tau, opts, depth + 1);
  advance_exact(h, psi, 0.5 * tau, opts, depth + 1);
}

}  // namespace detail

// Krylov-subspace propagation under exp(-i H t), recording observables on the
// uniform grid t_i = i dt. One subspace serves as many consecutive samples as
// its a-posteriori error estimate allows (never more than
// max_samples_per_subspace); each evaluated point is kept below `tol`.
inline TimeSeries evolve(const SparseOperator& h, Eigen::VectorXcd psi,
                         double dt_us, double t_stop_us, const ObservableSet& obs,
                         const KrylovOptions& opts = {},
                         Eigen::VectorXcd* final_state = nullptr) {
  if (!(dt_us > 0.0)) throw ConfigError("evolve: dt must be positive");
  const std::size_t n_samples = sample_count(t_stop_us, dt_us);
  TimeSeries ts;
  ts.dt_us = dt_us;
  ts.t_stop_us = t_stop_us;
  ts.t_us.reserve(n_samples);
  ts.m.reserve(n_samples);
  ts.rho_ns.reserve(n_samples);
  ts.energy.reserve(n_samples);
  ts.norm.reserve(n_samples);

  auto record_site = [&](std::size_t i, const Eigen::Ref<const Eigen::VectorXcd>& state,
                         double e) {
    ts.t_us.push_back(i * dt_us);
    ts.m.push_back(measure_magnetization(state, obs));
    ts.rho_ns.push_back(measure_domain_density(state, obs));
    ts.energy.push_back(e);
    ts.norm.push_back(state.norm());
  };

  record_site(0, psi, psi.dot(h.apply(psi)).real());

  std::size_t done = 0;  // index of the last recorded sample
  int target = 8;
  while (done + 1 < n_samples) {
    const int remaining = static_cast<int>(n_samples - 1 - done);
    const int want = std::min({target, remaining, opts.max_samples_per_subspace});
    const detail::KrylovSubspace k = detail::build_subspace(h, psi, opts.max_dim);

    int span = 0;
    if (k.breakdown) {
      span = remaining;
    } else {
      for (int s = want; s >= 1; s = s / 2) {
        if (k.error_estimate(s * dt_us) <= opts.tol) {
          span = s;
          break;
        }
      }
    }

    if (span == 0) {
      // even one grid step exceeds the estimate at full subspace: bisect
      detail::advance_exact(h, psi, dt_us, opts);
      record_site(done + 1, psi, psi.dot(h.apply(psi)).real());
      ++done;
      target = 1;
      continue;
    }

    span = std::min(span, remaining);
    Eigen::MatrixXcd y(k.m, span);
    for (int s = 1; s <= span; ++s) y.col(s - 1) = k.propagate(s * dt_us);
    const Eigen::MatrixXcd states = k.v.leftCols(k.m) * y;
    for (int s = 1; s <= span; ++s)
      record_site(done + s, states.col(s - 1), k.energy(y.col(s - 1)));
    psi = states.col(span - 1);
    done += span;
    target = (span == want) ? std::min(2 * want, opts.max_samples_per_subspace)
                            : std::max(span, 1);
  }
  if (final_state != nullptr) *final_state = psi;
  return ts;
}

// Ground state of H_prep restricted to the k = 0 sector, mapped to the site
// basis with the Z2 |1010...10> amplitude fixed real positive.
inline Eigen::VectorXcd prepare_initial(const ChainSpec& spec,
                                        const DriveParams& params_prep,
                                        const Basis& basis,
                                        const SectorDecomposition& dec,
                                        const LanczosOptions& lopts = {}) {
  const SparseOperator h = build_hamiltonian(spec, params_prep, basis);
  const SparseOperator k0 = sector_matrix_k0_sparse(h, basis, dec);

  const Label z2 = z2_label_odd(spec.n_sites);
  const int z2_orbit = dec.orbit_of[basis.index_of(z2)];
  Eigen::VectorXd start = Eigen::VectorXd::Zero(k0.dim);
  {
    int pos = -1;
    const auto& ids = dec.sectors[0].orbit_ids;
    for (std::size_t c = 0; c < ids.size(); ++c)
      if (ids[c] == z2_orbit) pos = static_cast<int>(c);
    start[pos >= 0 ? pos : 0] = 1.0;
  }
  const auto [e0, vec] = lowest_eigenpair(k0, start, lopts);
  (void)e0;

  Eigen::VectorXcd psi = k0_sector_to_site(dec, basis, vec);
  const std::ptrdiff_t z2_idx = basis.index_of(z2);
  if (psi[z2_idx].real() < 0.0) psi = -psi;
  psi /= psi.norm();
  return psi;
}

}  // namespace rydosc
