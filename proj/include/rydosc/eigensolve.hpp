#pragma once

#include <algorithm>
#include <atomic>
#include <complex>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "rydosc/operators.hpp"
#include "rydosc/sectors.hpp"

namespace rydosc {

// Bloch matrix of H in momentum sector m. With |O,k> = p^{-1/2} sum_r e^{ikr}
// T2^r |rep_O> and [H,T2] = 0, the matrix element is
//   <O,k|H|O',k> = sqrt(p'/p) sum_{z in row(rep'), orbit(z)=O} H_{z,rep'} e^{ik sigma_z},
// where sigma_z is the number of T2 applications taking z to its
// representative.
inline Eigen::MatrixXcd sector_matrix(const SparseOperator& h, const Basis& basis,
                                      const SectorDecomposition& dec, int m) {
  const MomentumSector& sec = dec.sectors[m];
  const int dim = static_cast<int>(sec.orbit_ids.size());
  std::vector<int> pos(dec.n_orbits(), -1);
  for (int c = 0; c < dim; ++c) pos[sec.orbit_ids[c]] = c;

  Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    const int oc = sec.orbit_ids[c];
    const double pc = dec.orbit_period[oc];
    const int rep_idx = static_cast<int>(basis.index_of(dec.orbit_rep[oc]));
    for (int t = h.row_ptr[rep_idx]; t < h.row_ptr[rep_idx + 1]; ++t) {
      const int z = h.col[t];
      const int oz = dec.orbit_of[z];
      const int r = pos[oz];
      if (r < 0) continue;  // orbit projected out of this sector
      const double pz = dec.orbit_period[oz];
      const double phase = sec.k * dec.shift_to_rep[z];
      mat(r, c) += h.val[t] * std::sqrt(pc / pz) *
                   std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  return mat;
}

// k = 0 block as a real sparse operator (all Bloch phases are 1 there);
// used by the iterative ground-state solver.
inline SparseOperator sector_matrix_k0_sparse(const SparseOperator& h,
                                              const Basis& basis,
                                              const SectorDecomposition& dec) {
  const MomentumSector& sec = dec.sectors[0];
  const int dim = static_cast<int>(sec.orbit_ids.size());
  std::vector<int> pos(dec.n_orbits(), -1);
  for (int c = 0; c < dim; ++c) pos[sec.orbit_ids[c]] = c;

  std::vector<std::vector<std::pair<int, double>>> rows(dim);
  for (int c = 0; c < dim; ++c) {
    const int oc = sec.orbit_ids[c];
    const double pc = dec.orbit_period[oc];
    const int rep_idx = static_cast<int>(basis.index_of(dec.orbit_rep[oc]));
    for (int t = h.row_ptr[rep_idx]; t < h.row_ptr[rep_idx + 1]; ++t) {
      const int oz = dec.orbit_of[h.col[t]];
      const int r = pos[oz];
      const double pz = dec.orbit_period[oz];
      rows[r].emplace_back(c, h.val[t] * std::sqrt(pc / pz));
    }
  }
  SparseOperator op;
  op.dim = dim;
  op.hermitian = true;
  op.row_ptr.push_back(0);
  for (int r = 0; r < dim; ++r) {
    auto& row = rows[r];
    std::sort(row.begin(), row.end());
    // merge duplicate columns
    for (std::size_t u = 0; u < row.size();) {
      double v = row[u].second;
      std::size_t w = u + 1;
      while (w < row.size() && row[w].first == row[u].first) v += row[w++].second;
      op.col.push_back(row[u].first);
      op.val.push_back(v);
      u = w;
    }
    op.row_ptr.push_back(static_cast<int>(op.col.size()));
  }
  return op;
}

enum class StateTag { Other, GS, MS, OneMeson };

inline std::string tag_name(StateTag t) {
  switch (t) {
    case StateTag::GS: return "GS";
    case StateTag::MS: return "MS";
    case StateTag::OneMeson: return "one-meson";
    default: return "other";
  }
}

struct EigenRecord {
  double energy = 0.0;   // raw eigenvalue, rad/us
  int k_index = 0;
  double k = 0.0;
  double rho_ns = 0.0;   // <R> n_s
  double ov_z2_odd = 0.0;   // |<1010...10|psi>|^2
  double ov_z2_even = 0.0;  // |<0101...01|psi>|^2
  StateTag tag = StateTag::Other;
  int meson_ell = 0;     // 1..n_s/2 for k=0 one-meson states
};

struct ClassifyThresholds {
  double energy_window_over_omega = 500.0;  // E - E_g window, units of Omega
  double rho_meson_min = 1.5;
  double rho_meson_max = 2.5;
  double rho_z2_max = 1.0;  // MS/GS domain-wall bound
};

struct EigenData {
  ChainSpec spec;
  DriveParams params;
  BasisMode mode = BasisMode::BlockadeRestricted;
  // Sorted by (k_index, energy ascending); the k_index = 0 block comes first
  // and its i-th record corresponds to column i of k0_vectors.
  std::vector<EigenRecord> records;
  int gs = -1;
  int ms = -1;
  std::vector<int> k0_mesons;  // record indices of k=0 one-meson states, by energy

  std::vector<int> k0_orbit_ids;   // sector basis (orbit ids) for k = 0
  Eigen::VectorXd k0_energies;
  Eigen::MatrixXd k0_vectors;      // real eigenvectors in sector coordinates

  double ground_energy() const { return records[gs].energy; }
  const EigenRecord& state(int idx) const { return records[idx]; }
};

namespace detail {

struct SectorSolution {
  Eigen::VectorXd energies;
  std::vector<double> rho, ov_odd, ov_even;
};

inline SectorSolution analyze_sector(const Eigen::VectorXd& energies,
                                     const Eigen::MatrixXcd& vectors,
                                     const SectorDecomposition& dec,
                                     const Basis& basis,
                                     const std::vector<int>& orbit_ids) {
  SectorSolution out;
  out.energies = energies;
  const int dim = static_cast<int>(orbit_ids.size());
  const int n = dec.n_sites;
  std::vector<double> dw(dim);
  int pos_odd = -1, pos_even = -1;
  const Label odd = z2_label_odd(n), even = z2_label_even(n);
  for (int r = 0; r < dim; ++r) {
    const Label rep = dec.orbit_rep[orbit_ids[r]];
    dw[r] = domain_wall_number(rep, n);
    if (rep == odd && dec.orbit_period[orbit_ids[r]] == 1) pos_odd = r;
    if (rep == even && dec.orbit_period[orbit_ids[r]] == 1) pos_even = r;
  }
  out.rho.resize(dim);
  out.ov_odd.assign(dim, 0.0);
  out.ov_even.assign(dim, 0.0);
  for (int c = 0; c < dim; ++c) {
    double rho = 0.0;
    for (int r = 0; r < dim; ++r) rho += std::norm(vectors(r, c)) * dw[r];
    out.rho[c] = rho;
    if (pos_odd >= 0) out.ov_odd[c] = std::norm(vectors(pos_odd, c));
    if (pos_even >= 0) out.ov_even[c] = std::norm(vectors(pos_even, c));
  }
  return out;
}

}  // namespace detail

// Dense Hermitian diagonalization of every momentum block. Sectors are
// independent and may run in parallel; records are merged deterministically
// by (sector index, ascending energy).
inline EigenData sector_eigensolve(const ChainSpec& spec, const DriveParams& params,
                                   const Basis& basis, const SectorDecomposition& dec,
                                   const SparseOperator& h, int threads = 1) {
  if (h.dim != static_cast<int>(basis.size()))
    throw ConfigError("operator/basis dimension mismatch");
  if (hermiticity_defect(h) > 1e-12 * std::max(1.0, h.max_abs()))
    throw AccuracyError("sector_eigensolve: non-Hermitian operator");
  const int n_sectors = dec.order;
  std::vector<detail::SectorSolution> sols(n_sectors);

  EigenData data;
  data.spec = spec;
  data.params = params;
  data.mode = basis.mode();

  auto solve_one = [&](int m) {
    if (m == 0) {
      const Eigen::MatrixXd mat = sector_matrix(h, basis, dec, 0).real();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
      data.k0_energies = es.eigenvalues();
      data.k0_vectors = es.eigenvectors();
      sols[0] = detail::analyze_sector(es.eigenvalues(),
                                       es.eigenvectors().cast<std::complex<double>>(),
                                       dec, basis, dec.sectors[0].orbit_ids);
    } else {
      const Eigen::MatrixXcd mat = sector_matrix(h, basis, dec, m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat);
      sols[m] = detail::analyze_sector(es.eigenvalues(), es.eigenvectors(), dec,
                                       basis, dec.sectors[m].orbit_ids);
    }
  };

  if (threads <= 1) {
    for (int m = 0; m < n_sectors; ++m) solve_one(m);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < std::min(threads, n_sectors); ++w)
      pool.emplace_back([&] {
        for (int m = next.fetch_add(1); m < n_sectors; m = next.fetch_add(1))
          solve_one(m);
      });
    for (auto& t : pool) t.join();
  }

  data.k0_orbit_ids = dec.sectors[0].orbit_ids;
  for (int m = 0; m < n_sectors; ++m) {
    const auto& s = sols[m];
    for (int c = 0; c < s.energies.size(); ++c) {
      EigenRecord rec;
      rec.energy = s.energies[c];
      rec.k_index = m;
      rec.k = dec.sectors[m].k;
      rec.rho_ns = s.rho[c];
      rec.ov_z2_odd = s.ov_odd[c];
      rec.ov_z2_even = s.ov_even[c];
      data.records.push_back(rec);
    }
  }
  return data;
}

// Tags the spectrum: GS is the lowest k=0 state; MS is the k=0 state with
// maximal overlap onto the Z2 product label opposite to the GS-dominant one,
// restricted to rho n_s below the Z2 bound; one-meson states fall in the
// GS-shifted energy window with rho n_s inside the meson band.
inline void classify(EigenData& data, const ClassifyThresholds& th = {}) {
  auto& recs = data.records;
  if (recs.empty()) throw AccuracyError("classification: empty spectrum");

  int gs = -1;
  for (int i = 0; i < static_cast<int>(recs.size()); ++i) {
    if (recs[i].k_index != 0) break;
    if (gs < 0 || recs[i].energy < recs[gs].energy) gs = i;
  }
  if (gs < 0) throw AccuracyError("classification: no k=0 states");
  const bool gs_is_odd = recs[gs].ov_z2_odd >= recs[gs].ov_z2_even;

  int ms = -1;
  double best = -1.0;
  for (int i = 0; i < static_cast<int>(recs.size()); ++i) {
    if (recs[i].k_index != 0) break;
    if (i == gs || recs[i].rho_ns >= th.rho_z2_max) continue;
    const double ov = gs_is_odd ? recs[i].ov_z2_even : recs[i].ov_z2_odd;
    if (ov > best) {
      best = ov;
      ms = i;
    }
  }
  if (ms < 0 || best <= 0.0)
    throw AccuracyError(
        "classification: no metastable state found (parameters outside the "
        "oscillation regime)");

  for (auto& r : recs) {
    r.tag = StateTag::Other;
    r.meson_ell = 0;
  }
  recs[gs].tag = StateTag::GS;
  recs[ms].tag = StateTag::MS;
  data.gs = gs;
  data.ms = ms;

  const double e0 = recs[gs].energy;
  const double window = th.energy_window_over_omega * data.params.omega;
  data.k0_mesons.clear();
  for (int i = 0; i < static_cast<int>(recs.size()); ++i) {
    if (i == gs || i == ms) continue;
    auto& r = recs[i];
    if (r.energy - e0 <= window && r.rho_ns >= th.rho_meson_min &&
        r.rho_ns <= th.rho_meson_max) {
      r.tag = StateTag::OneMeson;
      if (r.k_index == 0) data.k0_mesons.push_back(i);
    }
  }
  // k=0 records are energy-sorted already; label ell = 1.. in that order
  for (std::size_t l = 0; l < data.k0_mesons.size(); ++l)
    recs[data.k0_mesons[l]].meson_ell = static_cast<int>(l) + 1;
}

enum class ReferenceState { MS, GS };

// omega_{ell v} = E_ell - E_v for the k=0 one-meson tower; may be negative
// for v = MS once the metastable level has risen into the band.
inline std::vector<double> omega_lines(const EigenData& data, ReferenceState v) {
  const int ref = (v == ReferenceState::MS) ? data.ms : data.gs;
  if (ref < 0) throw DependencyError("omega_lines requires classification");
  std::vector<double> lines;
  lines.reserve(data.k0_mesons.size());
  for (int idx : data.k0_mesons)
    lines.push_back(data.records[idx].energy - data.records[ref].energy);
  return lines;
}

inline std::vector<double> all_energies_sorted(const EigenData& data) {
  std::vector<double> e;
  e.reserve(data.records.size());
  for (const auto& r : data.records) e.push_back(r.energy);
  std::sort(e.begin(), e.end());
  return e;
}

// Bloch coefficients of the k=0 projection: c_O = p^{-1/2} sum_{z in O} psi_z.
inline Eigen::VectorXcd project_k0(const SectorDecomposition& dec,
                                   const Eigen::VectorXcd& psi) {
  Eigen::VectorXcd coeff = Eigen::VectorXcd::Zero(dec.n_orbits());
  for (int z = 0; z < psi.size(); ++z) coeff[dec.orbit_of[z]] += psi[z];
  for (std::size_t o = 0; o < dec.n_orbits(); ++o)
    coeff[o] /= std::sqrt(static_cast<double>(dec.orbit_period[o]));
  // restrict to orbits actually present in the k=0 sector (all of them)
  Eigen::VectorXcd out(dec.sectors[0].orbit_ids.size());
  for (std::size_t c = 0; c < dec.sectors[0].orbit_ids.size(); ++c)
    out[c] = coeff[dec.sectors[0].orbit_ids[c]];
  return out;
}

// Weight of the state outside the k=0 sector.
inline double momentum_leakage(const SectorDecomposition& dec,
                               const Eigen::VectorXcd& psi) {
  const Eigen::VectorXcd c = project_k0(dec, psi);
  return psi.squaredNorm() - c.squaredNorm();
}

// Site-basis amplitudes of a real k=0 sector vector: psi_z = c_O / sqrt(p).
inline Eigen::VectorXcd k0_sector_to_site(const SectorDecomposition& dec,
                                          const Basis& basis,
                                          const Eigen::VectorXd& coeffs) {
  std::vector<double> per_orbit(dec.n_orbits(), 0.0);
  const auto& ids = dec.sectors[0].orbit_ids;
  for (std::size_t c = 0; c < ids.size(); ++c)
    per_orbit[ids[c]] = coeffs[c] / std::sqrt(static_cast<double>(dec.orbit_period[ids[c]]));
  Eigen::VectorXcd psi(basis.size());
  for (std::size_t z = 0; z < basis.size(); ++z)
    psi[z] = per_orbit[dec.orbit_of[z]];
  return psi;
}

}  // namespace rydosc
