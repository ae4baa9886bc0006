#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydosc/eigensolve.hpp"
#include "rydosc/spectrum.hpp"

namespace rydosc {

// Relative strength of confinement (-delta_loc) versus the short-range
// domain-wall repulsion V2 in the ground case. For delta_loc > 0 the peak
// arrangement is the same for all parameter values, hence one fixed label.
enum class Regime { Small, Intermediate, Large, MetastableFixed };

inline std::string regime_name(Regime r) {
  switch (r) {
    case Regime::Small: return "small";
    case Regime::Intermediate: return "intermediate";
    case Regime::Large: return "large";
    default: return "metastable-fixed";
  }
}

// Thresholds for <</~/>> are fixed at 1/3 and 3.
inline Regime regime_classify(const DriveParams& params, double v2) {
  if (params.delta_loc > 0.0) return Regime::MetastableFixed;
  const double r = -params.delta_loc / v2;
  if (r < 1.0 / 3.0) return Regime::Small;
  if (r <= 3.0) return Regime::Intermediate;
  return Regime::Large;
}

// Classical potentials of the 0- and 1-meson site configurations, keeping
// the detuning terms and the next-nearest-neighbor tail V2 only:
//   eps_0       = (n_s/2) (-Dglob + Dloc + V2)
//   eps_[1]     = eps_0 + Dglob - Dloc - 2 V2
//   eps_[n>=3]  = eps_0 + Dglob - n Dloc - 3 V2
// Only odd domain sizes n exist; even domains are blockade-suppressed.
struct ClassicalPotentials {
  struct Level {
    int n = 0;
    double eps = 0.0;
    double omega = 0.0;  // eps_[n] - eps_0
  };
  double eps0 = 0.0;
  double v2 = 0.0;
  std::vector<Level> levels;
  Regime regime = Regime::Small;
  bool metastable_order_ok = false;  // eps[1] > eps[3] > ... (delta_loc > 0)
  bool ground_order_ok = false;      // eps0 < eps[n], ascending n>=3 (delta_loc < 0)
};

inline ClassicalPotentials classical_potentials(const ChainSpec& spec,
                                                const DriveParams& params) {
  ClassicalPotentials cp;
  cp.v2 = nnn_interaction(spec, params);
  const double dg = params.delta_glob;
  const double dl = params.delta_loc;
  cp.eps0 = 0.5 * spec.n_sites * (-dg + dl + cp.v2);
  for (int n = 1; n <= spec.n_sites - 1; n += 2) {
    ClassicalPotentials::Level lv;
    lv.n = n;
    lv.eps = (n == 1) ? cp.eps0 + dg - dl - 2.0 * cp.v2
                      : cp.eps0 + dg - n * dl - 3.0 * cp.v2;
    lv.omega = lv.eps - cp.eps0;
    cp.levels.push_back(lv);
  }
  cp.regime = regime_classify(params, cp.v2);

  bool meta = true;
  for (std::size_t i = 0; i + 1 < cp.levels.size(); ++i)
    meta = meta && cp.levels[i].eps > cp.levels[i + 1].eps;
  cp.metastable_order_ok = meta;

  bool ground = true;
  for (const auto& lv : cp.levels) ground = ground && cp.eps0 < lv.eps;
  for (std::size_t i = 1; i + 1 < cp.levels.size(); ++i)
    ground = ground && cp.levels[i].eps < cp.levels[i + 1].eps;
  cp.ground_order_ok = ground;
  return cp;
}

// beta alpha^2 compares the confining potential difference (~delta_loc) to
// the dominant kinetic term T_{n,n+2} ~ Omega^2 / Delta_glob; >> 1 means the
// classical flat-band picture applies.
struct Classicality {
  double beta_alpha_sq = 0.0;
  double kinetic_scale = 0.0;  // Omega^2 / Delta_glob, rad/us
};

inline Classicality classicality_ratio(const DriveParams& params) {
  Classicality c;
  const double a = params.alpha();
  c.beta_alpha_sq = (params.delta_glob != 0.0) ? params.beta() * a * a : 0.0;
  c.kinetic_scale =
      (params.delta_glob != 0.0) ? params.omega * params.omega / params.delta_glob : 0.0;
  return c;
}

// Hamming distance between the given Z2 label and the basis label carrying
// the maximal amplitude of a k=0 eigenvector (expressed over Bloch sums, so
// the amplitude of an orbit is its coefficient |c_O|). Distances to a
// T2-invariant reference are constant along an orbit, so the representative
// suffices.
inline int hamming_proxy(const SectorDecomposition& dec,
                         const Eigen::VectorXd& k0_vec, Label z2) {
  const auto& ids = dec.sectors[0].orbit_ids;
  int best = 0;
  double best_amp = -1.0;
  for (std::size_t c = 0; c < ids.size(); ++c) {
    const double amp = std::abs(k0_vec[c]);
    if (amp > best_amp) {
      best_amp = amp;
      best = static_cast<int>(c);
    }
  }
  return std::popcount(dec.orbit_rep[ids[best]] ^ z2);
}

// First-order prediction for the peak tower: each k=0 one-meson line ell
// carries weight
//   w_ell = |<phi_ell|U|0_v>| |<0_v|M|phi_ell>| / |omega_ell_v|
// with U = -sum_j (-1)^j delta_loc n_j, evaluated with the exact k=0
// eigenvectors. Both U and M are diagonal and T2-invariant.
struct PerturbativePrediction {
  struct Line {
    int ell = 0;
    double omega = 0.0;
    double weight = 0.0;
    int hamming = 0;
  };
  std::vector<Line> lines;
  int dominant_ell = 0;  // argmax weight
};

inline PerturbativePrediction perturbative_prediction(const EigenData& data,
                                                      const SectorDecomposition& dec,
                                                      ReferenceState v) {
  if (data.gs < 0 || data.k0_mesons.empty())
    throw DependencyError("perturbative_prediction requires classification");
  const int n = data.spec.n_sites;
  const auto& ids = dec.sectors[0].orbit_ids;
  const int dim = static_cast<int>(ids.size());

  Eigen::VectorXd u_diag(dim), m_diag(dim);
  for (int c = 0; c < dim; ++c) {
    const Label rep = dec.orbit_rep[ids[c]];
    double stag = 0.0;
    for (int j = 1; j <= n; ++j)
      if (site_bit(rep, j, n)) stag += (j % 2 == 0) ? 1.0 : -1.0;
    u_diag[c] = -data.params.delta_loc * stag;
    m_diag[c] = 1.0 - 2.0 * std::popcount(rep) / static_cast<double>(n);
  }

  const int ref = (v == ReferenceState::MS) ? data.ms : data.gs;
  // k=0 records precede all others and share ordering with k0_vectors columns
  const Eigen::VectorXd v0 = data.k0_vectors.col(ref);
  const double e_ref = data.records[ref].energy;
  const Label z2 = (data.records[ref].ov_z2_odd >= data.records[ref].ov_z2_even)
                       ? z2_label_odd(n)
                       : z2_label_even(n);

  PerturbativePrediction out;
  double best = -1.0;
  for (std::size_t l = 0; l < data.k0_mesons.size(); ++l) {
    const int idx = data.k0_mesons[l];
    const Eigen::VectorXd phi = data.k0_vectors.col(idx);
    const double omega = data.records[idx].energy - e_ref;
    double u_me = 0.0, m_me = 0.0;
    for (int c = 0; c < dim; ++c) {
      u_me += phi[c] * u_diag[c] * v0[c];
      m_me += v0[c] * m_diag[c] * phi[c];
    }
    PerturbativePrediction::Line line;
    line.ell = static_cast<int>(l) + 1;
    line.omega = omega;
    line.weight =
        (omega != 0.0) ? std::abs(u_me) * std::abs(m_me) / std::abs(omega) : 0.0;
    line.hamming = hamming_proxy(dec, phi, z2);
    out.lines.push_back(line);
    if (line.weight > best) {
      best = line.weight;
      out.dominant_ell = line.ell;
    }
  }
  return out;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman_rank_correlation(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 2 || b.size() != n) return 0.0;
  auto ranks = [](const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
      return x[i] < x[j];
    });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
      const double avg = 0.5 * (i + j) + 1.0;
      for (std::size_t u = i; u <= j; ++u) r[idx[u]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

// Cross-check of measured peaks against both models at one parameter point.
struct ModelComparison {
  struct PeakRow {
    double omega = 0.0;
    double magnitude = 0.0;
    int line_index = -1;        // matched omega_{ell v} line (0-based), -1 unmatched
    double line_residual = 0.0;
    int classical_n = 0;        // nearest classical level
    double classical_residual = 0.0;
  };
  std::vector<PeakRow> rows;
  double rank_correlation = 0.0;       // measured magnitude vs predicted weight
  double secondary_spacing_mean = 0.0;  // consecutive matched secondary peaks
  double spacing_over_two_dloc = 0.0;
  Regime regime = Regime::Small;
  bool regime_consistent = false;
};

inline ModelComparison compare_models(const PeakSet& peaks, const MatchReport& match,
                                      const ClassicalPotentials& classical,
                                      const PerturbativePrediction& prediction,
                                      const DriveParams& params) {
  ModelComparison cmp;
  cmp.regime = classical.regime;

  for (int p = 0; p < static_cast<int>(peaks.peaks.size()); ++p) {
    ModelComparison::PeakRow row;
    row.omega = peaks.peaks[p].omega;
    row.magnitude = peaks.peaks[p].magnitude;
    row.line_index = match.matches[p].line_index;
    row.line_residual = match.matches[p].residual;
    double best = -1.0;
    for (const auto& lv : classical.levels) {
      const double r = std::abs(row.omega - std::abs(lv.omega));
      if (best < 0.0 || r < best) {
        best = r;
        row.classical_n = lv.n;
        row.classical_residual = r;
      }
    }
    cmp.rows.push_back(row);
  }

  // measured magnitude per matched line (tallest peak wins) vs weight
  std::vector<double> mags, weights;
  for (const auto& line : prediction.lines) {
    double best = -1.0;
    for (const auto& row : cmp.rows)
      if (row.line_index == line.ell - 1) best = std::max(best, row.magnitude);
    if (best >= 0.0) {
      mags.push_back(best);
      weights.push_back(line.weight);
    }
  }
  cmp.rank_correlation = spearman_rank_correlation(mags, weights);

  // spacing of matched secondary peaks (dominant excluded)
  std::vector<double> secondaries;
  for (int p = 0; p < static_cast<int>(cmp.rows.size()); ++p)
    if (p != peaks.dominant_index && cmp.rows[p].line_index >= 0)
      secondaries.push_back(cmp.rows[p].omega);
  std::sort(secondaries.begin(), secondaries.end());
  if (secondaries.size() >= 2) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < secondaries.size(); ++i)
      acc += secondaries[i + 1] - secondaries[i];
    cmp.secondary_spacing_mean = acc / (secondaries.size() - 1);
    const double two_dloc = 2.0 * std::abs(params.delta_loc);
    cmp.spacing_over_two_dloc =
        (two_dloc > 0.0) ? cmp.secondary_spacing_mean / two_dloc : 0.0;
  }

  if (peaks.dominant_index >= 0) {
    const double dom = peaks.peaks[peaks.dominant_index].omega;
    int below = 0, above = 0;
    for (double w : secondaries) (w < dom ? below : above)++;
    switch (cmp.regime) {
      case Regime::MetastableFixed:
      case Regime::Small:
        cmp.regime_consistent = (above == 0);
        break;
      case Regime::Intermediate:
        // secondary peaks may sit on either side mid-crossing
        cmp.regime_consistent = true;
        break;
      case Regime::Large:
        cmp.regime_consistent = (above > 0);
        break;
    }
  }
  return cmp;
}

}  // namespace rydosc
