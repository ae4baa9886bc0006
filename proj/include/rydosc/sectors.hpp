#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rydosc/basis.hpp"

namespace rydosc {

// Momentum sector of the 2-site translation T2. T2 has order L = n_s/2, so
// the momenta are k = 2 pi m / L for m = 0..L-1. The sector basis consists of
// Bloch sums over T2-orbits; an orbit of period p contributes to sector m iff
// m*p = 0 (mod L).
struct MomentumSector {
  int k_index = 0;                // m
  double k = 0.0;                 // 2 pi m / L
  std::vector<int> orbit_ids;    // orbits contributing to this sector
};

struct SectorDecomposition {
  int n_sites = 0;
  int order = 0;                      // L = n_s / 2
  std::vector<Label> orbit_rep;       // numerically smallest label per orbit
  std::vector<int> orbit_period;      // p, divides L
  std::vector<int> orbit_of;          // basis index -> orbit id
  std::vector<int> shift_to_rep;      // basis index -> sigma with T2^sigma |x> = |rep>
  std::vector<MomentumSector> sectors;

  std::size_t n_orbits() const { return orbit_rep.size(); }

  std::size_t sector_dimension(int m) const { return sectors[m].orbit_ids.size(); }

  bool orbit_in_sector(int orbit, int m) const {
    return (m * orbit_period[orbit]) % order == 0;
  }
};

inline double two_pi_over(int order) {
  return 2.0 * std::numbers::pi / static_cast<double>(order);
}

// Partitions the basis into T2-orbits and assembles the momentum sectors.
// Scanning labels in ascending order makes the first unvisited member of each
// orbit its representative, so representatives are the smallest labels and
// the construction is deterministic.
inline SectorDecomposition build_sectors(const Basis& basis) {
  SectorDecomposition dec;
  dec.n_sites = basis.n_sites();
  dec.order = basis.n_sites() / 2;
  const std::size_t dim = basis.size();
  dec.orbit_of.assign(dim, -1);
  dec.shift_to_rep.assign(dim, 0);

  for (std::size_t i = 0; i < dim; ++i) {
    if (dec.orbit_of[i] >= 0) continue;
    const int id = static_cast<int>(dec.orbit_rep.size());
    const Label rep = basis.state(i);
    // Walk the orbit: z_r = T2^r(rep). Bringing z_r back to rep takes
    // sigma = (p - r) mod p further applications.
    std::vector<std::ptrdiff_t> members;
    Label z = rep;
    do {
      const std::ptrdiff_t idx = basis.index_of(z);
      members.push_back(idx);
      z = translate2(z, dec.n_sites);
    } while (z != rep);
    const int p = static_cast<int>(members.size());
    for (int r = 0; r < p; ++r) {
      dec.orbit_of[members[r]] = id;
      dec.shift_to_rep[members[r]] = (p - r) % p;
    }
    dec.orbit_rep.push_back(rep);
    dec.orbit_period.push_back(p);
  }

  dec.sectors.resize(dec.order);
  for (int m = 0; m < dec.order; ++m) {
    dec.sectors[m].k_index = m;
    dec.sectors[m].k = two_pi_over(dec.order) * m;
    for (int o = 0; o < static_cast<int>(dec.n_orbits()); ++o)
      if (dec.orbit_in_sector(o, m)) dec.sectors[m].orbit_ids.push_back(o);
  }
  return dec;
}

}  // namespace rydosc
