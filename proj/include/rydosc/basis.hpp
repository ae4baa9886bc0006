#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "rydosc/errors.hpp"

namespace rydosc {

// A chain configuration is an n_s-bit label; the leftmost (most significant)
// bit is atom 1 and the rightmost bit is atom n_s.
using Label = std::uint32_t;

inline constexpr int kMaxSites = 24;

inline Label label_mask(int n_sites) {
  return (n_sites == 32) ? ~Label{0} : ((Label{1} << n_sites) - 1);
}

// Occupation of site j (1-based).
inline int site_bit(Label x, int j, int n_sites) {
  return static_cast<int>((x >> (n_sites - j)) & 1u);
}

inline Label rotate_right(Label x, int s, int n_sites) {
  s %= n_sites;
  if (s == 0) return x;
  const Label mask = label_mask(n_sites);
  return ((x >> s) | (x << (n_sites - s))) & mask;
}

// 2-site translation T2 |x> = |x >> 2| with cyclic wraparound.
inline Label translate2(Label x, int n_sites) { return rotate_right(x, 2, n_sites); }

// True if no two cyclically adjacent sites are both excited.
inline bool blockade_allowed(Label x, int n_sites) {
  return (x & rotate_right(x, 1, n_sites)) == 0;
}

// Number of domain walls: cyclic adjacent pairs equal to 00 or 11. This is
// the eigenvalue of n_s * R_hat on a product state. Note it evaluates to n_s
// (not n_s/2) on |0...0>; we keep the operator exactly as defined since the
// value 2 for single-meson configurations is what the classification uses.
inline int domain_wall_number(Label x, int n_sites) {
  const Label diff = x ^ rotate_right(x, 1, n_sites);
  return n_sites - std::popcount(diff);
}

// The two antiferromagnetic product labels. z2_odd has Rydberg excitations on
// odd sites (|1010...10>), z2_even on even sites (|0101...01>).
inline Label z2_label_odd(int n_sites) {
  Label x = 0;
  for (int j = 1; j <= n_sites; j += 2) x |= Label{1} << (n_sites - j);
  return x;
}

inline Label z2_label_even(int n_sites) {
  return z2_label_odd(n_sites) ^ label_mask(n_sites);
}

enum class BasisMode { Full, BlockadeRestricted };

inline std::string basis_mode_name(BasisMode m) {
  return m == BasisMode::Full ? "full" : "blockade";
}

inline BasisMode basis_mode_from_name(const std::string& name) {
  if (name == "full") return BasisMode::Full;
  if (name == "blockade") return BasisMode::BlockadeRestricted;
  throw ConfigError("unknown basis mode '" + name + "' (full | blockade)");
}

// Enumerated computational basis with deterministic ascending-label order.
class Basis {
 public:
  static Basis enumerate(BasisMode mode, int n_sites) {
    if (n_sites < 4 || n_sites > kMaxSites || n_sites % 2 != 0)
      throw ConfigError("basis capacity: n_s must be even, 4 <= n_s <= 24");
    Basis b;
    b.mode_ = mode;
    b.n_sites_ = n_sites;
    const Label end = label_mask(n_sites);
    if (mode == BasisMode::Full) {
      b.states_.resize(std::size_t{1} << n_sites);
      for (Label x = 0;; ++x) {
        b.states_[x] = x;
        if (x == end) break;
      }
    } else {
      for (Label x = 0;; ++x) {
        if (blockade_allowed(x, n_sites)) b.states_.push_back(x);
        if (x == end) break;
      }
    }
    return b;
  }

  BasisMode mode() const { return mode_; }
  int n_sites() const { return n_sites_; }
  std::size_t size() const { return states_.size(); }
  Label state(std::size_t i) const { return states_[i]; }
  const std::vector<Label>& states() const { return states_; }

  // Position of a label, -1 if not in the basis.
  std::ptrdiff_t index_of(Label x) const {
    if (mode_ == BasisMode::Full) return static_cast<std::ptrdiff_t>(x);
    auto it = std::lower_bound(states_.begin(), states_.end(), x);
    if (it == states_.end() || *it != x) return -1;
    return it - states_.begin();
  }

 private:
  BasisMode mode_ = BasisMode::Full;
  int n_sites_ = 0;
  std::vector<Label> states_;
};

}  // namespace rydosc
