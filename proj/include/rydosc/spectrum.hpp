#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <vector>

#include <fftw3.h>

#include "rydosc/errors.hpp"
#include "rydosc/evolve.hpp"
#include "rydosc/model.hpp"

namespace rydosc {

// M_T = M - mean(M); fills the m_t column in place.
inline void transform(TimeSeries& series) {
  if (series.m.empty()) throw ConfigError("transform: empty series");
  const double mean =
      std::accumulate(series.m.begin(), series.m.end(), 0.0) / series.m.size();
  series.m_t.resize(series.m.size());
  for (std::size_t i = 0; i < series.m.size(); ++i)
    series.m_t[i] = series.m[i] - mean;
}

// Fourier magnitude of a real series on the angular-frequency grid
// omega_k = 2 pi k / (N_pad dt). Rectangular window; zero-padding refines the
// grid but not the underlying resolution 2 pi / (n dt).
struct Spectrum {
  double domega = 0.0;       // grid spacing (padded), rad/us
  double resolution = 0.0;   // window-limited resolution 2 pi / (n dt), rad/us
  double t_stop_us = 0.0;
  double dt_us = 0.0;
  int pad_factor = 1;
  std::vector<double> omega;
  std::vector<double> magnitude;
};

namespace detail {
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

inline Spectrum fourier_magnitude(const std::vector<double>& samples, double dt_us,
                                  int pad_factor, double omega_max = 0.0) {
  if (samples.empty()) throw ConfigError("fourier_magnitude: empty series");
  if (pad_factor < 1) throw ConfigError("fourier_magnitude: pad_factor must be >= 1");
  const std::size_t n = samples.size();
  const std::size_t n_pad = n * static_cast<std::size_t>(pad_factor);

  std::vector<double> in(n_pad, 0.0);
  std::copy(samples.begin(), samples.end(), in.begin());
  std::vector<fftw_complex> out(n_pad / 2 + 1);
  {
    // FFTW planning is not thread-safe; FFTW_ESTIMATE keeps the algorithm
    // choice (and hence the bits) independent of runtime measurements.
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_pad), in.data(),
                                          out.data(), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }

  Spectrum sp;
  sp.dt_us = dt_us;
  sp.t_stop_us = (n - 1) * dt_us;
  sp.pad_factor = pad_factor;
  sp.domega = two_pi / (static_cast<double>(n_pad) * dt_us);
  sp.resolution = two_pi / (static_cast<double>(n) * dt_us);
  const std::size_t n_bins = n_pad / 2 + 1;
  sp.omega.reserve(n_bins);
  sp.magnitude.reserve(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double w = k * sp.domega;
    if (omega_max > 0.0 && w > omega_max) break;
    sp.omega.push_back(w);
    sp.magnitude.push_back(std::hypot(out[k][0], out[k][1]));
  }
  return sp;
}

inline Spectrum fourier_magnitude(const TimeSeries& series, int pad_factor,
                                  double omega_max = 0.0) {
  if (series.m_t.size() != series.m.size())
    throw DependencyError("fourier_magnitude: run transform() first");
  for (std::size_t i = 1; i < series.t_us.size(); ++i)
    if (std::abs(series.t_us[i] - series.t_us[i - 1] - series.dt_us) >
        1e-6 * series.dt_us)
      throw ConfigError("fourier_magnitude: non-uniform time grid");
  return fourier_magnitude(series.m_t, series.dt_us, pad_factor, omega_max);
}

struct Peak {
  double omega = 0.0;
  double magnitude = 0.0;
  double prominence = 0.0;
  bool dominant = false;
};

struct PeakSet {
  std::vector<Peak> peaks;  // sorted by omega
  int dominant_index = -1;  // global maximum magnitude

  const Peak& dominant() const { return peaks[dominant_index]; }
};

// Local maxima filtered by topographic prominence (height above the highest
// saddle toward higher terrain) and by pairwise separation on the stored
// grid; of peaks closer than min_separation_bins the taller one survives.
inline PeakSet detect_peaks(const Spectrum& sp, double min_prominence_frac = 0.02,
                            int min_separation_bins = 3) {
  const auto& y = sp.magnitude;
  PeakSet out;
  if (y.size() < 3) return out;
  const double global_max = *std::max_element(y.begin(), y.end());
  if (global_max <= 0.0) return out;

  struct Candidate {
    std::size_t bin;
    double prominence;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    double left_min = y[i];
    for (std::size_t j = i; j-- > 0;) {
      if (y[j] > y[i]) break;
      left_min = std::min(left_min, y[j]);
    }
    double right_min = y[i];
    for (std::size_t j = i + 1; j < y.size(); ++j) {
      if (y[j] > y[i]) break;
      right_min = std::min(right_min, y[j]);
    }
    const double prom = y[i] - std::max(left_min, right_min);
    if (prom >= min_prominence_frac * global_max) cands.push_back({i, prom});
  }

  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (y[a.bin] != y[b.bin]) return y[a.bin] > y[b.bin];
    return a.bin < b.bin;
  });
  std::vector<std::size_t> accepted;
  for (const auto& c : cands) {
    bool ok = true;
    for (std::size_t b : accepted) {
      const std::size_t d = (b > c.bin) ? b - c.bin : c.bin - b;
      if (d < static_cast<std::size_t>(min_separation_bins)) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(c.bin);
  }
  std::sort(accepted.begin(), accepted.end());

  for (std::size_t b : accepted) {
    Peak p;
    p.omega = sp.omega[b];
    p.magnitude = y[b];
    for (const auto& c : cands)
      if (c.bin == b) p.prominence = c.prominence;
    out.peaks.push_back(p);
  }
  for (std::size_t i = 0; i < out.peaks.size(); ++i)
    if (out.dominant_index < 0 ||
        out.peaks[i].magnitude > out.peaks[out.dominant_index].magnitude)
      out.dominant_index = static_cast<int>(i);
  if (out.dominant_index >= 0) out.peaks[out.dominant_index].dominant = true;
  return out;
}

// Full width at half maximum of the tallest peak, by linear interpolation of
// the half-height crossings.
inline double dominant_fwhm(const Spectrum& sp) {
  const auto& y = sp.magnitude;
  if (y.size() < 3) return 0.0;
  const std::size_t imax =
      std::max_element(y.begin(), y.end()) - y.begin();
  const double half = 0.5 * y[imax];
  double left = sp.omega.front();
  for (std::size_t j = imax; j-- > 0;) {
    if (y[j] <= half) {
      const double f = (half - y[j]) / (y[j + 1] - y[j]);
      left = sp.omega[j] + f * sp.domega;
      break;
    }
  }
  double right = sp.omega.back();
  for (std::size_t j = imax + 1; j < y.size(); ++j) {
    if (y[j] <= half) {
      const double f = (y[j - 1] - half) / (y[j - 1] - y[j]);
      right = sp.omega[j - 1] + f * sp.domega;
      break;
    }
  }
  return right - left;
}

// Re-reads each detected peak's position and height off a finer (padded)
// grid, searching within one coarse bin of the detected location. Detection
// itself belongs on the unpadded grid, where the skirt of an isolated line is
// monotone between bins and produces no spurious maxima; padding only
// interpolates the lobe for position readout.
inline PeakSet refine_peaks(const PeakSet& coarse, const Spectrum& fine,
                            double search_halfwidth) {
  PeakSet out = coarse;
  for (auto& p : out.peaks) {
    const auto lo = std::lower_bound(fine.omega.begin(), fine.omega.end(),
                                     p.omega - search_halfwidth);
    const auto hi = std::upper_bound(fine.omega.begin(), fine.omega.end(),
                                     p.omega + search_halfwidth);
    if (lo == hi) continue;
    std::size_t best = lo - fine.omega.begin();
    for (std::size_t k = best; k < static_cast<std::size_t>(hi - fine.omega.begin()); ++k)
      if (fine.magnitude[k] > fine.magnitude[best]) best = k;
    p.omega = fine.omega[best];
    p.magnitude = fine.magnitude[best];
  }
  out.dominant_index = -1;
  for (std::size_t i = 0; i < out.peaks.size(); ++i) {
    out.peaks[i].dominant = false;
    if (out.dominant_index < 0 ||
        out.peaks[i].magnitude > out.peaks[out.dominant_index].magnitude)
      out.dominant_index = static_cast<int>(i);
  }
  if (out.dominant_index >= 0) out.peaks[out.dominant_index].dominant = true;
  return out;
}

struct PeakMatch {
  int peak_index = -1;
  int line_index = -1;  // index into the omega-line list (ell - 1), -1 if unmatched
  double residual = 0.0;
};

struct MatchReport {
  std::vector<PeakMatch> matches;    // one entry per detected peak
  double tolerance = 0.0;            // rad/us
  int unmatched = 0;

  int line_of_peak(int peak_index) const { return matches[peak_index].line_index; }
};

// Assigns each detected peak to the nearest omega line (compared by absolute
// value: frequencies below zero alias onto the positive axis) within
// tol_bins window-resolution units.
inline MatchReport match_peaks(const PeakSet& peaks, const std::vector<double>& lines,
                               const Spectrum& sp, double tol_bins = 2.0) {
  MatchReport rep;
  rep.tolerance = tol_bins * sp.resolution;
  for (int p = 0; p < static_cast<int>(peaks.peaks.size()); ++p) {
    PeakMatch m;
    m.peak_index = p;
    double best = rep.tolerance;
    for (int l = 0; l < static_cast<int>(lines.size()); ++l) {
      const double r = std::abs(peaks.peaks[p].omega - std::abs(lines[l]));
      if (r <= best) {
        best = r;
        m.line_index = l;
        m.residual = r;
      }
    }
    if (m.line_index < 0) ++rep.unmatched;
    rep.matches.push_back(m);
  }
  return rep;
}

}  // namespace rydosc
