#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rydosc/spectrum.hpp"

using namespace rydosc;
using Catch::Approx;

namespace {

TimeSeries cosine_series(const std::vector<std::pair<double, double>>& lines,
                         double dt, double t_stop) {
  TimeSeries ts;
  ts.dt_us = dt;
  ts.t_stop_us = t_stop;
  const std::size_t n = sample_count(t_stop, dt);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i * dt;
    double m = 0.0;
    for (const auto& [w, a] : lines) m += a * std::cos(w * t);
    ts.t_us.push_back(t);
    ts.m.push_back(m);
    ts.rho_ns.push_back(0.0);
    ts.energy.push_back(0.0);
    ts.norm.push_back(1.0);
  }
  return ts;
}

}  // namespace

TEST_CASE("transform subtracts the mean") {
  TimeSeries ts = cosine_series({{0.0, 1.0}}, 0.1, 10.0);  // constant series
  transform(ts);
  for (double v : ts.m_t) REQUIRE(v == Approx(0.0).margin(1e-15));

  TimeSeries tc = cosine_series({{3.0, 0.5}}, 0.01, 50.0);
  for (auto& v : tc.m) v += 0.25;  // offset cosine
  transform(tc);
  double mean = 0.0;
  for (double v : tc.m_t) mean += v;
  REQUIRE(mean / tc.m_t.size() == Approx(0.0).margin(1e-14));
  // shape preserved up to the constant shift
  for (std::size_t i = 0; i < tc.size(); ++i)
    REQUIRE(tc.m_t[i] - (tc.m[i] - 0.25) == Approx(tc.m_t[0] - (tc.m[0] - 0.25)).margin(1e-12));
}

TEST_CASE("a pure cosine yields one peak at its frequency") {
  const double w0 = 3.0 * two_pi;  // 3 Omega at Omega = 2pi rad/us
  TimeSeries ts = cosine_series({{w0, 1.0}}, 0.005, 400.0);
  transform(ts);
  const Spectrum sp = fourier_magnitude(ts, 8, 40.0);
  std::size_t imax = 0;
  for (std::size_t i = 0; i < sp.magnitude.size(); ++i)
    if (sp.magnitude[i] > sp.magnitude[imax]) imax = i;
  REQUIRE(std::abs(sp.omega[imax] - w0) <= sp.resolution);  // within one bin

  // 100x shorter signal -> roughly 100x wider peak
  TimeSeries short_ts = cosine_series({{w0, 1.0}}, 0.005, 4.0);
  transform(short_ts);
  const Spectrum sp_short = fourier_magnitude(short_ts, 8, 40.0);
  const double ratio = dominant_fwhm(sp_short) / dominant_fwhm(sp);
  REQUIRE(ratio > 50.0);
  REQUIRE(ratio < 200.0);

  // rectangular window, magnitude spectrum: half-max width of |sinc| is
  // 1.2067 bins of 2pi / T
  REQUIRE(dominant_fwhm(sp) ==
          Approx(1.2067 * two_pi / ts.t_stop_us).epsilon(0.05));
}

TEST_CASE("a non-uniform time grid is rejected") {
  TimeSeries ts = cosine_series({{3.0, 1.0}}, 0.01, 5.0);
  transform(ts);
  ts.t_us[100] += 0.004;
  REQUIRE_THROWS_AS(fourier_magnitude(ts, 2), ConfigError);
}

TEST_CASE("zero series transforms to a zero spectrum") {
  TimeSeries ts = cosine_series({{1.0, 0.0}}, 0.01, 10.0);
  transform(ts);
  const Spectrum sp = fourier_magnitude(ts, 4);
  for (double v : sp.magnitude) REQUIRE(v == 0.0);
}

TEST_CASE("Parseval consistency of the padded transform") {
  TimeSeries ts = cosine_series({{5.0, 0.7}, {11.0, 0.2}}, 0.01, 30.0);
  transform(ts);
  const Spectrum sp = fourier_magnitude(ts, 4);  // no omega cutoff
  const std::size_t n_pad = ts.size() * 4;
  double sum_freq = 0.0;
  for (std::size_t k = 0; k < sp.magnitude.size(); ++k) {
    const bool edge = (k == 0) || (n_pad % 2 == 0 && k == n_pad / 2);
    sum_freq += (edge ? 1.0 : 2.0) * sp.magnitude[k] * sp.magnitude[k];
  }
  double sum_time = 0.0;
  for (double v : ts.m_t) sum_time += v * v;
  REQUIRE(sum_freq == Approx(n_pad * sum_time).epsilon(1e-10));
}

TEST_CASE("peak detection separates lines and flags the dominant one") {
  TimeSeries ts =
      cosine_series({{10.0, 1.0}, {14.0, 0.5}, {18.0, 0.25}}, 0.005, 200.0);
  transform(ts);
  const Spectrum sp = fourier_magnitude(ts, 8, 30.0);
  const PeakSet peaks = detect_peaks(sp, 0.02, 128);
  REQUIRE(peaks.peaks.size() == 3);
  REQUIRE(peaks.dominant().omega == Approx(10.0).margin(2 * sp.resolution));
  REQUIRE(peaks.peaks[1].omega == Approx(14.0).margin(2 * sp.resolution));
  REQUIRE(peaks.peaks[2].omega == Approx(18.0).margin(2 * sp.resolution));
  REQUIRE(peaks.peaks[0].dominant);
  REQUIRE_FALSE(peaks.peaks[1].dominant);
  // magnitudes sorted by input amplitudes
  REQUIRE(peaks.peaks[0].magnitude > peaks.peaks[1].magnitude);
  REQUIRE(peaks.peaks[1].magnitude > peaks.peaks[2].magnitude);
}

TEST_CASE("prominence threshold suppresses weak lines") {
  TimeSeries ts = cosine_series({{10.0, 1.0}, {15.0, 0.005}}, 0.005, 200.0);
  transform(ts);
  const Spectrum sp = fourier_magnitude(ts, 8, 30.0);
  const PeakSet peaks = detect_peaks(sp, 0.02, 128);
  REQUIRE(peaks.peaks.size() == 1);
}

TEST_CASE("peaks match omega lines by absolute value within tolerance") {
  TimeSeries ts = cosine_series({{9.0, 1.0}, {14.0, 0.5}}, 0.005, 200.0);
  transform(ts);
  const Spectrum sp = fourier_magnitude(ts, 8, 30.0);
  const PeakSet peaks = detect_peaks(sp, 0.02, 128);
  REQUIRE(peaks.peaks.size() == 2);

  // the 9 rad/us component is described by a negative line (aliased)
  const std::vector<double> lines{-9.0, 14.0, 25.0};
  const MatchReport rep = match_peaks(peaks, lines, sp, 2.0);
  REQUIRE(rep.matches[0].line_index == 0);
  REQUIRE(rep.matches[1].line_index == 1);
  REQUIRE(rep.unmatched == 0);

  const std::vector<double> far{40.0};
  const MatchReport rep2 = match_peaks(peaks, far, sp, 2.0);
  REQUIRE(rep2.unmatched == 2);
  REQUIRE(rep2.matches[0].line_index == -1);
}
