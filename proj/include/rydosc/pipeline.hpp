#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "rydosc/io.hpp"

namespace rydosc {

// Everything derived from a config at one local-detuning point.
struct ModelContext {
  ChainSpec spec;
  DriveParams params;
  Basis basis;
  SectorDecomposition dec;
  SparseOperator h;
  ObservableSet obs;

  static ModelContext build(const RunConfig& cfg, double beta) {
    ModelContext ctx;
    std::tie(ctx.spec, ctx.params) = cfg.make_model_beta(beta);
    ctx.basis = Basis::enumerate(cfg.basis_enum(), cfg.n_s);
    ctx.dec = build_sectors(ctx.basis);
    ctx.h = build_hamiltonian(ctx.spec, ctx.params, ctx.basis);
    ctx.obs = ObservableSet::build(ctx.basis);
    return ctx;
  }
};

inline EigenData compute_eigens(const ModelContext& ctx, const RunConfig& cfg,
                                int threads = 0) {
  EigenData data = sector_eigensolve(ctx.spec, ctx.params, ctx.basis, ctx.dec,
                                     ctx.h, threads > 0 ? threads : cfg.threads);
  classify(data, cfg.thresholds());
  return data;
}

// prepare (ground state of H at beta_prep) -> quench -> evolve to the largest
// stop time -> mean-subtracted magnetization.
inline TimeSeries compute_timeseries(const ModelContext& ctx, const RunConfig& cfg,
                                     Eigen::VectorXcd* final_state = nullptr) {
  const auto [spec_prep, params_prep] = cfg.make_model_beta(cfg.beta_prep);
  (void)spec_prep;
  const Eigen::VectorXcd psi0 =
      prepare_initial(ctx.spec, params_prep, ctx.basis, ctx.dec);
  TimeSeries ts = evolve(ctx.h, psi0, cfg.dt_us(), cfg.t_stop_us(cfg.max_t_stop()),
                         ctx.obs, cfg.krylov(), final_state);
  transform(ts);
  return ts;
}

// Spectrum analysis of one stop time (a prefix of the full series), with the
// peak set matched against the omega lines when eigendata is supplied. For
// beta > 0 the initial state rides the metastable branch (omega_{l m}); for
// beta < 0 the ground branch (omega_{l g}).
struct SpectrumAnalysis {
  double t_over_2pi = 0.0;
  Spectrum spectrum;
  PeakSet peaks;
  bool matched = false;
  std::string reference;  // "MS" | "GS"
  std::vector<double> lines;
  MatchReport match;
};

inline TimeSeries series_prefix(const TimeSeries& ts, std::size_t n) {
  TimeSeries out;
  out.dt_us = ts.dt_us;
  n = std::min(n, ts.size());
  out.t_us.assign(ts.t_us.begin(), ts.t_us.begin() + n);
  out.m.assign(ts.m.begin(), ts.m.begin() + n);
  out.rho_ns.assign(ts.rho_ns.begin(), ts.rho_ns.begin() + n);
  out.energy.assign(ts.energy.begin(), ts.energy.begin() + n);
  out.norm.assign(ts.norm.begin(), ts.norm.begin() + n);
  out.t_stop_us = out.t_us.empty() ? 0.0 : out.t_us.back();
  return out;
}

inline std::vector<SpectrumAnalysis> analyze_spectra(const TimeSeries& series,
                                                     const RunConfig& cfg,
                                                     double beta,
                                                     const EigenData* eig) {
  std::vector<SpectrumAnalysis> out;
  for (double t_over_2pi : cfg.t_stops) {
    SpectrumAnalysis an;
    an.t_over_2pi = t_over_2pi;
    TimeSeries prefix = series_prefix(series, sample_count(cfg.t_stop_us(t_over_2pi),
                                                           cfg.dt_us()));
    if (prefix.size() < 4)
      throw ConfigError("spectrum: stop time shorter than the sampling step");
    transform(prefix);
    an.spectrum = fourier_magnitude(prefix, cfg.pad_factor,
                                    cfg.omega_max_over_omega * cfg.omega());
    // detect on the unpadded grid (no sidelobe ripples between bins), then
    // read positions and heights off the padded grid
    const Spectrum coarse =
        fourier_magnitude(prefix, 1, cfg.omega_max_over_omega * cfg.omega());
    const PeakSet raw = detect_peaks(coarse, cfg.peak_prominence_frac,
                                     cfg.peak_separation_bins);
    an.peaks = refine_peaks(raw, an.spectrum, 0.75 * coarse.resolution);
    if (eig != nullptr) {
      const ReferenceState v = beta >= 0.0 ? ReferenceState::MS : ReferenceState::GS;
      an.reference = v == ReferenceState::MS ? "MS" : "GS";
      an.lines = omega_lines(*eig, v);
      an.match = match_peaks(an.peaks, an.lines, an.spectrum, cfg.match_tol_bins);
      an.matched = true;
    }
    out.push_back(std::move(an));
  }
  return out;
}

// --- aggregate trends over a beta sweep ---

struct SweepRow {
  double beta = 0.0;
  double dominant_omega = 0.0;
  double secondary_centroid = 0.0;   // unweighted mean position
  double secondary_spread = 0.0;     // max - min position
  double secondary_width_rms = 0.0;  // magnitude-weighted rms width; stable
                                     // against peaks fading across threshold
  int n_secondary = 0;               // matched secondary peaks
};

inline SweepRow sweep_row(double beta, const SpectrumAnalysis& an) {
  SweepRow row;
  row.beta = beta;
  if (an.peaks.dominant_index >= 0)
    row.dominant_omega = an.peaks.dominant().omega;
  std::vector<double> omega, mag;
  for (int p = 0; p < static_cast<int>(an.peaks.peaks.size()); ++p) {
    if (p == an.peaks.dominant_index) continue;
    if (an.matched && an.match.matches[p].line_index < 0) continue;
    omega.push_back(an.peaks.peaks[p].omega);
    mag.push_back(an.peaks.peaks[p].magnitude);
  }
  row.n_secondary = static_cast<int>(omega.size());
  if (omega.empty()) return row;
  double lo = omega[0], hi = omega[0], acc = 0.0, wsum = 0.0, wmean = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    lo = std::min(lo, omega[i]);
    hi = std::max(hi, omega[i]);
    acc += omega[i];
    wsum += mag[i];
    wmean += mag[i] * omega[i];
  }
  row.secondary_centroid = acc / omega.size();
  row.secondary_spread = hi - lo;
  wmean /= wsum;
  double var = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i)
    var += mag[i] * (omega[i] - wmean) * (omega[i] - wmean);
  row.secondary_width_rms = std::sqrt(var / wsum);
  return row;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s =
      "beta,dominant_omega,secondary_centroid,secondary_spread,"
      "secondary_width_rms,n_secondary\n";
  for (const auto& r : rows) {
    s += fmt_g(r.beta);
    s += ",";
    s += fmt_g(r.dominant_omega);
    s += ",";
    s += fmt_g(r.secondary_centroid);
    s += ",";
    s += fmt_g(r.secondary_spread);
    s += ",";
    s += fmt_g(r.secondary_width_rms);
    s += ",";
    s += std::to_string(r.n_secondary);
    s += "\n";
  }
  return s;
}

// --- file-producing commands (shared by the CLI and tests) ---

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
  return cfg.out_dir + "/" + name;
}

inline void write_resolved_config(const RunConfig& cfg) {
  write_text_file(out_path(cfg, "resolved_config.cfg"), cfg.to_text());
}

inline std::string timeseries_path(const RunConfig& cfg, double beta) {
  return out_path(cfg, "timeseries_beta" + beta_tag(beta) + ".csv");
}

inline std::string eigen_json_path(const RunConfig& cfg, double beta) {
  return out_path(cfg, "eigen_beta" + beta_tag(beta) + ".json");
}

inline void cmd_simulate_at(const RunConfig& cfg, double beta) {
  const ModelContext ctx = ModelContext::build(cfg, beta);
  const TimeSeries ts = compute_timeseries(ctx, cfg);
  write_text_file(timeseries_path(cfg, beta),
                  csv_provenance(cfg) + timeseries_csv(ts, cfg.omega_mhz));
  json sidecar;
  sidecar["metadata"] = metadata_json(cfg);
  sidecar["beta"] = beta;
  sidecar["beta_prep"] = cfg.beta_prep;
  sidecar["dt_us"] = ts.dt_us;
  sidecar["samples"] = ts.size();
  sidecar["solver"] = {{"krylov_dim", cfg.krylov_dim}, {"krylov_tol", cfg.krylov_tol}};
  sidecar["final_norm"] = ts.norm.back();
  write_text_file(out_path(cfg, "timeseries_beta" + beta_tag(beta) + ".json"),
                  sidecar.dump(2) + "\n");
}

inline void cmd_simulate(const RunConfig& cfg) {
  write_resolved_config(cfg);
  cmd_simulate_at(cfg, cfg.beta);
}

inline EigenData cmd_eigens_at(const RunConfig& cfg, double beta) {
  const ModelContext ctx = ModelContext::build(cfg, beta);
  const EigenData data = compute_eigens(ctx, cfg);
  write_text_file(eigen_json_path(cfg, beta), eigen_to_json(data, cfg).dump(2) + "\n");
  write_text_file(out_path(cfg, "eigen_beta" + beta_tag(beta) + ".csv"),
                  csv_provenance(cfg) + eigen_csv(data));
  return data;
}

inline void cmd_eigens(const RunConfig& cfg) {
  write_resolved_config(cfg);
  cmd_eigens_at(cfg, cfg.beta);
}

// Reads the simulate output back, recomputes spectra per stop time, matches
// against the eigens output when present.
inline void cmd_spectrum_at(const RunConfig& cfg, double beta) {
  const std::string ts_path = timeseries_path(cfg, beta);
  if (!std::filesystem::exists(ts_path))
    throw DependencyError("spectrum: missing " + ts_path + "; run `simulate` first");
  const TimeSeries ts = timeseries_from_csv(read_text_file(ts_path));

  EigenData data;
  bool have_eig = false;
  if (std::filesystem::exists(eigen_json_path(cfg, beta))) {
    const ModelContext ctx = ModelContext::build(cfg, beta);
    data = compute_eigens(ctx, cfg);
    have_eig = true;
  }
  const auto analyses = analyze_spectra(ts, cfg, beta, have_eig ? &data : nullptr);
  for (const auto& an : analyses) {
    const std::string suffix = "beta" + beta_tag(beta) + "_t" + tstop_tag(an.t_over_2pi);
    write_text_file(out_path(cfg, "spectrum_" + suffix + ".csv"),
                    csv_provenance(cfg) + spectrum_csv(an.spectrum, cfg.omega()));
    json j = peaks_to_json(an.peaks, an.spectrum);
    j["metadata"] = metadata_json(cfg);
    if (an.matched) j["match"] = match_to_json(an.match, an.lines, an.reference);
    write_text_file(out_path(cfg, "peaks_" + suffix + ".json"), j.dump(2) + "\n");
  }
}

inline void cmd_spectrum(const RunConfig& cfg) {
  write_resolved_config(cfg);
  cmd_spectrum_at(cfg, cfg.beta);
}

inline void cmd_models(const RunConfig& cfg) {
  write_resolved_config(cfg);
  const ModelContext ctx = ModelContext::build(cfg, cfg.beta);
  const ClassicalPotentials cp = classical_potentials(ctx.spec, ctx.params);
  const EigenData data = compute_eigens(ctx, cfg);
  const ReferenceState v = cfg.beta >= 0.0 ? ReferenceState::MS : ReferenceState::GS;
  const PerturbativePrediction pr = perturbative_prediction(data, ctx.dec, v);

  json j;
  j["metadata"] = metadata_json(cfg);
  j["classical"] = classical_to_json(cp);
  j["prediction"] = prediction_to_json(pr);
  const Classicality cl = classicality_ratio(ctx.params);
  j["classicality"] = {{"beta_alpha_sq", cl.beta_alpha_sq},
                       {"kinetic_scale_rad_per_us", cl.kinetic_scale}};

  // compare against measured peaks when a simulate output exists
  const std::string ts_path = timeseries_path(cfg, cfg.beta);
  if (std::filesystem::exists(ts_path)) {
    const TimeSeries ts = timeseries_from_csv(read_text_file(ts_path));
    const auto analyses = analyze_spectra(ts, cfg, cfg.beta, &data);
    const auto& an = analyses.back();  // highest resolution
    j["comparison"] =
        comparison_to_json(compare_models(an.peaks, an.match, cp, pr, ctx.params));
  } else {
    j["comparison"] = nullptr;
    j["comparison_note"] = "no " + ts_path + "; run `simulate` to enable";
  }
  write_text_file(out_path(cfg, "models_beta" + beta_tag(cfg.beta) + ".json"),
                  j.dump(2) + "\n");
}

inline void cmd_feasibility(const RunConfig& cfg, const HardwareConstraints& hw) {
  write_resolved_config(cfg);
  const auto [spec, params] = cfg.make_model();
  json j;
  j["metadata"] = metadata_json(cfg);
  j["constraints"] = {{"t_max_us", hw.t_max_us},
                      {"a_min_um", hw.a_min_um},
                      {"fov_um", {hw.fov_x_um, hw.fov_y_um}},
                      {"omega_range_rad_per_us", {hw.omega_min, hw.omega_max}},
                      {"delta_glob_range_rad_per_us",
                       {hw.delta_glob_min, hw.delta_glob_max}}};
  const Capacity cap = capacity(hw, spec.spacing_um);
  j["capacity"] = {{"n_x", cap.n_x}, {"n_y", cap.n_y}, {"n_chain", cap.n_chain}};
  json arr = json::array();
  for (double f : cfg.feas_omega_mhz) {
    const RescaledProtocol p =
        rescale(spec, params, omega_from_mhz(f), cfg.t_prep_us, hw.t_max_us);
    json entry = rescale_to_json(p);
    entry["violations"] = violations_to_json(validate(p, hw));
    const Capacity rcap = capacity(hw, p.a_new_um);
    entry["capacity"] = {{"n_x", rcap.n_x}, {"n_y", rcap.n_y}, {"n_chain", rcap.n_chain}};
    arr.push_back(entry);
  }
  j["rescaled"] = arr;
  write_text_file(out_path(cfg, "feasibility.json"), j.dump(2) + "\n");
}

// Per-point simulate + eigens + spectra, then the aggregate trend table.
// Points run in a small worker pool; each point writes only its own files.
inline void cmd_sweep(const RunConfig& cfg, const std::vector<double>& betas) {
  if (betas.empty()) throw ConfigError("sweep: empty beta list");
  write_resolved_config(cfg);
  std::vector<SweepRow> rows(betas.size());
  std::vector<std::exception_ptr> errors(betas.size());

  auto run_point = [&](std::size_t i) {
    try {
      const double beta = betas[i];
      const ModelContext ctx = ModelContext::build(cfg, beta);
      const EigenData data = compute_eigens(ctx, cfg, 1);
      write_text_file(eigen_json_path(cfg, beta),
                      eigen_to_json(data, cfg).dump(2) + "\n");
      write_text_file(out_path(cfg, "eigen_beta" + beta_tag(beta) + ".csv"),
                      csv_provenance(cfg) + eigen_csv(data));
      const TimeSeries ts = compute_timeseries(ctx, cfg);
      write_text_file(timeseries_path(cfg, beta),
                  csv_provenance(cfg) + timeseries_csv(ts, cfg.omega_mhz));
      const auto analyses = analyze_spectra(ts, cfg, beta, &data);
      for (const auto& an : analyses) {
        const std::string suffix =
            "beta" + beta_tag(beta) + "_t" + tstop_tag(an.t_over_2pi);
        write_text_file(out_path(cfg, "spectrum_" + suffix + ".csv"),
                        csv_provenance(cfg) + spectrum_csv(an.spectrum, cfg.omega()));
        json j = peaks_to_json(an.peaks, an.spectrum);
        j["metadata"] = metadata_json(cfg);
        j["match"] = match_to_json(an.match, an.lines, an.reference);
        write_text_file(out_path(cfg, "peaks_" + suffix + ".json"), j.dump(2) + "\n");
      }
      rows[i] = sweep_row(beta, analyses.back());
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const int workers =
      std::max(1, std::min(cfg.threads, static_cast<int>(betas.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < betas.size(); ++i) run_point(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < betas.size();
             i = next.fetch_add(1))
          run_point(i);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  write_text_file(out_path(cfg, "sweep_trends.csv"),
                  csv_provenance(cfg) + sweep_csv(rows));
}

}  // namespace rydosc
