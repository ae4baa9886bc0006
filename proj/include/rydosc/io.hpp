#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rydosc/config.hpp"
#include "rydosc/eigensolve.hpp"
#include "rydosc/evolve.hpp"
#include "rydosc/feasibility.hpp"
#include "rydosc/meson.hpp"
#include "rydosc/spectrum.hpp"

namespace rydosc {

using json = nlohmann::json;

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("missing file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Compact tag for file names: sign + %g, e.g. +0.01 / -0.06.
inline std::string beta_tag(double beta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+g", beta);
  return buf;
}

inline std::string tstop_tag(double t_over_2pi) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t_over_2pi);
  return buf;
}

inline json config_echo_json(const RunConfig& cfg) {
  json j;
  std::stringstream ss(cfg.to_text());
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    j[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return j;
}

inline json metadata_json(const RunConfig& cfg) {
  json meta;
  meta["config"] = config_echo_json(cfg);
  meta["config_hash"] = cfg.hash();
  return meta;
}

// Provenance comment placed at the top of every CSV; readers skip '#' lines.
inline std::string csv_provenance(const RunConfig& cfg) {
  return "# config_hash = " + cfg.hash() + "\n";
}

// --- time series ---

inline std::string timeseries_csv(const TimeSeries& ts, double omega_mhz) {
  std::string s = "t_us,omega_t_over_2pi,M,M_T,rho_ns,energy,norm\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    s += fmt_g(ts.t_us[i]);
    s += ",";
    s += fmt_g(ts.t_us[i] * omega_mhz);
    s += ",";
    s += fmt_g(ts.m[i]);
    s += ",";
    s += ts.m_t.empty() ? "" : fmt_g(ts.m_t[i]);
    s += ",";
    s += fmt_g(ts.rho_ns[i]);
    s += ",";
    s += fmt_g(ts.energy[i]);
    s += ",";
    s += fmt_g(ts.norm[i]);
    s += "\n";
  }
  return s;
}

inline TimeSeries timeseries_from_csv(const std::string& text) {
  TimeSeries ts;
  std::stringstream ss(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(ss, line)) {
    if (detail::trim(line).empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 7) throw DependencyError("timeseries CSV: short row");
    ts.t_us.push_back(std::strtod(cells[0].c_str(), nullptr));
    ts.m.push_back(std::strtod(cells[2].c_str(), nullptr));
    if (!cells[3].empty()) ts.m_t.push_back(std::strtod(cells[3].c_str(), nullptr));
    ts.rho_ns.push_back(std::strtod(cells[4].c_str(), nullptr));
    ts.energy.push_back(std::strtod(cells[5].c_str(), nullptr));
    ts.norm.push_back(std::strtod(cells[6].c_str(), nullptr));
  }
  if (!header_seen) throw DependencyError("timeseries CSV: empty file");
  if (ts.size() >= 2) ts.dt_us = ts.t_us[1] - ts.t_us[0];
  if (!ts.t_us.empty()) ts.t_stop_us = ts.t_us.back();
  return ts;
}

// --- eigenstructure ---

inline json eigen_to_json(const EigenData& data, const RunConfig& cfg) {
  json j;
  j["metadata"] = metadata_json(cfg);
  j["metadata"]["ground_energy_rad_per_us"] = data.records[data.gs].energy;
  j["metadata"]["beta"] = data.params.beta();
  json states = json::array();
  const double e0 = data.records[data.gs].energy;
  for (const auto& r : data.records) {
    json s;
    s["E"] = r.energy - e0;  // ground state energy set to zero on output
    s["k_index"] = r.k_index;
    s["rho_ns"] = r.rho_ns;
    s["z2_overlap"] = {r.ov_z2_odd, r.ov_z2_even};
    s["tag"] = tag_name(r.tag);
    if (r.meson_ell > 0) s["ell"] = r.meson_ell;
    states.push_back(s);
  }
  j["states"] = states;
  json lines;
  lines["omega_lm"] = omega_lines(data, ReferenceState::MS);
  lines["omega_lg"] = omega_lines(data, ReferenceState::GS);
  j["omega_lines"] = lines;
  return j;
}

inline std::string eigen_csv(const EigenData& data) {
  const double e0 = data.records[data.gs].energy;
  std::string s = "E_minus_Eg_rad_per_us,k_index,rho_ns,tag\n";
  for (const auto& r : data.records) {
    s += fmt_g(r.energy - e0);
    s += ",";
    s += std::to_string(r.k_index);
    s += ",";
    s += fmt_g(r.rho_ns);
    s += ",";
    s += tag_name(r.tag);
    s += "\n";
  }
  return s;
}

// --- spectra & peaks ---

inline std::string spectrum_csv(const Spectrum& sp, double omega) {
  std::string s = "omega_rad_per_us,omega_over_Omega,magnitude\n";
  for (std::size_t i = 0; i < sp.omega.size(); ++i) {
    s += fmt_g(sp.omega[i]);
    s += ",";
    s += fmt_g(sp.omega[i] / omega);
    s += ",";
    s += fmt_g(sp.magnitude[i]);
    s += "\n";
  }
  return s;
}

inline json peaks_to_json(const PeakSet& peaks, const Spectrum& sp) {
  json j;
  j["provenance"] = {{"t_stop_us", sp.t_stop_us},
                     {"dt_us", sp.dt_us},
                     {"pad_factor", sp.pad_factor},
                     {"resolution_rad_per_us", sp.resolution}};
  json arr = json::array();
  for (const auto& p : peaks.peaks)
    arr.push_back({{"omega", p.omega},
                   {"magnitude", p.magnitude},
                   {"prominence", p.prominence},
                   {"dominant", p.dominant}});
  j["peaks"] = arr;
  j["dominant_index"] = peaks.dominant_index;
  return j;
}

inline json match_to_json(const MatchReport& rep, const std::vector<double>& lines,
                          const std::string& reference) {
  json j;
  j["reference"] = reference;  // "MS" or "GS"
  j["tolerance_rad_per_us"] = rep.tolerance;
  j["omega_lines"] = lines;
  json arr = json::array();
  for (const auto& m : rep.matches)
    arr.push_back({{"peak_index", m.peak_index},
                   {"line_index", m.line_index},
                   {"ell", m.line_index >= 0 ? m.line_index + 1 : 0},
                   {"residual", m.residual}});
  j["matches"] = arr;
  j["unmatched"] = rep.unmatched;
  return j;
}

// --- meson models ---

inline json classical_to_json(const ClassicalPotentials& cp) {
  json j;
  j["eps0_rad_per_us"] = cp.eps0;
  j["v2_rad_per_us"] = cp.v2;
  j["regime"] = regime_name(cp.regime);
  j["metastable_order_ok"] = cp.metastable_order_ok;
  j["ground_order_ok"] = cp.ground_order_ok;
  json arr = json::array();
  for (const auto& lv : cp.levels)
    arr.push_back({{"n", lv.n}, {"eps", lv.eps}, {"omega", lv.omega}});
  j["levels"] = arr;
  return j;
}

inline json prediction_to_json(const PerturbativePrediction& pr) {
  json j;
  j["dominant_ell"] = pr.dominant_ell;
  json arr = json::array();
  for (const auto& l : pr.lines)
    arr.push_back({{"ell", l.ell},
                   {"omega", l.omega},
                   {"weight", l.weight},
                   {"hamming", l.hamming}});
  j["lines"] = arr;
  return j;
}

inline json comparison_to_json(const ModelComparison& cmp) {
  json j;
  j["rank_correlation"] = cmp.rank_correlation;
  j["secondary_spacing_mean"] = cmp.secondary_spacing_mean;
  j["spacing_over_two_dloc"] = cmp.spacing_over_two_dloc;
  j["regime"] = regime_name(cmp.regime);
  j["regime_consistent"] = cmp.regime_consistent;
  json arr = json::array();
  for (const auto& r : cmp.rows)
    arr.push_back({{"omega", r.omega},
                   {"magnitude", r.magnitude},
                   {"line_index", r.line_index},
                   {"line_residual", r.line_residual},
                   {"classical_n", r.classical_n},
                   {"classical_residual", r.classical_residual}});
  j["peaks"] = arr;
  return j;
}

// --- feasibility ---

inline json rescale_to_json(const RescaledProtocol& p) {
  return {{"omega_new_rad_per_us", p.omega_new},
          {"omega_new_mhz", mhz_from_omega(p.omega_new)},
          {"a_new_um", p.a_new_um},
          {"rb_new_um", p.rb_new_um},
          {"rb_over_a_target", p.rb_over_a_target},
          {"delta_glob_new_rad_per_us", p.delta_glob_new},
          {"t_prep_us", p.t_prep_us},
          {"t_evolve_us", p.t_evolve_us},
          {"effective_duration", p.effective_duration},
          {"footprint_um", p.footprint_um}};
}

inline json violations_to_json(const std::vector<Violation>& vs) {
  json arr = json::array();
  for (const auto& v : vs)
    arr.push_back({{"quantity", v.quantity},
                   {"value", v.value},
                   {"bound", v.bound},
                   {"margin", v.margin}});
  return arr;
}

}  // namespace rydosc
