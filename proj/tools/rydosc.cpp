// Command-line front end: simulate | eigens | spectrum | sweep | models |
// feasibility, driven by a key-value config with per-flag overrides.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rydosc/pipeline.hpp"

namespace {

using namespace rydosc;

constexpr const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Renders spectrum CSVs produced by `rydosc spectrum`/`rydosc sweep`.

Usage: python3 plot_spectra.py spectrum_beta+0.01_t400.csv [more.csv ...]
Reads the sibling peaks_*.json for omega-line guides when present.
"""
import json
import os
import sys

import matplotlib.pyplot as plt

fig, ax = plt.subplots(figsize=(7, 4))
for path in sys.argv[1:]:
    omega, mag = [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("omega"):
                continue
            w, _, m = line.split(",")
            omega.append(float(w))
            mag.append(float(m))
    ax.plot(omega, mag, lw=0.8, label=os.path.basename(path))
    peaks = path.replace("spectrum_", "peaks_").replace(".csv", ".json")
    if os.path.exists(peaks):
        with open(peaks) as fh:
            data = json.load(fh)
        for w in data.get("match", {}).get("omega_lines", []):
            ax.axvline(abs(w), color="grey", lw=0.6, alpha=0.6)
ax.set_xlabel(r"$\omega$ [rad/$\mu$s]")
ax.set_ylabel(r"$|\tilde{M}_T(\omega)|$")
ax.set_yscale("log")
ax.legend(fontsize=7)
fig.tight_layout()
out = "spectra.png"
fig.savefig(out, dpi=160)
print(out)
)PY";

RunConfig load_config(const std::string& config_path, const std::string& out_dir,
                      double* beta, const std::vector<double>& tstops,
                      const std::string& layout, const std::string& basis,
                      int threads) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (beta != nullptr) cfg.beta = *beta;
  if (!tstops.empty()) {
    cfg.t_stops = tstops;
    std::sort(cfg.t_stops.begin(), cfg.t_stops.end());
  }
  if (!layout.empty()) cfg.layout = layout;
  if (!basis.empty()) cfg.basis = basis;
  if (threads > 0) cfg.threads = threads;
  cfg.layout_enum();  // validate
  cfg.basis_enum();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg-ring metastable oscillation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, layout, basis, constraints_path;
  std::vector<double> tstops, betas;
  double beta = 0.0;
  bool beta_set = false;
  int threads = 0;
  bool emit_plot = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--tstop", tstops, "stop times, units Omega t / 2pi");
    cmd->add_option("--layout", layout, "ring-chord | modular-1d");
    cmd->add_option("--basis", basis, "full | blockade");
    cmd->add_option("--threads", threads, "worker threads");
  };
  auto add_beta = [&](CLI::App* cmd) {
    cmd->add_option("--beta", beta, "local detuning parameter")
        ->each([&](const std::string&) { beta_set = true; });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "prepare, quench, evolve");
  add_common(simulate);
  add_beta(simulate);

  CLI::App* eigens = app.add_subcommand("eigens", "symmetry-resolved eigenstructure");
  add_common(eigens);
  add_beta(eigens);

  CLI::App* spectrum = app.add_subcommand("spectrum", "Fourier spectra and peaks");
  add_common(spectrum);
  add_beta(spectrum);
  spectrum->add_flag("--emit-plot-script", emit_plot, "write plot_spectra.py");

  CLI::App* sweep = app.add_subcommand("sweep", "run a list of beta points");
  add_common(sweep);
  sweep->add_option("--beta", betas, "beta points (repeatable)");
  sweep->add_flag("--emit-plot-script", emit_plot, "write plot_spectra.py");

  CLI::App* models = app.add_subcommand("models", "classical + perturbative models");
  add_common(models);
  add_beta(models);

  CLI::App* feasibility = app.add_subcommand("feasibility", "hardware arithmetic");
  add_common(feasibility);
  feasibility->add_option("--constraints", constraints_path,
                          "hardware constraints file");

  try {
    app.parse(argc, argv);

    RunConfig cfg = load_config(config_path, out_dir, beta_set ? &beta : nullptr,
                                tstops, layout, basis, threads);

    if (simulate->parsed()) {
      cmd_simulate(cfg);
    } else if (eigens->parsed()) {
      cmd_eigens(cfg);
    } else if (spectrum->parsed()) {
      cmd_spectrum(cfg);
    } else if (sweep->parsed()) {
      const std::vector<double>& points = betas.empty() ? cfg.sweep_betas : betas;
      cmd_sweep(cfg, points);
    } else if (models->parsed()) {
      cmd_models(cfg);
    } else if (feasibility->parsed()) {
      const HardwareConstraints hw = constraints_path.empty()
                                         ? HardwareConstraints{}
                                         : constraints_from_file(constraints_path);
      cmd_feasibility(cfg, hw);
    }
    if (emit_plot)
      write_text_file(out_path(cfg, "plot_spectra.py"), kPlotScript);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const AccuracyError& e) {
    std::fprintf(stderr, "numerical-accuracy error: %s\n", e.what());
    return 3;
  } catch (const DependencyError& e) {
    std::fprintf(stderr, "dependency error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
