#!/usr/bin/env python3
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
