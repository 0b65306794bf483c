"""Case-study systems and an end-to-end reproduction run.

Parameters: tau = 0.1, k = 0.5, M = 0.3, d = 0.5, T = 0.02, C = 0.1.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from pdregion.bands import critical_frequency, pd_band
from pdregion.config import GridSpec
from pdregion.genpass import ROperator, example2_system, gen_full_passivity, gen_pd_band
from pdregion.margins import robustness_distance, waterbed_bound, waterbed_identity
from pdregion.passivity import axis_residues, of_passivity_check
from pdregion.pdcore import pd_check_mimo_exact, pd_check_mimo_necessary
from pdregion.plotting import (
    band_bundle,
    nichols_bundle,
    numerical_range_bundle,
    nyquist_bundle,
    render,
    generalized_bundle,
)
from pdregion.genpass import gen_samples
from pdregion.ratpoly import RationalMatrix
from pdregion.tfparse import parse_system

PARAMS = {"tau": 0.1, "k": 0.5, "M": 0.3, "d": 0.5, "T": 0.02, "C": 0.1}

SYSTEM_FILES: dict[str, dict] = {
    "g1": {"name": "G1", "kind": "siso", "entries": [["1/(tau*s + k)"]], "parameters": PARAMS},
    "g2": {"name": "G2", "kind": "siso", "entries": [["1/(s*(M*s + d))"]], "parameters": PARAMS},
    "g3": {"name": "G3", "kind": "siso", "entries": [["1/((T*s + 1)*(M*s + d))"]], "parameters": PARAMS},
    "g4": {"name": "G4", "kind": "mimo",
           "entries": [["1/((T*s + 1)*(M*s + d))", "C/(T*s + 1)"],
                       ["C/(T*s + 1)", "1/(tau*s + k)"]],
           "parameters": PARAMS},
}


def case_systems() -> dict[str, RationalMatrix]:
    return {k: parse_system(v) for k, v in SYSTEM_FILES.items()}


def write_system_files(out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, v in SYSTEM_FILES.items():
        p = out / f"{k}.json"
        p.write_text(json.dumps(v, indent=2) + "\n")
        paths.append(p)
    return paths


def _band_label(band, w_max: float) -> str:
    if not band.intervals:
        return "empty"
    if band.intervals == [(0.0, 0.0)]:
        return "{0}"
    return " U ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in band.intervals)


def reproduce(out_dir=None, precision: int = 6) -> dict:
    """Run every case-study analysis; optionally write summary and figure data to ``out_dir``."""
    t0 = time.perf_counter()
    sy = case_systems()
    G1, G2, G3, G4 = (sy[k].scalar() if sy[k].size == 1 else sy[k] for k in ("g1", "g2", "g3", "g4"))
    grid = GridSpec()
    summary: dict = {}

    rows = []
    for s in (-0.5, -0.2, 0.0, 0.2, 1 / 3, 0.5):
        cf = critical_frequency(G3, s)
        rows.append({"sigma": s, "reported": cf.reported, "grid_point": cf.grid_point, "refined_edge": cf.refined_edge})
    summary["critical_frequencies_G3"] = rows

    summary["G1_passivity"] = {str(round(s, 6)): of_passivity_check(G1, s).verdict for s in (1 / 3, 0.5, 1.0)}
    summary["G2_bands"] = {str(s): _band_label(pd_band(G2, s), grid.w_max) for s in (0.0, 0.1, 1.0)}
    summary["G2_residue_at_0"] = axis_residues(G2)[0].residue.real

    S = np.eye(2) / 3
    logw = np.round(np.arange(-3.0, 2.0 + 1e-9, 0.1), 10)
    nec, exa = [], []
    for lw in logw:
        w = float(10.0 ** lw)
        nec.append(pd_check_mimo_necessary(G4, S, w).holds)
        exa.append(pd_check_mimo_exact(G4, S, w).holds)
    nec, exa = np.array(nec), np.array(exa)
    summary["G4"] = {
        "first_necessary_failure_logw": float(logw[np.argmin(nec)]) if not nec.all() else None,
        "first_exact_failure_logw": float(logw[np.argmin(exa)]) if not exa.all() else None,
        "exact_implies_necessary": bool(np.all(~exa | nec)),
        "band_exact": _band_label(pd_band(G4, S, mode="mimo_exact"), grid.w_max),
        "band_estimated": _band_label(pd_band(G4, S, mode="mimo_estimated"), grid.w_max),
    }

    D = ROperator.differentiator()
    summary["differential"] = {
        "G3": {str(s): gen_full_passivity(G3, s, D).verdict for s in (0.4, 0.6)},
        "G2": {str(s): gen_full_passivity(G2, s, D).verdict for s in (-1.0, 0.5)},
    }
    I = ROperator.identity()
    summary["multiply_by_s"] = {
        name: {str(s): _band_label(gen_pd_band(example2_system(G), s, I), grid.w_max) for s in (0.1, 0.3, 0.5, 1.0)}
        for name, G in (("G2", G2), ("G3", G3))
    }
    wb = {"G1_a1": waterbed_identity(G1, 1.0).to_json(), "G3_a2": waterbed_identity(G3, 2.0).to_json(),
          "G1_bound": waterbed_bound(G1, 0.4, 10.0, 1.0).to_json()}
    summary["waterbed"] = wb
    summary["robustness_G1"] = robustness_distance(G1, 1 / 3, (1e-3, 10.0)).to_json()

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_system_files(out / "systems")
        figs = {
            "nyquist_sigma_one_third": nyquist_bundle({"G1": G1, "G3": G3}, 1 / 3),
            "nichols_sigma_0.1": nichols_bundle({"G1": G1, "G3": G3}, 0.1),
            "numerical_range_G4": numerical_range_bundle(G4, S),
            "bands_G3": band_bundle({s: pd_band(G3, s) for s in (-0.5, -0.2, 0.0, 0.2, 1 / 3, 0.5)}),
            "multiply_by_s_G3_sigma_0.1": generalized_bundle(gen_samples(G3, 0.1, example2=True), "G3"),
        }
        for name, b in figs.items():
            for f in ("csv", "svg"):
                (out / f"{name}.{f}").write_text(render(b, f, precision))
        summary["elapsed_s"] = round(time.perf_counter() - t0, 3)
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
        (out / "summary.md").write_text(summary_table(summary))
    else:
        summary["elapsed_s"] = round(time.perf_counter() - t0, 3)
    return summary


def summary_table(summary: dict) -> str:
    lines = ["# Reproduction summary", "", "## G3 critical frequencies", "",
             "| sigma | reported | first failing grid point | refined edge |", "|---|---|---|---|"]
    for r in summary["critical_frequencies_G3"]:
        e = "-" if r["refined_edge"] is None else f"{r['refined_edge']:.6g}"
        lines.append(f"| {r['sigma']:.4g} | {r['reported']:.4f} | {r['grid_point']:.4f} | {e} |")
    lines += ["", "## Verdicts", ""]
    for k in ("G1_passivity", "G2_bands", "G4", "differential", "multiply_by_s"):
        lines.append(f"- {k}: `{json.dumps(summary[k], sort_keys=True)}`")
    lines.append(f"- G2 residue at s = 0: {summary['G2_residue_at_0']:.6g}")
    lines.append(f"- waterbed: `{json.dumps(summary['waterbed'], sort_keys=True)}`")
    lines.append(f"- robustness G1: `{json.dumps(summary['robustness_G1'], sort_keys=True)}`")
    lines.append("")
    return "\n".join(lines)
