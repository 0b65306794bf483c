"""Write the figure data sets (CSV, JSON and SVG) to a directory.

    python3 scripts/figures.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from pdregion.bands import pd_band
from pdregion.casestudy import case_systems
from pdregion.genpass import gen_samples
from pdregion.plotting import (
    band_bundle,
    generalized_bundle,
    nichols_bundle,
    numerical_range_bundle,
    nyquist_bundle,
    render,
)


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sy = case_systems()
    G1, G2, G3 = (sy[k].scalar() for k in ("g1", "g2", "g3"))
    siso = {"G1": G1, "G2": G2, "G3": G3}
    bundles = {
        "nyquist_sigma_0": nyquist_bundle(siso, 0.0),
        "nyquist_sigma_one_third": nyquist_bundle({"G1": G1, "G3": G3}, 1 / 3),
        "nyquist_sigma_1": nyquist_bundle({"G1": G1, "G3": G3}, 1.0),
        "nichols_sigma_0.1": nichols_bundle({"G1": G1, "G3": G3}, 0.1),
        "numerical_range_G4": numerical_range_bundle(sy["g4"], np.eye(2) / 3),
        "bands_G3": band_bundle({s: pd_band(G3, s) for s in (-0.5, -0.2, 0.0, 0.2, 1 / 3, 0.5)}),
    }
    for s in (0.1, 0.5, 1.0):
        bundles[f"multiply_by_s_G3_sigma_{s}"] = generalized_bundle(gen_samples(G3, s, example2=True), "G3")
    for name, b in bundles.items():
        for fmt in ("csv", "json", "svg"):
            (out / f"{name}.{fmt}").write_text(render(b, fmt))
    print(f"wrote {3 * len(bundles)} files to {out}/")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "figures")
