"""Critical frequencies of G3: first failing 0.01-decade grid point next to the analytic edge."""

import numpy as np

from pdregion.bands import critical_frequency
from pdregion.casestudy import PARAMS, case_systems

G3 = case_systems()["g3"].scalar()
TM = PARAMS["T"] * PARAMS["M"]

print(f"{'sigma':>8} {'reported':>10} {'grid point':>11} {'refined':>12} {'closed form':>12}")
for s in (-0.5, -0.2, 0.0, 0.2, 1 / 3, 0.5):
    cf = critical_frequency(G3, s)
    exact = np.sqrt(max(PARAMS["d"] - s, 0.0) / TM)
    ref = "-" if cf.refined_edge is None else f"{cf.refined_edge:.6f}"
    print(f"{s:8.4f} {cf.reported:10.4f} {cf.grid_point:11.4f} {ref:>12} {exact:12.6f}")
