"""PD frequency bands: grid scan, bisection-refined edges, contraction checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from pdregion.config import DEFAULT_TOL, GridSpec, ToleranceConfig, sweep_map
from pdregion.hermlin import jacobi_eigh
from pdregion.pdcore import (
    PassivityIndex,
    exact_lambda_min,
    if_matrix_lambda_min,
    necessary_slack_batch,
    margin_numerator,
    pd_margin_poly,
    pd_margin_scale,
    pd_margin_value,
)
from pdregion.ratpoly import RationalFunction, RationalMatrix, as_matrix

Mode = Literal["siso_exact", "mimo_exact", "mimo_estimated", "if"]


@dataclass(frozen=True)
class BandEdge:
    frequency: float
    provenance: str  # refined | grid | range_start | range_end | excluded
    margin: float


@dataclass
class FrequencyBand:
    intervals: list[tuple[float, float]]
    grid: GridSpec
    refined: bool
    mode: str = "siso_exact"
    edges: list[tuple[BandEdge, BandEdge]] = field(default_factory=list)
    excluded: list[float] = field(default_factory=list)  # grid points at poles, skipped
    singular: list[float] = field(default_factory=list)  # grid points where I - G sigma is singular, flagged only

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_origin_only(self) -> bool:
        return self.intervals == [(0.0, 0.0)]

    def contains(self, w: float, rtol: float = 1e-9) -> bool:
        return any(lo - rtol * max(abs(lo), 1e-300) <= w <= hi + rtol * max(abs(hi), 1e-300)
                   for lo, hi in self.intervals)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "intervals": [[lo, hi] for lo, hi in self.intervals],
            "refined": self.refined,
            "grid": {"w_min": self.grid.w_min, "w_max": self.grid.w_max,
                     "points_per_decade": self.grid.points_per_decade, "scale": self.grid.scale},
            "edges": [
                {"lo": {"w": a.frequency, "provenance": a.provenance, "margin": a.margin},
                 "hi": {"w": b.frequency, "provenance": b.provenance, "margin": b.margin}}
                for a, b in self.edges
            ],
            "excluded": list(self.excluded),
            "singular": list(self.singular),
        }


@dataclass(frozen=True)
class _Sweep:
    """Vectorised margins plus a scalar margin for bisection."""

    margins: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]  # -> margin, holds, pole, singular
    scalar: Callable[[float], float] | None  # raw signed margin, None => grid-limited


def _siso_sweep(g: RationalFunction, sigma: float, tol: ToleranceConfig) -> _Sweep:
    q = margin_numerator(g, sigma)

    def margins(ws):
        val, pole = g.freqresp(ws, tol)
        sing = ~pole & (np.abs(1 - sigma * np.nan_to_num(val)) <= tol.siso_singular)
        m = pd_margin_poly(g, sigma, ws)
        holds = m >= -tol.pd_margin * pd_margin_scale(val, sigma)
        return m, holds, pole, sing

    def scalar(w):
        # sign of the margin is the sign of its numerator
        return float(q(w).real)

    return _Sweep(margins, scalar)


def _smin(Gw: np.ndarray, sig: np.ndarray) -> np.ndarray:
    p = Gw.shape[-1]
    K = np.eye(p) - Gw @ sig
    return np.sqrt(np.maximum(jacobi_eigh(np.conj(np.swapaxes(K, -1, -2)) @ K)[0][..., 0], 0.0))


def _mimo_sweep(G: RationalMatrix, idx: PassivityIndex, mode: str, n_angles: int, tol: ToleranceConfig) -> _Sweep:
    def stacked(ws):
        Gw, pole = G.freqresp(ws, tol)
        Gw = np.where(pole[:, None, None], 0.0, Gw)
        sing = ~pole & (_smin(Gw, idx.matrix) <= tol.singular)
        return Gw, pole, sing

    if mode == "mimo_exact":
        def margins(ws):
            Gw, pole, sing = stacked(ws)
            lam, nrm = exact_lambda_min(Gw, idx)
            return lam, lam >= -tol.psd * (1 + nrm), pole, sing

        def scalar(w):
            return float(exact_lambda_min(G(1j * w), idx)[0])

        return _Sweep(margins, scalar)
    if mode == "if":
        def margins(ws):
            Gw, pole = G.freqresp(ws, tol)
            Gw = np.where(pole[:, None, None], 0.0, Gw)
            lam, nrm = if_matrix_lambda_min(Gw, idx)
            return lam, lam >= -tol.psd * (1 + nrm), pole, np.zeros_like(pole)

        def scalar(w):
            return float(if_matrix_lambda_min(G(1j * w), idx)[0])

        return _Sweep(margins, scalar)
    if mode == "mimo_estimated":
        def margins(ws):
            Gw, pole, sing = stacked(ws)
            slack = necessary_slack_batch(Gw, idx, n_angles)
            c = 1.0 / (2 * idx.lambda_min) if abs(idx.lambda_min) > 1e-12 else 0.0
            return slack, slack >= -tol.necessary * (1 + 2 * abs(c)), pole, sing

        return _Sweep(margins, None)
    raise ValueError(f"unknown band mode {mode!r}")


def bisect_edge(f: Callable[[float], float], w_in: float, w_out: float, rtol: float, floor: float,
                max_iter: int = 200) -> float:
    """Shrink ``[w_in, w_out]`` (either order) around the sign change of ``f``; returns the in-band end."""
    a, b = w_in, w_out
    for _ in range(max_iter):
        hi = max(a, b)
        if abs(b - a) <= rtol * hi or hi <= floor:
            break
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        if f(mid) >= 0:
            a = mid
        else:
            b = mid
    return a


def _margin_at(sweep: _Sweep, w: float) -> float:
    return float(sweep.margins(np.array([w]))[0][0])


def scan_band(sweep: _Sweep, grid: GridSpec, tol: ToleranceConfig = DEFAULT_TOL, mode: str = "") -> FrequencyBand:
    ws = grid.frequencies()
    if ws.size == 0:
        raise ValueError("empty frequency grid")
    m, holds, bad, sing = sweep.margins(ws)
    holds = holds & ~bad
    if np.all(bad):
        raise ValueError("every grid point is a pole of the system")
    floor = tol.band_floor * grid.w_min
    refine = sweep.scalar is not None

    runs = []
    i, n = 0, len(ws)
    while i < n:
        if not holds[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and holds[j + 1]:
            j += 1
        runs.append((i, j))
        i = j + 1

    def lo_edge(i):
        if i == 0:
            return BandEdge(float(ws[0]), "range_start", float(m[0]))
        if bad[i - 1] or not refine:
            return BandEdge(float(ws[i]), "excluded" if bad[i - 1] else "grid", float(m[i]))
        w = bisect_edge(sweep.scalar, float(ws[i]), float(ws[i - 1]), tol.band_rtol, floor)
        return BandEdge(w, "refined", _margin_at(sweep, w))

    def hi_edge(j):
        if j == n - 1:
            return BandEdge(float(ws[-1]), "range_end", float(m[-1]))
        if bad[j + 1] or not refine:
            return BandEdge(float(ws[j]), "excluded" if bad[j + 1] else "grid", float(m[j]))
        w = bisect_edge(sweep.scalar, float(ws[j]), float(ws[j + 1]), tol.band_rtol, floor)
        return BandEdge(w, "refined", _margin_at(sweep, w))

    edges = sweep_map(lambda r: (lo_edge(r[0]), hi_edge(r[1])), runs)
    intervals = [(a.frequency, b.frequency) for a, b in edges]
    return FrequencyBand(intervals, grid, refine, mode, edges,
                         [float(w) for w in ws[bad]], [float(w) for w in ws[sing]])


def pd_band(G, sigma, grid: GridSpec | None = None, mode: Mode = "siso_exact", n_angles: int = 720,
            tol: ToleranceConfig = DEFAULT_TOL) -> FrequencyBand:
    """Frequencies ``w >= 0`` at which the chosen PD check holds."""
    grid = grid or GridSpec()
    idx = PassivityIndex.of(sigma)
    Gm = as_matrix(G)
    if mode == "siso_exact":
        sweep = _siso_sweep(Gm.scalar(), idx.scalar, tol)
    else:
        if idx.size != Gm.size:
            raise ValueError(f"sigma is {idx.size}x{idx.size} but the system is {Gm.size}x{Gm.size}")
        sweep = _mimo_sweep(Gm, idx, mode, n_angles, tol)
    return scan_band(sweep, grid, tol, mode)


@dataclass(frozen=True)
class ContractionResult:
    contained: bool
    witness: float | None
    band_low: FrequencyBand
    band_high: FrequencyBand


def _inside(band: FrequencyBand, lo: float, hi: float, rtol: float) -> bool:
    for a, b in band.intervals:
        if a - rtol * max(a, 1e-300) <= lo and hi <= b + rtol * max(b, 1e-300):
            return True
    return False


def contraction_check(G, sigma1, sigma2, grid: GridSpec | None = None, mode: Mode = "siso_exact",
                      rtol: float = 1e-9) -> ContractionResult:
    """Is the band for the larger index inside the band for the smaller one?"""
    i1, i2 = PassivityIndex.of(sigma1), PassivityIndex.of(sigma2)
    diff = PassivityIndex.of(i2.matrix - i1.matrix)
    if diff.lambda_min <= 0:
        raise ValueError("contraction_check needs sigma2 - sigma1 positive definite")
    b1 = pd_band(G, i1, grid, mode)
    b2 = pd_band(G, i2, grid, mode)
    witness = None
    for lo, hi in b2.intervals:
        if not _inside(b1, lo, hi, rtol):
            for w in (lo, 0.5 * (lo + hi), hi):
                if not b1.contains(w, rtol):
                    witness = w
                    break
            if witness is None:
                witness = lo
            break
    return ContractionResult(witness is None, witness, b1, b2)


def grid_points(decade_step: float, w_min: float, w_max: float) -> np.ndarray:
    kmin = int(np.ceil(np.log10(w_min) / decade_step - 1e-9))
    kmax = int(np.floor(np.log10(w_max) / decade_step + 1e-9))
    return np.array([10.0 ** round(k * decade_step, 12) for k in range(kmin, kmax + 1)])


def first_failing_grid_point(G, sigma: float, decade_step: float = 0.01, w_min: float = 1e-3,
                             w_max: float = 1e3, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Smallest ``10**(k * decade_step)`` at which the SISO PD check fails."""
    if decade_step <= 0:
        raise ValueError("decade_step must be positive")
    g = as_matrix(G).scalar()
    ws = grid_points(decade_step, w_min, w_max)
    m, holds, bad, _ = _siso_sweep(g, float(sigma), tol).margins(ws)
    fail = ~holds & ~bad
    if not np.any(fail):
        raise ValueError(f"the PD check holds on the whole scan range [{w_min}, {w_max}]")
    return float(ws[np.argmax(fail)])


@dataclass(frozen=True)
class CriticalFrequency:
    sigma: float
    refined_edge: float | None  # upper edge of the band interval starting at w = 0
    grid_point: float  # first failing 10**(k*step)
    reported: float  # table convention: grid_point, or 0.0 when the band is {0}


def critical_frequency(G, sigma: float, decade_step: float = 0.01, grid: GridSpec | None = None) -> CriticalFrequency:
    """Both readings of the "critical frequency" for a SISO system.

    ``reported`` follows the published table: the first failing grid point,
    except that a band reduced to the single point ``w = 0`` reports ``0``.
    """
    grid = grid or GridSpec(points_per_decade=max(10, int(round(1 / decade_step))))
    band = pd_band(G, sigma, grid, "siso_exact")
    edge = None
    if band.intervals and band.intervals[0][0] == 0.0:
        edge = band.intervals[0][1]
    gp = first_failing_grid_point(G, sigma, decade_step, grid.w_min, grid.w_max)
    reported = 0.0 if (edge is not None and edge == 0.0) else gp
    return CriticalFrequency(float(sigma), edge, gp, reported)


def max_passivity_index(G, w_c: float, grid: GridSpec | None = None, iters: int = 80) -> float:
    """Largest sigma whose SISO PD check holds at every grid frequency in ``[0, w_c]`` (bisection on sigma)."""
    grid = grid or GridSpec()
    g = as_matrix(G).scalar()
    ws = grid.frequencies()
    ws = ws[ws <= w_c]
    val, pole = g.freqresp(ws)
    val = val[~pole]
    if val.size == 0:
        raise ValueError("no usable frequencies in [0, w_c]")

    def ok(s):
        return bool(np.all(pd_margin_value(val, s) >= -DEFAULT_TOL.pd_margin * pd_margin_scale(val, s)))

    lo, hi = -1.0, 1.0
    while not ok(lo):
        lo *= 2
        if lo < -1e12:
            raise ValueError("no finite index satisfies the PD check on this band")
    while ok(hi):
        hi *= 2
        if hi > 1e12:
            return float("inf")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
