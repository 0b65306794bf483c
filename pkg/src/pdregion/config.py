"""Tolerances, frequency grids and the sweep executor."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, TypeVar

import numpy as np

T = TypeVar("T")
U = TypeVar("U")


@dataclass(frozen=True)
class ToleranceConfig:
    """Every numerical threshold used by the toolkit, in one place."""

    pole_eval: float = 1e-300  # |den(s)| at or below this is a pole hit
    stab: float = 1e-9  # relative; scaled by (1 + max|root|)
    cancel: float = 1e-8  # relative pole/zero distance flagged as near-cancellation
    root_residual: float = 1e-8
    hermitian: float = 1e-12
    psd: float = 1e-10  # relative to (1 + ||M||)
    pencil_rank: float = 1e-10
    singular: float = 1e-10  # smallest singular value of I - G sigma
    siso_singular: float = 1e-12
    pd_margin: float = 1e-10  # relative to the size of the terms compared
    region: float = 1e-9
    necessary: float = 1e-9
    band_rtol: float = 1e-12
    band_floor: float = 1e-6  # relative to w_min; bisection toward 0 stops here
    winding_residual: float = 0.05
    winding_step: float = np.pi / 8  # max arg change between accepted samples
    forbidden: float = 1e-9
    residue: float = 1e-9
    strict_margin: float = 1e-7
    quad: float = 1e-8
    golden: float = 1e-9


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class GridSpec:
    """Frequency grid in rad/s.

    Log grids contain the points ``10**(k / points_per_decade)`` for every
    integer ``k`` in range, so published table values such as ``10**0.73``
    are hit exactly. ``w = 0`` is prepended when ``include_zero`` is set.
    """

    w_min: float = 1e-3
    w_max: float = 1e3
    points_per_decade: int = 100
    scale: Literal["log", "linear"] = "log"
    include_zero: bool = True

    def __post_init__(self):
        if self.points_per_decade < 10:
            raise ValueError("points_per_decade must be >= 10")
        if self.scale == "log" and self.w_min <= 0:
            raise ValueError("log grids need w_min > 0 (w = 0 is added separately)")
        if self.w_max <= self.w_min:
            raise ValueError("empty grid: w_max must exceed w_min")
        if self.scale not in ("log", "linear"):
            raise ValueError(f"unknown grid scale {self.scale!r}")

    def frequencies(self) -> np.ndarray:
        if self.scale == "log":
            ppd = self.points_per_decade
            kmin = int(np.ceil(np.log10(self.w_min) * ppd - 1e-9))
            kmax = int(np.floor(np.log10(self.w_max) * ppd + 1e-9))
            ws = 10.0 ** (np.arange(kmin, kmax + 1) / ppd)
        else:
            decades = max(np.log10(self.w_max / max(self.w_min, 1e-300)), 1.0)
            n = int(np.ceil(decades * self.points_per_decade)) + 1
            ws = np.linspace(self.w_min, self.w_max, n)
        if self.include_zero and ws[0] > 0:
            ws = np.concatenate([[0.0], ws])
        return ws

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.w_min, self.w_max, self.points_per_decade * factor, self.scale, self.include_zero)


def max_workers() -> int:
    """Parallelism cap from ``PDREGION_THREADS`` (default: available cores)."""
    raw = os.environ.get("PDREGION_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def sweep_map(fn: Callable[[T], U], items: Iterable[T], min_parallel: int = 8) -> list[U]:
    """Order-preserving map, threaded when the cap and the workload allow it."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1 or len(items) < min_parallel:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
