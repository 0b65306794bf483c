"""Robustness distance to the PD disk and the waterbed (Poisson integral) trade-off."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pdregion.config import DEFAULT_TOL, GridSpec, ToleranceConfig
from pdregion.errors import PoleError, PremiseError
from pdregion.ratpoly import RationalFunction, as_matrix, classify, inverse_decomposition


def _siso(G) -> RationalFunction:
    return G if isinstance(G, RationalFunction) else as_matrix(G).scalar()


# ---------------------------------------------------------------------------
# robustness


@dataclass(frozen=True)
class RobustnessResult:
    d_min: float
    argmin_frequency: float
    tangent_at_infinity: bool
    range: tuple[float, float]
    sigma: float = float("nan")

    @property
    def center(self) -> float:
        return 1.0 / (2 * self.sigma)

    def to_json(self) -> dict:
        return {"d_min": self.d_min, "argmin_frequency": self.argmin_frequency,
                "tangent_at_infinity": self.tangent_at_infinity, "range": list(self.range), "sigma": self.sigma}


def _golden(f, a: float, b: float, rtol: float) -> tuple[float, float]:
    g = (np.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > rtol * max(abs(a), abs(b), 1e-300):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def robustness_distance(G0, sigma: float, w_range: tuple[float, float] = (1e-3, 1e3),
                        points_per_decade: int = 100, tol: ToleranceConfig = DEFAULT_TOL) -> RobustnessResult:
    """``min_w  r - |G0(jw) - c|`` over a finite range, with ``c = r = 1/(2 sigma)``.

    Negative values mean the locus already leaves the disk.
    """
    if sigma <= 0:
        raise ValueError("robustness distance needs sigma > 0")
    G0 = _siso(G0)
    lo, hi = map(float, w_range)
    ws = GridSpec(lo, hi, points_per_decade, include_zero=False).frequencies()
    ws = np.unique(np.concatenate([[lo], ws, [hi]]))
    val, pole = G0.freqresp(ws, tol)
    if np.any(pole):
        raise PoleError(f"G0 has a pole in the range at w = {ws[pole][0]:.6g}")
    c = r = 1.0 / (2 * sigma)

    def dist(w):
        return r - abs(complex(G0(1j * w)) - c)

    d = r - np.abs(val - c)
    i = int(np.argmin(d))
    w_best, d_best = float(ws[i]), float(d[i])
    if 0 < i < len(ws) - 1:
        w, v = _golden(dist, float(ws[i - 1]), float(ws[i + 1]), tol.golden)
        if v < d_best:
            w_best, d_best = w, v
    return RobustnessResult(d_best, w_best, G0.is_strictly_proper(), (lo, hi), float(sigma))


def check_perturbation(G0, sigma: float, delta_norm: float, w_range=(1e-3, 1e3), points_per_decade: int = 100) -> bool:
    """Admissible iff ``delta_norm < d_min`` (strict)."""
    res = robustness_distance(G0, sigma, w_range, points_per_decade)
    return bool(res.d_min > 0 and delta_norm < res.d_min)


def aligned_allpass(delta: float, w0: float, direction: complex) -> RationalFunction:
    """Stable ``+-delta (s - b)/(s + b)`` whose value at ``j w0`` points along ``direction``.

    ``|value| = delta`` at every frequency, so it is a worst-case perturbation of
    norm ``delta`` concentrated at ``w0``.
    """
    if delta < 0 or w0 <= 0:
        raise ValueError("need delta >= 0 and w0 > 0")
    th = float(np.angle(direction))
    sign = 1.0
    if th <= 0:
        th += np.pi
        sign = -1.0
    # phase of (jw0 - b)/(jw0 + b) is pi - 2 atan(w0 / b)
    th = min(max(th, 1e-9), np.pi - 1e-9)
    b = w0 / np.tan((np.pi - th) / 2)
    return RationalFunction.from_coeffs([-sign * delta * b, sign * delta], [b, 1.0])


# ---------------------------------------------------------------------------
# waterbed


def varsigma(G, w):
    """``Re(1/G(jw))`` (vectorised), cross-checked against ``Re G / |G|^2``."""
    G = _siso(G)
    w = np.asarray(w, dtype=float)
    g = np.asarray(G(1j * w), dtype=complex)
    mag2 = g.real * g.real + g.imag * g.imag
    if np.any(np.sqrt(mag2) <= 1e-300):
        raise ZeroDivisionError("G has a zero on the imaginary axis at a requested frequency")
    v = (1.0 / g).real
    alt = g.real / mag2
    if not np.allclose(v, alt, rtol=1e-12, atol=1e-300):
        raise ArithmeticError("Re(1/G) and Re(G)/|G|^2 disagree beyond rounding")
    return v if v.ndim else float(v)


@dataclass(frozen=True)
class QuadSpec:
    order: int = 16  # Gauss-Legendre nodes per panel
    initial_panels: int = 8
    max_panels: int = 1 << 14
    tol: float = DEFAULT_TOL.quad


@dataclass(frozen=True)
class WaterbedResult:
    lhs: float
    rhs_quadrature: float
    abs_error: float
    a: float
    relative_degree: int
    panels: int = 0

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs_quadrature": self.rhs_quadrature, "abs_error": self.abs_error,
                "a": self.a, "relative_degree": self.relative_degree, "panels": self.panels}


def _composite_gl(f, lo: float, hi: float, panels: int, order: int) -> float:
    x, wts = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return float(np.sum((vals * wts[None, :]) * half[:, None]))


def waterbed_integrand(G, w):
    """``varsigma(w) - Re L(jw)`` in two forms: stable ``Re(C + R(jw))`` and the literal difference."""
    G = _siso(G)
    dec = inverse_decomposition(G)
    w = np.asarray(w, dtype=float)
    stable = np.real(dec.f(1j * w))
    literal = varsigma(G, w) - np.real(dec.L(1j * w))
    return stable, literal


def _premises(G: RationalFunction, a: float, tol: ToleranceConfig):
    if a <= 0:
        raise ValueError("a must be positive")
    if not G.is_strictly_proper():
        raise PremiseError("waterbed identity needs a strictly proper G")
    cls = classify(G, tol)
    if not cls.minimal_phase:
        raise PremiseError("waterbed identity needs a minimal-phase G (zeros in the open left half-plane)")
    return cls


def waterbed_identity(G, a: float, quad: QuadSpec | None = None, tol: ToleranceConfig = DEFAULT_TOL) -> WaterbedResult:
    """Both sides of the Poisson identity for ``1/G``.

    ``lhs = 1/G(a) - L(a)`` where ``L`` is the polynomial part of ``1/G``
    without constant term. The right side integrates
    ``(varsigma - Re L) * a/(w^2+a^2) / pi`` over the real line; with
    ``w = a tan(phi)`` the kernel cancels and the integrand becomes
    ``Re(C + R(j a tan phi)) / pi`` on ``(-pi/2, pi/2)``.
    """
    G = _siso(G)
    quad = quad or QuadSpec()
    cls = _premises(G, a, tol)
    dec = inverse_decomposition(G)
    ga = G(complex(a))
    lhs = float(np.real(1.0 / ga - dec.L(complex(a))))

    def integrand(phi):
        return np.real(dec.f(1j * a * np.tan(phi))) / np.pi

    h = np.pi / 2
    n = quad.initial_panels
    prev = _composite_gl(integrand, -h, h, n, quad.order)
    while True:
        n *= 2
        cur = _composite_gl(integrand, -h, h, n, quad.order)
        if abs(cur - prev) < quad.tol or n >= quad.max_panels:
            break
        prev = cur
    if not np.isfinite(cur):
        raise ArithmeticError("waterbed integrand diverges; check the relative degree")
    return WaterbedResult(lhs, cur, abs(lhs - cur), float(a), cls.relative_degree, n)


@dataclass(frozen=True)
class WaterbedBound:
    lhs: float
    bound: float  # 2 sigma / pi * atan(w_c / a), used for pass/fail
    printed_bound: float  # sigma / pi * atan(w_c / a)
    satisfied: bool
    satisfied_printed: bool

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "bound": self.bound, "printed_bound": self.printed_bound,
                "satisfied": self.satisfied, "satisfied_printed": self.satisfied_printed}


def waterbed_bound(G, sigma: float, w_c: float, a: float, grid: GridSpec | None = None,
                   tol: ToleranceConfig = DEFAULT_TOL) -> WaterbedBound:
    """Check ``1/G(a) - l1 a >= (2 sigma/pi) atan(w_c/a)`` for relative degree one.

    The premise ``varsigma >= sigma`` on ``[0, w_c]`` and ``varsigma >= 0`` beyond
    is verified on the grid; a violation raises :class:`PremiseError` with the
    offending frequency.
    """
    G = _siso(G)
    _premises(G, a, tol)
    if G.relative_degree != 1:
        raise PremiseError(f"bound is stated for relative degree 1, got {G.relative_degree}")
    ws = (grid or GridSpec()).frequencies()
    v = varsigma(G, ws)
    inside = ws <= w_c
    slack = 1e-12 * (1 + np.abs(v))
    bad = inside & (v < sigma - slack)
    if np.any(bad):
        raise PremiseError(f"varsigma < sigma inside the band", float(ws[bad][0]))
    bad = ~inside & (v < -slack)
    if np.any(bad):
        raise PremiseError("varsigma < 0 outside the band", float(ws[bad][0]))
    dec = inverse_decomposition(G)
    lhs = float(np.real(1.0 / G(complex(a)) - dec.L(complex(a))))
    at = float(np.arctan(w_c / a))
    bound = 2 * sigma / np.pi * at
    printed = sigma / np.pi * at
    eps = 1e-12 * (1 + abs(lhs))
    return WaterbedBound(lhs, bound, printed, lhs >= bound - eps, lhs >= printed - eps)


def max_varsigma_index(G, w_c: float, grid: GridSpec | None = None, iters: int = 100) -> float:
    """Largest sigma with ``varsigma(w) >= sigma`` on the grid points in ``[0, w_c]`` (bisection)."""
    ws = (grid or GridSpec()).frequencies()
    v = varsigma(G, ws[ws <= w_c])
    v = np.atleast_1d(v)
    if v.size == 0:
        raise ValueError("no grid points in [0, w_c]")
    lo, hi = -1.0, 1.0
    while not np.all(v >= lo):
        lo *= 2
    while np.all(v >= hi):
        hi *= 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.all(v >= mid):
            lo = mid
        else:
            hi = mid
    return lo
