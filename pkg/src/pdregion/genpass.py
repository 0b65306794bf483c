"""Generalized passivization ``H^D = R(s) G / (1 - sigma G)`` for scalar systems.

The frequency-wise condition is

    Re R Re G - Im R Im G >= sigma |G|^2 Re R

which reduces to the ordinary PD check for ``R = 1``. ``R = s`` gives the
differential (negative-imaginary) case. The "multiply by s" variant is a
system transform ``G -> s G`` checked with ``R = 1``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Literal

import numpy as np

from pdregion.bands import FrequencyBand, _Sweep, scan_band
from pdregion.config import DEFAULT_TOL, GridSpec, ToleranceConfig
from pdregion.errors import PoleError, SingularError, WindingError
from pdregion.passivity import (
    OracleVerdict,
    PassivityReport,
    _forbidden_hit,
    axis_residues,
    detoured_winding,
    winding_number,
)
from pdregion.ratpoly import Polynomial, RationalFunction, as_matrix, classify, multiply_by_s, roots, stab_tol


@dataclass(frozen=True)
class ROperator:
    kind: Literal["identity", "differentiator", "custom_rational"]
    R: RationalFunction

    @classmethod
    def identity(cls) -> ROperator:
        return cls("identity", RationalFunction.constant(1.0))

    @classmethod
    def differentiator(cls) -> ROperator:
        return cls("differentiator", RationalFunction.from_coeffs([0.0, 1.0], [1.0]))

    @classmethod
    def custom(cls, R: RationalFunction) -> ROperator:
        return cls("custom_rational", R)

    @classmethod
    def named(cls, name: str) -> ROperator:
        if name in ("identity", "1"):
            return cls.identity()
        if name in ("differentiator", "s"):
            return cls.differentiator()
        raise ValueError(f"unknown operator {name!r}")


def _siso(G) -> RationalFunction:
    return G if isinstance(G, RationalFunction) else as_matrix(G).scalar()


def gen_margin_value(g, r, sigma: float):
    """Left minus right side of the generalized condition (vectorised)."""
    g = np.asarray(g, dtype=complex)
    r = np.asarray(r, dtype=complex)
    m2 = g.real * g.real + g.imag * g.imag
    return r.real * g.real - r.imag * g.imag - sigma * m2 * r.real


def gen_margin_scale(g, r, sigma: float):
    g = np.asarray(g, dtype=complex)
    r = np.asarray(r, dtype=complex)
    m2 = g.real * g.real + g.imag * g.imag
    return np.abs(r.real * g.real) + np.abs(r.imag * g.imag) + abs(sigma) * m2 * np.abs(r.real)


def _jcoeffs(p: Polynomial) -> np.ndarray:
    c = np.asarray(p.coeffs, dtype=complex)
    return c * (1j ** np.arange(len(c)))


def gen_margin_numerator(G: RationalFunction, sigma: float, R: RationalFunction) -> Polynomial:
    """Real polynomial in ``w`` with the sign of the generalized margin.

    margin = Q(w) / (|D(jw)|^2 |D_R(jw)|^2), assembled from coefficients.
    """
    n, d = _jcoeffs(G.num), _jcoeffs(G.den)
    nr, dr = _jcoeffs(R.num), _jcoeffs(R.den)
    a = np.convolve(np.convolve(nr, n), np.conj(np.convolve(dr, d))).real
    b = np.convolve(np.convolve(n, np.conj(n)), np.convolve(nr, np.conj(dr))).real
    q = np.zeros(max(len(a), len(b)))
    q[: len(a)] += a
    q[: len(b)] -= sigma * b
    return Polynomial(q)


@dataclass(frozen=True)
class GenCheck:
    holds: bool
    margin: float


def gen_pd_check(G, sigma: float, R: ROperator, w: float, tol: ToleranceConfig = DEFAULT_TOL) -> GenCheck:
    G = _siso(G)
    s = 1j * float(w)
    g = complex(G(s, tol))
    try:
        r = complex(R.R(s, tol))
    except PoleError as exc:
        raise PoleError(f"R has a pole at w = {w}") from exc
    if abs(r) >= 1e12:
        raise ValueError(f"|R(jw)| = {abs(r):.3g} is not bounded at w = {w}")
    if abs(1 - sigma * g) <= tol.siso_singular:
        raise SingularError(f"1 - sigma G(jw) vanishes at w = {w}")
    m = float(gen_margin_value(g, r, sigma))
    return GenCheck(bool(m >= -tol.pd_margin * float(gen_margin_scale(g, r, sigma))), m)


def example2_system(G) -> RationalFunction:
    """``s G(s)``, checked afterwards with ``R = 1``."""
    return multiply_by_s(_siso(G))


def _gen_sweep(G: RationalFunction, sigma: float, R: RationalFunction, tol: ToleranceConfig) -> _Sweep:
    q = gen_margin_numerator(G, sigma, R)

    def margins(ws):
        g, pole = G.freqresp(ws, tol)
        r, rpole = R.freqresp(ws, tol)
        bad = pole | rpole
        g0 = np.where(bad, 0.0, g)
        r0 = np.where(bad, 0.0, r)
        sing = ~bad & (np.abs(1 - sigma * g0) <= tol.siso_singular)
        m = gen_margin_value(g0, r0, sigma)
        holds = m >= -tol.pd_margin * gen_margin_scale(g0, r0, sigma)
        return np.where(bad, np.nan, m), holds, bad, sing

    return _Sweep(margins, lambda w: float(q(w).real))


def gen_pd_band(G, sigma: float, R: ROperator, grid: GridSpec | None = None,
                tol: ToleranceConfig = DEFAULT_TOL) -> FrequencyBand:
    """Frequencies at which the generalized condition holds; same mechanics as ``pd_band``."""
    return scan_band(_gen_sweep(_siso(G), float(sigma), R.R, tol), grid or GridSpec(), tol, f"generalized:{R.kind}")


# ---------------------------------------------------------------------------
# region slices


@dataclass(frozen=True)
class RegionSlice:
    """Admissible set for ``G(jw)`` at one frequency: ``B x + C y - A (x^2 + y^2) >= 0``."""

    w: float
    A: float
    B: float
    C: float

    @property
    def kind(self) -> str:
        if self.A > 0:
            return "disk"
        if self.A < 0:
            return "disk_complement"
        if self.B == 0 and self.C == 0:
            return "everything"
        return "half_plane"

    @property
    def center(self) -> complex | None:
        if self.A == 0:
            return None
        return complex(self.B / (2 * self.A) + 0.0, self.C / (2 * self.A) + 0.0)

    @property
    def radius(self) -> float | None:
        c = self.center
        return None if c is None else abs(c)

    def contains(self, z: complex, tol: float = 1e-12) -> bool:
        x, y = z.real, z.imag
        v = self.B * x + self.C * y - self.A * (x * x + y * y)
        return v >= -tol * (abs(self.B * x) + abs(self.C * y) + abs(self.A) * (x * x + y * y))

    def describe(self) -> str:
        k = self.kind
        if k in ("disk", "disk_complement"):
            c = self.center
            return f"{k} center=({c.real:.6g},{c.imag:.6g}) radius={self.radius:.6g}"
        if k == "half_plane":
            return f"half_plane {self.B:.6g}*x + {self.C:.6g}*y >= 0"
        return "everything"


def region_slice(sigma: float, w: float, R: ROperator | None = None, example2: bool = False) -> RegionSlice:
    """Slice of the frequency-parametric region in the plane of the original ``G``."""
    if example2:
        # g' = jw g with R = 1: -w y - sigma w^2 |g|^2 >= 0
        return RegionSlice(float(w), sigma * w * w, 0.0, -float(w))
    r = complex((R or ROperator.identity()).R(1j * w))
    return RegionSlice(float(w), sigma * r.real, r.real, -r.imag)


@dataclass(frozen=True)
class GeneralizedPDSample:
    w: float
    re_g: float
    im_g: float
    holds: bool
    margin: float
    boundary: str = ""


def gen_samples(G, sigma: float, R: ROperator | None = None, grid: GridSpec | None = None,
                example2: bool = False, tol: ToleranceConfig = DEFAULT_TOL) -> list[GeneralizedPDSample]:
    """``(Re G, Im G, w)`` triples with the verdict and the region slice at each frequency."""
    G = _siso(G)
    R = R or ROperator.identity()
    ws = (grid or GridSpec()).frequencies()
    Gc = example2_system(G) if example2 else G
    Rc = ROperator.identity() if example2 else R
    m, holds, bad, _ = _gen_sweep(Gc, float(sigma), Rc.R, tol).margins(ws)
    g, gpole = G.freqresp(ws, tol)
    out = []
    for i, w in enumerate(ws):
        if bad[i] or gpole[i]:
            continue
        mi, hi = float(m[i]), bool(holds[i])
        if w == 0.0 and (example2 or Rc.kind == "differentiator"):
            mi, hi = 0.0, True  # condition degenerates to an equality at w = 0
        sl = region_slice(float(sigma), float(w), R, example2)
        out.append(GeneralizedPDSample(float(w), float(g[i].real), float(g[i].imag), hi, mi, sl.describe()))
    return out


def samples_to_csv(samples: list[GeneralizedPDSample], precision: int = 6) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["w", "re_g", "im_g", "holds", "margin", "boundary"])
    f = f"{{:.{precision}g}}"
    for s in samples:
        wr.writerow([f.format(s.w), f.format(s.re_g), f.format(s.im_g), int(s.holds), f.format(s.margin), s.boundary])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# full verdict for R = s


def gen_full_passivity(G, sigma: float, R: ROperator | None = None, grid: GridSpec | None = None,
                       tol: ToleranceConfig = DEFAULT_TOL) -> PassivityReport:
    """Passivity verdict for ``H^D = s G / (1 - sigma G)``.

    Frequency condition from the generalized band; loop stability from the
    winding of ``G`` around ``1/sigma``; axis residues of ``H^D``.
    """
    R = R or ROperator.differentiator()
    if R.kind != "differentiator":
        raise ValueError("the full verdict is only defined for R = s")
    G = _siso(G)
    if not G.is_strictly_proper():
        raise ValueError("gen_full_passivity needs a strictly proper G")
    grid = grid or GridSpec()
    sigma = float(sigma)
    cls = classify(G, tol)
    P = cls.unstable_pole_count
    ws = grid.frequencies()
    m, holds, bad, _ = _gen_sweep(G, sigma, R.R, tol).margins(ws)
    viol = [float(w) for w in ws[~bad & ~holds & (ws > 0)]]
    mm = m[~bad & (ws > 0)]
    mmin = float(np.min(mm)) if mm.size else float("nan")
    reasons: list[str] = []

    cl = G.den - G.num * sigma
    HD = RationalFunction(G.num * R.R.num, cl * R.R.den).canonical()
    res = axis_residues(HD, tol)
    forbidden = False
    wn = None
    if sigma == 0.0:
        wn = None
        stable_loop = P == 0
        if not stable_loop:
            reasons.append(f"G has {P} open right-half-plane poles")
    else:
        forbidden = _forbidden_hit(G, sigma, tol)
        if not forbidden:
            try:
                fn = detoured_winding if cls.imaginary_axis_poles else winding_number
                wn = fn(G, 1.0 / sigma, grid, tol=tol)
            except WindingError as exc:
                reasons.append(f"winding undetermined: {exc}")
        stable_loop = wn == P
        if wn is not None and not stable_loop:
            reasons.append(f"winding {wn} around 1/sigma differs from {P} unstable poles")
    if viol:
        verdict = "not_passive"
        reasons.append("generalized frequency condition fails")
    elif forbidden:
        verdict = "inconclusive"
        reasons.append("Nyquist locus meets the forbidden point 1/sigma")
    elif sigma != 0.0 and wn is None:
        verdict = "inconclusive"
    elif not stable_loop:
        verdict = "not_passive"
    elif not all(r.ok for r in res):
        verdict = "not_passive"
        reasons.append("imaginary-axis residue condition fails for H^D")
    else:
        verdict = "passive"
    rep = PassivityReport(verdict, sigma, wn, P, viol, forbidden, res, min_margin=mmin,
                          strict_on_range=mmin > tol.strict_margin, reasons=reasons)
    # oracle: closed-loop roots plus a dense scan of Re H^D
    rts = roots(cl, tol) if cl.degree >= 1 else np.array([], dtype=complex)
    val, pole = HD.freqresp(grid.refined(4).frequencies(), tol)
    re = val.real[~pole]
    rep.oracle_verdict = OracleVerdict(bool(np.all(rts.real <= stab_tol(rts, tol))),
                                       float(np.min(re)) if re.size else float("nan"),
                                       tuple(complex(r) for r in rts))
    return rep
