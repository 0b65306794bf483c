"""Full output-feedback passivity verdicts for SISO systems.

The verdict combines four pieces of evidence: the Nyquist winding of ``G``
around the forbidden point ``1/sigma``, containment of the locus in the PD
region, the forbidden point itself, and residues of the loop ``H`` at
imaginary-axis poles. An independent oracle (closed-loop roots plus a dense
scan of ``Re H``) is attached to every report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from pdregion.bands import _siso_sweep
from pdregion.config import DEFAULT_TOL, GridSpec, ToleranceConfig
from pdregion.errors import WindingError
from pdregion.pdcore import pd_margin_poly, pd_margin_scale
from pdregion.ratpoly import RationalFunction, as_matrix, classify, of_transform, roots, stab_tol


def _as_siso(G) -> RationalFunction:
    return G if isinstance(G, RationalFunction) else as_matrix(G).scalar()


def default_w_max(G: RationalFunction) -> float:
    p = G.poles()
    return 1e3 * ((float(np.max(np.abs(p))) if len(p) else 0.0) + 1.0)


# ---------------------------------------------------------------------------
# winding


@dataclass(frozen=True)
class _Segment:
    path: Callable[[np.ndarray], np.ndarray]  # parameter -> s
    params: np.ndarray


def _refine_segment(seg: _Segment, f: Callable[[np.ndarray], np.ndarray], step: float,
                    max_points: int = 400_000) -> tuple[np.ndarray, np.ndarray]:
    """Insert midpoints until consecutive argument jumps are below ``step``."""
    t = np.asarray(seg.params, dtype=float)
    z = f(seg.path(t))
    if np.any(z == 0):
        raise WindingError("the contour passes through the point")
    for _ in range(60):
        d = np.abs(np.angle(z[1:] / z[:-1]))
        bad = np.nonzero(d > step)[0]
        if bad.size == 0 or t.size > max_points:
            break
        mids = 0.5 * (t[bad] + t[bad + 1])
        zm = f(seg.path(mids))
        if np.any(zm == 0):
            raise WindingError("the contour passes through the point")
        t = np.insert(t, bad + 1, mids)
        z = np.insert(z, bad + 1, zm)
    return t, z


def _accumulate(segments: list[_Segment], G: RationalFunction, point: complex, tol: ToleranceConfig,
                mirror: bool) -> tuple[float, float, list[complex]]:
    """Argument change of ``G(s) - point`` along the upper contour (and its mirror image)."""
    def f(s):
        return G.num(s) / G.den(s) - point

    def f_mirror(s):
        return np.conj(G.num(s) / G.den(s)) - point

    zs = []
    for seg in segments:
        _, z = _refine_segment(seg, f, tol.winding_step)
        zs.append(z)
    z = np.concatenate(zs)
    tail = complex(G.at_infinity()) - point
    if abs(tail) == 0.0:
        raise WindingError("the contour closes through the point (G(inf) equals it)")
    z = np.append(z, tail)
    upper = float(np.sum(np.angle(z[1:] / z[:-1])))
    dmin = float(np.min(np.abs(z)))
    if not mirror:
        return 2.0 * upper, dmin, list(z)
    # mirror branch: conj path traversed from -j inf up to the start of the upper path
    zm = np.concatenate([_refine_segment(seg, f_mirror, tol.winding_step)[1] for seg in segments])
    zm = np.append(zm, tail)[::-1]
    lower = float(np.sum(np.angle(zm[1:] / zm[:-1])))
    return upper + lower, min(dmin, float(np.min(np.abs(zm)))), list(zm) + list(z)


def _axis_samples(a: float, b: float, grid: GridSpec) -> np.ndarray:
    ws = grid.frequencies()
    lo = max(a, 1e-12)
    n = max(16, int(np.ceil(np.log10(b / lo) * 20))) if b > lo else 2
    pts = np.concatenate([[a, b], np.geomspace(lo, b, n), ws[(ws > a) & (ws < b)]])
    return np.unique(pts)


def _finish(total: float, dmin: float, point: complex, tol: ToleranceConfig) -> int:
    if dmin <= tol.forbidden * (1 + abs(point)):
        raise WindingError(f"the Nyquist curve passes through {point} (distance {dmin:.3g})")
    turns = total / (2 * np.pi)
    k = int(round(turns))
    if abs(turns - k) >= tol.winding_residual:
        raise WindingError(f"winding residual {abs(turns - k):.3g} too large; refine the grid")
    return k


def _is_real(point: complex) -> bool:
    return abs(complex(point).imag) <= 1e-15 * (1 + abs(point))


def winding_number(G, point: complex, grid: GridSpec | None = None, w_max: float | None = None,
                   full_range: bool = False, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Counter-clockwise turns of ``G(jw) - point`` for ``w`` from ``-inf`` to ``inf``.

    For a real point the lower half follows from ``G(-jw) = conj G(jw)``, so
    only ``w >= 0`` is traced and the result doubled; ``full_range`` traces both.
    """
    G = _as_siso(G)
    cls = classify(G, tol)
    if cls.imaginary_axis_poles:
        raise WindingError("G has imaginary-axis poles; use detoured_winding")
    grid = grid or GridSpec()
    w_max = w_max or default_w_max(G)
    seg = _Segment(lambda w: 1j * w, _axis_samples(0.0, w_max, grid))
    mirror = full_range or not _is_real(point)
    total, dmin, _ = _accumulate([seg], G, complex(point), tol, mirror)
    return _finish(total, dmin, complex(point), tol)


def _simple_axis_poles(G: RationalFunction, tol: ToleranceConfig) -> list[complex]:
    cls = classify(G, tol)
    axis = [p for p in cls.imaginary_axis_poles]
    allp = np.array(cls.poles)
    for p in axis:
        near = np.sum(np.abs(allp - p) <= 1e-6 * (1 + abs(p)))
        if near > 1:
            raise WindingError(f"imaginary-axis pole {p:.6g} is not simple")
    return axis


def detoured_winding(G, point: complex, grid: GridSpec | None = None, w_max: float | None = None,
                     full_range: bool = False, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Winding along the Nyquist contour indented to the right around each axis pole."""
    G = _as_siso(G)
    grid = grid or GridSpec()
    w_max = w_max or default_w_max(G)
    poles = sorted({round(abs(p.imag), 12) for p in _simple_axis_poles(G, tol)})
    segments: list[_Segment] = []
    start = 0.0
    for w0 in poles:
        eps = 1e-6 * (1 + w0)
        if w0 == 0.0:
            # quarter circle from eps to j*eps
            segments.append(_Segment(lambda th: eps * np.exp(1j * th), np.linspace(0.0, np.pi / 2, 33)))
            start = eps
            continue
        segments.append(_Segment(lambda w: 1j * w, _axis_samples(start, w0 - eps, grid)))
        segments.append(_Segment(lambda th, c=w0, e=eps: 1j * c + e * np.exp(1j * th),
                                 np.linspace(-np.pi / 2, np.pi / 2, 65)))
        start = w0 + eps
    segments.append(_Segment(lambda w: 1j * w, _axis_samples(start, max(w_max, 10 * start), grid)))
    mirror = full_range or not _is_real(point)
    total, dmin, _ = _accumulate(segments, G, complex(point), tol, mirror)
    return _finish(total, dmin, complex(point), tol)


# ---------------------------------------------------------------------------
# residues


@dataclass(frozen=True)
class AxisResidue:
    frequency: float
    residue: complex
    ok: bool
    reason: str = ""

    def to_json(self) -> dict:
        return {"frequency": self.frequency, "residue": [self.residue.real, self.residue.imag],
                "ok": self.ok, "reason": self.reason}


def axis_residues(H, tol: ToleranceConfig = DEFAULT_TOL) -> list[AxisResidue]:
    """Residues ``N(jw0) / D'(jw0)`` at the imaginary-axis poles of ``H`` with ``w0 >= 0``."""
    H = _as_siso(H)
    cls = classify(H, tol)
    allp = np.array(cls.poles)
    dprime = H.den.derivative()
    out = []
    for p in sorted(cls.imaginary_axis_poles, key=lambda z: z.imag):
        if p.imag < -stab_tol(allp, tol):
            continue
        p = complex(0.0, p.imag)
        if np.sum(np.abs(allp - p) <= 1e-6 * (1 + abs(p))) > 1:
            out.append(AxisResidue(p.imag, complex("nan"), False, "repeated imaginary-axis pole"))
            continue
        r = complex(H.num(p) / dprime(p))
        ok = r.real >= -tol.residue and abs(r.imag) <= tol.residue * max(abs(r), 1.0)
        out.append(AxisResidue(p.imag, r, bool(ok), "" if ok else "residue is not a nonnegative real"))
    return out


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class OracleVerdict:
    stable: bool
    min_real_part: float
    closed_loop_poles: tuple[complex, ...] = ()

    def to_json(self) -> dict:
        return {"stable": self.stable, "min_real_part": self.min_real_part,
                "closed_loop_poles": [[p.real, p.imag] for p in self.closed_loop_poles]}


def oracle_of_passivity(G, sigma: float, grid: GridSpec | None = None,
                        tol: ToleranceConfig = DEFAULT_TOL) -> OracleVerdict:
    """Brute-force check: roots of ``D - sigma N`` and ``min Re H(jw)`` on a dense grid."""
    G = _as_siso(G)
    grid = grid or GridSpec()
    cl = G.den - G.num * float(sigma)
    rts = roots(cl, tol) if cl.degree >= 1 else np.array([], dtype=complex)
    sc = stab_tol(rts, tol)
    stable = bool(np.all(rts.real <= sc))
    H = RationalFunction(G.num, cl).canonical()
    if stable:
        for r in axis_residues(H, tol):
            stable = stable and r.ok
    ws = grid.refined(4).frequencies()
    val, pole = H.freqresp(ws, tol)
    re = val.real[~pole]
    return OracleVerdict(stable, float(np.min(re)) if re.size else float("nan"),
                         tuple(complex(r) for r in rts))


@dataclass
class PassivityReport:
    verdict: str  # passive | not_passive | inconclusive
    sigma: float
    winding_number: int | None
    unstable_poles: int
    containment_violations: list[float]
    forbidden_point_hit: bool
    axis_pole_residues: list[AxisResidue]
    oracle_verdict: OracleVerdict | None = None
    min_margin: float = float("nan")
    strict_on_range: bool = False
    tangent_at_infinity: bool = False
    reasons: list[str] = field(default_factory=list)

    @property
    def passive(self) -> bool:
        return self.verdict == "passive"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "sigma": self.sigma,
            "winding_number": self.winding_number,
            "unstable_poles": self.unstable_poles,
            "containment_violations": list(self.containment_violations),
            "forbidden_point_hit": self.forbidden_point_hit,
            "axis_pole_residues": [r.to_json() for r in self.axis_pole_residues],
            "oracle_verdict": self.oracle_verdict.to_json() if self.oracle_verdict else None,
            "min_margin": self.min_margin,
            "strict_on_range": self.strict_on_range,
            "tangent_at_infinity": self.tangent_at_infinity,
            "reasons": list(self.reasons),
        }


def _golden_min(f: Callable[[float], float], a: float, b: float, iters: int = 60) -> tuple[float, float]:
    g = (np.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def containment_scan(G: RationalFunction, sigma: float, grid: GridSpec,
                     tol: ToleranceConfig = DEFAULT_TOL, max_refine: int = 20) -> tuple[list[float], float]:
    """Grid frequencies where ``G(jw)`` leaves the PD region, plus the smallest margin.

    Local minima of the margin are refined by golden section between their
    neighbours, so narrow excursions between grid points are still caught.
    """
    ws = grid.frequencies()
    m, holds, pole, _ = _siso_sweep(G, sigma, tol).margins(ws)
    ok = ~pole
    viol = [float(w) for w in ws[ok & ~holds]]
    mm = np.where(ok, m, np.inf)
    mmin = float(np.min(mm)) if np.any(ok) else float("nan")
    cand = [i for i in range(1, len(ws) - 1)
            if ok[i - 1] and ok[i] and ok[i + 1] and holds[i] and mm[i] <= mm[i - 1] and mm[i] <= mm[i + 1]]
    for i in sorted(cand, key=lambda k: mm[k])[:max_refine]:
        w, v = _golden_min(lambda x: float(pd_margin_poly(G, sigma, x)), float(ws[i - 1]), float(ws[i + 1]))
        mmin = min(mmin, v)
        if v < -tol.pd_margin * float(pd_margin_scale(G(1j * w), sigma)):
            viol.append(w)
    return sorted(viol), mmin


def _forbidden_hit(G: RationalFunction, sigma: float, tol: ToleranceConfig) -> bool:
    cl = G.den - G.num * float(sigma)
    if cl.is_zero():
        return True
    if cl.degree < 1:
        return False
    rts = roots(cl, tol)
    return bool(np.any(np.abs(rts.real) <= max(stab_tol(rts, tol), tol.forbidden)))


def of_passivity_check(G, sigma: float, grid: GridSpec | None = None, with_oracle: bool = True,
                       tol: ToleranceConfig = DEFAULT_TOL) -> PassivityReport:
    """Verdict on passivity of ``H = G / (1 - sigma G)``."""
    G = _as_siso(G)
    grid = grid or GridSpec()
    sigma = float(sigma)
    cls = classify(G, tol)
    P = cls.unstable_pole_count
    viol, mmin = containment_scan(G, sigma, grid, tol)
    reasons: list[str] = []

    if sigma == 0.0:
        # plain positive-realness of G
        res = axis_residues(G, tol)
        if viol:
            verdict = "not_passive"
            reasons.append("Re G(jw) < 0 at scanned frequencies")
        elif P:
            verdict = "not_passive"
            reasons.append(f"G has {P} open right-half-plane poles")
        elif not all(r.ok for r in res):
            verdict = "not_passive"
            reasons.append("imaginary-axis residue condition fails")
        else:
            verdict = "passive"
        rep = PassivityReport(verdict, sigma, None, P, viol, False, res, min_margin=mmin,
                              strict_on_range=mmin > tol.strict_margin,
                              tangent_at_infinity=G.is_strictly_proper(), reasons=reasons)
    else:
        forbidden = _forbidden_hit(G, sigma, tol)
        point = 1.0 / sigma
        wn = None
        if not forbidden:
            try:
                wn = (detoured_winding if cls.imaginary_axis_poles else winding_number)(G, point, grid, tol=tol)
            except WindingError as exc:
                reasons.append(f"winding undetermined: {exc}")
        try:
            res = axis_residues(of_transform(G, sigma), tol)
        except ValueError as exc:
            res = []
            reasons.append(str(exc))
        if viol:
            verdict = "not_passive"
            reasons.append("Nyquist locus leaves the PD region")
        elif forbidden:
            verdict = "inconclusive"
            reasons.append(f"Nyquist locus meets the forbidden point 1/sigma = {point:.6g}")
        elif wn is None:
            verdict = "inconclusive"
        elif wn != P:
            verdict = "not_passive"
            reasons.append(f"winding {wn} around 1/sigma differs from {P} unstable poles")
        elif not all(r.ok for r in res):
            verdict = "not_passive"
            reasons.append("imaginary-axis residue condition fails for H")
        else:
            verdict = "passive"
        rep = PassivityReport(verdict, sigma, wn, P, viol, forbidden, res, min_margin=mmin,
                              strict_on_range=mmin > tol.strict_margin,
                              tangent_at_infinity=G.is_strictly_proper() and sigma > 0, reasons=reasons)
    if with_oracle:
        rep.oracle_verdict = oracle_of_passivity(G, sigma, grid, tol)
    return rep
