"""Plot data: Nyquist/Nichols curves, numerical-range slices, band charts.

Everything is emitted as data (CSV, JSON) or a minimal deterministic SVG;
no plotting library is involved.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from pdregion.bands import FrequencyBand
from pdregion.config import GridSpec
from pdregion.hermlin import numerical_range
from pdregion.pdcore import PDRegion, PassivityIndex, nichols_bound, pd_region
from pdregion.ratpoly import as_matrix


@dataclass
class Curve:
    name: str
    w: np.ndarray
    z: np.ndarray  # complex points; for x/y plots re = x, im = y
    extra: np.ndarray | None = None


@dataclass
class PlotBundle:
    title: str
    curves: list[Curve] = field(default_factory=list)
    regions: list[PDRegion] = field(default_factory=list)
    annotations: list[tuple[float, float, str]] = field(default_factory=list)
    xlabel: str = "Re"
    ylabel: str = "Im"


def fmt(x: float, precision: int = 6) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return "nan"
    v = float(x)
    if v == 0.0:
        return "0"
    return f"{v:.{precision}g}"


def to_csv(bundle: PlotBundle, precision: int = 6) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["name", "w", "re", "im", "extra"])
    for c in bundle.curves:
        ex = c.extra if c.extra is not None else [None] * len(c.w)
        for w, z, e in zip(c.w, c.z, ex):
            wr.writerow([c.name, fmt(w, precision), fmt(z.real, precision), fmt(z.imag, precision),
                         "" if e is None else fmt(e, precision)])
    return buf.getvalue()


def _round(x, precision: int):
    return float(fmt(x, precision)) if np.isfinite(x) else None


def to_json(bundle: PlotBundle, precision: int = 6) -> str:
    doc = {
        "title": bundle.title,
        "xlabel": bundle.xlabel,
        "ylabel": bundle.ylabel,
        "curves": [
            {"name": c.name,
             "w": [_round(w, precision) for w in c.w],
             "re": [_round(z.real, precision) for z in c.z],
             "im": [_round(z.imag, precision) for z in c.z],
             **({"extra": [_round(e, precision) for e in c.extra]} if c.extra is not None else {})}
            for c in bundle.curves
        ],
        "regions": [{k: (v if not isinstance(v, float) else _round(v, precision)) for k, v in r.describe().items()}
                    for r in bundle.regions],
        "annotations": [[_round(x, precision), _round(y, precision), t] for x, y, t in bundle.annotations],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def to_svg(bundle: PlotBundle, width: int = 640, height: int = 480, precision: int = 6) -> str:
    """Deterministic SVG 1.1: fixed viewport, data bounds padded by 5 %."""
    pts = [c.z[np.isfinite(c.z)] for c in bundle.curves]
    xs = np.concatenate([p.real for p in pts] + [np.array([0.0])])
    ys = np.concatenate([p.imag for p in pts] + [np.array([0.0])])
    for r in bundle.regions:
        if r.kind in ("of_disk", "of_disk_complement"):
            xs = np.append(xs, [r.center.real - r.radius, r.center.real + r.radius])
            ys = np.append(ys, [-r.radius, r.radius])
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    dx, dy = (x1 - x0) or 1.0, (y1 - y0) or 1.0
    x0, x1, y0, y1 = x0 - 0.05 * dx, x1 + 0.05 * dx, y0 - 0.05 * dy, y1 + 0.05 * dy
    m = 40
    sx = (width - 2 * m) / (x1 - x0)
    sy = (height - 2 * m) / (y1 - y0)

    def X(x):
        return fmt(m + (x - x0) * sx, precision)

    def Y(y):
        return fmt(height - m - (y - y0) * sy, precision)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="20" text-anchor="middle" font-size="14">{_esc(bundle.title)}</text>',
        f'<line x1="{m}" y1="{Y(0.0)}" x2="{width - m}" y2="{Y(0.0)}" stroke="#999" stroke-width="0.5"/>',
        f'<line x1="{X(0.0)}" y1="{m}" x2="{X(0.0)}" y2="{height - m}" stroke="#999" stroke-width="0.5"/>',
        f'<text x="{width - m}" y="{height - 8}" text-anchor="end" font-size="11">{_esc(bundle.xlabel)}</text>',
        f'<text x="8" y="{m - 8}" font-size="11">{_esc(bundle.ylabel)}</text>',
    ]
    for r in bundle.regions:
        if r.kind in ("of_disk", "of_disk_complement"):
            dash = ' stroke-dasharray="4,3"' if r.kind == "of_disk_complement" else ""
            fill = "#ffe08a" if r.kind == "of_disk" else "none"
            out.append(f'<ellipse cx="{X(r.center.real)}" cy="{Y(r.center.imag)}" rx="{fmt(r.radius * sx, precision)}" '
                       f'ry="{fmt(r.radius * sy, precision)}" fill="{fill}" fill-opacity="0.4" stroke="#b8860b"{dash}/>')
        elif r.kind in ("half_plane_re_nonneg", "if_half_plane"):
            xb = r.shift if r.kind == "if_half_plane" else 0.0
            out.append(f'<line x1="{X(xb)}" y1="{m}" x2="{X(xb)}" y2="{height - m}" stroke="#b8860b" stroke-width="1.5"/>')
    for k, c in enumerate(bundle.curves):
        z = c.z
        segs, cur = [], []
        for p in z:
            if np.isfinite(p):
                cur.append(f"{X(p.real)},{Y(p.imag)}")
            elif cur:
                segs.append(cur)
                cur = []
        if cur:
            segs.append(cur)
        color = _PALETTE[k % len(_PALETTE)]
        for s in segs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{" ".join(s)}"/>')
        out.append(f'<text x="{width - m}" y="{m + 14 * k}" text-anchor="end" font-size="10" fill="{color}">'
                   f'{_esc(c.name)}</text>')
    for x, y, t in bundle.annotations:
        out.append(f'<text x="{X(x)}" y="{Y(y)}" font-size="10">{_esc(t)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render(bundle: PlotBundle, fmt_name: str, precision: int = 6) -> str:
    if fmt_name == "csv":
        return to_csv(bundle, precision)
    if fmt_name == "json":
        return to_json(bundle, precision)
    if fmt_name == "svg":
        return to_svg(bundle, precision=precision)
    raise ValueError(f"unknown plot format {fmt_name!r}")


# ---------------------------------------------------------------------------
# builders


def nyquist_bundle(systems: dict, sigma: float | None = None, grid: GridSpec | None = None) -> PlotBundle:
    """Nyquist curves for ``w >= 0`` of SISO systems, with the PD region for ``sigma``."""
    ws = (grid or GridSpec()).frequencies()
    b = PlotBundle("Nyquist")
    for name, G in systems.items():
        g, pole = as_matrix(G).scalar().freqresp(ws)
        b.curves.append(Curve(name, ws, np.where(pole, np.nan + 0j, g)))
    if sigma is not None:
        b.regions.append(pd_region(sigma))
        if sigma != 0:
            b.annotations.append((1.0 / sigma, 0.0, "1/sigma"))
    return b


def nichols_bundle(systems: dict, sigma: float, grid: GridSpec | None = None, n_phase: int = 181) -> PlotBundle:
    """Gain (dB) against phase (deg), with the PD gain bound over ``|phase| < 90``."""
    ws = (grid or GridSpec()).frequencies()
    b = PlotBundle("Nichols", xlabel="phase [deg]", ylabel="gain [dB]")
    for name, G in systems.items():
        g, pole = as_matrix(G).scalar().freqresp(ws)
        ok = ~pole & (np.abs(g) > 0)
        ph = np.degrees(np.unwrap(np.angle(np.where(ok, g, 1.0))))
        db = 20 * np.log10(np.where(ok, np.abs(g), 1.0))
        b.curves.append(Curve(name, ws, np.where(ok, ph + 1j * db, np.nan + 0j)))
    if sigma > 0:
        phs = np.linspace(-np.pi / 2, np.pi / 2, n_phase)[1:-1]
        bd = np.array([nichols_bound(sigma, p) for p in phs], dtype=float)
        b.curves.append(Curve(f"PD bound sigma={fmt(sigma)}", np.full(phs.shape, np.nan),
                              np.degrees(phs) + 1j * bd))
    return b


def numerical_range_bundle(G, sigma, log_w=None, n_angles: int = 180) -> PlotBundle:
    """Numerical-range boundaries of ``G(jw)`` at each sampled frequency."""
    Gm = as_matrix(G)
    log_w = np.round(np.arange(-3.0, 2.0 + 1e-9, 0.1), 10) if log_w is None else np.asarray(log_w)
    b = PlotBundle("Numerical range")
    for lw in log_w:
        w = float(10.0 ** lw)
        nr = numerical_range(Gm(1j * w), n_angles)
        pts = np.append(nr.boundary_points, nr.boundary_points[:1])
        b.curves.append(Curve(f"logw={lw:.1f}", np.full(pts.shape, w), pts))
    b.regions.append(pd_region(PassivityIndex.of(sigma)))
    return b


def band_bundle(bands: dict[float, FrequencyBand]) -> PlotBundle:
    """One horizontal bar per sigma: x = frequency, y = sigma."""
    b = PlotBundle("PD frequency bands", xlabel="w [rad/s]", ylabel="sigma")
    for s, band in bands.items():
        for k, (lo, hi) in enumerate(band.intervals):
            b.curves.append(Curve(f"sigma={fmt(s)}#{k}", np.array([lo, hi]), np.array([lo + 1j * s, hi + 1j * s])))
    return b


def generalized_bundle(samples, name: str = "G") -> PlotBundle:
    b = PlotBundle("Generalized PD samples")
    ws = np.array([s.w for s in samples])
    z = np.array([complex(s.re_g, s.im_g) for s in samples])
    m = np.array([s.margin for s in samples])
    b.curves.append(Curve(name, ws, z, m))
    return b
