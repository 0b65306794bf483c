"""Positive-damping checks and region geometry.

Scalar convention: the loop ``H = G / (1 - sigma G)`` has ``Re H >= 0`` at a
frequency exactly when ``Re G >= sigma |G|^2``; for ``sigma > 0`` that is the
closed disk centred at ``1/(2 sigma)`` through the origin. The MIMO tests
work on the matrix inequality ``G + G^H >= 2 G sigma G^H`` (exact) and on the
numerical range of ``G`` against the disk for ``lambda_min(sigma)``
(necessary only).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from pdregion.config import DEFAULT_TOL, ToleranceConfig
from pdregion.errors import PoleError, SingularError
from pdregion.hermlin import (
    distance_to_range,
    hermitian,
    jacobi_eigh,
    norm_inf,
    numerical_radius,
    numerical_range,
    pencil_eigs,
)
from pdregion.ratpoly import Polynomial, RationalFunction, RationalMatrix, as_matrix


@dataclass(frozen=True)
class PassivityIndex:
    matrix: np.ndarray
    lambda_min: float

    @classmethod
    def of(cls, sigma) -> PassivityIndex:
        if isinstance(sigma, PassivityIndex):
            return sigma
        m = np.atleast_2d(np.asarray(sigma, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"passivity index must be square, got {m.shape}")
        if np.max(np.abs(m - m.T), initial=0.0) > DEFAULT_TOL.hermitian * (1 + np.max(np.abs(m))):
            raise ValueError("passivity index must be symmetric")
        m = 0.5 * (m + m.T)
        lam = float(jacobi_eigh(m.astype(complex))[0][0])
        return cls(m, lam)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def scalar(self) -> float:
        if self.size != 1:
            raise ValueError("matrix passivity index has no scalar value")
        return float(self.matrix[0, 0])

    def to_json(self):
        return float(self.matrix[0, 0]) if self.size == 1 else self.matrix.tolist()


def _eff(lam: float) -> float:
    return 0.0 if abs(lam) <= 1e-12 else lam


RegionKind = Literal["of_disk", "of_disk_complement", "half_plane_re_nonneg", "if_half_plane", "generalized"]


@dataclass(frozen=True)
class PDRegion:
    kind: RegionKind
    center: complex = 0j
    radius: float = 0.0
    shift: float = 0.0
    sigma_eff: float = 0.0
    frequency_parametric: object | None = field(default=None, compare=False)

    def describe(self) -> dict:
        return {"kind": self.kind, "center": [self.center.real, self.center.imag],
                "radius": self.radius, "shift": self.shift, "sigma_eff": self.sigma_eff}


def pd_region(sigma, mode: Literal["OF", "IF"] = "OF") -> PDRegion:
    idx = PassivityIndex.of(sigma)
    s = _eff(idx.lambda_min)
    if mode == "IF":
        return PDRegion("if_half_plane", shift=s, sigma_eff=s)
    if mode != "OF":
        raise ValueError(f"mode must be 'OF' or 'IF', got {mode!r}")
    if s == 0.0:
        return PDRegion("half_plane_re_nonneg", sigma_eff=0.0)
    c = 1.0 / (2.0 * s)
    if s > 0:
        return PDRegion("of_disk", center=complex(c), radius=c, sigma_eff=s)
    return PDRegion("of_disk_complement", center=complex(c), radius=abs(c), sigma_eff=s)


def region_distance(r: PDRegion, z) -> np.ndarray | float:
    """Signed distance to the region boundary; positive inside."""
    z = np.asarray(z, dtype=complex)
    if r.kind == "of_disk":
        d = r.radius - np.abs(z - r.center)
    elif r.kind == "of_disk_complement":
        d = np.abs(z - r.center) - r.radius
    elif r.kind == "half_plane_re_nonneg":
        d = z.real
    elif r.kind == "if_half_plane":
        d = z.real - r.shift
    else:
        raise ValueError("generalized regions are frequency dependent; use pdregion.genpass")
    return float(d) if np.ndim(d) == 0 else d


def region_contains(r: PDRegion, z, tol: float = DEFAULT_TOL.region):
    """Closed-region membership with tolerance ``tol * (1 + |center| + radius)``."""
    slack = tol * (1 + abs(r.center) + r.radius)
    res = np.asarray(region_distance(r, z)) >= -slack
    return bool(res) if res.ndim == 0 else res


def nichols_bound(sigma: float, phase: float) -> float | None:
    """Largest admissible gain (dB) at a given phase, or ``None`` when no gain is admissible."""
    if sigma <= 0:
        raise ValueError("Nichols bound needs sigma > 0")
    if abs(phase) >= np.pi / 2:
        return None
    return float(20 * np.log10(np.cos(phase)) - 20 * np.log10(sigma))


# ---------------------------------------------------------------------------
# SISO


def pd_margin_value(g, sigma: float):
    """``Re g - sigma |g|^2`` (vectorised); positive means damping slack."""
    g = np.asarray(g, dtype=complex)
    return g.real - sigma * (g.real * g.real + g.imag * g.imag)


def pd_margin_scale(g, sigma: float):
    g = np.asarray(g, dtype=complex)
    return np.abs(g.real) + abs(sigma) * (g.real * g.real + g.imag * g.imag)


def margin_numerator(g: RationalFunction, sigma: float) -> Polynomial:
    """Real polynomial ``Q`` in ``w`` with ``Re G - sigma |G|^2 = Q(w) / |D(jw)|^2``.

    Built from coefficients so structural cancellations (e.g. ``D(0) = sigma N(0)``)
    are exact instead of being lost to rounding near ``w = 0``.
    """
    jp = 1j ** np.arange(max(len(g.num.coeffs), len(g.den.coeffs)))
    nj = np.asarray(g.num.coeffs) * jp[: len(g.num.coeffs)]
    dj = np.asarray(g.den.coeffs) * jp[: len(g.den.coeffs)]
    a = np.convolve(nj, np.conj(dj)).real
    b = np.convolve(nj, np.conj(nj)).real
    n = max(len(a), len(b))
    q = np.zeros(n)
    q[: len(a)] += a
    q[: len(b)] -= sigma * b
    return Polynomial(q)


def pd_margin_poly(g: RationalFunction, sigma: float, w):
    """``Re G(jw) - sigma |G(jw)|^2`` through :func:`margin_numerator` (vectorised, NaN at poles)."""
    w = np.asarray(w, dtype=float)
    d = g.den(1j * w)
    dd = d.real * d.real + d.imag * d.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dd > 0, margin_numerator(g, sigma)(w).real / np.where(dd > 0, dd, 1.0), np.nan)


@dataclass(frozen=True)
class SisoCheck:
    holds: bool
    margin: float
    value: complex


def _scalar_of(G) -> RationalFunction:
    if isinstance(G, RationalMatrix):
        return G.scalar()
    return G


def pd_check_siso(G, sigma: float, w: float, tol: ToleranceConfig = DEFAULT_TOL) -> SisoCheck:
    g = _scalar_of(G)(1j * w)
    if abs(1 - sigma * g) <= tol.siso_singular:
        raise SingularError(f"1 - sigma G(jw) vanishes at w = {w}")
    m = float(pd_margin_value(g, sigma))
    return SisoCheck(bool(m >= -tol.pd_margin * float(pd_margin_scale(g, sigma))), m, g)


# ---------------------------------------------------------------------------
# MIMO, on matrix values


def _check_nonsingular(Gw: np.ndarray, sig: np.ndarray, tol: ToleranceConfig):
    p = Gw.shape[-1]
    K = np.eye(p) - Gw @ sig
    smin = np.sqrt(np.maximum(jacobi_eigh(np.conj(np.swapaxes(K, -1, -2)) @ K)[0][..., 0], 0.0))
    if np.any(smin <= tol.singular):
        raise SingularError("I - G(jw) sigma is singular")


def exact_matrix(Gw, sigma) -> np.ndarray:
    """``G + G^H - 2 G sigma G^H`` for stacked values."""
    Gw = np.asarray(Gw, dtype=complex)
    sig = PassivityIndex.of(sigma).matrix
    GH = np.conj(np.swapaxes(Gw, -1, -2))
    return Gw + GH - 2 * Gw @ sig @ GH


def exact_lambda_min(Gw, sigma) -> np.ndarray:
    M = exact_matrix(Gw, sigma)
    lam = jacobi_eigh(M)[0][..., 0]
    return lam, norm_inf(M)


@dataclass(frozen=True)
class MimoExactCheck:
    holds: bool
    lambda_min_value: float


def pd_exact_matrix(Gw, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> MimoExactCheck:
    idx = PassivityIndex.of(sigma)
    Gw = np.atleast_2d(np.asarray(Gw, dtype=complex))
    _check_nonsingular(Gw, idx.matrix, tol)
    lam, nrm = exact_lambda_min(Gw, idx)
    return MimoExactCheck(bool(lam >= -tol.psd * (1 + nrm)), float(lam))


def _eval(G: RationalMatrix, w: float) -> np.ndarray:
    return G(1j * w)


def pd_check_mimo_exact(G, sigma, w: float, tol: ToleranceConfig = DEFAULT_TOL) -> MimoExactCheck:
    return pd_exact_matrix(_eval(as_matrix(G), w), sigma, tol)


@dataclass(frozen=True)
class MimoNecessaryCheck:
    holds: bool
    worst_point: complex
    status: str  # holds / fails / inconclusive
    slack: float  # positive inside the region


def pd_necessary_matrix(Gw, sigma, n_angles: int = 720, tol: ToleranceConfig = DEFAULT_TOL) -> MimoNecessaryCheck:
    idx = PassivityIndex.of(sigma)
    Gw = np.atleast_2d(np.asarray(Gw, dtype=complex))
    _check_nonsingular(Gw, idx.matrix, tol)
    s = _eff(idx.lambda_min)
    p = Gw.shape[-1]
    if s == 0.0:
        lam = float(jacobi_eigh(Gw + np.conj(Gw.T))[0][0])
        nr = numerical_range(Gw, max(n_angles // 4, 8))
        worst = nr.boundary_points[np.argmin(nr.boundary_points.real)]
        ok = lam >= -tol.necessary * (1 + float(norm_inf(Gw)))
        return MimoNecessaryCheck(bool(ok), complex(worst), "holds" if ok else "fails", lam / 2)
    c = 1.0 / (2.0 * s)
    r = abs(c)
    slack_tol = tol.necessary * (1 + 2 * r)
    nr = numerical_range(Gw, max(n_angles // 4, 8))
    dist_pts = np.abs(nr.boundary_points - c)
    if s > 0:
        w = numerical_radius(Gw - c * np.eye(p), n_angles)
        slack = r - w
        worst = nr.boundary_points[np.argmax(dist_pts)]
        ok = slack >= -slack_tol
        status = "holds" if ok else "fails"
    else:
        d = distance_to_range(Gw, c, n_angles)
        slack = d - r
        worst = nr.boundary_points[np.argmin(dist_pts)]
        ok = slack >= -slack_tol
        status = "inconclusive" if abs(slack) <= slack_tol else ("holds" if ok else "fails")
    return MimoNecessaryCheck(bool(ok), complex(worst), status, float(slack))


def necessary_slack_batch(Gw: np.ndarray, sigma, n_angles: int = 720) -> np.ndarray:
    """Containment slack of the numerical range for stacked values (positive inside)."""
    idx = PassivityIndex.of(sigma)
    s = _eff(idx.lambda_min)
    p = Gw.shape[-1]
    if s == 0.0:
        return jacobi_eigh(Gw + np.conj(np.swapaxes(Gw, -1, -2)))[0][..., 0] / 2
    c = 1.0 / (2.0 * s)
    if s > 0:
        return abs(c) - numerical_radius(Gw - c * np.eye(p), n_angles)
    return distance_to_range(Gw, c, n_angles) - abs(c)


def pd_check_mimo_necessary(G, sigma, w: float, n_angles: int = 720,
                            tol: ToleranceConfig = DEFAULT_TOL) -> MimoNecessaryCheck:
    return pd_necessary_matrix(_eval(as_matrix(G), w), sigma, n_angles, tol)


def if_matrix_lambda_min(Gw, sigma) -> tuple[np.ndarray, np.ndarray]:
    Gw = np.asarray(Gw, dtype=complex)
    sig = PassivityIndex.of(sigma).matrix
    M = Gw + np.conj(np.swapaxes(Gw, -1, -2)) - 2 * sig
    return jacobi_eigh(M)[0][..., 0], norm_inf(M)


def pd_check_if(G, sigma, w: float, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    Gw = _eval(as_matrix(G), w)
    lam, nrm = if_matrix_lambda_min(Gw, sigma)
    return bool(lam >= -tol.psd * (1 + nrm))


def schur_block_matrix(Gw, sigma) -> np.ndarray:
    idx = PassivityIndex.of(sigma)
    if idx.lambda_min <= 1e-12:
        raise ValueError("block test needs a positive definite sigma")
    Gw = np.atleast_2d(np.asarray(Gw, dtype=complex))
    GH = np.conj(Gw.T)
    inv2s = np.linalg.inv(2 * idx.matrix)
    return np.block([[Gw + GH, Gw], [GH, inv2s]])


def schur_block_psd(Gw, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    idx = PassivityIndex.of(sigma)
    Gw = np.atleast_2d(np.asarray(Gw, dtype=complex))
    B = schur_block_matrix(Gw, idx)
    _check_nonsingular(Gw, idx.matrix, tol)
    lam = jacobi_eigh(hermitian(B))[0][0]
    return bool(lam >= -tol.psd * (1 + norm_inf(B)))


def schur_block_check(G, sigma, w: float, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return schur_block_psd(_eval(as_matrix(G), w), sigma, tol)


@dataclass(frozen=True)
class PencilReport:
    """Both orderings of the Hermitian pencil for the exact test.

    With ``A = G + G^H`` and ``B = G sigma G^H`` the exact test reads
    ``A >= 2B``, i.e. ``lambda_min(A, B) >= 2`` on ``range(B)`` plus
    ``A >= 0`` on ``ker(B)``. ``mu_max(B, A) <= 1/2`` is the reversed
    ordering. ``literal_half_rule`` evaluates ``lambda_min(A, B) >= 1/2``,
    which disagrees with the direct test in general and is reported only.
    """

    forward_lambda_min: float | None
    forward_holds: bool
    reverse_mu_max: float | None
    reverse_holds: bool
    literal_half_rule: bool
    direct_holds: bool
    kernel_dim: int
    consistent: bool


def pencil_report(Gw, sigma, tol: ToleranceConfig = DEFAULT_TOL) -> PencilReport:
    idx = PassivityIndex.of(sigma)
    Gw = np.atleast_2d(np.asarray(Gw, dtype=complex))
    GH = np.conj(Gw.T)
    A = Gw + GH
    B = Gw @ idx.matrix @ GH
    direct = pd_exact_matrix(Gw, idx, tol).holds
    fwd = pencil_eigs(A, B, tol)
    lam = float(fwd.eigenvalues[0]) if fwd.eigenvalues.size else None
    fwd_ok = fwd.kernel_psd and (lam is None or lam >= 2 - 1e-9)
    mu = None
    rev_ok = False
    try:
        rev = pencil_eigs(B, A, tol)
        mu = float(rev.eigenvalues[-1]) if rev.eigenvalues.size else None
        rev_ok = rev.kernel_dim == 0 and (mu is None or mu <= 0.5 + 1e-9)
    except ValueError:
        # A indefinite: the reversed pencil is not defined, and A >= 2B >= 0 already fails
        rev_ok = False
    literal = lam is not None and lam >= 0.5
    return PencilReport(lam, bool(fwd_ok), mu, bool(rev_ok), bool(literal), direct, fwd.kernel_dim,
                        bool(fwd_ok == direct))


def pd_check_generic(G, sigma, w: float, mode: str, n_angles: int = 720,
                     tol: ToleranceConfig = DEFAULT_TOL) -> dict:
    """One check at one frequency, as a JSON-friendly dict (used by the CLI)."""
    if mode == "siso":
        r = pd_check_siso(_scalar_of(as_matrix(G)), PassivityIndex.of(sigma).scalar, w, tol)
        return {"holds": r.holds, "margin": r.margin, "value": [r.value.real, r.value.imag]}
    if mode == "mimo-exact":
        r = pd_check_mimo_exact(G, sigma, w, tol)
        return {"holds": r.holds, "lambda_min": r.lambda_min_value}
    if mode == "mimo-estimated":
        r = pd_check_mimo_necessary(G, sigma, w, n_angles, tol)
        return {"holds": r.holds, "status": r.status, "slack": r.slack,
                "worst_point": [r.worst_point.real, r.worst_point.imag]}
    if mode == "if":
        Gw = _eval(as_matrix(G), w)
        lam, nrm = if_matrix_lambda_min(Gw, sigma)
        return {"holds": bool(lam >= -tol.psd * (1 + nrm)), "lambda_min": float(lam)}
    raise ValueError(f"unknown mode {mode!r}")


__all__ = [
    "PassivityIndex", "PDRegion", "pd_region", "region_contains", "region_distance", "nichols_bound",
    "pd_check_siso", "pd_check_mimo_exact", "pd_check_mimo_necessary", "pd_check_if",
    "schur_block_check", "pencil_report", "PoleError",
]
