"""Small dense Hermitian numerics.

The eigensolver is a cyclic complex Jacobi method. It works on stacks of
matrices ``(..., p, p)`` so frequency and angle sweeps run as one batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pdregion.config import DEFAULT_TOL, ToleranceConfig


def hermitian(M) -> np.ndarray:
    """Symmetrise ``(M + M^H) / 2`` after checking it is Hermitian to tolerance."""
    M = np.asarray(M, dtype=complex)
    MH = np.conj(np.swapaxes(M, -1, -2))
    err = np.max(np.abs(M - MH)) if M.size else 0.0
    scale = 1.0 + (np.max(np.abs(M)) if M.size else 0.0)
    if err > 1e-12 * scale and err > DEFAULT_TOL.hermitian:
        raise ValueError(f"matrix is not Hermitian (max |M - M^H| = {err:.3g})")
    return 0.5 * (M + MH)


def herm_part(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def norm_inf(M) -> np.ndarray:
    """Max row sum, the norm the PSD tolerance is relative to."""
    return np.max(np.sum(np.abs(M), axis=-1), axis=-1)


def jacobi_eigh(A, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of Hermitian ``A`` (``(..., p, p)``), ascending.

    Each rotation first removes the phase of ``A[p, q]`` and then applies a
    real Givens rotation, so the work stays in complex arithmetic without
    the 2p x 2p real embedding.
    """
    A = np.array(A, dtype=complex, copy=True)
    squeeze = A.ndim == 2
    if squeeze:
        A = A[None]
    A = herm_part(A)
    batch = A.shape[:-2]
    n = A.shape[-1]
    A = A.reshape((-1, n, n))
    V = np.broadcast_to(np.eye(n, dtype=complex), A.shape).copy()
    if n > 1:
        fro = np.sqrt(np.sum(np.abs(A) ** 2, axis=(-1, -2)))
        target = 1e-15 * np.maximum(fro, 1e-300)
        offmask = ~np.eye(n, dtype=bool)
        for _ in range(max_sweeps):
            off = np.sqrt(np.sum(np.abs(A * offmask) ** 2, axis=(-1, -2)))
            if np.all(off <= target):
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[:, p, q]
                    mag = np.abs(apq)
                    active = mag > 1e-300
                    if not np.any(active):
                        continue
                    phase = np.where(active, apq / np.where(active, mag, 1.0), 1.0)
                    app = A[:, p, p].real
                    aqq = A[:, q, q].real
                    theta = 0.5 * np.arctan2(2 * mag, aqq - app)
                    c = np.cos(theta)
                    s = np.sin(theta)
                    # J restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                    ph = np.conj(phase)
                    jpp, jpq = c, s
                    jqp, jqq = -s * ph, c * ph
                    ap, aq = A[:, :, p].copy(), A[:, :, q].copy()
                    A[:, :, p] = ap * jpp[:, None] + aq * jqp[:, None]
                    A[:, :, q] = ap * jpq[:, None] + aq * jqq[:, None]
                    rp, rq = A[:, p, :].copy(), A[:, q, :].copy()
                    A[:, p, :] = np.conj(jpp)[:, None] * rp + np.conj(jqp)[:, None] * rq
                    A[:, q, :] = np.conj(jpq)[:, None] * rp + np.conj(jqq)[:, None] * rq
                    A[:, p, q] = 0.0
                    A[:, q, p] = 0.0
                    vp, vq = V[:, :, p].copy(), V[:, :, q].copy()
                    V[:, :, p] = vp * jpp[:, None] + vq * jqp[:, None]
                    V[:, :, q] = vp * jpq[:, None] + vq * jqq[:, None]
    w = np.diagonal(A, axis1=-2, axis2=-1).real.copy()
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    V = np.take_along_axis(V, order[:, None, :], axis=-1)
    w = w.reshape(batch + (n,))
    V = V.reshape(batch + (n, n))
    if squeeze:
        return w[0], V[0]
    return w, V


def herm_eig(M) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of a Hermitian matrix."""
    return jacobi_eigh(hermitian(M))


def eigvalsh(M) -> np.ndarray:
    return jacobi_eigh(herm_part(M))[0]


def lambda_min(M) -> np.ndarray | float:
    w = eigvalsh(M)[..., 0]
    return float(w) if np.ndim(w) == 0 else w


def is_psd(M, tol: float = DEFAULT_TOL.psd) -> bool:
    """``lambda_min(M) >= -tol (1 + ||M||)``."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    M = hermitian(M)
    return bool(jacobi_eigh(M)[0][0] >= -tol * (1 + norm_inf(M)))


@dataclass(frozen=True)
class PencilResult:
    eigenvalues: np.ndarray  # ascending, on range(B)
    kernel_dim: int
    kernel_psd: bool  # A >= 0 restricted to ker(B); True when the kernel is empty


def pencil_eigs(A, B, tol: ToleranceConfig = DEFAULT_TOL) -> PencilResult:
    """Eigenvalues of ``A x = lambda B x`` with ``x`` restricted to ``range(B)``."""
    A = hermitian(A)
    B = hermitian(B)
    wb, Ub = jacobi_eigh(B)
    nb = float(norm_inf(B))
    if wb.size and wb[0] < -1e-12 * (1 + nb):
        raise ValueError(f"pencil needs B >= 0 (lambda_min(B) = {wb[0]:.3g})")
    keep = wb > tol.pencil_rank * nb if nb > 0 else np.zeros_like(wb, dtype=bool)
    Ur, Uk = Ub[:, keep], Ub[:, ~keep]
    if Uk.shape[1]:
        Ak = np.conj(Uk.T) @ A @ Uk
        kpsd = bool(jacobi_eigh(Ak)[0][0] >= -tol.psd * (1 + norm_inf(A)))
    else:
        kpsd = True
    if Ur.shape[1] == 0:
        return PencilResult(np.array([]), int(Uk.shape[1]), kpsd)
    scale = 1.0 / np.sqrt(wb[keep])
    red = (np.conj(Ur.T) @ A @ Ur) * scale[:, None] * scale[None, :]
    return PencilResult(jacobi_eigh(red)[0], int(Uk.shape[1]), kpsd)


# ---------------------------------------------------------------------------
# numerical range


@dataclass(frozen=True)
class NumericalRangeBoundary:
    angles: np.ndarray
    boundary_points: np.ndarray
    support_values: np.ndarray
    vectors: np.ndarray  # unit eigenvectors, one column per angle


def _rot_herm(M: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Hermitian parts of ``e^{-i theta} M`` stacked over angles (last-but-two axis)."""
    rot = np.exp(-1j * thetas)[:, None, None]
    return herm_part(rot * M[..., None, :, :])


def _cross(o, a, b) -> float:
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def _convex_cleanup(points: np.ndarray, scale: float) -> np.ndarray:
    """Indices of points kept after dropping reflex (jittered) vertices in angle order."""
    idx = list(range(len(points)))
    changed = True
    eps = 1e-9 * max(scale, 1.0) ** 2
    while changed and len(idx) > 3:
        changed = False
        keep = []
        m = len(idx)
        for k in range(m):
            o, a, b = points[idx[k - 1]], points[idx[k]], points[idx[(k + 1) % m]]
            if _cross(o, a, b) < -eps:
                changed = True
                continue
            keep.append(idx[k])
        idx = keep
    return np.array(idx, dtype=int)


def numerical_range(M, n_angles: int = 360) -> NumericalRangeBoundary:
    """Boundary of the field of values by support lines.

    For each angle the top eigenvector of the Hermitian part of
    ``e^{-i theta} M`` gives a boundary point ``v^H M v``.
    """
    if n_angles < 8:
        raise ValueError("n_angles must be >= 8")
    M = np.asarray(M, dtype=complex)
    thetas = 2 * np.pi * np.arange(n_angles) / n_angles
    H = _rot_herm(M, thetas)
    w, V = jacobi_eigh(H)
    v = V[..., :, -1]
    pts = np.einsum("ki,ij,kj->k", np.conj(v), M, v)
    keep = _convex_cleanup(pts, float(np.max(np.abs(M))) if M.size else 1.0)
    return NumericalRangeBoundary(thetas[keep], pts[keep], w[keep, -1], v[keep].T)


def _golden_max(f, lo: np.ndarray, hi: np.ndarray, iters: int = 60) -> np.ndarray:
    """Vectorised golden-section maximisation of ``f`` on ``[lo, hi]``; returns the best value."""
    g = (np.sqrt(5) - 1) / 2
    a, b = lo.copy(), hi.copy()
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        c_old, d_old, fc_old, fd_old = c, d, fc, fd
        c = np.where(left, b - g * (b - a), d_old)
        d = np.where(left, c_old, a + g * (b - a))
        f_new = f(np.where(left, c, d))
        fc = np.where(left, f_new, fd_old)
        fd = np.where(left, fc_old, f_new)
    return np.maximum(fc, fd)


def support_function(M, thetas, largest: bool = True) -> np.ndarray:
    """``lambda_max`` (or ``lambda_min``) of Herm(``e^{-i theta} M``) for stacked ``M`` and angles.

    ``M`` is ``(..., p, p)``, ``thetas`` is ``(..., k)``; the result is ``(..., k)``.
    """
    M = np.asarray(M, dtype=complex)
    thetas = np.asarray(thetas, dtype=float)
    rot = np.exp(-1j * thetas)[..., None, None]
    H = herm_part(rot * M[..., None, :, :])
    w = jacobi_eigh(H)[0]
    return w[..., -1] if largest else w[..., 0]


def max_over_angles(M, largest: bool = True, n_grid: int = 720) -> tuple[np.ndarray, np.ndarray]:
    """Maximise ``lambda_max`` (or ``lambda_min``) of Herm(e^{-i theta} M) over theta.

    Batched over leading axes of ``M``. Returns the maximum and the grid angle it
    was bracketed at.
    """
    M = np.asarray(M, dtype=complex)
    batch = M.shape[:-2]
    p = M.shape[-1]
    Mf = M.reshape((-1, p, p))
    thetas = 2 * np.pi * np.arange(n_grid) / n_grid
    vals = support_function(Mf, np.broadcast_to(thetas, (Mf.shape[0], n_grid)), largest)
    k = np.argmax(vals, axis=-1)
    step = 2 * np.pi / n_grid
    t0 = thetas[k]

    def f(t):
        return support_function(Mf, t[:, None], largest)[:, 0]

    best = np.maximum(_golden_max(f, t0 - step, t0 + step), vals[np.arange(len(k)), k])
    return best.reshape(batch), t0.reshape(batch)


def numerical_radius(M, n_grid: int = 720) -> np.ndarray | float:
    """``max_theta lambda_max(Herm(e^{i theta} M))``: grid search, then golden-section refinement."""
    r, _ = max_over_angles(M, True, n_grid)
    r = np.maximum(r, 0.0)
    return float(r) if np.ndim(r) == 0 else r


def distance_to_range(M, c: complex, n_grid: int = 720) -> np.ndarray | float:
    """Euclidean distance from ``c`` to the numerical range of ``M``.

    The range is convex, so the distance is the best separating-line gap
    ``max(0, max_theta lambda_min(Herm(e^{-i theta}(M - cI))))``.
    """
    M = np.asarray(M, dtype=complex)
    p = M.shape[-1]
    d, _ = max_over_angles(M - c * np.eye(p), False, n_grid)
    d = np.maximum(d, 0.0)
    return float(d) if np.ndim(d) == 0 else d
