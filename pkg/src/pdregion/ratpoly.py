"""Real-coefficient polynomial and rational-function algebra.

Coefficients are stored in ascending powers of ``s`` throughout, matching
``numpy.polynomial.polynomial``. Values are immutable; every operation
returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from pdregion.config import DEFAULT_TOL, ToleranceConfig
from pdregion.errors import PoleError, ShapeError, SingularError


def _trim(coeffs) -> tuple[float, ...]:
    c = [float(x) for x in np.asarray(coeffs, dtype=float).ravel()]
    if not c:
        return (0.0,)
    if not all(np.isfinite(c)):
        raise ValueError("polynomial coefficients must be finite")
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def array(self) -> np.ndarray:
        return np.array(self.coeffs)

    def __call__(self, s):
        # Horner, vectorised over s
        s = np.asarray(s, dtype=complex)
        acc = np.zeros_like(s)
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def __add__(self, other: Polynomial) -> Polynomial:
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Polynomial([(a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0) for i in range(n)])

    def __neg__(self) -> Polynomial:
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial([c * float(other) for c in self.coeffs])

    __rmul__ = __mul__

    def derivative(self) -> Polynomial:
        if len(self.coeffs) == 1:
            return Polynomial([0.0])
        return Polynomial([i * c for i, c in enumerate(self.coeffs) if i > 0])

    def divmod(self, other: Polynomial) -> tuple[Polynomial, Polynomial]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = np.polynomial.polynomial.polydiv(self.array(), other.array())
        return Polynomial(q), Polynomial(r)

    def roots(self) -> np.ndarray:
        return roots(self)

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coeffs)})"


def roots(p: Polynomial | Sequence[float], tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """All complex roots with multiplicity.

    Companion-matrix eigenvalues, then one Newton step per root which is kept
    only if it lowers the residual.
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    n = p.degree
    if n < 1:
        raise ValueError("roots() needs a polynomial of degree >= 1")
    c = p.array()
    monic = c[:-1] / c[-1]
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic
    r = np.linalg.eigvals(comp).astype(complex)
    dp = p.derivative()
    for i, ri in enumerate(r):
        f, df = p(ri), dp(ri)
        if df != 0:
            cand = ri - f / df
            if abs(p(cand)) < abs(f):
                r[i] = cand
    # snap conjugate-pair noise on (numerically) real roots
    scale = np.linalg.norm(c)
    for i, ri in enumerate(r):
        if ri.imag != 0 and abs(ri.imag) <= 1e-14 * (1 + abs(ri)) and abs(p(ri.real)) <= abs(p(ri)) + 1e-15 * scale:
            r[i] = complex(ri.real, 0.0)
    return np.sort_complex(r)


@dataclass(frozen=True)
class RationalFunction:
    """``num(s) / den(s)`` with a monic denominator after :meth:`canonical`."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if not isinstance(self.num, Polynomial):
            object.__setattr__(self, "num", Polynomial(self.num))
        if not isinstance(self.den, Polynomial):
            object.__setattr__(self, "den", Polynomial(self.den))
        if self.den.is_zero():
            raise ZeroDivisionError("denominator polynomial is identically zero")

    @classmethod
    def from_coeffs(cls, num, den) -> RationalFunction:
        return cls(Polynomial(num), Polynomial(den)).canonical()

    @classmethod
    def constant(cls, value: float) -> RationalFunction:
        return cls(Polynomial([value]), Polynomial([1.0]))

    def canonical(self) -> RationalFunction:
        lead = self.den.leading
        if self.num.is_zero():
            return RationalFunction(Polynomial([0.0]), Polynomial([1.0]))
        if lead == 1.0:
            return self
        return RationalFunction(Polynomial(self.num.array() / lead), Polynomial(self.den.array() / lead))

    @property
    def relative_degree(self) -> int:
        return self.den.degree - self.num.degree

    def is_strictly_proper(self) -> bool:
        return self.num.is_zero() or self.num.degree < self.den.degree

    def is_proper(self) -> bool:
        return self.num.is_zero() or self.num.degree <= self.den.degree

    def __call__(self, s, tol: ToleranceConfig = DEFAULT_TOL):
        """Evaluate at ``s`` (scalar or array); raises :class:`PoleError` on a pole."""
        n, d = self.num(s), self.den(s)
        bad = np.abs(d) <= tol.pole_eval
        if np.any(bad):
            where = np.asarray(s, dtype=complex)[bad].ravel()[0] if np.ndim(s) else complex(s)
            raise PoleError(f"pole at s = {where}", magnitude=float(np.min(np.abs(d))))
        out = n / d
        return complex(out) if np.ndim(out) == 0 else out

    def freqresp(self, ws, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
        """``G(jw)`` on an array of frequencies, with poles masked (NaN) instead of raised."""
        s = 1j * np.asarray(ws, dtype=float)
        n, d = self.num(s), self.den(s)
        pole = np.abs(d) <= tol.pole_eval
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(pole, np.nan + 0j, n / np.where(pole, 1.0, d))
        return val, pole

    def at_infinity(self) -> complex:
        if self.is_strictly_proper():
            return 0.0 + 0j
        if self.num.degree == self.den.degree:
            return complex(self.num.leading / self.den.leading)
        raise ValueError("improper rational function is unbounded at infinity")

    # algebra; results are canonicalised
    def __add__(self, other) -> RationalFunction:
        other = _as_rf(other)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den).canonical()

    __radd__ = __add__

    def __neg__(self) -> RationalFunction:
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other) -> RationalFunction:
        return self + (-_as_rf(other))

    def __rsub__(self, other) -> RationalFunction:
        return _as_rf(other) - self

    def __mul__(self, other) -> RationalFunction:
        other = _as_rf(other)
        return RationalFunction(self.num * other.num, self.den * other.den).canonical()

    __rmul__ = __mul__

    def __truediv__(self, other) -> RationalFunction:
        other = _as_rf(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num).canonical()

    def poles(self) -> np.ndarray:
        return roots(self.den) if self.den.degree >= 1 else np.array([], dtype=complex)

    def zeros(self) -> np.ndarray:
        return roots(self.num) if self.num.degree >= 1 else np.array([], dtype=complex)

    def to_text(self) -> str:
        """Canonical text form; reparsing it reproduces the coefficients bit for bit."""
        return f"{_poly_text(self.num)}/{_poly_text(self.den)}"

    def to_dict(self) -> dict:
        return {"num": list(self.num.coeffs), "den": list(self.den.coeffs)}

    def __repr__(self) -> str:
        return f"RationalFunction(num={list(self.num.coeffs)}, den={list(self.den.coeffs)})"


def _as_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x, Polynomial([1.0]))
    return RationalFunction.constant(float(x))


def _num_text(c: float) -> str:
    r = repr(float(c))
    return f"({r})" if c < 0 or r.startswith("-") else r


def _poly_text(p: Polynomial) -> str:
    terms = []
    for i, c in enumerate(p.coeffs):
        if c == 0.0 and len(p.coeffs) > 1:
            continue
        if i == 0:
            terms.append(_num_text(c))
        elif i == 1:
            terms.append(f"{_num_text(c)}*s")
        else:
            terms.append(f"{_num_text(c)}*s^{i}")
    return "(" + " + ".join(terms) + ")"


@dataclass(frozen=True)
class RationalMatrix:
    """Square ``p x p`` grid of rational functions."""

    entries: tuple[tuple[RationalFunction, ...], ...]

    def __init__(self, entries):
        rows = tuple(tuple(_as_rf(e) for e in row) for row in entries)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ShapeError(f"transfer matrix must be square, got {[len(r) for r in rows]}")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def siso(cls, g: RationalFunction) -> RationalMatrix:
        return cls([[g]])

    @property
    def size(self) -> int:
        return len(self.entries)

    def scalar(self) -> RationalFunction:
        if self.size != 1:
            raise ShapeError(f"expected a 1x1 system, got {self.size}x{self.size}")
        return self.entries[0][0]

    def __call__(self, s, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        p = self.size
        out = np.empty(s.shape + (p, p), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                d = e.den(s)
                if np.any(np.abs(d) <= tol.pole_eval):
                    raise PoleError(f"entry ({i}, {j}) has a pole at the evaluation point",
                                    entry=(i, j), magnitude=float(np.min(np.abs(d))))
                out[..., i, j] = e.num(s) / d
        return out

    def freqresp(self, ws, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
        """``G(jw)`` stacked as ``(n, p, p)``; the mask marks frequencies at a pole of any entry."""
        ws = np.asarray(ws, dtype=float)
        p = self.size
        out = np.empty(ws.shape + (p, p), dtype=complex)
        mask = np.zeros(ws.shape, dtype=bool)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                v, m = e.freqresp(ws, tol)
                out[..., i, j] = v
                mask |= m
        return out, mask

    def is_strictly_proper(self) -> bool:
        return all(e.is_strictly_proper() for row in self.entries for e in row)

    def to_dict(self) -> list:
        return [[e.to_dict() for e in row] for row in self.entries]


def as_matrix(G) -> RationalMatrix:
    if isinstance(G, RationalMatrix):
        return G
    return RationalMatrix.siso(_as_rf(G))


# ---------------------------------------------------------------------------
# passivization transforms


def of_transform(G: RationalFunction, sigma: float) -> RationalFunction:
    """Output-feedback loop ``G / (1 - sigma G) = N / (D - sigma N)``."""
    den = G.den - G.num * float(sigma)
    if den.is_zero():
        raise SingularError(f"D - sigma*N vanishes identically (G == 1/sigma for sigma={sigma})")
    return RationalFunction(G.num, den).canonical()


def if_transform(G, sigma) -> RationalMatrix | RationalFunction:
    """Input-feedforward shift ``G - sigma`` (entrywise for matrices)."""
    if isinstance(G, RationalFunction):
        s = np.asarray(sigma, dtype=float)
        if s.size != 1:
            raise ShapeError("scalar system needs a scalar sigma")
        return G - float(s.ravel()[0])
    G = as_matrix(G)
    sig = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sig.shape != (G.size, G.size):
        raise ShapeError(f"sigma shape {sig.shape} does not match system size {G.size}")
    return RationalMatrix([[e - sig[i, j] if sig[i, j] != 0 else e for j, e in enumerate(row)]
                           for i, row in enumerate(G.entries)])


def of_transform_matrix(Gw: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Pointwise ``(I - G sigma)^{-1} G`` for stacked values ``(..., p, p)``."""
    p = Gw.shape[-1]
    return np.linalg.solve(np.eye(p) - Gw @ sigma, Gw)


def mobius_map(sigma: float) -> Callable[[complex], complex]:
    """The scalar loop map ``z -> z / (1 - sigma z)``."""
    return lambda z: z / (1 - sigma * z)


def tustin_map(T: float) -> Callable[[complex], complex]:
    """Bilinear ``s -> z = (1 + sT/2) / (1 - sT/2)``."""
    return lambda s: (1 + s * T / 2) / (1 - s * T / 2)


# ---------------------------------------------------------------------------
# structure


@dataclass(frozen=True)
class InverseDecomposition:
    """``1/G = L(s) + C + R(s)``; ``L`` has no constant term, ``R`` is strictly proper."""

    L: Polynomial
    C: float
    R: RationalFunction

    def __call__(self, s):
        return self.L(s) + self.C + self.R.num(s) / self.R.den(s)

    def f(self, s):
        """``C + R(s)``: the part of ``1/G`` left after removing the polynomial growth."""
        return self.C + self.R.num(s) / self.R.den(s)


def inverse_decomposition(G: RationalFunction) -> InverseDecomposition:
    if G.num.is_zero():
        raise ValueError("inverse of the zero transfer function")
    if not G.is_strictly_proper():
        raise ValueError("inverse_decomposition needs a strictly proper G")
    q, r = G.den.divmod(G.num)
    qc = list(q.coeffs)
    C = qc[0]
    L = Polynomial([0.0] + qc[1:])
    R = RationalFunction(r, G.num).canonical()
    return InverseDecomposition(L=L, C=C, R=R)


@dataclass(frozen=True)
class Classification:
    relative_degree: int
    unstable_pole_count: int
    imaginary_axis_poles: tuple[complex, ...]
    minimal_phase: bool
    poles: tuple[complex, ...] = ()
    zeros: tuple[complex, ...] = ()
    warnings: tuple[str, ...] = field(default=())


def stab_tol(rts, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    m = float(np.max(np.abs(rts))) if len(rts) else 0.0
    return tol.stab * (1.0 + m)


def classify(G: RationalFunction, tol: ToleranceConfig = DEFAULT_TOL) -> Classification:
    p = G.poles()
    z = G.zeros()
    tp = stab_tol(p, tol)
    unstable = int(np.sum(p.real > tp))
    axis = tuple(complex(r) for r in p if abs(r.real) <= tp)
    if len(z) == 0:
        minimal = True
    else:
        minimal = bool(np.all(z.real < -stab_tol(z, tol)))
    warns = []
    for pi in p:
        for zi in z:
            if abs(pi - zi) < tol.cancel * (1 + abs(pi)):
                warns.append(f"near pole/zero cancellation at {complex(pi):.6g} (not cancelled)")
    return Classification(
        relative_degree=G.relative_degree,
        unstable_pole_count=unstable,
        imaginary_axis_poles=axis,
        minimal_phase=minimal,
        poles=tuple(complex(x) for x in p),
        zeros=tuple(complex(x) for x in z),
        warnings=tuple(warns),
    )


def multiply_by_s(G: RationalFunction) -> RationalFunction:
    """``s G(s)``; a pole exactly at the origin is cancelled instead of adding a zero."""
    dc = list(G.den.coeffs)
    if len(dc) > 1 and dc[0] == 0.0:
        return RationalFunction(G.num, Polynomial(dc[1:])).canonical()
    return RationalFunction(G.num * Polynomial([0.0, 1.0]), G.den).canonical()
