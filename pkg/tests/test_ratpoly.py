import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from pdregion.errors import PoleError, ShapeError, SingularError
from pdregion.ratpoly import (
    Polynomial,
    RationalFunction,
    classify,
    if_transform,
    inverse_decomposition,
    mobius_map,
    multiply_by_s,
    of_transform,
    roots,
)

from conftest import C, D, K, M, T, TAU


def rf(num, den):
    return RationalFunction.from_coeffs(num, den)


def same(a: RationalFunction, b: RationalFunction, tol=1e-12):
    a, b = a.canonical(), b.canonical()
    return (np.allclose(a.num.array(), b.num.array(), atol=tol) and a.den.coeffs.__len__() == b.den.coeffs.__len__()
            and np.allclose(a.den.array(), b.den.array(), atol=tol))


def test_polynomial_trims_and_zero():
    assert Polynomial([1, 2, 0, 0]).coeffs == (1.0, 2.0)
    z = Polynomial([0, 0])
    assert z.coeffs == (0.0,) and z.is_zero()


def test_eval_case_systems(G1, G3):
    assert G1(0j) == pytest.approx(2 + 0j)
    assert G3(0j) == pytest.approx(2 + 0j)


def test_eval_pole_raises(G2):
    with pytest.raises(PoleError):
        G2(0j)


def test_matrix_pole_reports_entry():
    from pdregion.ratpoly import RationalMatrix
    G = RationalMatrix([[rf([1], [1, 1]), rf([1], [0, 1])], [rf([1], [1]), rf([1], [2, 1])]])
    with pytest.raises(PoleError) as ei:
        G(0j)
    assert ei.value.entry == (0, 1)


@pytest.mark.parametrize("coeffs,expected", [
    ([0.5, 0.1], [-5.0]),
    ([0, 0.5, 0.3], [-5 / 3, 0.0]),
    ([1, 0, 1], [-1j, 1j]),
])
def test_roots_examples(coeffs, expected):
    assert np.allclose(np.sort_complex(roots(coeffs)), np.sort_complex(np.array(expected, dtype=complex)), atol=1e-12)


def test_roots_degree_zero():
    with pytest.raises(ValueError):
        roots([3.0])


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=9), st.floats(0.1, 10))
def test_roots_reconstruct(c, lead):
    coeffs = c + [lead]
    r = roots(coeffs)
    p = Polynomial(coeffs)
    back = np.real(np.poly(r)[::-1]) * lead
    assert np.allclose(back, coeffs, rtol=1e-7, atol=1e-7 * np.linalg.norm(coeffs))
    res = np.abs(p(r)) / np.linalg.norm(coeffs)
    assert np.all(res <= 1e-8 * np.maximum(1, np.abs(r)) ** p.degree)


def test_of_transform_examples(G1):
    assert same(of_transform(G1, 1 / 3), rf([1], [1 / 6, 0.1]))
    assert same(of_transform(G1, 0.0), G1)
    H = of_transform(G1, 1.0)
    assert same(H, rf([1], [-0.5, 0.1]))
    assert classify(H).unstable_pole_count == 1


def test_of_transform_singular():
    with pytest.raises(SingularError):
        of_transform(rf([2], [1]), 0.5)


def test_if_transform_examples(G1, G4):
    assert same(if_transform(G1, 0.0), G1)
    assert same(if_transform(G1, 0.5), rf([0.75, -0.05], [0.5, 0.1]))
    H = if_transform(G4, np.eye(2) / 3)
    s = 0.7j
    assert np.allclose(H(s), G4(s) - np.eye(2) / 3)
    with pytest.raises(ShapeError):
        if_transform(G4, np.eye(3))


def test_inverse_decomposition_examples(G1, G3):
    d = inverse_decomposition(G1)
    assert np.allclose(d.L.array(), [0, 0.1]) and d.C == pytest.approx(0.5) and d.R.num.is_zero()
    d = inverse_decomposition(G3)
    assert np.allclose(d.L.array(), [0, T * D + M, T * M]) and d.C == pytest.approx(0.5) and d.R.num.is_zero()
    d = inverse_decomposition(rf([1], [1, 1]))
    assert np.allclose(d.L.array(), [0, 1]) and d.C == pytest.approx(1.0)


def test_inverse_decomposition_needs_strictly_proper():
    with pytest.raises(ValueError):
        inverse_decomposition(rf([1, 1], [1, 1]))


@given(st.lists(st.floats(0.2, 4), min_size=1, max_size=2), st.lists(st.floats(0.2, 4), min_size=2, max_size=4),
       st.floats(0.1, 3), st.randoms(use_true_random=False))
def test_inverse_reconstruction(zs, ps, gain, rnd):
    assume(len(zs) < len(ps))
    num = Polynomial([gain])
    for z in zs:
        num = num * Polynomial([z, 1])
    den = Polynomial([1.0])
    for p in ps:
        den = den * Polynomial([p, 1])
    G = RationalFunction(num, den).canonical()
    dec = inverse_decomposition(G)
    assert dec.L.degree == G.relative_degree
    for _ in range(10):
        s0 = complex(rnd.uniform(-3, 3), rnd.uniform(-3, 3))
        inv = 1 / G(s0)
        assert abs(inv - dec(s0)) <= 1e-9 * abs(inv) + 1e-12


def test_classify_examples(G1, G2):
    c = classify(G2)
    assert (c.relative_degree, c.unstable_pole_count, c.minimal_phase) == (2, 0, True)
    assert len(c.imaginary_axis_poles) == 1 and abs(c.imaginary_axis_poles[0]) < 1e-12
    c = classify(G1)
    assert (c.relative_degree, c.unstable_pole_count, c.imaginary_axis_poles) == (1, 0, ())
    assert classify(rf([1], [-0.5, 0.1])).unstable_pole_count == 1


def test_classify_near_cancellation_warns_only():
    G = rf([1.0, 1.0], [1.0 + 1e-11, 1.0]) * rf([1], [2, 1])
    c = classify(G)
    assert c.warnings and G.den.degree == 2


def test_multiply_by_s(G2, G3):
    H = multiply_by_s(G2)
    assert same(H, rf([1], [D, M]))
    H = multiply_by_s(G3)
    assert H(1j) == pytest.approx(1j * G3(1j))


def _fit_circle(z):
    # algebraic fit x^2+y^2 + a x + b y + c = 0, or a line if that fits better
    x, y = z.real, z.imag
    A = np.column_stack([x, y, np.ones_like(x)])
    rhs = -(x * x + y * y)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    a, b, c = sol
    cx, cy = -a / 2, -b / 2
    r = np.sqrt(max(cx * cx + cy * cy - c, 0.0))
    circ = np.max(np.abs(np.hypot(x - cx, y - cy) - r)) / max(r, 1.0)
    line_res = np.linalg.svd(np.column_stack([x - x.mean(), y - y.mean()]), compute_uv=False)[-1] / np.sqrt(len(x))
    return min(circ, line_res / max(1.0, np.ptp(np.abs(z))))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 3), st.floats(-2, 2).filter(lambda s: abs(s) > 1e-3))
def test_mobius_preserves_circles(cx, cy, r, sigma):
    c = complex(cx, cy)
    t = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    z = c + r * np.exp(1j * t)
    # keep away from the pole of the map
    assume(np.min(np.abs(1 - sigma * z)) > 1e-2)
    w = mobius_map(sigma)(z)
    assert _fit_circle(w) <= 1e-7


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=3), st.lists(st.floats(0.2, 3), min_size=1, max_size=3),
       st.floats(-2, 2))
def test_of_transform_inverse(num, poles, sigma):
    den = Polynomial([1.0])
    for p in poles:
        den = den * Polynomial([p, 1])
    assume(any(abs(v) > 1e-2 for v in num))
    G = RationalFunction(Polynomial(num), den).canonical()
    try:
        H = of_transform(G, sigma)
    except SingularError:
        return
    back = of_transform(H, -sigma)
    for s0 in (0.3 + 0.7j, -1.1 + 2j, 2.5j):
        try:
            a, b = G(s0), back(s0)
        except PoleError:
            continue
        assert abs(a - b) <= 1e-8 * (1 + abs(a))
