import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from pdregion.errors import PoleError, SingularError
from pdregion.pdcore import (
    PassivityIndex,
    margin_numerator,
    nichols_bound,
    pd_check_generic,
    pd_check_if,
    pd_check_mimo_exact,
    pd_check_mimo_necessary,
    pd_check_siso,
    pd_exact_matrix,
    pd_margin_poly,
    pd_necessary_matrix,
    pd_region,
    pencil_report,
    region_contains,
    schur_block_check,
    schur_block_psd,
)
from pdregion.ratpoly import RationalMatrix

finite = dict(allow_nan=False, allow_infinity=False)


def test_region_examples():
    r = pd_region(1 / 3)
    assert r.kind == "of_disk" and r.center == pytest.approx(1.5) and r.radius == pytest.approx(1.5)
    assert pd_region(0.0).kind == "half_plane_re_nonneg"
    r = pd_region(-1.0)
    assert r.kind == "of_disk_complement" and r.center == pytest.approx(-0.5) and r.radius == pytest.approx(0.5)
    r = pd_region(np.diag([0.5, 1 / 3]))
    assert r.sigma_eff == pytest.approx(1 / 3)
    r = pd_region(0.25, "IF")
    assert r.kind == "if_half_plane" and r.shift == 0.25


def test_region_contains_examples():
    d = pd_region(1 / 3)
    assert region_contains(d, 2.0)
    assert not region_contains(d, 3.0001, 1e-12)
    assert region_contains(pd_region(0.0), 0.0)
    # closed complement: boundary belongs
    assert region_contains(pd_region(-1.0), 0.0)
    assert not region_contains(pd_region(-1.0), -0.5)


def test_passivity_index_rejects_asymmetric():
    with pytest.raises(ValueError):
        PassivityIndex.of([[1, 2], [0, 1]])


def test_siso_examples(G2, G3):
    r = pd_check_siso(G3, 1 / 3, 5.0)
    g = complex(G3(5j))
    assert r.holds and r.margin == pytest.approx(g.real - abs(g) ** 2 / 3, rel=1e-12) and r.margin > 0
    assert not pd_check_siso(G3, 1 / 3, 6.0).holds
    assert not pd_check_siso(G2, 0.0, 1.0).holds


def test_siso_errors(G2, G3):
    with pytest.raises(PoleError):
        pd_check_siso(G2, 0.0, 0.0)
    with pytest.raises(SingularError):
        pd_check_siso(G3, 0.5, 0.0)


def test_margin_numerator_matches_direct(G1, G3):
    for g in (G1, G3):
        ws = np.logspace(-2, 2, 37)
        direct = np.array([pd_check_siso(g, 0.2, w).margin for w in ws])
        assert np.allclose(pd_margin_poly(g, 0.2, ws), direct, rtol=1e-10, atol=1e-14)
    # G3, sigma: Q(w) = (d - sigma) - T M w^2 in closed form over |D|^2 with N = 1
    Q = margin_numerator(G3, 1 / 3)
    w = 3.0
    D_ = complex(G3.den(3j))
    assert Q(w).real == pytest.approx(D_.real, rel=1e-12) or Q(w).real / abs(D_) ** 2 == pytest.approx(
        pd_check_siso(G3, 1 / 3, w).margin, rel=1e-10)


def test_mimo_exact_examples(G4, G3):
    S = np.eye(2) / 3
    assert pd_check_mimo_exact(G4, S, 0.0).holds
    rng = np.random.default_rng(0)
    G3m = RationalMatrix.siso(G3)
    for w in rng.uniform(0, 20, 50):
        assert pd_check_mimo_exact(G3m, [[1 / 3]], w).holds == pd_check_siso(G3, 1 / 3, w).holds
    # sigma = 0 is the classical Hermitian-part test
    Gw = G4(0.7j)
    assert pd_check_mimo_exact(G4, np.zeros((2, 2)), 0.7).holds == bool(
        np.linalg.eigvalsh(Gw + Gw.conj().T)[0] >= 0)


def test_mimo_necessary_examples(G4):
    S = np.eye(2) / 3
    assert not pd_check_mimo_necessary(G4, S, 10 ** 0.7).holds
    assert pd_check_mimo_necessary(G4, S, 10 ** 0.3).holds


def test_if_examples(G1):
    G = RationalMatrix.siso(G1)
    assert pd_check_if(G, 0.4, 0.0)
    assert not pd_check_if(G, 0.4, 1e4)
    assert pd_check_if(G, 0.0, 3.0)


def test_schur_examples(G4):
    S = np.eye(2) / 3
    assert schur_block_check(G4, S, 1.0) == pd_check_mimo_exact(G4, S, 1.0).holds
    with pytest.raises(ValueError):
        schur_block_check(G4, np.zeros((2, 2)), 1.0)
    assert schur_block_psd(np.array([[2.0]]), 1 / 3)


def test_nichols_examples():
    assert nichols_bound(0.1, 0.0) == pytest.approx(20.0)
    assert nichols_bound(0.1, np.pi / 3) == pytest.approx(20 + 20 * np.log10(0.5))
    assert nichols_bound(0.1, np.pi / 2) is None
    with pytest.raises(ValueError):
        nichols_bound(0.0, 0.1)


def test_pencil_report_direction():
    # scalar G = 2, sigma = 1/3: A = 4, B = 4/3, lambda = 3 >= 2
    r = pencil_report(np.array([[2.0]]), 1 / 3)
    assert r.forward_lambda_min == pytest.approx(3.0) and r.forward_holds and r.direct_holds and r.consistent
    # G = 2, sigma = 0.8: lambda = 1.25, fails the direct test but passes a lambda >= 1/2 rule
    r = pencil_report(np.array([[2.0]]), 0.8)
    assert not r.direct_holds and r.literal_half_rule and r.consistent


def test_generic_dispatch(G3, G4):
    assert pd_check_generic(RationalMatrix.siso(G3), 1 / 3, 5.0, "siso")["holds"]
    assert pd_check_generic(G4, np.eye(2) / 3, 0.0, "mimo-exact")["holds"]
    with pytest.raises(ValueError):
        pd_check_generic(G4, 0.1, 1.0, "nope")


@given(st.floats(-10, 10, **finite), st.floats(-10, 10, **finite), st.floats(0.01, 5))
def test_disk_equivalence(x, y, s):
    z = complex(x, y)
    lhs = z.real - s * abs(z) ** 2
    c = 1 / (2 * s)
    rhs = c - abs(z - c)
    assume(abs(lhs) > 1e-9 and abs(rhs) > 1e-9)
    assert (lhs >= 0) == (rhs >= 0)
    assert region_contains(pd_region(s), z, 1e-12) == (lhs >= 0)


def _rand_cmat(rng, p):
    return rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))


def _rand_spd(rng, p):
    A = rng.normal(size=(p, p))
    return A @ A.T + 0.05 * np.eye(p)


@given(st.integers(2, 3), st.integers(0, 100_000), st.floats(0.0, 1.0))
def test_exact_implies_necessary(p, seed, shrink):
    rng = np.random.default_rng(seed)
    S = _rand_spd(rng, p)
    c = 1 / (2 * np.linalg.eigvalsh(S)[0])
    # a point near the PD region so that some samples hold
    Gw = c * (np.eye(p) + shrink * _rand_cmat(rng, p) / (2 * p))
    try:
        ex = pd_exact_matrix(Gw, S)
    except SingularError:
        return
    if ex.holds:
        assert pd_necessary_matrix(Gw, S).holds


@given(st.floats(-5, 5, **finite), st.floats(-5, 5, **finite), st.floats(-2, 2, **finite))
def test_scalar_mimo_consistency(x, y, s):
    g = complex(x, y)
    assume(abs(1 - s * g) > 1e-6)
    from pdregion.pdcore import pd_margin_value
    m = pd_margin_value(g, s)
    assume(abs(m) > 1e-9 * (1 + abs(g)) ** 2)
    assert pd_exact_matrix(np.array([[g]]), s).holds == (m >= 0)


@given(st.integers(1, 3), st.integers(0, 100_000), st.floats(0.0, 1.5))
def test_schur_agrees_with_exact(p, seed, shrink):
    rng = np.random.default_rng(seed)
    S = _rand_spd(rng, p)
    c = 1 / (2 * np.linalg.eigvalsh(S)[-1])
    Gw = c * (np.eye(p) + shrink * _rand_cmat(rng, p) / (2 * p))
    try:
        ex = pd_exact_matrix(Gw, S)
    except SingularError:
        return
    assume(abs(ex.lambda_min_value) > 1e-8)
    assert schur_block_psd(Gw, S) == ex.holds


@given(st.floats(1e-3, 10), st.floats(-1.5, 1.5), st.floats(0.05, 5))
def test_nichols_disk_equivalence(mag, ph, s):
    g = mag * np.exp(1j * ph)
    b = nichols_bound(s, ph)
    lhs = 20 * np.log10(mag)
    assume(abs(lhs - b) > 1e-7)
    assert (lhs <= b) == region_contains(pd_region(s), g, 1e-9)
