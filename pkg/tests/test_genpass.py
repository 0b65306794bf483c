import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from pdregion.bands import pd_band
from pdregion.errors import PoleError
from pdregion.genpass import (
    ROperator,
    example2_system,
    gen_full_passivity,
    gen_pd_band,
    gen_pd_check,
    gen_samples,
    region_slice,
    samples_to_csv,
)
from pdregion.pdcore import pd_check_siso
from pdregion.ratpoly import Polynomial, RationalFunction

from conftest import D, M, T

I = ROperator.identity()
S = ROperator.differentiator()


def rf(num, den):
    return RationalFunction.from_coeffs(num, den)


def test_named_operators():
    assert ROperator.named("s") == S and ROperator.named("1") == I
    with pytest.raises(ValueError):
        ROperator.named("q")


def test_check_examples(G2, G3):
    g = complex(G2(1j))
    assert g.imag < 0
    r = gen_pd_check(G2, 0.7, S, 1.0)
    assert r.holds and r.margin == pytest.approx(-1.0 * g.imag)
    a, b = gen_pd_check(G3, 1 / 3, I, 5.0), pd_check_siso(G3, 1 / 3, 5.0)
    assert a.holds == b.holds and a.margin == pytest.approx(b.margin, rel=1e-12)
    H = example2_system(G3)
    r = gen_pd_check(H, 0.1, I, 1.0)
    g = complex(G3(1j))
    assert r.holds == (1.0 * 0.1 * abs(g) ** 2 + g.imag <= 0)


def test_check_errors(G3):
    with pytest.raises(PoleError):
        gen_pd_check(G3, 0.1, ROperator.custom(rf([1], [1, 0, 1])), 1.0)


def test_band_examples(G3):
    b = gen_pd_band(G3, 0.4, S)
    assert len(b.intervals) == 1 and b.intervals[0][0] == 0.0 and b.intervals[0][1] == b.grid.w_max
    b = gen_pd_band(G3, 1 / 3, I)
    ref = pd_band(G3, 1 / 3)
    assert b.intervals[0][1] == pytest.approx(ref.intervals[0][1], rel=1e-9)
    b = gen_pd_band(example2_system(G3), 1.0, I)
    assert b.intervals and b.intervals != [(0.0, b.grid.w_max)]


def test_example2_bands(G2, G3):
    for G in (G2, G3):
        for s in (0.1, 0.3):
            b = gen_pd_band(example2_system(G), s, I)
            assert b.intervals == [(0.0, b.grid.w_max)]
    assert gen_pd_band(example2_system(G2), 1.0, I).is_empty


def test_full_passivity_examples(G2, G3):
    assert gen_full_passivity(G3, 0.4, S).verdict == "passive"
    assert gen_full_passivity(G3, 0.6, S).verdict == "not_passive"
    assert gen_full_passivity(G2, -1.0, S).verdict == "passive"
    assert gen_full_passivity(G2, 0.5, S).verdict == "not_passive"


def test_region_slice_example2():
    sl = region_slice(0.1, 2.0, example2=True)
    assert sl.kind == "disk"
    c = sl.center
    assert c.real == 0.0 and c.imag == pytest.approx(-1 / (2 * 0.1 * 2.0))
    assert sl.contains(c) and not sl.contains(1.0)
    assert region_slice(0.1, 1.0).kind == "disk"


def test_samples_and_csv(G3):
    sm = gen_samples(G3, 0.1, example2=True)
    assert sm[0].w == 0.0 and sm[0].holds and sm[0].margin == 0.0
    for s in sm[1:]:
        assert s.holds == (s.margin >= -1e-12 * (1 + abs(s.margin))) or abs(s.margin) < 1e-12
    txt = samples_to_csv(sm[:3])
    assert txt.splitlines()[0].startswith("w,") and len(txt.splitlines()) == 4


def _rand(rng):
    den = Polynomial([1.0])
    for p in rng.uniform(0.2, 4, int(rng.integers(1, 4))):
        den = den * Polynomial([p, 1.0])
    num = Polynomial(list(rng.uniform(-1, 2, int(rng.integers(1, den.degree + 1)))))
    return RationalFunction(num, den).canonical()


@settings(max_examples=100)
@given(st.integers(0, 1_000_000), st.floats(-2, 2), st.floats(0.0, 30))
def test_identity_reduction(seed, sigma, w):
    G = _rand(np.random.default_rng(seed))
    g = complex(G(1j * w))
    assume(abs(1 - sigma * g) > 1e-6)
    a, b = gen_pd_check(G, sigma, I, w), pd_check_siso(G, sigma, w)
    assert a.holds == b.holds and abs(a.margin - b.margin) <= 1e-12 * (1 + abs(b.margin))


@settings(max_examples=100)
@given(st.integers(0, 1_000_000), st.floats(-2, 2), st.floats(1e-3, 30))
def test_example1_equivalence(seed, sigma, w):
    G = _rand(np.random.default_rng(seed))
    g = complex(G(1j * w))
    assume(abs(1 - sigma * g) > 1e-6 and abs(g.imag) > 1e-12)
    assert gen_pd_check(G, sigma, S, w).holds == (g.imag <= 0)


@settings(max_examples=100)
@given(st.integers(0, 1_000_000), st.floats(-2, 2), st.floats(1e-3, 30))
def test_example2_equivalence(seed, sigma, w):
    G = _rand(np.random.default_rng(seed))
    g = complex(G(1j * w))
    H = example2_system(G)
    h = complex(H(1j * w))
    assume(abs(1 - sigma * h) > 1e-6)
    lhs = w * sigma * abs(g) ** 2 + g.imag
    assume(abs(lhs) > 1e-9 * (1 + abs(g)) ** 2)
    assert gen_pd_check(H, sigma, I, w).holds == (lhs <= 0)


@settings(max_examples=15)
@given(st.integers(0, 1_000_000), st.floats(0.05, 1.0))
def test_identity_band_equals_pd_band(seed, sigma):
    G = _rand(np.random.default_rng(seed))
    try:
        a, b = gen_pd_band(G, sigma, I), pd_band(G, sigma)
    except ValueError:
        return
    assert len(a.intervals) == len(b.intervals)
    for (l1, h1), (l2, h2) in zip(a.intervals, b.intervals):
        assert l1 == pytest.approx(l2, rel=1e-9, abs=1e-12) and h1 == pytest.approx(h2, rel=1e-9)
