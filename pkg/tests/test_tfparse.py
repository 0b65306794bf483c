import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdregion.errors import ParseError, ShapeError
from pdregion.tfparse import SystemFile, load_system, parse_expression, parse_system, substitute, tokenize


def test_g1_literal():
    g = parse_expression("1/(0.1*s+0.5)")
    # canonical form: monic denominator
    assert np.allclose(g.den.coeffs, [5.0, 1.0])
    assert np.allclose(g.num.coeffs, [10.0])
    assert g(0j) == pytest.approx(2.0)


def test_product_expansion():
    g = parse_expression("(0.02*s+1)*(0.3*s+0.5)")
    assert np.allclose(g.num.coeffs, [0.5, 0.31, 0.006])
    assert g.den.coeffs == (1.0,)


def test_g2_denominator_has_root_at_origin():
    g = parse_expression("1/(s*(0.3*s+0.5))")
    assert g.den.coeffs[0] == 0.0
    assert np.allclose(np.array(g.den.coeffs) * 0.3, [0, 0.5, 0.3])


def test_power_and_star_star():
    assert parse_expression("(s+1)^2").num.coeffs == parse_expression("(s+1)**2").num.coeffs == (1.0, 2.0, 1.0)


def test_precedence_unary_minus_below_power():
    # -s^2 is -(s^2)
    assert parse_expression("-s^2").num.coeffs == (0.0, 0.0, -1.0)


@pytest.mark.parametrize("src,offset", [("1/(s+", 5), ("1 + x", 4), ("2 $ s", 2), ("s^s", 2), ("s^-1", 2)])
def test_errors_carry_byte_offset(src, offset):
    with pytest.raises(ParseError) as ei:
        parse_expression(src)
    assert ei.value.offset == offset


def test_offset_is_in_bytes():
    with pytest.raises(ParseError) as ei:
        parse_expression("1 + µ")
    assert ei.value.offset == 4
    with pytest.raises(ParseError) as ei:
        tokenize("µµ x")
    assert ei.value.offset == 0


def test_non_rational_exponent_message():
    with pytest.raises(ParseError, match="non-rational"):
        parse_expression("2^s")


def test_zero_denominator():
    with pytest.raises(ParseError):
        parse_expression("1/(s-s)")
    with pytest.raises(ParseError):
        parse_expression("1/0")


def test_empty():
    with pytest.raises(ParseError):
        parse_expression("   ")


def test_substitute_nested_and_exponent_literals():
    out = substitute("a*s + 1e-3", {"a": "2*b", "b": 3})
    assert parse_expression(out).num.coeffs == pytest.approx((1e-3, 6.0))
    with pytest.raises(ParseError, match="unknown parameter"):
        substitute("q*s", {})
    with pytest.raises(ParseError, match="terminate"):
        substitute("a", {"a": "b", "b": "a"})


def test_g4_system(systems):
    G4 = systems["g4"]
    assert G4.size == 2
    v = G4(0j)
    assert np.allclose(v, [[2, 0.1], [0.1, 2]])


def test_num_den_file_matches_expression():
    a = parse_system({"kind": "siso", "num": [1], "den": [0.5, 0.1]}).scalar()
    b = parse_expression("1/(0.1*s+0.5)")
    assert a.num.coeffs == b.num.coeffs and a.den.coeffs == b.den.coeffs


def test_shape_errors():
    with pytest.raises(ShapeError):
        parse_system({"kind": "mimo", "entries": [["1", "2", "3"], ["1", "2", "3"]]})
    with pytest.raises(ShapeError):
        parse_system({"kind": "siso", "entries": [["1", "0"], ["0", "1"]]})


def test_entry_error_reports_position():
    with pytest.raises(ParseError, match=r"entry \(1, 0\)"):
        parse_system({"kind": "mimo", "entries": [["1", "1"], ["1/(s+", "1"]]})


def test_non_finite_coefficients_rejected():
    with pytest.raises(ParseError):
        parse_system({"num": [1, float("nan")], "den": [1]})


def test_load_system_and_bad_json(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"name": "X", "kind": "siso", "entries": [["1/(s+1)"]]}))
    name, G = load_system(p)
    assert name == "X" and G.scalar()(0j) == pytest.approx(1.0)
    p.write_text("{bad json")
    with pytest.raises(ParseError):
        SystemFile.load(p)


small_poly = st.lists(st.integers(-5, 5), min_size=1, max_size=3).filter(lambda c: any(c))


def _ptext(c):
    return "(" + " + ".join(f"({v})*s^{i}" for i, v in enumerate(c)) + ")"


@given(small_poly, small_poly, small_poly, small_poly)
def test_division_association(a, b, c, d):
    lhs = parse_expression(f"{_ptext(a)}/{_ptext(b)} * {_ptext(c)}/{_ptext(d)}")
    rhs = parse_expression(f"({_ptext(a)}*{_ptext(c)})/({_ptext(b)}*{_ptext(d)})")
    assert np.allclose(lhs.num.coeffs, rhs.num.coeffs, rtol=1e-12, atol=1e-12)
    assert np.allclose(lhs.den.coeffs, rhs.den.coeffs, rtol=1e-12, atol=1e-12)


@given(st.lists(st.floats(-10, 10, allow_nan=False).filter(lambda x: abs(x) > 1e-3), min_size=1, max_size=4),
       st.lists(st.floats(-10, 10, allow_nan=False).filter(lambda x: abs(x) > 1e-3), min_size=1, max_size=4))
def test_text_round_trip(num, den):
    g = parse_system({"num": num, "den": den}).scalar()
    again = parse_expression(g.to_text())
    assert again.num.coeffs == g.num.coeffs
    assert again.den.coeffs == g.den.coeffs
