import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genus_forge.algebra import Grass, Poly
from genus_forge.charclass import (CharSeries, ManifoldData, PontPoly, ahat_series,
                                   chern_character_section, genus_class, genus_evaluate,
                                   index_pushforward, ko_degree_filter, multiplicative_class,
                                   parse_monomial, ph, power_sum, witten_series,
                                   zagier_identity_check)
from genus_forge.modular import eisenstein_q

# Â class in p1, p2, p3 through degree 12, frozen from a sympy Chern-root expansion
AHAT_12 = {(1,): Fraction(-1, 24), (1, 1): Fraction(7, 5760), (2,): Fraction(-1, 1440),
           (1, 1, 1): Fraction(-31, 967680), (2, 1): Fraction(11, 241920),
           (3,): Fraction(-1, 60480)}

K3 = ManifoldData.from_dict({"name": "K3-type", "dim": 4, "pontryagin_numbers": {"p1": -48}})
STRING4 = ManifoldData.from_dict({"dim": 4, "pontryagin_numbers": {"p1": 0},
                                  "rational_string": True})


def test_ahat_exponent_coefficients():
    a = ahat_series(13).a
    assert a[1] == Fraction(-1, 24)
    assert a[2] == Fraction(1, 2880)
    assert ahat_series(13).series()[4] == Fraction(7, 5760)


def test_trivial_series():
    assert multiplicative_class(CharSeries({}, 9), 8) == PontPoly.const(1)


def test_ahat_class_through_dim_12():
    cls = genus_class("ahat", 12)
    expected = dict(AHAT_12)
    expected[()] = Fraction(1)
    assert cls == PontPoly(expected)


def test_power_sums_newton():
    # s_2 = p1^2 - 2 p2 in Chern roots x_j^2
    assert power_sum(2, 8) == PontPoly({(1, 1): 1, (2,): -2})
    assert ph(1, 4) == PontPoly({(1,): Fraction(1, 2)})


def test_witten_string_drops_k1():
    w = witten_series("string", 6, 4)
    assert 1 not in w.a


def test_witten_holo_constant_terms_match_ahat():
    w = witten_series("holo", 13, 3)
    a = ahat_series(13).a
    assert all(w.a[k][0] == a[k] for k in a)
    assert w.a[1][0] == Fraction(-1, 24)


def test_witten_nonholo_needs_tokens():
    with pytest.raises(ValueError):
        witten_series("nonholo", 6, 4)
    w = witten_series("nonholo", 6, 4, tokens=True)
    assert w.a[1] == Poly.var("E2s") * Fraction(-1, 24)


def test_zagier_identity():
    rep = zagier_identity_check(8, 10)
    assert rep.max_discrepancy == 0
    assert rep.resolved_convention == "e^(+-z), exp(-sum)=P/z"
    assert rep.table["e^(+-z/2), exp(-sum)=P/z"] != 0


def test_genus_values():
    assert genus_evaluate(genus_class("ahat", 4), K3) == 2
    w = genus_evaluate(genus_class("witten", 4, 5), K3)
    assert w == eisenstein_q(1, 5, "normalized") * 2
    assert genus_evaluate(genus_class("witten-string", 4, 5), STRING4) == 0
    assert genus_evaluate(genus_class("witten-star", 4), K3) == Poly.var("E2s") * 2


def test_dim_zero_gives_constant():
    pt = ManifoldData("pt", 0, {})
    assert genus_evaluate(genus_class("ahat", 0), pt) == 1


def test_missing_pontryagin_number():
    m = ManifoldData.from_dict({"dim": 8, "pontryagin_numbers": {"p1^2": 4}})
    with pytest.raises(KeyError, match="p2"):
        genus_evaluate(genus_class("ahat", 8), m)


def test_manifold_parsing():
    m = ManifoldData.from_json(json.dumps({"dim": 8, "pontryagin_numbers": {"p1*p1": 3, "p2": 5}}))
    assert m.pontryagin_numbers == {(1, 1): 3, (2,): 5}
    assert parse_monomial("p2p1") == (2, 1)
    with pytest.raises(ValueError):
        ManifoldData.from_dict({"dim": 4, "pontryagin_numbers": {"p2": 1}})
    with pytest.raises(ValueError):
        ManifoldData.from_dict({"dim": 4, "pontryagin_numbers": {"p1": 3},
                                "rational_string": True})


def test_index_pushforward():
    assert index_pushforward(1, K3) == 2
    assert index_pushforward(1, STRING4, "witten_string", 4) == 0
    with pytest.raises(ValueError):
        index_pushforward(1, K3, "witten_string")


@settings(max_examples=25, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_index_linear(a1, b1, a2, b2):
    m = ManifoldData.from_dict({"dim": 8, "pontryagin_numbers": {"p1^2": 7, "p2": -3}})
    x = PontPoly({(): a1, (1,): b1}, 8)
    y = PontPoly({(): a2, (1,): b2}, 8)
    assert index_pushforward(x + y, m) == index_pushforward(x, m) + index_pushforward(y, m)


def test_ko_filter():
    graded = [(d, d) for d in range(8)]
    assert [d for d, _ in ko_degree_filter(graded, 0)] == [0, 4]
    assert ko_degree_filter([], 1) == []
    once = ko_degree_filter(graded, 2)
    assert ko_degree_filter(once, 2) == once


def test_chern_character():
    assert chern_character_section(np.zeros((3, 3)), 1.0).raw == 3
    th, r = 0.7, 1.3
    F = np.array([[0, th], [-th, 0]])
    # eigenvalues +-i th, so Tr exp(-i r F) = 2 cosh(r th)
    assert abs(chern_character_section(F, r).raw - 2 * np.cosh(r * th)) < 1e-14


def test_chern_character_formal_r2_term():
    a = Grass.mono(["dx1", "dx2"])
    b = Grass.mono(["dx3", "dx4"])
    F = [[Grass(), a + b], [-(a + b), Grass()]]
    cs = chern_character_section(F, "r")
    top = cs.raw.coefficient(["dx1", "dx2", "dx3", "dx4"])
    # Tr F^2 = -2 (a+b)^2 = -4 ab; the r^2 term is -r^2 Tr(F^2)/2
    assert top == Poly.var("r", 2) * 2
    norm_top = cs.normalized.coefficient(["dx1", "dx2", "dx3", "dx4"])
    assert norm_top == Poly.var("pi", -2) * Fraction(2, 4)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.fractions(-3, 3, max_denominator=5), min_size=3, max_size=3))
def test_multiplicative_class_is_exponential(vals):
    a = {k + 1: v for k, v in enumerate(vals)}
    full = multiplicative_class(CharSeries(a, 13), 12)
    x = PontPoly({}, 12)
    for k, v in a.items():
        x = x + power_sum(k, 12) * v
    assert full == x.exp()
