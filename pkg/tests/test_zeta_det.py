import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genus_forge.algebra import Grass, Poly
from genus_forge.charclass import genus_class
from genus_forge.checks import random_formal_curvature
from genus_forge.modular import Lattice
from genus_forge.zeta_det import (CurvatureModel, KineticOperator, ahat_class_formal,
                                  detline_norm_check, evaluate_on_forms, fredholm_oracle_11,
                                  kronecker_det, lattice_oracle_21, odd_mode_trace,
                                  pontryagin_forms, sdet_zeta_11, sdet_zeta_11_series,
                                  sdet_zeta_21, sdet_zeta_21_terms, witten_star_class)

# (1/2)/sinh(1/2) from mpmath
PAIR_VALUE = float(mpmath.mpf(0.5) / mpmath.sinh(0.5))


def rot(theta, n=2):
    M = np.zeros((n, n))
    M[0, 1], M[1, 0] = theta, -theta
    return M


def op11(M, r=1.0):
    return KineticOperator("1|1", r, CurvatureModel(np.asarray(M, dtype=float)))


def skew(rng, n, norm):
    M = rng.normal(size=(n, n))
    M = M - M.T
    return M * (norm / np.linalg.norm(M, 2))


def test_zero_curvature_gives_one():
    assert sdet_zeta_11(op11(np.zeros((4, 4)))).value == 1
    lat = Lattice.from_tau(1j)
    op = KineticOperator("2|1", lat, CurvatureModel(np.zeros((2, 2))))
    assert sdet_zeta_21(op).value == 1


def test_single_rotation_closed_form():
    assert abs(sdet_zeta_11(op11(rot(1.0))).value - PAIR_VALUE) < 1e-15
    assert abs(PAIR_VALUE - 0.9595173756674719) < 1e-15


def test_fredholm_approaches_closed_form():
    op = op11(rot(1.0))
    closed = sdet_zeta_11(op).value
    for modes in (100, 10000):
        # the tail of sum 1/n^2 is about 1/N
        err = abs(fredholm_oracle_11(op, modes) - closed)
        assert err < 0.05 / modes


def test_series_matches_closed_form():
    rng = np.random.default_rng(4)
    op = op11(skew(rng, 4, 2.0), 1.0)
    assert abs(sdet_zeta_11_series(op) - sdet_zeta_11(op).value) < 1e-10


def test_absolute_scaling():
    op = op11(rot(0.4, 4), 2.0)
    rel = sdet_zeta_11(op).value
    assert abs(sdet_zeta_11(op, relative=False).value - rel * 2.0 ** -2) < 1e-15


def test_odd_modes_cancel():
    assert odd_mode_trace(50, 1) == 0


def test_bad_inputs():
    with pytest.raises(ValueError):
        CurvatureModel(np.ones((2, 2)))
    with pytest.raises(ValueError):
        KineticOperator("1|1", -1.0, CurvatureModel(rot(1.0)))
    with pytest.raises(ValueError):
        KineticOperator("2|1", 1.0, CurvatureModel(rot(1.0)))
    with pytest.raises(ValueError):
        CurvatureModel([[Grass.gen("de1")]])


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([2, 4, 6]))
def test_fredholm_oracle_property(seed, n):
    rng = np.random.default_rng(seed)
    r = float(rng.uniform(0.5, 1.5))
    op = op11(skew(rng, n, 1.0 / r), r)
    closed = sdet_zeta_11(op).value
    assert abs(fredholm_oracle_11(op, 20000) - closed) < 1e-4 * abs(closed)


def test_formal_matches_ahat_class():
    curv = random_formal_curvature(random.Random(2), 4, 8)
    lhs = sdet_zeta_11(KineticOperator("1|1", 1, curv)).value
    assert lhs == evaluate_on_forms(genus_class("ahat", 8), pontryagin_forms(curv))
    assert ahat_class_formal(12) == genus_class("ahat", 12)


def test_formal_absolute_carries_r_power():
    curv = random_formal_curvature(random.Random(5), 2, 4)
    res = sdet_zeta_11(KineticOperator("1|1", 1, curv), relative=False)
    assert res.meta["raw"].body() == Poly.var("r", -1)


def test_witten_star_class_through_dim_8():
    cls = witten_star_class(8)
    assert cls.component(4) == sdet_zeta_21(dim=8).value.component(4)
    curv = random_formal_curvature(random.Random(1), 4, 8)
    lat = Lattice.from_tau(1j)
    formal = sdet_zeta_21(KineticOperator("2|1", lat, curv)).value
    assert formal == evaluate_on_forms(cls, pontryagin_forms(curv))


def test_lattice_oracle_methods_agree():
    rng = np.random.default_rng(0)
    lat = Lattice.from_tau(0.3 + 1.1j, 0.8 + 0.2j)
    op = KineticOperator("2|1", lat, CurvatureModel(skew(rng, 4, 0.3)))
    terms = sdet_zeta_21_terms(op)
    tok = complex(np.exp(sum(v for k, v in terms.items() if k >= 2)))
    a = lattice_oracle_21(op, 500).value
    b = lattice_oracle_21(op, 500, method="log").value
    assert abs(a - tok) < 1e-6 * abs(tok)
    assert abs(b - tok) < 1e-6 * abs(tok)


def test_absolute_21_divides_kronecker():
    lat = Lattice.from_tau(0.1 + 1.2j)
    op = KineticOperator("2|1", lat, CurvatureModel(rot(0.2, 2)))
    rel = sdet_zeta_21(op).value
    assert abs(sdet_zeta_21(op, relative=False).value - rel / kronecker_det(lat, 2)) < 1e-15


def test_detline_norms():
    one = detline_norm_check("1|1", 8)
    assert one.factorized
    assert one.product == genus_class("ahat", 8) * genus_class("ahat", 8)
    two = detline_norm_check("2|1", 8, Lattice.from_tau(0.2 + 1.3j))
    assert two.factorized and two.rewrites
    # E2* + conj(E2*) - E2 - conj(E2) = -2 pi / Im(tau) in the lattice-sum normalization
    assert abs(two.numeric_defect + 2 * math.pi / 1.3) < 1e-10
