import random

import pytest
from hypothesis import given, settings, strategies as st

from genus_forge.algebra import I, Grass, Poly, coord, random_form
from genus_forge.superalg import (D_op, SuperPoint11, SuperPoint21, SusySection,
                                  composition_law_holds, concordance_homotopy,
                                  concordance_residual, group_identity, lattice_21,
                                  lemma_residual, proj_invariance_residual, proj_map,
                                  random_lemma_input, random_superfunction, super_group_mul,
                                  superconnection_expand, susy_solve)
from susy_library import CASES, section

seeds = st.integers(0, 10 ** 6)
th, thp = Grass.gen("theta"), Grass.gen("thetap")


def test_group_law_odd_points():
    g = super_group_mul("1|1", SuperPoint11(Grass(), th), SuperPoint11(Grass(), thp))
    assert g.t == I * th * thp
    assert g.theta == th + thp


def test_group_identity_and_parity_guard():
    p = SuperPoint11.symbolic()
    assert super_group_mul("1|1", p, group_identity("1|1")) == p
    with pytest.raises(TypeError):
        super_group_mul("1|1", SuperPoint11(th, th), p)
    with pytest.raises(ValueError):
        super_group_mul("3|1", p, p)


@pytest.mark.parametrize("model,cls", [("1|1", SuperPoint11), ("2|1", SuperPoint21)])
def test_group_associative(model, cls):
    a, b, c = (cls.symbolic(t) for t in ("a", "b", "c"))
    lhs = super_group_mul(model, super_group_mul(model, a, b), c)
    rhs = super_group_mul(model, a, super_group_mul(model, b, c))
    assert lhs == rhs


def test_D_squared_on_t():
    assert D_op("1|1", D_op("1|1", coord("t"))) == -I


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from(["1|1", "2|1"]))
def test_D_squared_and_composition(seed, model):
    f = random_superfunction(random.Random(seed), model)
    even = "t" if model == "1|1" else "zb"
    assert D_op(model, D_op(model, f)) == -I * f.deven(even)
    assert composition_law_holds(model, f)


def test_projection_invariance():
    for model in ("1|1", "2|1"):
        assert all(r.is_zero() for r in proj_invariance_residual(model))


def test_projection_rejects_noncommuting_lattice():
    p = SuperPoint21.symbolic()
    with pytest.raises(ValueError):
        proj_map("2|1", lattice_21(), p, quotient=False)
    assert proj_map("2|1", lattice_21(sigmap=False), p, quotient=False) is not None


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from(["1|1", "2|1"]), st.sampled_from(["derived", "literal"]))
def test_generator_lemma(seed, model, convention):
    f = random_lemma_input(random.Random(seed), model, ["x1", "x2"])
    assert lemma_residual(model, f, ["x1", "x2"], convention).is_zero()


def test_connection_expansion():
    rng = random.Random(3)
    coords = ["x1", "x2", "x3"]
    A = [[random_form(rng, coords, 1, 2).filter(lambda k: len(k) == 1) for _ in range(2)]
         for _ in range(2)]
    res = superconnection_expand(A, coords)
    assert res.ok
    with pytest.raises(ValueError):
        superconnection_expand([[Grass()], [Grass()]], coords)


def test_concordance_example():
    # alpha = t^2 x1 dt: Q alpha = x1/3
    alpha = Grass.even(Poly.var("t", 2) * Poly.var("x1")) * Grass.gen("dt")
    assert concordance_homotopy(alpha) == Grass.even(Poly.var("x1") * Poly.const(1) / 3)
    assert concordance_residual(alpha, ["x1"]).is_zero()


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_concordance_identity(seed):
    coords = ["x1", "x2", "x3"]
    a = random_form(random.Random(seed), coords + ["t"], 3, 3, 2)
    assert concordance_residual(a, coords).is_zero()


@pytest.mark.parametrize("case", CASES, ids=[c[0] for c in CASES])
def test_susy_library(case):
    verdict = susy_solve(case[1], case[2], section(case))
    assert verdict.is_susy == case[5], verdict.witness
    assert verdict.witness


def test_literal_sign_rejects_r_sections():
    # the literal psi-rescaling sign kills the r^(deg/2) invariants
    cand = SusySection("1|1", 0, [(Poly.var("r"), Grass.mono(["dx1", "dx2"]))])
    assert susy_solve("1|1", 0, cand).is_susy
    assert not susy_solve("1|1", 0, cand, "literal").is_susy
    with pytest.raises(ValueError):
        susy_solve("1|1", 0, cand, "other")
