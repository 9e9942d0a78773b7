"""Super group laws, projections, infinitesimal generators and the
supersymmetric-section characterizations for the 1|1 and 2|1 models.

Everything lives in one Grassmann algebra.  Odd generators: ``theta``,
``rho``, ``nu``, ``sigma``, ``sigmap`` and the form generators ``dx1, ...``
(identified with the components of psi).  Even symbols: ``t, z, zb, r, u,
ub, l, lb, lp, lbp, vol, x1, ...``.  ``vol`` stands for lb*lp - lbp*l and is
differentiated through the chain rule.

Two sign conventions are provided for the action on classical vacua.
``"literal"`` takes the psi rescaling at face value.  ``"derived"`` (the default)
flips the sign of the psi rescaling, which is what composing the group law
with the projection produces; only this one has the sections
r^(deg/2) (x) alpha, resp. vol^(deg/2) F (x) alpha, as invariants.  The
generator lemma holds exactly in both conventions.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

from .algebra import (Grass, I, Poly, QI, contract, coord, d_form,
                      form_degree_op, random_form, random_poly)
from .modular import token_info

SIGMAS = [("sigma", "sigmap")]
VOL_CHAIN = {"lb": {"vol": Poly.var("lp")}, "lbp": {"vol": -Poly.var("l")}}
VOL_EXPR = Poly.var("lb") * Poly.var("lp") - Poly.var("lbp") * Poly.var("l")


def _g(name: str) -> Grass:
    return Grass.gen(name)


def _e(c) -> Grass:
    return Grass.even(c)


# --------------------------------------------------------------------------
# group laws
@dataclass(frozen=True)
class SuperPoint11:
    t: Grass
    theta: Grass

    @classmethod
    def symbolic(cls, tag: str = "") -> "SuperPoint11":
        return cls(coord("t" + tag), _g("theta" + tag))


@dataclass(frozen=True)
class SuperPoint21:
    z: Grass
    zb: Grass
    theta: Grass

    @classmethod
    def symbolic(cls, tag: str = "") -> "SuperPoint21":
        return cls(coord("z" + tag), coord("zb" + tag), _g("theta" + tag))


def _check_parity(even: Sequence[Grass], odd: Sequence[Grass]) -> None:
    for e in even:
        if e.parity() == 1:
            raise TypeError("even coordinate has odd part")
    for o in odd:
        if o.parity() == 0 and not o.is_zero():
            raise TypeError("odd coordinate has even part")


def super_group_mul(model: str, g1, g2):
    """(t,th)(t',th') = (t+t'+i th th', th+th'); 2|1 adds i th th' to zb."""
    if model == "1|1":
        _check_parity([g1.t, g2.t], [g1.theta, g2.theta])
        return SuperPoint11(g1.t + g2.t + I * g1.theta * g2.theta, g1.theta + g2.theta)
    if model == "2|1":
        _check_parity([g1.z, g1.zb, g2.z, g2.zb], [g1.theta, g2.theta])
        return SuperPoint21(g1.z + g2.z, g1.zb + g2.zb + I * g1.theta * g2.theta,
                            g1.theta + g2.theta)
    raise ValueError(f"unknown model {model!r}")


def group_identity(model: str):
    if model == "1|1":
        return SuperPoint11(Grass(), Grass())
    return SuperPoint21(Grass(), Grass(), Grass())


# --------------------------------------------------------------------------
# left-invariant odd vector field
def D_op(model: str, f: Grass, theta: str = "theta") -> Grass:
    even = "t" if model == "1|1" else "zb"
    return f.dodd(theta) - I * _g(theta) * f.deven(even)


@dataclass
class VectorFieldReport:
    model: str
    d_squared_ok: bool
    composition_ok: bool
    samples: int


def _apply_exp(op: Callable[[Grass], Grass], f: Grass, max_terms: int = 40) -> Grass:
    """exp(op) f for an operator that is nilpotent on f."""
    out, term = f, f
    for j in range(1, max_terms):
        term = op(term) * Fraction(1, j)
        if term.is_zero():
            return out
        out = out + term
    raise ValueError("operator is not nilpotent on the input")


def random_superfunction(rng: random.Random, model: str) -> Grass:
    even = "t" if model == "1|1" else "zb"
    names = [even] if model == "1|1" else ["z", "zb"]
    f = random_poly(rng, names, 3, 3)
    g = random_poly(rng, names, 3, 3)
    return _e(f) + _g("theta") * g


def vector_field_check(model: str, samples: int = 10, seed: int = 0) -> VectorFieldReport:
    """D^2 = -i d/dt (resp. d/dzb); exp(iuQ^2 + nu Q) obeys the group law."""
    rng = random.Random(seed)
    even = "t" if model == "1|1" else "zb"
    d2 = comp = True
    for _ in range(samples):
        f = random_superfunction(rng, model)
        if D_op(model, D_op(model, f)) != (-I) * f.deven(even):
            d2 = False
        comp = comp and composition_law_holds(model, f)
    return VectorFieldReport(model, d2, comp, samples)


def composition_law_holds(model: str, f: Grass) -> bool:
    """exp(iuQ^2+nuQ) exp(iu'Q^2+nu'Q) = exp(i(u+u'+i nu nu')Q^2 + (nu+nu')Q)
    with Q = D acting on polynomial superfunctions."""
    Q = lambda h: D_op(model, h)

    def gen(ucoef: Grass, nucoef: Grass):
        return lambda h: ucoef * I * Q(Q(h)) + nucoef * Q(h)

    u1, n1 = coord("u1"), _g("nu1")
    u2, n2 = coord("u2"), _g("nu2")
    lhs = _apply_exp(gen(u1, n1), _apply_exp(gen(u2, n2), f))
    usum = u1 + u2 + I * n1 * n2
    rhs = _apply_exp(gen(usum, n1 + n2), f)
    return lhs == rhs


# --------------------------------------------------------------------------
# projections
def proj_map(model: str, lattice: Mapping[str, Grass], point,
             quotient: bool = True) -> Grass:
    """Odd coordinate of the projection to R^{0|1} that is invariant under
    the (odd) lattice.  1|1: lattice keys r, rho.  2|1: l, lb, sigma, lp,
    lbp, sigmap with vol supplied as the symbol ``vol``.

    In the 2|1 case the lattice generators must commute, i.e. sigma*sigma'
    = 0.  With ``quotient=True`` the computation takes place in the
    quotient by that relation; otherwise a nonzero product is rejected."""
    if model == "1|1":
        r, rho = lattice["r"], lattice["rho"]
        rinv = _r_inverse(r)
        return point.theta - rho * point.t * rinv
    if model == "2|1":
        s, sp = lattice["sigma"], lattice["sigmap"]
        if not quotient and not (s * sp).is_zero():
            raise ValueError("2|1 lattice data must satisfy sigma*sigma' = 0")
        volinv = _e(Poly.var("vol", -1))
        l, lb, lp, lbp = (lattice[k] for k in ("l", "lb", "lp", "lbp"))
        z, zb = point.z, point.zb
        out = (point.theta - s * (zb * lp - z * lbp) * volinv
               - sp * (z * lb - zb * l) * volinv)
        return out.kill_products(SIGMAS) if quotient else out
    raise ValueError(f"unknown model {model!r}")


def _r_inverse(r: Grass) -> Grass:
    body = r.body()
    if len(body.terms) != 1:
        raise ValueError("lattice length must be a monomial symbol")
    return _e(Poly.const(1) / body)


def lattice_11() -> Dict[str, Grass]:
    return {"r": coord("r"), "rho": _g("rho")}


def lattice_21(sigma: bool = True, sigmap: bool = True) -> Dict[str, Grass]:
    return {"l": coord("l"), "lb": coord("lb"), "lp": coord("lp"),
            "lbp": coord("lbp"),
            "sigma": _g("sigma") if sigma else Grass(),
            "sigmap": _g("sigmap") if sigmap else Grass()}


def proj_invariance_residual(model: str) -> List[Grass]:
    """proj(point * lattice generator) - proj(point), for every generator."""
    if model == "1|1":
        lat = lattice_11()
        p = SuperPoint11.symbolic()
        moved = super_group_mul("1|1", p, SuperPoint11(lat["r"], lat["rho"]))
        return [proj_map("1|1", lat, moved) - proj_map("1|1", lat, p)]
    lat = lattice_21()
    p = SuperPoint21.symbolic()
    out = []
    for a, ab, s in (("l", "lb", "sigma"), ("lp", "lbp", "sigmap")):
        moved = super_group_mul("2|1", p, SuperPoint21(lat[a], lat[ab], lat[s]))
        res = proj_map("2|1", lat, moved) - proj_map("2|1", lat, p)
        out.append(vol_reduce(res.kill_products(SIGMAS)))
    return out


# --------------------------------------------------------------------------
# helpers for vol
def vol_reduce(a: Grass) -> Grass:
    """Rewrite every coefficient with vol substituted, after clearing
    negative powers; used only for zero tests."""
    return a.map_coeffs(vol_clear)


def vol_clear(p: Poly) -> Poly:
    groups: Dict[Fraction, Poly] = {}
    for m, c in p.terms.items():
        e = dict(m).get("vol", Fraction(0))
        key = e - (e.numerator // e.denominator)
        groups[key] = groups.get(key, Poly()) + Poly({m: c})
    out = Poly()
    for frac, g in groups.items():
        # g = vol^(frac + low) * h with h polynomial in vol
        low = min(dict(m).get("vol", Fraction(0)) for m in g.terms) - frac
        h = g * Poly.var("vol", -frac - low)
        out = out + h.subs("vol", VOL_EXPR) * Poly.var("vol", frac + low)
    return out


# --------------------------------------------------------------------------
# infinitesimal generators
def _conv_sign(convention: str) -> int:
    if convention == "derived":
        return -1
    if convention == "literal":
        return 1
    raise ValueError(f"unknown convention {convention!r}")


def Q_11(F: Grass, coords: Sequence[str], convention: str = "derived") -> Grass:
    """Q = 2i rho d/dr - d + e i (rho/r) deg, e = +1 literal, -1 derived."""
    e = _conv_sign(convention)
    rho = _g("rho")
    rinv = _e(Poly.var("r", -1))
    return (QI(0, 2) * rho * F.deven("r") - d_form(F, coords)
            + QI(0, e) * rho * rinv * form_degree_op(F, coords))


def _A_21() -> Grass:
    """(sigma l' - sigma' l)/vol."""
    return (_g("sigma") * Poly.var("lp") - _g("sigmap") * Poly.var("l")) * Poly.var("vol", -1)


def _B_21() -> Grass:
    """(sigma lb' - sigma' lb)/vol."""
    return (_g("sigma") * Poly.var("lbp") - _g("sigmap") * Poly.var("lb")) * Poly.var("vol", -1)


def Q_21(F: Grass, coords: Sequence[str], convention: str = "derived") -> Grass:
    e = _conv_sign(convention)
    out = (QI(0, 2) * _g("sigma") * F.deven("lb", VOL_CHAIN["lb"])
           + QI(0, 2) * _g("sigmap") * F.deven("lbp", VOL_CHAIN["lbp"])
           - d_form(F, coords)
           + QI(0, e) * _A_21() * form_degree_op(F, coords))
    return out.kill_products(SIGMAS)


def R_21(F: Grass, coords: Sequence[str]) -> Grass:
    return (_B_21() * d_form(F, coords)).kill_products(SIGMAS)


def susy_generator_apply(model: str, f: Grass, coords: Sequence[str],
                         convention: str = "derived") -> Grass:
    """exp(iuQ^2 + nu Q) f (1|1) or exp(uR + i ub Q^2 + nu Q) f (2|1)."""
    u, nu = coord("u"), _g("nu")
    if model == "1|1":
        Q = lambda h: Q_11(h, coords, convention)
        op = lambda h: u * I * Q(Q(h)) + nu * Q(h)
        return _apply_exp(op, f)
    if model == "2|1":
        ub = coord("ub")
        Q = lambda h: Q_21(h, coords, convention)
        op = lambda h: (u * R_21(h, coords) + ub * I * Q(Q(h)) + nu * Q(h)).kill_products(SIGMAS)
        return _apply_exp(op, f).kill_products(SIGMAS)
    raise ValueError(f"unknown model {model!r}")


def direct_pullback(model: str, f: Grass, coords: Sequence[str],
                    convention: str = "derived") -> Grass:
    """The action on (lattice, x, psi) written as a substitution.

    1|1: r -> r + 2i nu rho, x -> x - nu psi + c rho u psi / r,
         psi -> psi + e i nu rho psi / r   with c = e.
    2|1: lb -> lb + 2i nu sigma, lb' -> lb' + 2i nu sigma',
         x -> x - nu psi + c A ub psi + B u psi, psi -> psi + e i nu A psi.
    """
    e = _conv_sign(convention)
    u, nu = coord("u"), _g("nu")
    odd: Dict[str, Grass] = {}
    even: Dict[str, Grass] = {}
    if model == "1|1":
        rho, rinv = _g("rho"), _e(Poly.var("r", -1))
        even["r"] = QI(0, 2) * nu * rho
        for x in coords:
            dx = _g("d" + x)
            even[x] = -(nu * dx) + QI(e) * rho * u * dx * rinv
            odd["d" + x] = dx + QI(0, e) * nu * rho * dx * rinv
        return f.subs(odd=odd, even=even)
    if model == "2|1":
        ub = coord("ub")
        A, B = _A_21(), _B_21()
        even["lb"] = QI(0, 2) * nu * _g("sigma")
        even["lbp"] = QI(0, 2) * nu * _g("sigmap")
        for x in coords:
            dx = _g("d" + x)
            even[x] = -(nu * dx) + QI(e) * A * ub * dx + B * u * dx
            odd["d" + x] = dx + QI(0, e) * nu * A * dx
        out = f.subs(odd=odd, even=even, chain=VOL_CHAIN)
        return out.kill_products(SIGMAS)
    raise ValueError(f"unknown model {model!r}")


def lemma_residual(model: str, f: Grass, coords: Sequence[str],
                   convention: str = "derived") -> Grass:
    diff = (susy_generator_apply(model, f, coords, convention)
            - direct_pullback(model, f, coords, convention))
    return vol_reduce(diff) if model == "2|1" else diff


def random_lemma_input(rng: random.Random, model: str, coords: Sequence[str],
                       kind: str | None = None) -> Grass:
    """Random G- or H-type function, or a product of two of them."""
    kind = kind or rng.choice(["G", "H", "GH"])
    if kind == "GH":
        return (random_lemma_input(rng, model, coords, "G")
                * random_lemma_input(rng, model, coords, "H"))
    if model == "1|1":
        half = [Fraction(k, 2) for k in range(-2, 5)]
        R0 = random_poly(rng, ["r"], n_terms=2, exps=half)
        R1 = random_poly(rng, ["r"], n_terms=2, exps=half)
        lat = _e(R0) + _g("rho") * R1
    else:
        names = ["l", "lb", "lp", "lbp"]
        l0 = random_poly(rng, names, 1, 2) * Poly.var("vol", Fraction(rng.randint(-2, 2), 2))
        l1 = random_poly(rng, names, 1, 2)
        l2 = random_poly(rng, names, 1, 2)
        lat = _e(l0) + _g("sigma") * l1 + _g("sigmap") * l2
    fx = _e(random_poly(rng, coords, 2, 2, complex_coeffs=False))
    return lat * (fx if kind == "G" else d_form(fx, coords))


# --------------------------------------------------------------------------
# supersymmetric sections
@dataclass
class SusySection:
    model: str
    weight: int
    terms: List[Tuple[Poly, Grass]]
    coords: Tuple[str, ...] = ("x1", "x2", "x3")

    def as_grass(self) -> Grass:
        out = Grass()
        for c, form in self.terms:
            out = out + _e(c) * form
        return out


@dataclass
class SusyVerdict:
    is_susy: bool
    witness: str = ""


# E2* as a lattice function in terms of the holomorphic E2 token
E2S_EXPANSION = (Poly.var("E2") - QI(0, 6) * Poly.var("pi", -1) * Poly.var("lb")
                 * Poly.var("l", -1) * Poly.var("vol", -1))


def _token_factor(c: Poly, form_deg: int) -> Tuple[List[Tuple[str, Fraction]], str]:
    """Split a monomial coefficient into tokens; return (tokens, error)."""
    if len(c.terms) != 1:
        return [], "coefficient is not a single monomial"
    (m, _), = c.terms.items()
    tokens, vol_exp = [], Fraction(0)
    for s, e in m:
        if s == "vol":
            vol_exp = e
        elif s in ("l", "lb", "lp", "lbp"):
            return [], f"explicit dependence on {s}"
        else:
            tokens.append((s, e))
    if vol_exp != Fraction(form_deg, 2):
        return [], f"vol exponent {vol_exp} != deg/2 = {Fraction(form_deg, 2)}"
    return tokens, ""


def _form_degrees(form: Grass, coords: Sequence[str]) -> set:
    return form.degree(["d" + x for x in coords])


def susy_solve(model: str, weight: int, cand: SusySection,
               convention: str = "derived") -> SusyVerdict:
    """Decide whether a rho-free (sigma-free) candidate is supersymmetric."""
    coords = cand.coords
    g = cand.as_grass()
    if model == "1|1":
        for c, form in cand.terms:
            for d in _form_degrees(form, coords):
                if (d - weight) % 2:
                    return SusyVerdict(False, f"form degree {d} has wrong parity for l={weight}")
        Qg = Q_11(g, coords, convention)
        if not Qg.is_zero():
            return SusyVerdict(False, _first_failure(Qg, ("rho",)))
        return SusyVerdict(True, "Q g = 0")
    if model == "2|1":
        expanded = g.map_coeffs(lambda p: p.subs("E2s", E2S_EXPANSION))
        Qg = vol_reduce(Q_21(expanded, coords, convention))
        if not Qg.is_zero():
            return SusyVerdict(False, _first_failure(Qg, ("sigma", "sigmap")))
        for c, form in cand.terms:
            degs = _form_degrees(form, coords)
            if len(degs) != 1:
                return SusyVerdict(False, "each term needs a homogeneous form")
            (i,) = degs
            if not d_form(form, coords).is_zero():
                return SusyVerdict(False, "form is not closed (R-invariance)")
            tokens, err = _token_factor(c, i)
            if err:
                return SusyVerdict(False, err)
            w = Fraction(0)
            for name, e in tokens:
                info = token_info(name)
                if not info.holomorphic:
                    return SusyVerdict(False, f"token {name} is not holomorphic")
                if not info.modular:
                    return SusyVerdict(False, f"token {name} is not SL2(Z)-invariant")
                w += info.weight * e
            if 2 * w + i != weight:
                return SusyVerdict(False, f"MF degree {2 * w} + form degree {i} != {weight}")
        return SusyVerdict(True, "Q f = 0, R f = 0")
    raise ValueError(f"unknown model {model!r}")


def _first_failure(a: Grass, odd: Tuple[str, ...]) -> str:
    for k, c in sorted(a.terms.items()):
        tag = [g for g in k if g in odd]
        part = "*".join(tag) if tag else "body"
        return f"generator equation fails in the {part} component: {c} * {'*'.join(k)}"
    return ""


# --------------------------------------------------------------------------
# connection lemma
def _matmul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    return [[sum((A[i][k] * B[k][j] for k in range(m)), Grass()) for j in range(p)]
            for i in range(n)]


def _matvec(A, v):
    return [sum((A[i][k] * v[k] for k in range(len(v))), Grass()) for i in range(len(A))]


@dataclass
class ConnectionResult:
    F: List[List[Grass]]
    residual: List[Grass]

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residual)


def superconnection_expand(A: Sequence[Sequence[Grass]], coords: Sequence[str],
                           v: Sequence[Grass] | None = None) -> ConnectionResult:
    """Conjugate the pulled-back connection d_theta + A + theta dA by the
    Taylor isomorphism h and compare with d_theta + theta F, F = dA + A A."""
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("connection matrix must be square")
    th = _g("theta")
    dA = [[d_form(a, coords) for a in row] for row in A]
    AA = _matmul(A, A)
    F = [[dA[i][j] + AA[i][j] for j in range(n)] for i in range(n)]

    def nabla(w):
        Aw, dAw = _matvec(A, w), _matvec(dA, w)
        return [w[i].dodd("theta") + Aw[i] + th * dAw[i] for i in range(n)]

    def at0(w):
        return [x.filter(lambda k: "theta" not in k) for x in w]

    def h(w):
        return [a + th * b for a, b in zip(at0(w), at0(nabla(w)))]

    def h_inv(w):
        w0 = at0(w)
        w1 = [x.dodd("theta") for x in w]
        Aw0 = _matvec(A, w0)
        return [w0[i] - th * Aw0[i] + th * w1[i] for i in range(n)]

    if v is None:
        rng = random.Random(1)
        v = [random_form(rng, coords, 2, 2) + th * random_form(rng, coords, 2, 2)
             for _ in range(n)]
    lhs = h(nabla(h_inv(v)))
    Fv = _matvec(F, at0(v))
    rhs = [v[i].dodd("theta") + th * Fv[i] for i in range(n)]
    return ConnectionResult(F, [lhs[i] - rhs[i] for i in range(n)])


# --------------------------------------------------------------------------
# concordance homotopy
def _restrict_t(a: Grass, value) -> Grass:
    """Pull back along x -> (x, value): set dt = 0, t = value."""
    return a.without(["dt"]).map_coeffs(lambda p: p.subs("t", value))


def concordance_homotopy(alpha: Grass) -> Grass:
    """Q alpha = int_0^1 i_tau^*(iota_{d/dt} alpha) d tau."""
    inner = contract(alpha, "t").without(["dt"])

    def integrate(p: Poly) -> Poly:
        out = Poly()
        for m, c in p.terms.items():
            d = dict(m)
            e = d.pop("t", Fraction(0))
            if e.denominator != 1 or e < 0:
                raise ValueError("polynomial coefficients in t required")
            out = out + Poly({tuple(sorted(d.items())): c * Fraction(1, int(e) + 1)})
        return out

    return inner.map_coeffs(integrate)


def concordance_residual(alpha: Grass, coords: Sequence[str]) -> Grass:
    """dQ alpha + Q d alpha - (i_1^* - i_0^*) alpha."""
    full = list(coords) + ["t"]
    lhs = d_form(concordance_homotopy(alpha), coords) + concordance_homotopy(d_form(alpha, full))
    return lhs - (_restrict_t(alpha, 1) - _restrict_t(alpha, 0))
