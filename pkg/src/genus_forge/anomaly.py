"""SL2(Z) action on based lattices, the anomaly cocycle and its trivializations.

Basis convention: a matrix (a b; c d) acts on the column (l', l), so

    l' -> a l' + b l,    l -> c l' + d l,    tau -> (a tau + b)/(c tau + d).

With this choice T sends (1, tau) to (1, tau + 1), the action is a left
action, and the holomorphic E2 lattice function satisfies
E2(S x) = E2(x) - 2 pi i/(l l').  The cocycle is alpha_T = 1,
alpha_S = exp(P/(l l')), extended by alpha_AB(x) = alpha_A(B x) alpha_B(x),
where P = -vol^2 p1/(2 pi i) is the SL2-invariant p1 slot.
"""
from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

from .algebra import Grass, Poly, QI, d_form, exp_nilpotent
from .modular import Lattice, token_info, token_value

BASIS_CONVENTION = "(a b; c d) acts on the column (l', l)"

_LETTERS = {
    "S": ((0, -1), (1, 0)),
    "T": ((1, 1), (0, 1)),
    "Si": ((0, 1), (-1, 0)),
    "Ti": ((1, -1), (0, 1)),
}
_ALIASES = {"S": "S", "T": "T", "S^-1": "Si", "T^-1": "Ti", "Si": "Si", "Ti": "Ti",
            "s": "Si", "t": "Ti"}

Mat = Tuple[Tuple[int, int], Tuple[int, int]]


def _mat_mul(A: Mat, B: Mat) -> Mat:
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]))


@dataclass(frozen=True)
class SL2Word:
    """A word in S, T and their inverses; the empty word is the identity.

    Letters are applied right to left: the word "S T" acts by T first.
    """

    letters: Tuple[str, ...] = ()

    def __post_init__(self):
        for a in self.letters:
            if a not in _LETTERS:
                raise ValueError(f"unknown letter {a!r}")

    @classmethod
    def parse(cls, text: str) -> "SL2Word":
        """Space separated letters; ``S^-1`` (or ``s``) is the inverse of S."""
        out = []
        for tok in text.split():
            if tok not in _ALIASES:
                raise ValueError(f"unknown letter {tok!r}")
            out.append(_ALIASES[tok])
        return cls(tuple(out))

    def __add__(self, other: "SL2Word") -> "SL2Word":
        """Concatenation, i.e. the group product."""
        return SL2Word(self.letters + other.letters)

    def __pow__(self, n: int) -> "SL2Word":
        if n < 0:
            return self.inverse() ** (-n)
        return SL2Word(self.letters * n)

    def inverse(self) -> "SL2Word":
        inv = {"S": "Si", "Si": "S", "T": "Ti", "Ti": "T"}
        return SL2Word(tuple(inv[a] for a in reversed(self.letters)))

    def matrix(self) -> Mat:
        M: Mat = ((1, 0), (0, 1))
        for a in self.letters:
            M = _mat_mul(M, _LETTERS[a])
        return M

    def __str__(self):
        names = {"S": "S", "T": "T", "Si": "S^-1", "Ti": "T^-1"}
        return " ".join(names[a] for a in self.letters) or "1"


S = SL2Word(("S",))
T = SL2Word(("T",))


# --------------------------------------------------------------------------
# lattices
def _act_pair(M: Mat, lp, l):
    (a, b), (c, d) = M
    return a * lp + b * l, c * lp + d * l


def sl2_act(word: SL2Word, lat):
    """Apply ``word`` to a Lattice or a super lattice.

    A super lattice is a mapping with keys l, lb, sigma, lp, lbp, sigmap
    (values of any ring type); (l, l'), (lb, lb') and (sigma, sigma') are
    transported by the same integer matrix.
    """
    M = word.matrix()
    if isinstance(lat, Lattice):
        lp, l = _act_pair(M, lat.ellp, lat.ell)
        return Lattice(l, lp)
    out = dict(lat)
    for a, b in (("lp", "l"), ("lbp", "lb"), ("sigmap", "sigma")):
        if a in lat and b in lat:
            out[a], out[b] = _act_pair(M, lat[a], lat[b])
    return out


# --------------------------------------------------------------------------
# the cocycle
LForm = Tuple[int, int]  # (a, b) stands for a l + b l'


def _normalize_lform(L: LForm) -> Tuple[LForm, Fraction]:
    """L = scale * L0 with L0 primitive and first nonzero entry positive."""
    a, b = L
    g = math.gcd(a, b)
    if g == 0:
        raise ZeroDivisionError("zero linear form")
    if a < 0 or (a == 0 and b < 0):
        g = -g
    return (a // g, b // g), Fraction(g)


@dataclass
class CocycleValue:
    """exp(P * f) with f = sum c/(L1 L2) a rational function of (l, l').

    P is nilpotent: P^j = 0 for 4j > cap.
    """

    terms: Dict[Tuple[LForm, LForm], Fraction] = field(default_factory=dict)
    cap: int = 4

    @classmethod
    def from_pair(cls, L1: LForm, L2: LForm, coeff, cap: int) -> "CocycleValue":
        (n1, s1), (n2, s2) = _normalize_lform(L1), _normalize_lform(L2)
        key = tuple(sorted((n1, n2)))
        return cls({key: Fraction(coeff) / (s1 * s2)}, cap)

    def __mul__(self, other: "CocycleValue") -> "CocycleValue":
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, Fraction(0)) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return CocycleValue(out, min(self.cap, other.cap))

    def inverse(self) -> "CocycleValue":
        return CocycleValue({k: -c for k, c in self.terms.items()}, self.cap)

    def __truediv__(self, other: "CocycleValue") -> "CocycleValue":
        return self * other.inverse()

    def exponent_at(self, l, lp):
        """f(l, l') for numeric or Fraction arguments."""
        total = 0
        for ((a1, b1), (a2, b2)), c in self.terms.items():
            total += c / ((a1 * l + b1 * lp) * (a2 * l + b2 * lp))
        return total

    def exponent_is_zero(self) -> bool:
        """Exact test: f * D is a binary form of degree deg D - 2, where D is the
        product of the distinct linear forms; check it at deg D - 1 rational
        points on l = 1."""
        if not self.terms:
            return True
        mult: Dict[LForm, int] = {}
        for (L1, L2) in self.terms:
            local: Dict[LForm, int] = {}
            for L in (L1, L2):
                local[L] = local.get(L, 0) + 1
            for L, e in local.items():
                mult[L] = max(mult.get(L, 0), e)
        deg = sum(mult.values())
        bad = {Fraction(-a, b) for (a, b) in mult if b != 0}
        pts: List[Fraction] = []
        t = 1
        while len(pts) < deg - 1:
            if Fraction(t) not in bad:
                pts.append(Fraction(t))
            t += 1
        return all(self.exponent_at(Fraction(1), x) == 0 for x in pts)

    def is_one(self) -> bool:
        """In the truncated ring exp(P f) = 1 iff f = 0 (the P^1 coefficient)."""
        if self.cap < 4:
            return True
        return self.exponent_is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, CocycleValue):
            return NotImplemented
        return (self / other).is_one()

    def coefficients(self, l: complex, lp: complex, P: complex = 1.0) -> List[complex]:
        """Numeric coefficients of 1, p, p^2, ... for p1 -> p with P = P * p."""
        f = complex(self.exponent_at(l, lp)) * P
        return [f ** j / math.factorial(j) for j in range(self.cap // 4 + 1)]

    def __repr__(self):
        if not self.terms:
            return "1"
        parts = []
        for ((a1, b1), (a2, b2)), c in sorted(self.terms.items()):
            parts.append(f"{c}/(({_lf(a1, b1)})({_lf(a2, b2)}))")
        return "exp(P*(" + " + ".join(parts) + "))"


def _lf(a, b):
    s = []
    if a:
        s.append(f"{a}*l" if a != 1 else "l")
    if b:
        s.append(f"{b}*l'" if b != 1 else "l'")
    return " + ".join(s)


BASE_POINT: Tuple[LForm, LForm] = ((1, 0), (0, 1))  # (l, l')


def _act_point(word: SL2Word, x: Tuple[LForm, LForm]) -> Tuple[LForm, LForm]:
    (la, lb), (pa, pb) = x
    (a, b), (c, d) = word.matrix()
    new_lp = (a * pa + b * la, a * pb + b * lb)
    new_l = (c * pa + d * la, c * pb + d * lb)
    return new_l, new_lp


def _alpha_letter(letter: str, x: Tuple[LForm, LForm], cap: int) -> CocycleValue:
    if letter in ("T", "Ti"):
        return CocycleValue({}, cap)
    l, lp = x
    if letter == "S":
        return CocycleValue.from_pair(l, lp, 1, cap)
    # alpha_{S^-1}(x) = alpha_S(S^-1 x)^-1
    return _alpha_letter("S", _act_point(SL2Word(("Si",)), x), cap).inverse()


def cocycle_eval(word: SL2Word, at: Tuple[LForm, LForm] = BASE_POINT,
                 cap: int = 4) -> CocycleValue:
    """alpha_word at the symbolic point ``at`` (linear forms in l, l').

    The value is a function of the lattice only through ``at``; evaluate it
    on a numeric lattice with ``value.coefficients(lat.ell, lat.ellp, P)``.
    """
    if cap < 4:
        raise ValueError("cap must be at least 4")
    out = CocycleValue({}, cap)
    x = at
    # alpha_{A1...Ak}(x) = prod_j alpha_{Aj}((A_{j+1}...A_k) x)
    for letter in reversed(word.letters):
        out = out * _alpha_letter(letter, x, cap)
        x = _act_point(SL2Word((letter,)), x)
    return out


RELATIONS = {"S^4": S ** 4, "(ST)^3 S^-2": (S + T) ** 3 + S ** -2}


def relation_check(cap: int = 4) -> Dict[str, bool]:
    """Both relation words of SL2(Z) must give the identity matrix and alpha = 1."""
    out = {}
    for name, w in RELATIONS.items():
        if w.matrix() != ((1, 0), (0, 1)):
            raise ArithmeticError(f"{name} is not the identity matrix")
        ok = cocycle_eval(w, cap=cap).is_one()
        if not ok:
            raise ArithmeticError(f"cocycle is not 1 on the relation {name}")
        out[name] = ok
    return out


def cocycle_law_holds(A: SL2Word, B: SL2Word, cap: int = 4) -> bool:
    """alpha_AB(x) == alpha_A(B x) alpha_B(x) exactly."""
    lhs = cocycle_eval(A + B, cap=cap)
    rhs = cocycle_eval(A, _act_point(B, BASE_POINT), cap) * cocycle_eval(B, cap=cap)
    return lhs == rhs


def random_word(rng: random.Random, max_len: int = 6) -> SL2Word:
    return SL2Word(tuple(rng.choice(sorted(_LETTERS)) for _ in range(rng.randint(0, max_len))))


# --------------------------------------------------------------------------
# the Witten section exp(E2 vol^2 p1/(2 pi i)^2)
def e2_lattice(lat: Lattice, q_order: int = 60) -> complex:
    """Holomorphic E2 lattice function, constant term 2 zeta(2)."""
    return token_value("E2", lat, q_order) * math.pi ** 2 / 3


def witten_section_log(lat: Lattice, q_order: int = 60) -> complex:
    """Coefficient of p1 in log of the section."""
    return e2_lattice(lat, q_order) * lat.vol ** 2 / (2j * math.pi) ** 2


def p1_slot(lat: Lattice) -> complex:
    """P per unit p1."""
    return -lat.vol ** 2 / (2j * math.pi)


@dataclass
class EquivarianceReport:
    symbolic_ok: bool
    t_symbolic_ok: bool
    residuals: List[float]
    samples: List[complex]
    tol: float
    convention: str = BASIS_CONVENTION
    failure: str = ""

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def ok(self) -> bool:
        return self.symbolic_ok and self.t_symbolic_ok and self.max_residual < self.tol


def _symbolic_equivariance() -> Tuple[bool, bool]:
    # log sigma = -E2 P/(2 pi i); E2 -> E2 - 2 pi i/(l l') under S, fixed by T
    two_pi_i = Poly.var("pi") * QI(0, 2)
    inv_ll = Poly.var("l", -1) * Poly.var("lp", -1)
    log_sigma = -Poly.var("E2") * Poly.var("P") * Poly.var("pi", -1) * (QI(0, 2) ** -1)
    shifted = log_sigma.subs("E2", Poly.var("E2") - two_pi_i * inv_ll)
    s_ok = (shifted - log_sigma - Poly.var("P") * inv_ll).is_zero()
    t_ok = (log_sigma.subs("E2", Poly.var("E2")) - log_sigma).is_zero()
    return s_ok, t_ok


def sample_lattices(n: int, seed: int = 0) -> List[Lattice]:
    """Lattices with 0.5 <= Im tau <= 3 and a random complex l."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 3.0))
        ell = cmath.rect(rng.uniform(0.5, 1.5), rng.uniform(-math.pi, math.pi))
        out.append(Lattice.from_tau(tau, ell))
    return out


def witten_section_equivariance(lats: Sequence[Lattice] | None = None, cap: int = 4,
                                q_order: int = 60, tol: float = 1e-8,
                                samples: int = 10, seed: int = 0) -> EquivarianceReport:
    """sigma(S x) = alpha_S(x) sigma(x), symbolically and at sample lattices.

    Numerically both sides are compared coefficientwise in p1 up to the cap.
    """
    if cap < 4:
        raise ValueError("cap must be at least 4")
    s_ok, t_ok = _symbolic_equivariance()
    lats = list(lats) if lats is not None else sample_lattices(samples, seed)
    alpha = cocycle_eval(S, cap=cap)
    residuals, failure = [], ""
    for lat in lats:
        Sx = sl2_act(S, lat)
        a = witten_section_log(Sx, q_order)
        b = witten_section_log(lat, q_order)
        lhs = [a ** j / math.factorial(j) for j in range(cap // 4 + 1)]
        sig = [b ** j / math.factorial(j) for j in range(cap // 4 + 1)]
        al = alpha.coefficients(lat.ell, lat.ellp, p1_slot(lat))
        rhs = [sum(al[i] * sig[j - i] for i in range(j + 1)) for j in range(len(sig))]
        res = max(abs(u - v) for u, v in zip(lhs, rhs))
        residuals.append(res)
        if res >= tol and not failure:
            failure = f"residual {res:.3e} at tau={lat.tau}, l={lat.ell}"
    return EquivarianceReport(s_ok, t_ok, residuals, [lat.tau for lat in lats], tol,
                              failure=failure)


# --------------------------------------------------------------------------
# string structures
def _form_coords(*forms: Grass) -> List[str]:
    names = set()
    for f in forms:
        for g in f.generators():
            names.add(g[1:])
        for c in f.terms.values():
            names |= c.symbols()
    return sorted(names)


SECTION_COEFF = Poly.var("E2") * Poly.var("vol", 2) * Poly.var("pi", -2) * Fraction(-1, 4)


def string_trivialization(H: Grass, p1: Grass, t=None, lat: Lattice | None = None,
                          q_order: int = 60):
    """exp(E2 vol^2 d(tH)/(2 pi i)^2) on R^m x R_t.

    Refuses H with dH != p1.  With ``t`` given, restricts to that slice
    (dt = 0).  Without ``lat`` the coefficients are symbolic in E2, vol, pi;
    with ``lat`` they are evaluated to complex numbers (a dict from
    odd monomials to complex-coefficient Polys).
    """
    coords = [c for c in _form_coords(H, p1) if c != "t"]
    dH = d_form(H, coords)
    if not (dH - p1).is_zero():
        raise ValueError("dH differs from the declared p1 form: no rational string structure")
    tH = H * Poly.var("t")
    exponent = d_form(tH, coords + ["t"]) * SECTION_COEFF
    section = exp_nilpotent(exponent)
    if t is not None:
        section = section.without(["dt"]).map_coeffs(lambda p: p.subs("t", t))
    if lat is None:
        return section
    env = {"E2": e2_lattice(lat, q_order), "vol": lat.vol, "pi": math.pi}
    return {k: _eval_partial(c, env) for k, c in section.terms.items()}


def _eval_partial(p: Poly, env: Mapping[str, complex]) -> Dict[Tuple, complex]:
    """Evaluate the listed symbols; return {remaining monomial: complex}."""
    out: Dict[Tuple, complex] = {}
    for m, c in p.terms.items():
        val = complex(c)
        rest = []
        for s, e in m:
            if s in env:
                val *= complex(env[s]) ** float(e)
            else:
                rest.append((s, e))
        key = tuple(rest)
        out[key] = out.get(key, 0) + val
    return out


@dataclass
class EndpointReport:
    at_zero_is_one: bool
    at_one_is_anomaly_section: bool
    cocycle_zero_trivial: bool
    cocycle_one_is_p1: bool

    @property
    def ok(self) -> bool:
        return (self.at_zero_is_one and self.at_one_is_anomaly_section
                and self.cocycle_zero_trivial and self.cocycle_one_is_p1)


def string_trivialization_endpoints(H: Grass, p1: Grass) -> EndpointReport:
    """t = 0 gives 1 and the trivial cocycle; t = 1 gives the section
    exp(E2 vol^2 p1/(2 pi i)^2) of the anomaly line and the cocycle exponent p1."""
    s0 = string_trivialization(H, p1, t=0)
    s1 = string_trivialization(H, p1, t=1)
    coords = [c for c in _form_coords(H, p1) if c != "t"]
    dtH = d_form(H * Poly.var("t"), coords + ["t"])
    restrict = lambda a, v: a.without(["dt"]).map_coeffs(lambda p: p.subs("t", v))
    return EndpointReport(
        at_zero_is_one=(s0 - Grass.even(1)).is_zero(),
        at_one_is_anomaly_section=(s1 - exp_nilpotent(p1 * SECTION_COEFF)).is_zero(),
        cocycle_zero_trivial=restrict(dtH, 0).is_zero(),
        cocycle_one_is_p1=(restrict(dtH, 1) - p1).is_zero(),
    )


@dataclass
class StringRewrite:
    holomorphic: Poly
    exact_correction: Poly
    ok: bool


def string_rewrite() -> StringRewrite:
    """k = 1 exponent of Wit*: -(1/24) E2s p1 = -(1/24) E2 p1 + (1/24)(E2 - E2s) dH.

    With dH = p1 the correction is d of (1/24)(E2 - E2s) H, an exact form.
    """
    c = Fraction(-1, 24)
    e2, e2s, p1, dH = (Poly.var(s) for s in ("E2", "E2s", "p1", "dH"))
    original = e2s * p1 * c
    holo = e2 * p1 * c
    corr = (e2 - e2s) * dH * (-c)
    ok = ((holo + corr).subs("dH", p1) - original).is_zero()
    return StringRewrite(holo, corr, ok)


# --------------------------------------------------------------------------
# uniqueness of supersymmetric trivializations
@dataclass
class UniquenessReport:
    ok: bool
    phase: complex | None = None
    reason: str = ""


def _unit_constant(cand) -> Tuple[complex | None, str]:
    """A unit-norm susy function must be a constant of modulus 1."""
    total = 0j
    for c, form in cand.terms:
        if any(len(k) for k in form.terms):
            return None, "has positive form degree"
        for k, fc in form.terms.items():
            if fc.symbols():
                return None, "form part is not constant"
            fval = complex(fc.constant())
        if isinstance(c, Poly):
            syms = c.symbols()
            if syms:
                for s in sorted(syms):
                    try:
                        info = token_info(s)
                    except KeyError:
                        return None, f"depends on {s}"
                    if not info.holomorphic:
                        return None, f"{s} is not holomorphic"
                return None, "nonconstant holomorphic coefficient cannot have constant norm"
            cval = complex(c.constant())
        else:
            cval = complex(c)
        total += cval * fval
    return total, ""


def susy_trivialization_uniqueness(c1, c2, samples: Sequence[Lattice] | None = None,
                                   tol: float = 1e-12) -> UniquenessReport:
    """Two unit-norm susy trivializations differ by a constant phase.

    Candidates are SusySection values whose coefficients are Polys or complex
    constants.  Their ratio is evaluated at every sample and must be one
    constant of modulus 1.
    """
    v1, why1 = _unit_constant(c1)
    if v1 is None:
        return UniquenessReport(False, reason=f"first candidate: {why1}")
    v2, why2 = _unit_constant(c2)
    if v2 is None:
        return UniquenessReport(False, reason=f"second candidate: {why2}")
    for v, tag in ((v1, "first"), (v2, "second")):
        if abs(abs(v) - 1) > tol:
            return UniquenessReport(False, reason=f"{tag} candidate has norm {abs(v)}")
    samples = list(samples) if samples is not None else sample_lattices(5)
    ratios = [v1 / v2 for _ in samples]
    if any(abs(r - ratios[0]) > tol for r in ratios):
        return UniquenessReport(False, reason="ratio varies across samples")
    return UniquenessReport(True, phase=ratios[0])
