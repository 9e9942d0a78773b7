"""Multiplicative classes, the A-hat and Witten series, genus evaluation.

Pontryagin polynomials are stored over partitions: the key ``(2, 1)`` is the
monomial p2*p1 of form degree 12.  Internally everything starts from power
sums ``s_k = sum_j x_j^(2k)`` of the Chern roots, one root per +/- pair, and
Newton's identities convert them to the p_k.  With this choice the
Pontryagin character is ``ph_k = s_k/(2k)!``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Tuple

import numpy as np

from .algebra import Grass, Poly, QI
from .modular import PiGraded, eisenstein_q, zeta_even, zeta_ratio
from .series import BivarSeries, TruncSeries, sinh_over_z

Partition = Tuple[int, ...]


def _is_zero(c) -> bool:
    if isinstance(c, TruncSeries):
        return not c.coeffs
    if isinstance(c, Poly):
        return c.is_zero()
    return c == 0


class PontPoly:
    """Polynomial in p_1, p_2, ... truncated at a form degree."""

    __slots__ = ("terms", "cap")

    def __init__(self, terms: Mapping[Partition, object] | None = None,
                 cap: int | None = None):
        self.cap = cap
        self.terms: Dict[Partition, object] = {}
        for part, c in (terms or {}).items():
            part = tuple(sorted(part, reverse=True))
            if cap is not None and 4 * sum(part) > cap:
                continue
            if not _is_zero(c):
                self.terms[part] = c

    @classmethod
    def const(cls, c, cap=None):
        return cls({(): c}, cap)

    @classmethod
    def gen(cls, k: int, cap=None, c=Fraction(1)):
        return cls({(k,): c}, cap)

    def _cap(self, other):
        caps = [c for c in (self.cap, getattr(other, "cap", None)) if c is not None]
        return min(caps) if caps else None

    def __add__(self, o):
        if not isinstance(o, PontPoly):
            o = PontPoly.const(o, self.cap)
        out = dict(self.terms)
        for k, c in o.terms.items():
            out[k] = out[k] + c if k in out else c
        return PontPoly(out, self._cap(o))

    __radd__ = __add__

    def __neg__(self):
        return PontPoly({k: -c for k, c in self.terms.items()}, self.cap)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if not isinstance(o, PontPoly):
            return PontPoly({k: c * o for k, c in self.terms.items()}, self.cap)
        cap = self._cap(o)
        out: Dict[Partition, object] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in o.terms.items():
                k = tuple(sorted(k1 + k2, reverse=True))
                if cap is not None and 4 * sum(k) > cap:
                    continue
                p = c1 * c2
                out[k] = out[k] + p if k in out else p
        return PontPoly(out, cap)

    def __rmul__(self, o):
        return PontPoly({k: o * c for k, c in self.terms.items()}, self.cap)

    def __eq__(self, o):
        if not isinstance(o, PontPoly):
            o = PontPoly.const(o)
        keys = set(self.terms) | set(o.terms)
        zero = Fraction(0)
        return all(self.terms.get(k, zero) == o.terms.get(k, zero) for k in keys)

    def component(self, degree: int) -> "PontPoly":
        return PontPoly({k: c for k, c in self.terms.items() if 4 * sum(k) == degree},
                        self.cap)

    def map_coeffs(self, f) -> "PontPoly":
        return PontPoly({k: f(c) for k, c in self.terms.items()}, self.cap)

    def constant(self):
        return self.terms.get((), Fraction(0))

    def exp(self) -> "PontPoly":
        """exp of a polynomial without constant term, truncated at ``cap``."""
        if () in self.terms:
            raise ValueError("exp needs zero constant term")
        if self.cap is None:
            raise ValueError("exp needs a degree cap")
        out = PontPoly.const(Fraction(1), self.cap)
        term = PontPoly.const(Fraction(1), self.cap)
        for j in range(1, self.cap // 4 + 1):
            term = term * self * Fraction(1, j)
            out = out + term
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0])):
            mono = "*".join(f"p{i}" for i in k)
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts)


@lru_cache(maxsize=None)
def _power_sum_in_p(k: int) -> Dict[Partition, Fraction]:
    """Newton: s_k = sum_{i<k} (-1)^(i-1) p_i s_{k-i} + (-1)^(k-1) k p_k."""
    out: Dict[Partition, Fraction] = {(k,): Fraction((-1) ** (k - 1) * k)}
    for i in range(1, k):
        for part, c in _power_sum_in_p(k - i).items():
            key = tuple(sorted(part + (i,), reverse=True))
            out[key] = out.get(key, 0) + (-1) ** (i - 1) * c
    return {p: c for p, c in out.items() if c}


def power_sum(k: int, cap: int | None = None) -> PontPoly:
    return PontPoly(dict(_power_sum_in_p(k)), cap)


def ph(k: int, cap: int | None = None) -> PontPoly:
    """Pontryagin character component: s_k/(2k)!."""
    return power_sum(k, cap) * Fraction(1, math.factorial(2 * k))


# --------------------------------------------------------------------------
@dataclass
class CharSeries:
    """exp(sum_k a[k] z^(2k)); coefficients in any commutative ring."""

    a: Dict[int, object]
    z_order: int
    name: str = ""
    product_form: TruncSeries | None = None

    def exponent_series(self) -> TruncSeries:
        return TruncSeries({2 * k: c for k, c in self.a.items()}, self.z_order, var="z")

    def series(self) -> TruncSeries:
        return self.exponent_series().exp()


def multiplicative_class(series: CharSeries, dim: int) -> PontPoly:
    """prod_j Q(x_j) = exp(sum_k a_2k s_k) rewritten in the p_k."""
    if dim < 0:
        raise ValueError("dim must be nonnegative")
    cap = dim
    x = PontPoly({}, cap)
    for k, c in sorted(series.a.items()):
        if 4 * k > cap:
            break
        x = x + power_sum(k, cap) * c
    return x.exp()


def ahat_series(z_order: int) -> CharSeries:
    """(z/2)/sinh(z/2) as exp(sum 2 zeta(2k) z^2k / (2k (2 pi i)^2k)).

    The exponent coefficients are computed in the pi-graded ring and the
    product form by long division; both must agree exactly.
    """
    if z_order < 2:
        raise ValueError("z_order must be at least 2")
    a = {}
    for k in range(1, (z_order + 1) // 2):
        two_pi_i = PiGraded({2 * k: Fraction((-1) ** k * 2 ** (2 * k))})
        ratio = (zeta_even(k) * 2) / two_pi_i
        if not ratio.is_homogeneous() or set(ratio.terms) - {0}:
            raise AssertionError("pi powers failed to cancel")
        a[k] = ratio.rational_part(0) / (2 * k)
    half = TruncSeries({1: Fraction(1, 2)}, z_order, var="z")
    product = sinh_over_z(z_order).inverse().compose(half)
    cs = CharSeries(a, z_order, "ahat", product)
    if cs.series() != product:
        raise AssertionError("A-hat product and exponential forms disagree")
    return cs


def witten_series(variant: str, z_order: int, q_order: int,
                  tokens: bool = False) -> CharSeries:
    """Witten characteristic series.

    ``holo``: a_2k = E_2k / (2k (2 pi i)^2k) for all k >= 1.
    ``nonholo``: the k = 1 term uses E2*.
    ``string``: the k = 1 term is dropped.

    With ``tokens=False`` coefficients are exact q-series (holomorphic
    variants only).  With ``tokens=True`` they are ``Poly`` multiples of the
    normalized tokens E2, E2s, E4, ...
    """
    if z_order < 2 or q_order < 1:
        raise ValueError("orders too small")
    if variant not in ("holo", "nonholo", "string"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "nonholo" and not tokens:
        raise ValueError("E2* has no holomorphic q-expansion; use tokens=True")
    a = {}
    for k in range(1, (z_order + 1) // 2):
        if k == 1 and variant == "string":
            continue
        c = zeta_ratio(k) / (2 * k)
        if tokens:
            name = "E2s" if (k == 1 and variant == "nonholo") else f"E{2 * k}"
            a[k] = Poly.var(name) * c
        else:
            a[k] = eisenstein_q(k, q_order, "normalized") * c
    return CharSeries(a, z_order, f"witten-{variant}")


def _exp_cz(c: Fraction, z_order: int, q_order: int, sign: int, n: int) -> BivarSeries:
    """1 - q^n e^(sign c z) as a bivariate series."""
    coeffs = {0: TruncSeries({0: 1, n: -1}, q_order)}
    for j in range(1, z_order):
        coeffs[j] = TruncSeries({n: -Fraction(sign * c) ** j / math.factorial(j)}, q_order)
    return BivarSeries(coeffs, z_order, q_order)


def zagier_product(z_order: int, q_order: int, c: Fraction) -> BivarSeries:
    """P/z where P = (e^(z/2) - e^(-z/2)) prod (1-q^n e^(cz))(1-q^n e^(-cz))/(1-q^n)^2."""
    pref = {2 * k: TruncSeries({0: Fraction(1, 2 ** (2 * k) * math.factorial(2 * k + 1))}, q_order)
            for k in range((z_order + 1) // 2)}
    result = BivarSeries(pref, z_order, q_order)
    for n in range(1, q_order):
        inv = (TruncSeries({0: 1, n: -1}, q_order) ** 2).inverse()
        result = result * _exp_cz(c, z_order, q_order, 1, n)
        result = result * _exp_cz(c, z_order, q_order, -1, n)
        result = result * BivarSeries({0: inv}, z_order, q_order)
    return result


@dataclass
class ZagierReport:
    max_discrepancy: Fraction
    resolved_convention: str | None
    table: Dict[str, Fraction] = field(default_factory=dict)
    first_mismatch: Dict[str, tuple] = field(default_factory=dict)


def zagier_identity_check(z_order: int = 8, q_order: int = 10) -> ZagierReport:
    """Compare both sides of the Witten product identity exactly.

    ``z_order`` and ``q_order`` are inclusive degrees.  The product side is
    expanded with exponentials e^(+-z/2) and e^(+-z), and the
    log of P/z is compared with +-(sum_k E_2k z^2k / (2k (2 pi i)^2k)).
    """
    if z_order < 4 or q_order < 4:
        raise ValueError("orders must be at least 4")
    zo, qo = z_order + 1, q_order + 1
    w = witten_series("holo", zo, qo)
    exp_side = BivarSeries({2 * k: c for k, c in w.a.items()}, zo, qo)
    table, first = {}, {}
    for label, c in (("e^(+-z/2)", Fraction(1, 2)), ("e^(+-z)", Fraction(1))):
        lp = zagier_product(zo, qo, c).log()
        for sign_label, sign in (("exp(+sum)=P/z", 1), ("exp(-sum)=P/z", -1)):
            diff = lp - exp_side * Fraction(sign)
            worst = Fraction(0)
            for zk, qs in diff.items():
                for qk, v in qs.items():
                    if abs(v) > worst:
                        worst = abs(v)
                    key = f"{label}, {sign_label}"
                    if key not in first:
                        first[key] = (zk, qk, v)
            table[f"{label}, {sign_label}"] = worst
    resolved = [k for k, v in table.items() if v == 0]
    best = resolved[0] if resolved else None
    if best is None:
        raise AssertionError(f"no convention matches: first mismatches {first}")
    return ZagierReport(Fraction(0), best, table, first)


# --------------------------------------------------------------------------
@dataclass
class ManifoldData:
    name: str
    dim: int
    pontryagin_numbers: Dict[Partition, Fraction]
    rational_string: bool = False

    def __post_init__(self):
        for part in self.pontryagin_numbers:
            if 4 * sum(part) != self.dim:
                raise ValueError(f"partition {part} does not match dim {self.dim}")
        if self.rational_string and self.dim == 4:
            if self.pontryagin_numbers.get((1,), 0) != 0:
                raise ValueError("a rational string 4-manifold has p1-number 0")

    @classmethod
    def from_dict(cls, d: Mapping) -> "ManifoldData":
        nums = {parse_monomial(k): Fraction(v) for k, v in d.get("pontryagin_numbers", {}).items()}
        return cls(d.get("name", ""), int(d["dim"]), nums, bool(d.get("rational_string", False)))

    @classmethod
    def from_json(cls, text: str) -> "ManifoldData":
        return cls.from_dict(json.loads(text))


def parse_monomial(s: str) -> Partition:
    """'p1', 'p1^2', 'p1*p2', 'p2p1' -> partition."""
    parts: List[int] = []
    for idx, exp in re.findall(r"p(\d+)(?:\^(\d+))?", s.replace(" ", "")):
        parts += [int(idx)] * int(exp or 1)
    if not parts and s.strip() not in ("", "1"):
        raise ValueError(f"cannot parse Pontryagin monomial {s!r}")
    return tuple(sorted(parts, reverse=True))


def genus_evaluate(cls_poly: PontPoly, m: ManifoldData):
    """Pair the top-degree part of a class with the Pontryagin numbers."""
    if m.dim == 0:
        return cls_poly.constant()
    total = None
    for part, c in cls_poly.terms.items():
        if 4 * sum(part) != m.dim:
            continue
        if part not in m.pontryagin_numbers:
            name = "*".join(f"p{i}" for i in part)
            raise KeyError(f"missing Pontryagin number {name} for {m.name or 'manifold'}")
        t = c * m.pontryagin_numbers[part]
        total = t if total is None else total + t
    return Fraction(0) if total is None else total


def genus_class(weight: str, dim: int, q_order: int = 10) -> PontPoly:
    z = dim // 2 + 2
    if weight == "ahat":
        return multiplicative_class(ahat_series(z), dim)
    if weight == "witten":
        return multiplicative_class(witten_series("holo", z, q_order), dim)
    if weight == "witten-string":
        return multiplicative_class(witten_series("string", z, q_order), dim)
    if weight == "witten-star":
        return multiplicative_class(witten_series("nonholo", z, q_order, tokens=True), dim)
    raise ValueError(f"unknown class {weight!r}")


def index_pushforward(x: PontPoly, m: ManifoldData, weight: str = "ahat",
                      q_order: int = 10):
    if weight == "witten_string":
        if not m.rational_string:
            raise ValueError("the string-Witten volume form needs a rational string structure")
        cls_poly = genus_class("witten-string", m.dim, q_order)
    elif weight == "ahat":
        cls_poly = genus_class("ahat", m.dim)
    else:
        raise ValueError(f"unknown weight {weight!r}")
    if not isinstance(x, PontPoly):
        x = PontPoly.const(x)
    return genus_evaluate(x * cls_poly, m)


def ko_degree_filter(graded: Iterable[Tuple[int, object]], l: int) -> List[Tuple[int, object]]:
    return [(d, c) for d, c in graded if (d - l) % 4 == 0]


# --------------------------------------------------------------------------
@dataclass
class ChernSection:
    raw: object          # Tr exp(-i r F)
    normalized: object   # Tr exp(F / 2 pi i)


def chern_character_section(F, r) -> ChernSection:
    """Tr exp(-i r F) and its image r^(k/2) (x) a -> a/(2 pi)^(k/2).

    ``F`` is either a real skew numpy matrix with numeric ``r``, or a square
    list of 2-form ``Grass`` entries with ``r`` a symbol name.  In the formal
    case pi appears as the symbol ``pi``.
    """
    if isinstance(F, np.ndarray):
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise ValueError("F must be square")
        if not np.allclose(F, -F.T):
            raise ValueError("F must be skew")
        ev = np.linalg.eigvals(F)
        raw = complex(np.sum(np.exp(-1j * r * ev)))
        norm = complex(np.sum(np.exp(ev / (2j * math.pi))))
        return ChernSection(raw, norm)
    n = len(F)
    if any(len(row) != n for row in F):
        raise ValueError("F must be square")
    rsym = Poly.var(r) if isinstance(r, str) else Poly.coerce(r)
    raw, norm = Grass.even(n), Grass.even(n)
    power = [[Grass.even(1 if i == j else 0) for j in range(n)] for i in range(n)]
    j = 0
    while True:
        j += 1
        power = matmul(power, F)
        tr = Grass()
        for i in range(n):
            tr = tr + power[i][i]
        if tr.is_zero() and all(x.is_zero() for row in power for x in row):
            break
        fact = Fraction(1, math.factorial(j))
        raw = raw + tr * (rsym ** j * (QI(0, -1) ** j) * fact)
        norm = norm + tr * (Poly.var("pi", -j) * (QI(0, -1) ** j) * Fraction(1, 2 ** j) * fact)
    return ChernSection(raw, norm)


def matmul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = Grass()
            for k in range(m):
                acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out
