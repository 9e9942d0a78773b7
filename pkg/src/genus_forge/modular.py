"""Bernoulli numbers, Eisenstein series, E2*, Dedekind eta and lattices.

Two normalizations of the Eisenstein series are used.  The lattice-sum
one (convention name ``"paper"``) is ``sum' (m l + n l')^(-2k)``, whose q-expansion
has constant term ``2 zeta(2k)``; the *normalized* one divides that factor
out so the constant term is 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List

import numpy as np

from .series import SeriesError, TruncSeries


# --------------------------------------------------------------------------
# pi-graded rationals
class PiGraded:
    """Finite sum ``sum_j c_j pi^j`` with rational ``c_j``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[int, Fraction] | None = None):
        self.terms = {int(k): Fraction(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def coerce(cls, x) -> "PiGraded":
        if isinstance(x, PiGraded):
            return x
        return cls({0: Fraction(x)})

    def __add__(self, other):
        other = PiGraded.coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return PiGraded(out)

    __radd__ = __add__

    def __neg__(self):
        return PiGraded({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-PiGraded.coerce(other))

    def __rsub__(self, other):
        return PiGraded.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, PiGraded):
            out: Dict[int, Fraction] = {}
            for a, x in self.terms.items():
                for b, y in other.terms.items():
                    out[a + b] = out.get(a + b, 0) + x * y
            return PiGraded(out)
        if isinstance(other, (int, Fraction)):
            return PiGraded({k: v * other for k, v in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return PiGraded({k: v / other for k, v in self.terms.items()})
        if isinstance(other, PiGraded) and len(other.terms) == 1:
            (e, c), = other.terms.items()
            return PiGraded({k - e: v / c for k, v in self.terms.items()})
        return NotImplemented

    def __eq__(self, other):
        try:
            other = PiGraded.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def is_homogeneous(self) -> bool:
        return len(self.terms) <= 1

    def rational_part(self, power: int) -> Fraction:
        return self.terms.get(power, Fraction(0))

    def __float__(self):
        return float(sum(float(v) * math.pi ** k for k, v in self.terms.items()))

    def __complex__(self):
        return complex(float(self))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({v})*pi^{k}" if k else f"({v})"
                          for k, v in sorted(self.terms.items()))


# --------------------------------------------------------------------------
# Bernoulli numbers and zeta values
@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple:
    table = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        binom = 1
        for k in range(m):
            acc += binom * table[k]
            binom = binom * (m + 1 - k) // (k + 1)
        table.append(-acc / (m + 1))
    return tuple(table)


def bernoulli(n: int) -> Fraction:
    """Bernoulli number with B_1 = -1/2."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _bernoulli_table(max(n, 16))[n]


def zeta_even(k: int) -> PiGraded:
    """zeta(2k) as a rational multiple of pi^(2k)."""
    if k < 1:
        raise ValueError("k must be positive")
    c = (-1) ** (k + 1) * bernoulli(2 * k) * 2 ** (2 * k) / (2 * math.factorial(2 * k))
    return PiGraded({2 * k: c})


def zeta_ratio(k: int) -> Fraction:
    """The rational number 2 zeta(2k) / (2 pi i)^(2k) = -B_2k / (2k)!."""
    return -bernoulli(2 * k) / math.factorial(2 * k)


@lru_cache(maxsize=None)
def divisor_sigma_table(power: int, n: int) -> tuple:
    sig = [0] * n
    for d in range(1, n):
        dp = d ** power
        for m in range(d, n, d):
            sig[m] += dp
    return tuple(sig)


# --------------------------------------------------------------------------
# q-expansions
def eisenstein_q(k: int, order: int, convention: str = "paper") -> TruncSeries:
    """q-expansion of E_2k up to (excluding) q^order."""
    if order < 1:
        raise SeriesError("order must be at least 1")
    if k < 1:
        raise ValueError("k must be at least 1")
    b = bernoulli(2 * k)
    factor = Fraction(-4 * k) / b
    sig = divisor_sigma_table(2 * k - 1, order)
    coeffs = {0: Fraction(1)}
    for n in range(1, order):
        coeffs[n] = factor * sig[n]
    series = TruncSeries(coeffs, order)
    if convention == "normalized":
        return series
    if convention == "paper":
        z = zeta_even(k) * 2
        return series.map_coeffs(lambda c: z * c)
    raise ValueError(f"unknown convention {convention!r}")


def eta_product(order: int) -> TruncSeries:
    """prod_{n>=1} (1 - q^n) truncated below q^order, integer coefficients."""
    coeffs = [0] * order
    coeffs[0] = 1
    for n in range(1, order):
        for m in range(order - 1, n - 1, -1):
            coeffs[m] -= coeffs[m - n]
    return TruncSeries({i: Fraction(c) for i, c in enumerate(coeffs)}, order)


def dedekind_eta(order: int) -> TruncSeries:
    """q^(1/24) prod (1-q^n) as a series with exponent unit 1/24.

    ``order`` bounds the product; the result is exact below q^(order + 1/24).
    """
    if order < 1:
        raise SeriesError("order must be at least 1")
    prod = eta_product(order)
    return TruncSeries({24 * k + 1: c for k, c in prod.coeffs.items()},
                       24 * order + 1, unit=Fraction(1, 24))


def _eval_q(coeffs: List[float], q: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * q + c
    return acc


def _check_tau(tau: complex) -> None:
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")


def e2k_numeric(k: int, tau: complex, order: int = 60,
                convention: str = "paper") -> complex:
    """E_2k(tau) summed from its q-expansion."""
    _check_tau(tau)
    s = eisenstein_q(k, order, "normalized")
    q = cmath.exp(2j * math.pi * tau)
    val = _eval_q([float(s[n]) for n in range(order)], q)
    if convention == "paper":
        val *= float(zeta_even(k) * 2)
    return val


def eta_numeric(tau: complex, order: int = 200) -> complex:
    """eta(tau) from the q^(1/24) prod(1 - q^n) expansion."""
    _check_tau(tau)
    prod = eta_product(order)
    q = cmath.exp(2j * math.pi * tau)
    val = _eval_q([float(prod[n]) for n in range(order)], q)
    return cmath.exp(2j * math.pi * tau / 24) * val


def e2_transform_residual(tau: complex, q_order: int = 60) -> float:
    """|E2(-1/tau) - tau^2 E2(tau) + 2 pi i tau| with lattice-sum E2."""
    _check_tau(tau)
    lhs = e2k_numeric(1, -1 / tau, q_order)
    rhs = tau * tau * e2k_numeric(1, tau, q_order) - 2j * math.pi * tau
    return abs(lhs - rhs)


# --------------------------------------------------------------------------
# lattices
@dataclass(frozen=True)
class Lattice:
    """Based lattice (l, l') with Im(l'/l) > 0."""

    ell: complex
    ellp: complex

    def __post_init__(self):
        if self.ell == 0:
            raise ValueError("ell must be nonzero")
        if (self.ellp / self.ell).imag <= 0:
            raise ValueError("need Im(ell'/ell) > 0")

    @classmethod
    def from_tau(cls, tau: complex, ell: complex = 1) -> "Lattice":
        return cls(complex(ell), complex(ell) * complex(tau))

    @property
    def tau(self) -> complex:
        return self.ellp / self.ell

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)

    @property
    def vol(self) -> complex:
        """conj(l) l' - conj(l') l, purely imaginary with positive imaginary part."""
        return self.ell.conjugate() * self.ellp - self.ellp.conjugate() * self.ell

    def scaled(self, c: complex) -> "Lattice":
        return Lattice(self.ell * c, self.ellp * c)


def eisenstein_lattice(k: int, lat: Lattice, cutoff: int) -> complex:
    """sum over 0 < max(|m|,|n|) <= cutoff of (m l + n l')^(-2k), shell by shell."""
    if k < 2:
        raise ValueError("the k=1 lattice sum is only conditionally convergent")
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    l, lp = complex(lat.ell), complex(lat.ellp)
    total = 0j
    p = -2 * k
    for s in range(1, cutoff + 1):
        # half shell; the summand is even in (m, n)
        r = np.arange(-s + 1, s + 1)
        m = np.concatenate([np.full(2 * s, s), r - 1])
        n = np.concatenate([r, np.full(2 * s, s)])
        w = m * l + n * lp
        total += 2 * np.sum(w ** p)
    return complex(total)


def e2_numeric(lat: Lattice, q_order: int = 60) -> complex:
    """Holomorphic lattice-sum E2 extended by weight: l^-2 E2(tau)."""
    return lat.ell ** -2 * e2k_numeric(1, lat.tau, q_order)


def e2_star(lat: Lattice, q_order: int = 60) -> complex:
    """E2* = E2 - pi/Im(tau), extended to general l by weight 2."""
    if q_order < 10:
        raise ValueError("q_order must be at least 10")
    tau = lat.tau
    return lat.ell ** -2 * (e2k_numeric(1, tau, q_order) - math.pi / tau.imag)


def e2k_lattice_numeric(k: int, lat: Lattice, q_order: int = 60) -> complex:
    """Lattice-sum E_2k at a lattice via q-series and weight scaling."""
    return lat.ell ** (-2 * k) * e2k_numeric(k, lat.tau, q_order)


# --------------------------------------------------------------------------
# modular tokens
@dataclass(frozen=True)
class TokenInfo:
    name: str
    weight: int          # classical weight: value(c l, c l') = c^-weight value(l, l')
    holomorphic: bool
    modular: bool


def _delta(tau, order):
    return eta_numeric(tau, order) ** 24


TOKENS: Dict[str, TokenInfo] = {
    "E2": TokenInfo("E2", 2, True, False),
    "E2s": TokenInfo("E2s", 2, False, True),
    "Delta": TokenInfo("Delta", 12, True, True),
    "EtaAbs4": TokenInfo("EtaAbs4", 1, False, True),
}
for _k in range(2, 13):
    TOKENS[f"E{2 * _k}"] = TokenInfo(f"E{2 * _k}", 2 * _k, True, True)


def token_info(name: str) -> TokenInfo:
    if name in TOKENS:
        return TOKENS[name]
    if name.startswith("c") and name[1:] in TOKENS:
        # a conjugate is never holomorphic
        base = TOKENS[name[1:]]
        return TokenInfo(name, base.weight, False, base.modular)
    raise KeyError(f"unknown modular token {name!r}")


def token_value(name: str, lat: Lattice, q_order: int = 60) -> complex:
    """Numeric value of a normalized token (constant q-term 1).

    A leading ``c`` denotes complex conjugation, e.g. ``cE2s``.
    """
    if name.startswith("c") and name[1:] in TOKENS:
        return token_value(name[1:], lat, q_order).conjugate()
    tau = lat.tau
    if name == "E2":
        return lat.ell ** -2 * e2k_numeric(1, tau, q_order, "normalized")
    if name == "E2s":
        return lat.ell ** -2 * (e2k_numeric(1, tau, q_order, "normalized")
                                - 3 / (math.pi * tau.imag))
    if name == "Delta":
        return lat.ell ** -12 * _delta(tau, max(q_order, 60))
    if name == "EtaAbs4":
        return abs(lat.ell) ** -2 * abs(eta_numeric(tau, max(q_order, 60))) ** 4
    if name.startswith("E"):
        k = int(name[1:]) // 2
        return lat.ell ** (-2 * k) * e2k_numeric(k, tau, q_order, "normalized")
    raise KeyError(name)


def lattice_factor(name: str) -> PiGraded:
    """Scalar turning a normalized Eisenstein token into the lattice-sum one."""
    info = token_info(name)
    return zeta_even(info.weight // 2) * 2
