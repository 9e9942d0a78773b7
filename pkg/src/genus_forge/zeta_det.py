"""Zeta-regularized super determinants of the linearized sigma-model
operators on super circles and super tori.

Numeric curvature is a real skew matrix; formal curvature is a square matrix
of 2-forms (``Grass`` elements in ``dx1, dx2, ...``).  Formal results are
given in the normalized form, where a term r^(k/2) (x) alpha (resp.
vol^(k/2) (x) alpha) is sent to alpha/(2 pi)^(k/2); pi appears as the symbol
``pi``.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List

import numpy as np

from .algebra import Grass, Poly, exp_nilpotent
from .charclass import PontPoly, ahat_series, multiplicative_class, witten_series
from .modular import (Lattice, eisenstein_lattice, eta_numeric, token_value,
                      zeta_ratio)


@dataclass
class CurvatureModel:
    """Numeric skew matrix or square matrix of 2-forms."""

    matrix: object
    cap: int | None = None

    def __post_init__(self):
        if isinstance(self.matrix, np.ndarray):
            m = self.matrix
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("curvature must be square")
            if not np.allclose(m, -m.T, atol=1e-12):
                raise ValueError("curvature must be skew-symmetric")
        else:
            n = len(self.matrix)
            if any(len(row) != n for row in self.matrix):
                raise ValueError("curvature must be square")
            for row in self.matrix:
                for a in row:
                    if a.degree([g for g in a.generators()]) - {2}:
                        raise ValueError("formal curvature entries must be 2-forms")

    @property
    def numeric(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def angles(self) -> np.ndarray:
        """theta_j >= 0 with eigenvalues +-i theta_j (one per pair)."""
        ev = np.linalg.eigvals(np.asarray(self.matrix, dtype=float))
        im = np.sort(np.abs(ev.imag))[::-1]
        return im[::2][: self.rank // 2]

    def form_cap(self) -> int:
        if self.cap is not None:
            return self.cap
        gens = set()
        for row in self.matrix:
            for a in row:
                gens |= a.generators()
        return len(gens)


@dataclass
class KineticOperator:
    model: str
    geometry: object  # r > 0 (1|1) or Lattice (2|1)
    curvature: CurvatureModel

    def __post_init__(self):
        if self.model == "1|1":
            if not (isinstance(self.geometry, (int, float, Fraction)) and self.geometry > 0):
                raise ValueError("1|1 operator needs a positive radius")
        elif self.model == "2|1":
            if not isinstance(self.geometry, Lattice):
                raise ValueError("2|1 operator needs a Lattice")
        else:
            raise ValueError(f"unknown model {self.model!r}")


@dataclass
class DetResult:
    value: object
    cutoff: int | None = None
    estimate: float | None = None
    meta: Dict[str, object] = field(default_factory=dict)


# --------------------------------------------------------------------------
# formal helpers
def _matmul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), Grass()) for j in range(n)]
            for i in range(n)]


def curvature_traces(curv: CurvatureModel, cap: int | None = None) -> Dict[int, Grass]:
    """Tr(R^(2k)) for 4k <= cap."""
    cap = curv.form_cap() if cap is None else cap
    R = curv.matrix
    out: Dict[int, Grass] = {}
    power = R
    for j in range(2, cap // 2 + 1):
        power = _matmul(power, R)
        if j % 2 == 0:
            out[j // 2] = sum((power[i][i] for i in range(len(R))), Grass())
    return out


def pontryagin_forms(curv: CurvatureModel) -> Dict[int, Grass]:
    """p_k as the degree-4k parts of det(I + R/(2 pi)) by the Leibniz formula."""
    n = curv.rank
    scale = Poly.var("pi", -1) * Fraction(1, 2)
    M = [[(Grass.even(1) if i == j else Grass()) + curv.matrix[i][j] * scale
          for j in range(n)] for i in range(n)]
    det = Grass()
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = Grass.even(sign)
        for i in range(n):
            term = term * M[i][perm[i]]
            if term.is_zero():
                break
        det = det + term
    out: Dict[int, Grass] = {}
    for k in range(1, n // 2 + 1):
        part = det.filter(lambda key, d=4 * k: len(key) == d)
        out[k] = part
    return out


def evaluate_on_forms(pp: PontPoly, pforms: Dict[int, Grass]) -> Grass:
    out = Grass()
    for part, c in pp.terms.items():
        term = Grass.even(Poly.coerce(c) if not isinstance(c, Poly) else c)
        for k in part:
            term = term * pforms.get(k, Grass())
        out = out + term
    return out


def _normalize_exponent(traces: Dict[int, Grass], coeff) -> Grass:
    """sum_k coeff(k) Tr(R^2k) / (2 pi)^(2k)."""
    x = Grass()
    for k, tr in traces.items():
        x = x + tr * (Poly.coerce(coeff(k)) * Poly.var("pi", -2 * k) * Fraction(1, 4 ** k))
    return x


# --------------------------------------------------------------------------
# 1|1
def fredholm_oracle_11(op: KineticOperator, modes: int, chunk: int = 20000) -> complex:
    """prod_{0<|n|<=N} det(I - i R r/(2 pi i n))^(-1/2), modes paired (n, -n).

    Each pair contributes det(I - (R r)^2/(4 pi^2 n^2))^(-1/2), a positive
    real number for skew R.
    """
    if not op.curvature.numeric:
        raise ValueError("fredholm oracle needs numeric curvature")
    if modes < 1:
        raise ValueError("modes must be at least 1")
    A = np.asarray(op.curvature.matrix, dtype=float) * float(op.geometry)
    A2 = A @ A
    n = A.shape[0]
    eye = np.eye(n)
    total = 0.0
    for start in range(1, modes + 1, chunk):
        ns = np.arange(start, min(start + chunk, modes + 1), dtype=float)
        mats = eye[None, :, :] - A2[None, :, :] / (4 * math.pi ** 2 * ns[:, None, None] ** 2)
        sign, logdet = np.linalg.slogdet(mats)
        if np.any(sign <= 0):
            raise ArithmeticError("paired mode factor is not positive")
        total += float(np.sum(logdet))
    return complex(math.exp(-0.5 * total))


def odd_mode_trace(modes: int, k: int) -> Fraction:
    """sum_{0<|n|<=N} n^(-(2k+1)); zero by n <-> -n."""
    return sum((Fraction(1, n ** (2 * k + 1)) + Fraction(1, (-n) ** (2 * k + 1))
                for n in range(1, modes + 1)), Fraction(0))


def sdet_zeta_11(op: KineticOperator, relative: bool = True) -> DetResult:
    """Relative: exp(sum_k Tr((i R r)^2k) zeta(2k) / (2k (2 pi i)^2k)).

    Numeric curvature uses the closed product over rotation angles,
    prod_j (theta_j r/2)/sinh(theta_j r/2).  Formal curvature returns the
    normalized differential form.  The absolute version carries r^(-n/2).
    """
    curv = op.curvature
    r = float(op.geometry)
    n = curv.rank
    if curv.numeric:
        val = 1.0
        for th in curv.angles():
            x = th * r / 2
            val *= x / math.sinh(x) if x else 1.0
        if not relative:
            val *= r ** (-n / 2)
        return DetResult(complex(val), meta={"relative": relative})
    traces = curvature_traces(curv)
    # zeta(2k)/(2k (2 pi i)^2k) * i^2k = (-1)^k zeta_ratio(k) / (4k)
    coeff = lambda k: Fraction((-1) ** k) * zeta_ratio(k) / (4 * k)
    raw = Grass()
    for k, tr in traces.items():
        raw = raw + tr * (Poly.var("r", 2 * k) * coeff(k))
    normalized = exp_nilpotent(_normalize_exponent(traces, coeff))
    raw_val = exp_nilpotent(raw)
    if not relative:
        raw_val = raw_val * Poly.var("r", Fraction(-n, 2))
    return DetResult(normalized, meta={"raw": raw_val, "relative": relative})


def sdet_zeta_11_series(op: KineticOperator, kmax: int = 60) -> complex:
    """The trace-log series evaluated numerically (needs r |R| < 2 pi)."""
    A = 1j * np.asarray(op.curvature.matrix, dtype=float) * float(op.geometry)
    A2 = A @ A
    power = np.eye(A.shape[0], dtype=complex)
    total = 0j
    for k in range(1, kmax + 1):
        power = power @ A2
        total += np.trace(power) * float(zeta_ratio(k)) / (4 * k)
    return complex(cmath.exp(total))


def ahat_class_formal(dim: int) -> PontPoly:
    """Relative 1|1 determinant at the level of Pontryagin classes:
    exp(sum_k (2k)! ph_k * 2 zeta(2k)/(2k (2 pi i)^2k))."""
    from .charclass import ph
    x = PontPoly({}, dim)
    for k in range(1, dim // 4 + 1):
        x = x + ph(k, dim) * (math.factorial(2 * k) * zeta_ratio(k) / (2 * k))
    return x.exp()


# --------------------------------------------------------------------------
# 2|1
def _kmax_for(x: float, tol: float = 1e-18, hard: int = 60) -> int:
    k = 2
    while k < hard and x ** (2 * k) > tol:
        k += 1
    return k


def lattice_oracle_21(op: KineticOperator, cutoff: int, method: str = "series",
                      kmax: int | None = None) -> DetResult:
    """k >= 2 part of the relative 2|1 determinant from truncated lattice sums.

    ``series``: exp(sum_{k>=2} vol^2k Tr(R^2k) E_2k^trunc / (4k (2 pi)^2k)),
    where E_2k^trunc is the box sum of (m l + n l')^(-2k) with |m|,|n| <= cutoff.
    ``log``: the same sum resummed over k mode by mode,
    -(1/2) sum_w sum_j (log(1+y) - y), y = theta_j^2 (vol/2 pi)^2 / w^2;
    the half undoes the w, -w double count.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    lat: Lattice = op.geometry
    curv = op.curvature
    vol = lat.vol
    if not curv.numeric:
        cap = curv.form_cap() if curv.cap is None else curv.cap
        x = PontPoly({}, cap)
        from .charclass import power_sum
        for k in range(2, cap // 4 + 1):
            e = eisenstein_lattice(k, lat, cutoff)
            a = e / (2 * k) / (2j * math.pi) ** (2 * k)
            x = x + power_sum(k, cap) * a
        return DetResult(x.exp(), cutoff, meta={"exponent": x})
    thetas = curv.angles()
    if method == "series":
        A = np.asarray(curv.matrix, dtype=float)
        A2 = A @ A
        big = float(max(thetas, default=0.0)) * abs(vol) / (2 * math.pi) / min(
            abs(lat.ell), abs(lat.ellp), abs(lat.ell + lat.ellp), abs(lat.ell - lat.ellp))
        kmax = kmax or _kmax_for(big)
        total = 0j
        power = A2.copy()
        for k in range(2, kmax + 1):
            power = power @ A2
            e = eisenstein_lattice(k, lat, cutoff)
            total += vol ** (2 * k) * np.trace(power) * e / (4 * k * (2 * math.pi) ** (2 * k))
        return DetResult(complex(cmath.exp(total)), cutoff, meta={"kmax": kmax})
    if method == "log":
        m = np.arange(-cutoff, cutoff + 1, dtype=float)
        w = (m[:, None] * lat.ell + m[None, :] * lat.ellp).ravel()
        w = w[w != 0]
        total = 0j
        for th in thetas:
            y = (th * vol / (2 * math.pi)) ** 2 / w ** 2
            total += -0.5 * np.sum(np.log1p(y) - y)
        return DetResult(complex(cmath.exp(total)), cutoff)
    raise ValueError(f"unknown method {method!r}")


def witten_star_class(dim: int) -> PontPoly:
    """exp(-(1/12) E2s ph_1 + sum_{k>=2} (-B_2k/(2k)) E2k ph_k) in tokens."""
    from .charclass import ph
    x = PontPoly({}, dim)
    for k in range(1, dim // 4 + 1):
        name = "E2s" if k == 1 else f"E{2 * k}"
        c = math.factorial(2 * k) * zeta_ratio(k) / (2 * k)
        x = x + ph(k, dim) * (Poly.var(name) * c)
    return x.exp()


def sdet_zeta_21(op: KineticOperator | None = None, relative: bool = True,
                 dim: int | None = None, q_order: int = 60) -> DetResult:
    """Relative 2|1 super determinant: the modular Witten class.

    ``dim`` alone gives the universal answer in the token (x) Pontryagin
    ring.  Formal curvature gives the normalized form with token
    coefficients.  Numeric curvature evaluates every token at the lattice,
    with E2* in the k = 1 slot; absolute values divide by kronecker_det.
    """
    if op is None:
        if dim is None:
            raise ValueError("need an operator or a dimension")
        return DetResult(witten_star_class(dim), meta={"relative": True})
    curv = op.curvature
    lat: Lattice = op.geometry
    if not curv.numeric:
        traces = curvature_traces(curv)

        def coeff(k):
            name = "E2s" if k == 1 else f"E{2 * k}"
            return Poly.var(name) * (Fraction((-1) ** k) * zeta_ratio(k) / (4 * k))

        return DetResult(exp_nilpotent(_normalize_exponent(traces, coeff)),
                         meta={"relative": relative})
    A = np.asarray(curv.matrix, dtype=float)
    A2 = A @ A
    vol = lat.vol
    thetas = curv.angles()
    big = float(max(thetas, default=0.0)) * abs(vol) / (2 * math.pi) / min(
        abs(lat.ell), abs(lat.ellp))
    kmax = _kmax_for(big)
    total = 0j
    power = np.eye(A.shape[0])
    for k in range(1, kmax + 1):
        power = power @ A2
        name = "E2s" if k == 1 else f"E{2 * k}"
        # a_2k s_k with a_2k = zeta_ratio(k)/(2k) * token and
        # s_k = (i vol)^2k Tr(R^2k) / 2
        tv = token_value(name, lat, q_order)
        total += (float(zeta_ratio(k)) / (2 * k) * tv * (-1) ** k
                  * vol ** (2 * k) * np.trace(power) / 2)
    val = complex(cmath.exp(total))
    if not relative:
        val /= kronecker_det(lat, op.curvature.rank)
    return DetResult(val, meta={"relative": relative, "kmax": kmax})


def sdet_zeta_21_terms(op: KineticOperator, q_order: int = 60) -> Dict[int, complex]:
    """Exponent contributions per k from the token formula (numeric)."""
    A = np.asarray(op.curvature.matrix, dtype=float)
    A2 = A @ A
    lat = op.geometry
    vol = lat.vol
    out = {}
    power = np.eye(A.shape[0])
    for k in range(1, 12):
        power = power @ A2
        name = "E2s" if k == 1 else f"E{2 * k}"
        tv = token_value(name, lat, q_order)
        out[k] = (float(zeta_ratio(k)) / (2 * k) * tv * (-1) ** k
                  * vol ** (2 * k) * np.trace(power) / 2)
    return out


def kronecker_det(lat: Lattice, n: int) -> float:
    """|vol|^(2n) |eta(l, l')|^(4n) with eta(l, l') = l^(-1/2) eta(l'/l)."""
    eta_abs = abs(lat.ell) ** -0.5 * abs(eta_numeric(lat.tau))
    return abs(lat.vol) ** (2 * n) * eta_abs ** (4 * n)


# --------------------------------------------------------------------------
# determinant-line norms
@dataclass
class NormReport:
    model: str
    factorized: bool
    norm_squared: PontPoly
    product: PontPoly
    rewrites: List[str] = field(default_factory=list)
    numeric_defect: complex | None = None


def _conj_poly(p) -> object:
    if isinstance(p, Poly):
        return p.conj({s: ("c" + s) for s in p.symbols()})
    return p


def detline_norm_check(model: str, dim: int, lat: Lattice | None = None) -> NormReport:
    """norm^2 of the relative determinant section against class * conj(class).

    The log of the norm^2 is log(sdet) + conj(log(sdet)).  In the 2|1 case the
    k = 1 coefficient E2s + cE2s is rewritten to E2 + cE2; the numeric value
    of the rewrite's defect at ``lat`` is reported.
    """
    from .charclass import ph
    if model == "1|1":
        x = PontPoly({}, dim)
        for k in range(1, dim // 4 + 1):
            x = x + ph(k, dim) * (math.factorial(2 * k) * zeta_ratio(k) / (2 * k))
        norm2 = (x + x.map_coeffs(_conj_poly)).exp()
        cls = multiplicative_class(ahat_series(dim // 2 + 2), dim)
        product = cls * cls
        return NormReport(model, norm2 == product, norm2, product)
    if model != "2|1":
        raise ValueError(f"unknown model {model!r}")
    x = PontPoly({}, dim)
    for k in range(1, dim // 4 + 1):
        name = "E2s" if k == 1 else f"E{2 * k}"
        c = math.factorial(2 * k) * zeta_ratio(k) / (2 * k)
        x = x + ph(k, dim) * (Poly.var(name) * c)
    log_norm = x + x.map_coeffs(_conj_poly)
    rewrites = []

    def rewrite(p):
        if not isinstance(p, Poly):
            return p
        a = p.terms.get((("E2s", Fraction(1)),))
        b = p.terms.get((("cE2s", Fraction(1)),))
        if a is None and b is None:
            return p
        if a != b:
            raise AssertionError("E2* and its conjugate appear with different weights")
        rewrites.append(f"{a}*(E2s + cE2s) -> {a}*(E2 + cE2)")
        rest = Poly({m: c for m, c in p.terms.items()
                     if m not in ((("E2s", Fraction(1)),), (("cE2s", Fraction(1)),))})
        return rest + (Poly.var("E2") + Poly.var("cE2")) * a
    norm2 = log_norm.map_coeffs(rewrite).exp()
    wit = multiplicative_class(witten_series("holo", dim // 2 + 2, 2, tokens=True), dim)
    product = wit * wit.map_coeffs(_conj_poly)
    ok = norm2 == product
    if not ok:
        for part in sorted(set(norm2.terms) | set(product.terms)):
            if norm2.terms.get(part) != product.terms.get(part):
                raise AssertionError(f"norm factorization fails at p-monomial {part}")
    defect = None
    if lat is not None:
        # reported in the lattice-sum normalization (constant term 2 zeta(2))
        defect = (token_value("E2s", lat) + token_value("cE2s", lat)
                  - token_value("E2", lat) - token_value("cE2", lat)) * math.pi ** 2 / 3
    return NormReport(model, ok, norm2, product, rewrites, defect)
