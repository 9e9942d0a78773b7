"""Exact symbolic rings: Gaussian rationals, Laurent polynomials with
rational exponents, and Grassmann algebras over them.

``Poly`` is a sparse commutative polynomial in named even symbols.  Exponents
are ``Fraction`` so that r^(1/2) and vol^(k/2) are ordinary monomials, and
negative exponents give Laurent terms such as rho/r.

``Grass`` is a sparse element of a Grassmann algebra on named odd generators
with ``Poly`` coefficients.  Monomials are stored as sorted name tuples; the
sign of every reordering is tracked exactly.  Differential forms are the
special case where the odd generators are ``dx1, dx2, ...``.
"""
from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Tuple

Number = (int, Fraction)


class QI:
    """Gaussian rational a + b i."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(x) -> "QI":
        if isinstance(x, QI):
            return x
        if isinstance(x, complex):
            return QI(Fraction(x.real), Fraction(x.imag))
        return QI(x)

    @staticmethod
    def _scalar(o) -> bool:
        return isinstance(o, (QI, int, Fraction, complex))

    def __add__(self, o):
        if not QI._scalar(o):
            return NotImplemented
        o = QI.coerce(o)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __sub__(self, o):
        if not QI._scalar(o):
            return NotImplemented
        o = QI.coerce(o)
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return QI.coerce(o) - self

    def __mul__(self, o):
        if not QI._scalar(o):
            return NotImplemented
        o = QI.coerce(o)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = QI.coerce(o)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("QI division by zero")
        return self * QI(o.re / n, -o.im / n)

    def __rtruediv__(self, o):
        return QI.coerce(o) / self

    def __pow__(self, n: int):
        if n < 0:
            return QI(1) / self ** (-n)
        out = QI(1)
        for _ in range(n):
            out = out * self
        return out

    def conj(self) -> "QI":
        return QI(self.re, -self.im)

    def __eq__(self, o):
        try:
            o = QI.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        return f"({self.re}+{self.im}i)"


I = QI(0, 1)

Monomial = Tuple[Tuple[str, Fraction], ...]


def _exp(e):
    """Integral exponents are stored as int; they hash much faster than Fraction."""
    if type(e) is Fraction and e.denominator == 1:
        return e.numerator
    return e


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for s, e in b:
        v = d.get(s, 0) + e
        if v:
            d[s] = _exp(v)
        else:
            d.pop(s, None)
    return tuple(sorted(d.items()))


class Poly:
    """Sparse Laurent polynomial with Gaussian-rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        self.terms: Dict[Monomial, QI] = {}
        for m, c in (terms or {}).items():
            c = QI.coerce(c)
            if c:
                if any(e == 0 for _, e in m):
                    m = tuple((s, e) for s, e in m if e != 0)
                    c = c + self.terms.get(m, 0)
                    if not c:
                        self.terms.pop(m, None)
                        continue
                self.terms[m] = c

    # constructors
    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str, exp=1) -> "Poly":
        return cls({((name, _exp(Fraction(exp))),): 1})

    @staticmethod
    def coerce(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        return Poly.const(x)

    # ring ops
    def __add__(self, o):
        o = Poly.coerce(o)
        out = dict(self.terms)
        for m, c in o.terms.items():
            out[m] = out[m] + c if m in out else c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-Poly.coerce(o))

    def __rsub__(self, o):
        return Poly.coerce(o) - self

    def __mul__(self, o):
        if isinstance(o, Grass):
            return NotImplemented
        if not isinstance(o, Poly):
            c = QI.coerce(o)
            return Poly({m: v * c for m, v in self.terms.items()})
        out: Dict[Monomial, QI] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = _mono_mul(m1, m2)
                p = c1 * c2
                out[m] = out[m] + p if m in out else p
        return Poly(out)

    def __rmul__(self, o):
        return self * o

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials have negative powers")
            (m, c), = self.terms.items()
            return Poly({tuple((s, e * n) for s, e in m): QI(1) / c ** (-n)})
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, o):
        if isinstance(o, Poly):
            return self * o ** -1
        return self * (QI(1) / QI.coerce(o))

    def __eq__(self, o):
        try:
            o = Poly.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def symbols(self) -> set:
        return {s for m in self.terms for s, _ in m}

    def degree_in(self, name: str) -> Fraction:
        return max((dict(m).get(name, 0) for m in self.terms), default=0)

    def constant(self) -> QI:
        return self.terms.get((), QI(0))

    # calculus
    def diff(self, name: str, chain: Mapping[str, "Poly"] | None = None) -> "Poly":
        """d/d(name); ``chain`` supplies d(symbol)/d(name) for dependent symbols."""
        direct: Dict[Monomial, QI] = {}
        out = Poly()
        for m, c in self.terms.items():
            for i, (s, e) in enumerate(m):
                if s == name:
                    dsym = None
                elif chain and s in chain:
                    dsym = Poly.coerce(chain[s])
                else:
                    continue
                rest = list(m)
                if e - 1:
                    rest[i] = (s, _exp(e - 1))
                else:
                    del rest[i]
                key = tuple(rest)
                if dsym is None:
                    direct[key] = direct.get(key, QI(0)) + c * e
                else:
                    out = out + Poly({key: c * e}) * dsym
        return out + Poly(direct) if out.terms else Poly(direct)

    def subs(self, name: str, value) -> "Poly":
        """Substitute ``name -> value``; needs nonnegative integer exponents
        unless ``value`` is a monomial."""
        value = Poly.coerce(value)
        out = Poly()
        cache: Dict[Fraction, Poly] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.pop(name, 0)
            if not e:
                out = out + Poly({m: c})
                continue
            if e not in cache:
                if e.denominator == 1 and e > 0:
                    cache[e] = value ** int(e)
                elif len(value.terms) == 1:
                    (vm, vc), = value.terms.items()
                    if e.denominator != 1 and vc != 1:
                        raise ValueError("fractional power of a non-unit coefficient")
                    coef = vc ** int(e) if e.denominator == 1 and e > 0 else (
                        QI(1) / vc ** int(-e) if e.denominator == 1 else QI(1))
                    cache[e] = Poly({tuple((s, _exp(x * e)) for s, x in vm): coef})
                else:
                    raise ValueError(f"cannot substitute into {name}^{e}")
            out = out + Poly({tuple(sorted(d.items())): c}) * cache[e]
        return out

    def subs_many(self, values: Mapping[str, object]) -> "Poly":
        out = self
        for k, v in values.items():
            out = out.subs(k, v)
        return out

    def evaluate(self, env: Mapping[str, complex]) -> complex:
        total = 0j
        for m, c in self.terms.items():
            t = complex(c)
            for s, e in m:
                t *= complex(env[s]) ** float(e) if e.denominator != 1 else complex(env[s]) ** int(e)
            total += t
        return total

    def conj(self, rename: Mapping[str, str] | None = None) -> "Poly":
        rename = rename or {}
        return Poly({tuple(sorted((rename.get(s, s), e) for s, e in m)): c.conj()
                     for m, c in self.terms.items()})

    def map_monomials(self, f: Callable[[Monomial], Tuple[Monomial, QI]]) -> "Poly":
        out: Dict[Monomial, QI] = {}
        for m, c in self.terms.items():
            m2, k = f(m)
            v = c * k
            out[m2] = out[m2] + v if m2 in out else v
        return Poly(out)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda t: str(t[0])):
            mono = "*".join(s if e == 1 else f"{s}^{e}" for s, e in m)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)


def _merge_sign(a: Tuple[str, ...], b: Tuple[str, ...]):
    """Sorted concatenation of two sorted generator tuples and the sign."""
    if not a:
        return b, 1
    if not b:
        return a, 1
    sa = set(a)
    if any(x in sa for x in b):
        return None, 0
    inv = 0
    # count pairs (x in a, y in b) with x > y
    for y in b:
        inv += sum(1 for x in a if x > y)
    return tuple(sorted(a + b)), (-1 if inv & 1 else 1)


class Grass:
    """Grassmann-algebra element with ``Poly`` coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Tuple[str, ...], object] | None = None):
        self.terms: Dict[Tuple[str, ...], Poly] = {}
        for k, c in (terms or {}).items():
            c = Poly.coerce(c)
            if c:
                if list(k) != sorted(k) or len(set(k)) != len(k):
                    raise ValueError(f"non-canonical monomial {k}")
                self.terms[tuple(k)] = c

    @classmethod
    def even(cls, c) -> "Grass":
        return cls({(): Poly.coerce(c)})

    @classmethod
    def gen(cls, name: str, coeff=1) -> "Grass":
        return cls({(name,): Poly.coerce(coeff)})

    @classmethod
    def mono(cls, names: Iterable[str], coeff=1) -> "Grass":
        out = cls.even(coeff)
        for n in names:
            out = out * cls.gen(n)
        return out

    @staticmethod
    def coerce(x) -> "Grass":
        if isinstance(x, Grass):
            return x
        return Grass.even(x)

    def __add__(self, o):
        o = Grass.coerce(o)
        out = dict(self.terms)
        for k, c in o.terms.items():
            out[k] = out[k] + c if k in out else c
        return Grass(out)

    __radd__ = __add__

    def __neg__(self):
        return Grass({k: -c for k, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-Grass.coerce(o))

    def __rsub__(self, o):
        return Grass.coerce(o) - self

    def __mul__(self, o):
        if not isinstance(o, Grass):
            c = Poly.coerce(o)
            return Grass({k: v * c for k, v in self.terms.items()})
        out: Dict[Tuple[str, ...], Poly] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in o.terms.items():
                k, sign = _merge_sign(k1, k2)
                if k is None:
                    continue
                p = c1 * c2
                if sign < 0:
                    p = -p
                out[k] = out[k] + p if k in out else p
        return Grass(out)

    def __rmul__(self, o):
        # scalars are even, so they commute
        return self * o

    def __pow__(self, n: int):
        out = Grass.even(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, o):
        try:
            o = Grass.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # structure
    def parity(self) -> int | None:
        """0 (even), 1 (odd) or None when mixed."""
        ps = {len(k) & 1 for k in self.terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def generators(self) -> set:
        return {g for k in self.terms for g in k}

    def body(self) -> Poly:
        return self.terms.get((), Poly())

    def coefficient(self, names: Iterable[str]) -> Poly:
        return self.terms.get(tuple(sorted(names)), Poly())

    def filter(self, pred: Callable[[Tuple[str, ...]], bool]) -> "Grass":
        return Grass({k: c for k, c in self.terms.items() if pred(k)})

    def without(self, names: Iterable[str]) -> "Grass":
        """Drop every term containing one of ``names`` (set them to zero)."""
        s = set(names)
        return self.filter(lambda k: not s.intersection(k))

    def kill_products(self, pairs: Iterable[Tuple[str, str]]) -> "Grass":
        pairs = list(pairs)
        return self.filter(lambda k: not any(a in k and b in k for a, b in pairs))

    def map_coeffs(self, f: Callable[[Poly], Poly]) -> "Grass":
        return Grass({k: f(c) for k, c in self.terms.items()})

    def degree(self, gens: Iterable[str]) -> set:
        s = set(gens)
        return {sum(1 for g in k if g in s) for k in self.terms}

    # calculus
    def dodd(self, name: str) -> "Grass":
        """Left derivative with respect to the odd generator ``name``."""
        out: Dict[Tuple[str, ...], Poly] = {}
        for k, c in self.terms.items():
            if name in k:
                i = k.index(name)
                rest = k[:i] + k[i + 1:]
                v = -c if i & 1 else c
                out[rest] = out[rest] + v if rest in out else v
        return Grass(out)

    def deven(self, name: str, chain: Mapping[str, Poly] | None = None) -> "Grass":
        return Grass({k: c.diff(name, chain) for k, c in self.terms.items()})

    def number_op(self, gens: Iterable[str]) -> "Grass":
        """Multiply each term by its count of generators from ``gens``."""
        s = set(gens)
        out = {}
        for k, c in self.terms.items():
            n = sum(1 for g in k if g in s)
            if n:
                out[k] = c * n
        return Grass(out)

    def subs(self, odd: Mapping[str, "Grass"] | None = None,
             even: Mapping[str, "Grass"] | None = None,
             chain: Mapping[str, Mapping[str, Poly]] | None = None) -> "Grass":
        """Apply the superalgebra map sending odd generators to odd elements
        and even symbols ``s`` to ``s + n`` with ``n`` a nilpotent even element.

        ``even[s]`` is the nilpotent shift ``n``.  Coefficients are expanded by
        Taylor's formula, which is exact because ``n`` is nilpotent.
        ``chain[s]`` gives derivatives of dependent symbols with respect to s.
        """
        odd = odd or {}
        even = even or {}
        chain = chain or {}
        out = Grass()
        for k, c in self.terms.items():
            img = _taylor(c, even, chain)
            for g in k:
                img = img * (odd[g] if g in odd else Grass.gen(g))
            out = out + img
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"[{c}]{''.join('*' + g for g in k)}"
                          for k, c in sorted(self.terms.items()))


def _taylor(c: Poly, shifts: Mapping[str, Grass], chain) -> Grass:
    result = Grass.even(c)
    for s, n in shifts.items():
        new = Grass()
        for k, coeff in result.terms.items():
            acc = Grass.even(coeff)
            deriv = coeff
            power = Grass.even(1)
            j = 0
            while True:
                j += 1
                deriv = deriv.diff(s, chain.get(s))
                power = power * n
                if deriv.is_zero() or power.is_zero():
                    break
                acc = acc + power * deriv * Fraction(1, math.factorial(j))
            new = new + acc * Grass.mono(k)
        result = new
    return result


# --------------------------------------------------------------------------
# differential forms on R^m
def form_gens(m: int, prefix: str = "x") -> Tuple[str, ...]:
    return tuple(f"d{prefix}{i}" for i in range(1, m + 1))


def coord(name: str) -> Grass:
    return Grass.even(Poly.var(name))


def d_form(a: Grass, coords: Iterable[str]) -> Grass:
    """de Rham differential: sum_i dx_i * d/dx_i (left multiplication)."""
    out = Grass()
    for x in coords:
        out = out + Grass.gen("d" + x) * a.deven(x)
    return out


def form_degree_op(a: Grass, coords: Iterable[str]) -> Grass:
    return a.number_op(["d" + x for x in coords])


def contract(a: Grass, coord_name: str) -> Grass:
    """Interior product with d/d(coord) (a left derivation)."""
    return a.dodd("d" + coord_name)


def exp_nilpotent(x: Grass, max_terms: int = 64) -> Grass:
    """exp of an even element with nilpotent positive-degree part and zero body."""
    out = Grass.even(1)
    term = Grass.even(1)
    for j in range(1, max_terms):
        term = term * x * Fraction(1, j)
        if term.is_zero():
            return out
        out = out + term
    raise ValueError("element is not nilpotent within the term budget")


def random_poly(rng, names: Iterable[str], max_deg: int = 2, n_terms: int = 3,
                complex_coeffs: bool = True, exps=None) -> Poly:
    names = list(names)
    out = Poly()
    for _ in range(n_terms):
        mono = {}
        for s in names:
            e = rng.randint(0, max_deg) if exps is None else rng.choice(exps)
            if e:
                mono[s] = _exp(Fraction(e))
        c = QI(rng.randint(-5, 5), rng.randint(-5, 5) if complex_coeffs else 0)
        out = out + Poly({tuple(sorted(mono.items())): c})
    return out


def random_form(rng, coords, max_form_deg: int = 2, n_terms: int = 3,
                max_deg: int = 2) -> Grass:
    coords = list(coords)
    out = Grass()
    for _ in range(n_terms):
        deg = rng.randint(0, min(max_form_deg, len(coords)))
        gens = tuple(sorted(rng.sample(["d" + x for x in coords], deg)))
        c = random_poly(rng, coords, max_deg, 1, complex_coeffs=False)
        out = out + Grass({gens: c})
    return out


def all_subsets(gens: Iterable[str]):
    gens = sorted(gens)
    for n in range(len(gens) + 1):
        yield from itertools.combinations(gens, n)


# --------------------------------------------------------------------------
# FormPoly text format: "3/2*x1^2*dx1*dx2 - dx3 + 5"
_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+)")


def parse_form(text: str) -> Grass:
    """Parse a sum of rational multiples of monomials in x_i and dx_i.

    Odd factors (names starting with ``d``) are multiplied in the order
    written, so ``dx2*dx1`` equals ``-dx1*dx2``.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty form")
    out = Grass()
    pos = 0
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or not m.group(2).strip():
            raise ValueError(f"cannot parse form near {s[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        term = Grass.even(sign)
        for factor in m.group(2).strip().split("*"):
            factor = factor.strip()
            if not factor:
                raise ValueError(f"empty factor in {m.group(2)!r}")
            if re.fullmatch(r"\d+(/\d+)?", factor):
                term = term * Fraction(factor)
            elif re.fullmatch(r"d[A-Za-z_]\w*", factor):
                term = term * Grass.gen(factor)
            else:
                fm = re.fullmatch(r"([A-Za-z_]\w*)(\^(\d+))?", factor)
                if not fm:
                    raise ValueError(f"bad factor {factor!r}")
                term = term * Poly.var(fm.group(1), int(fm.group(3) or 1))
        out = out + term
        pos = m.end()
    return out


def format_form(a: Grass) -> str:
    """Inverse of parse_form for rational coefficients."""
    parts = []
    for key, c in sorted(a.terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
        for m, q in sorted(c.terms.items(), key=lambda t: str(t[0])):
            if q.im:
                raise ValueError("complex coefficients have no text form")
            factors = [f"{s}^{e}" if e != 1 else s for s, e in m] + list(key)
            coef = q.re
            body = "*".join(factors)
            if not body:
                txt = str(abs(coef))
            elif abs(coef) == 1:
                txt = body
            else:
                txt = f"{abs(coef)}*{body}"
            parts.append(("-" if coef < 0 else "+", txt))
    if not parts:
        return "0"
    first = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return first + "".join(f" {sg} {t}" for sg, t in parts[1:])
