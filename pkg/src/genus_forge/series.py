"""Exact truncated formal power series.

A series stores integer exponent keys ``k`` standing for ``unit * k``.  The
truncation bound ``order`` uses the same integer scale, so a series with
``unit = 1/24`` and ``order = 25`` knows its coefficients strictly below
``q^(25/24)``.  Coefficients may be any commutative ring element with exact
equality: ``Fraction``, ``PiGraded``, or another ``TruncSeries``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, Tuple


class SeriesError(ValueError):
    pass


def _is_zero(c) -> bool:
    if isinstance(c, TruncSeries):
        return not c.coeffs
    return c == 0


class TruncSeries:
    __slots__ = ("coeffs", "order", "unit", "var")

    def __init__(self, coeffs: Dict[int, object] | None, order: int,
                 unit=1, var: str = "q"):
        unit = Fraction(unit)
        if unit <= 0:
            raise SeriesError("exponent unit must be positive")
        clean = {}
        for k, c in (coeffs or {}).items():
            if k >= order or _is_zero(c):
                continue
            clean[int(k)] = c
        self.coeffs = clean
        self.order = int(order)
        self.unit = unit
        self.var = var

    # construction helpers -------------------------------------------------
    @classmethod
    def from_list(cls, values: Iterable, order: int | None = None,
                  unit=1, var: str = "q") -> "TruncSeries":
        values = list(values)
        if order is None:
            order = len(values)
        return cls(dict(enumerate(values)), order, unit, var)

    @classmethod
    def monomial(cls, k: int, order: int, c=Fraction(1), unit=1,
                 var: str = "q") -> "TruncSeries":
        return cls({k: c}, order, unit, var)

    def _one(self):
        return Fraction(1)

    def _like(self, coeffs, order) -> "TruncSeries":
        out = object.__new__(type(self))
        TruncSeries.__init__(out, coeffs, order, self.unit, self.var)
        for extra in getattr(type(self), "_extra", ()):
            setattr(out, extra, getattr(self, extra))
        return out

    # access ---------------------------------------------------------------
    def __getitem__(self, k: int):
        return self.coeffs.get(k, 0)

    def items(self) -> Iterator[Tuple[int, object]]:
        return iter(sorted(self.coeffs.items()))

    def valuation(self) -> int:
        """Lowest stored exponent key, or ``order`` for the zero series."""
        return min(self.coeffs) if self.coeffs else self.order

    def exponent(self, k: int) -> Fraction:
        return self.unit * k

    def truncate(self, order: int) -> "TruncSeries":
        return self._like(self.coeffs, min(order, self.order))

    def map_coeffs(self, f: Callable) -> "TruncSeries":
        return self._like({k: f(c) for k, c in self.coeffs.items()}, self.order)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "TruncSeries") -> None:
        if other.var != self.var or other.unit != self.unit:
            raise SeriesError(
                f"incompatible series: ({self.var}, {self.unit}) vs "
                f"({other.var}, {other.unit})")

    def _coerce(self, other):
        if isinstance(other, TruncSeries) and other.var == self.var:
            self._check(other)
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if _is_zero(other):
                return self
            out = dict(self.coeffs)
            out[0] = out[0] + other if 0 in out else other
            return self._like(out, self.order)
        out = dict(self.coeffs)
        for k, c in o.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return self._like(out, min(self.order, o.order))

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.coeffs.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return self._like({k: c * other for k, c in self.coeffs.items()},
                              self.order)
        va, vb = self.valuation(), o.valuation()
        order = min(self.order + min(vb, 0), o.order + min(va, 0))
        out: Dict[int, object] = {}
        bitems = sorted(o.coeffs.items())
        for i, a in self.coeffs.items():
            for j, b in bitems:
                k = i + j
                if k >= order:
                    break
                p = a * b
                out[k] = out[k] + p if k in out else p
        return self._like(out, order)

    def __rmul__(self, other):
        return self._like({k: other * c for k, c in self.coeffs.items()},
                          self.order)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self._like({0: self._one()}, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, TruncSeries):
            return (self.var == other.var and self.unit == other.unit
                    and self.order == other.order
                    and self.coeffs.keys() == other.coeffs.keys()
                    and all(self.coeffs[k] == other.coeffs[k] for k in self.coeffs))
        # compare against a constant
        rest = {k: c for k, c in self.coeffs.items() if k != 0}
        return not rest and self[0] == other

    def __hash__(self):
        return hash((self.var, self.unit, self.order,
                     tuple(sorted(self.coeffs))))

    def __repr__(self):
        terms = ", ".join(f"{self.unit * k}: {c}" for k, c in self.items())
        return f"TruncSeries[{self.var}]({{{terms}}}, O({self.var}^{self.unit * self.order}))"

    # analytic-style operations --------------------------------------------
    def shift(self, n: int) -> "TruncSeries":
        """Multiply by ``var^(n*unit)``."""
        return self._like({k + n: c for k, c in self.coeffs.items()},
                          self.order + n)

    def inverse(self) -> "TruncSeries":
        """Multiplicative inverse of a series whose lowest term is invertible."""
        if not self.coeffs:
            raise SeriesError("zero series has no inverse")
        v = self.valuation()
        f = self.shift(-v)
        c0 = f[0]
        inv0 = self._one() / c0 if not isinstance(c0, TruncSeries) else c0.inverse()
        n = f.order
        g: Dict[int, object] = {0: inv0}
        for m in range(1, n):
            acc = None
            for k in range(1, m + 1):
                if k in f.coeffs and (m - k) in g:
                    t = f.coeffs[k] * g[m - k]
                    acc = t if acc is None else acc + t
            if acc is not None:
                g[m] = -(acc * inv0)
        return self._like(g, n).shift(-v)

    def exp(self) -> "TruncSeries":
        """exp(f) for f with zero constant term (keys must be nonnegative)."""
        if not _is_zero(self[0]) or (self.coeffs and self.valuation() < 0):
            raise SeriesError("exp needs a series with zero constant term")
        n = self.order
        g: Dict[int, object] = {0: self._one()}
        fk = [(k, k * c) for k, c in sorted(self.coeffs.items())]
        for m in range(1, n):
            acc = None
            for k, kc in fk:
                if k > m:
                    break
                if (m - k) in g:
                    t = kc * g[m - k]
                    acc = t if acc is None else acc + t
            if acc is not None and not _is_zero(acc):
                g[m] = acc * Fraction(1, m)
        return self._like(g, n)

    def log(self) -> "TruncSeries":
        """log(f) for f with constant term 1."""
        if self.coeffs and self.valuation() < 0:
            raise SeriesError("log needs a power series")
        if not (self[0] == 1):
            raise SeriesError("log needs constant term 1")
        n = self.order
        g: Dict[int, object] = {}
        for m in range(1, n):
            acc = m * self[m] if m in self.coeffs else None
            for k in range(1, m):
                if k in g and (m - k) in self.coeffs:
                    t = (k * g[k]) * self.coeffs[m - k]
                    acc = -t if acc is None else acc - t
            if acc is not None and not _is_zero(acc):
                g[m] = acc * Fraction(1, m)
        return self._like(g, n)

    def compose(self, g: "TruncSeries") -> "TruncSeries":
        """f(g) for g with zero constant term; result lives in g's variable."""
        if g.coeffs and g.valuation() <= 0:
            raise SeriesError("inner series must have zero constant term")
        if self.unit != 1:
            raise SeriesError("outer series must have integer exponents")
        if self.coeffs and self.valuation() < 0:
            raise SeriesError("outer series must be a power series")
        order = min(g.order, self.order * max(g.valuation(), 1) if g.coeffs else g.order)
        g = g.truncate(order)
        result = g._like({}, order)
        for k in range(self.order - 1, -1, -1):
            result = result * g
            c = self[k]
            if not _is_zero(c):
                result = result + c
        return result.truncate(order)

    # serialization --------------------------------------------------------
    def csv_rows(self, exact: bool = True, coeff: Callable | None = None):
        """Rows ``exponent_num,exponent_den,coeff_num,coeff_den`` or
        ``exponent,coeff`` with 17 significant digits."""
        rows = []
        for k, c in self.items():
            e = self.exponent(k)
            c = coeff(c) if coeff else c
            if exact:
                c = Fraction(c)
                rows.append(f"{e.numerator},{e.denominator},{c.numerator},{c.denominator}")
            else:
                rows.append(f"{float(e)!r},{float(c):.17g}")
        return rows

    @classmethod
    def from_csv_rows(cls, rows: Iterable[str], order: int, unit=1,
                      var: str = "q") -> "TruncSeries":
        unit = Fraction(unit)
        coeffs = {}
        for row in rows:
            a, b, c, d = (int(x) for x in row.split(","))
            k = Fraction(a, b) / unit
            if k.denominator != 1:
                raise SeriesError(f"exponent {a}/{b} is not a multiple of {unit}")
            coeffs[int(k)] = Fraction(c, d)
        return cls(coeffs, order, unit, var)


def series_arith(a: TruncSeries, b: TruncSeries, op: str) -> TruncSeries:
    if op == "add":
        a._check(b)
        return a + b
    if op == "mul":
        a._check(b)
        return a * b
    raise SeriesError(f"unknown op {op!r}")


def series_exp_log(f: TruncSeries, direction: str) -> TruncSeries:
    if direction == "exp":
        return f.exp()
    if direction == "log":
        return f.log()
    raise SeriesError(f"unknown direction {direction!r}")


def series_compose(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    return f.compose(g)


def exp_series(order: int, var: str = "z") -> TruncSeries:
    import math
    return TruncSeries({k: Fraction(1, math.factorial(k)) for k in range(order)},
                       order, var=var)


def sinh_over_z(order: int, var: str = "z") -> TruncSeries:
    """sinh(z)/z, even terms 1/(2k+1)!."""
    import math
    return TruncSeries({2 * k: Fraction(1, math.factorial(2 * k + 1))
                        for k in range((order + 1) // 2)}, order, var=var)


class BivarSeries(TruncSeries):
    """Series in ``z`` whose coefficients are q-series of a common q-order."""

    __slots__ = ("q_order", "q_var")
    _extra = ("q_order", "q_var")

    def __init__(self, coeffs, z_order: int, q_order: int, z_var: str = "z",
                 q_var: str = "q"):
        self.q_order = q_order
        self.q_var = q_var
        fixed = {}
        for k, c in (coeffs or {}).items():
            if not isinstance(c, TruncSeries):
                c = TruncSeries({0: c}, q_order, var=q_var)
            fixed[k] = c.truncate(q_order)
        TruncSeries.__init__(self, fixed, z_order, 1, z_var)

    def _one(self):
        return TruncSeries({0: Fraction(1)}, self.q_order, var=self.q_var)

    def q_slice(self, j: int) -> TruncSeries:
        """The z-series of q^j coefficients."""
        return TruncSeries({k: c[j] for k, c in self.coeffs.items()}, self.order,
                           var=self.var)
