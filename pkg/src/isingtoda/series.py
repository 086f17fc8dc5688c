"""Exact truncated power series over the rationals.

Two containers are provided:

``GradedSeries``
    a Laurent series in one variable (conventionally ``s``, with ``t = s**4``)
    stored sparsely as ``{exponent: Fraction}`` together with a truncation
    order: every exponent ``>= order`` is unknown.  ``order`` is ``math.inf``
    for exact (polynomial) values.

``BiSeries``
    a series in ``x`` whose coefficients are ``GradedSeries`` in ``s``.  Each
    coefficient carries its own provable s-order, so operations that lose
    precision unevenly (division by a series whose higher x-coefficients have
    lower s-valuation, for instance) never report digits they do not know.

All values are immutable; operations return new objects.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Iterator, Mapping

from .errors import (
    NonLatticeExponent,
    NonUnitLeading,
    NonzeroConstantTerm,
    SeriesError,
    TruncationExhausted,
    ZeroDivisor,
)

INF = math.inf

__all__ = [
    "INF",
    "GradedSeries",
    "BiSeries",
    "as_rational",
    "format_rational",
    "parse_rational",
    "x_series",
    "sin_series",
    "cos_series",
    "arcsin_series",
    "binomial_series",
]


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("floating-point coefficients are not accepted")
    try:  # gmpy2.mpq, flint.fmpq, ...
        return Fraction(int(value.numerator), int(value.denominator))
    except AttributeError:
        return Fraction(str(value))


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text)


def _min_order(*orders):
    return min(orders)


class GradedSeries:
    """Truncated Laurent series ``sum c_e s^e + O(s^order)``."""

    __slots__ = ("_terms", "_order")

    def __init__(self, terms: Mapping[int, object] | Iterable[tuple[int, object]] = (), order=INF):
        if isinstance(order, float) and order != INF:
            order = int(order)
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[int, Fraction] = {}
        for e, c in items:
            e = int(e)
            if e >= order:
                continue
            c = as_rational(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
        self._terms = {e: clean[e] for e in sorted(clean) if clean[e]}
        self._order = order

    # construction helpers -------------------------------------------------
    @classmethod
    def _raw(cls, terms: dict[int, Fraction], order) -> "GradedSeries":
        """Trusted constructor: keys sorted, no zeros, all below order."""
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._order = order
        return obj

    @classmethod
    def constant(cls, c, order=INF) -> "GradedSeries":
        return cls({0: c}, order)

    @classmethod
    def monomial(cls, exponent: int, c=1, order=INF) -> "GradedSeries":
        return cls({exponent: c}, order)

    @classmethod
    def zero(cls, order=INF) -> "GradedSeries":
        return cls._raw({}, order)

    @classmethod
    def from_dense(cls, coeffs: Iterable, start: int = 0, order=None) -> "GradedSeries":
        coeffs = list(coeffs)
        if order is None:
            order = start + len(coeffs)
        return cls({start + i: c for i, c in enumerate(coeffs)}, order)

    @classmethod
    def from_function(cls, f: Callable[[int], object], start: int, order: int, step: int = 1) -> "GradedSeries":
        return cls({e: f(e) for e in range(start, order, step)}, order)

    # basic accessors ------------------------------------------------------
    @property
    def order(self):
        return self._order

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[int, Fraction]]:
        return iter(self._terms.items())

    def __getitem__(self, e: int) -> Fraction:
        if e >= self._order:
            raise TruncationExhausted(f"coefficient s^{e} is beyond truncation order {self._order}")
        return self._terms.get(e, Fraction(0))

    def coeff(self, e: int) -> Fraction:
        return self[e]

    def is_exact(self) -> bool:
        return self._order == INF

    def is_zero(self) -> bool:
        """True when no nonzero coefficient is known (the value may be O(s^order))."""
        return not self._terms

    def is_exact_zero(self) -> bool:
        return not self._terms and self._order == INF

    def valuation(self):
        """Lowest exponent with a nonzero coefficient; ``order`` if none is known."""
        for e in self._terms:
            return e
        return self._order

    def leading(self) -> tuple[int, Fraction]:
        for e, c in self._terms.items():
            return e, c
        raise ZeroDivisor("series has no nonzero coefficient to its truncation order")

    def precision(self):
        """Number of provable coefficients after the leading one."""
        return self._order - self.valuation()

    def max_exponent(self):
        return next(reversed(self._terms)) if self._terms else None

    def is_t_pure(self, modulus: int = 4) -> bool:
        return all(e % modulus == 0 for e in self._terms)

    def lattice_residues(self, modulus: int = 4) -> set[int]:
        return {e % modulus for e in self._terms}

    def truncate(self, order) -> "GradedSeries":
        if order >= self._order:
            return self
        return GradedSeries._raw({e: c for e, c in self._terms.items() if e < order}, order)

    def __repr__(self) -> str:
        return f"GradedSeries({self.pretty()})"

    def pretty(self, var: str = "s", max_terms: int | None = None) -> str:
        parts = []
        for i, (e, c) in enumerate(self._terms.items()):
            if max_terms is not None and i >= max_terms:
                parts.append("...")
                break
            if e == 0:
                parts.append(str(c))
            else:
                mono = var if e == 1 else f"{var}^{e}"
                parts.append(mono if c == 1 else f"{c}*{mono}")
        body = " + ".join(parts) if parts else "0"
        if self._order != INF:
            body += f" + O({var}^{self._order})"
        return body

    # comparisons ----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, GradedSeries):
            return self._order == other._order and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == GradedSeries.constant(other, self._order)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def agrees_with(self, other: "GradedSeries", order=None) -> bool:
        """Equality of all coefficients below the common (or given) order."""
        common = min(self._order, other._order)
        if order is not None:
            if order > common:
                return False
            common = order
        a = self.truncate(common)._terms
        b = other.truncate(common)._terms
        return a == b

    def difference_valuation(self, other: "GradedSeries"):
        return (self - other).valuation()

    # ring operations ------------------------------------------------------
    @staticmethod
    def _coerce(value) -> "GradedSeries":
        if isinstance(value, GradedSeries):
            return value
        return GradedSeries.constant(as_rational(value))

    def __neg__(self) -> "GradedSeries":
        return GradedSeries._raw({e: -c for e, c in self._terms.items()}, self._order)

    def __pos__(self):
        return self

    def __add__(self, other) -> "GradedSeries":
        if not isinstance(other, GradedSeries):
            try:
                other = GradedSeries._coerce(other)
            except TypeError:
                return NotImplemented
        order = min(self._order, other._order)
        out = {e: c for e, c in self._terms.items() if e < order}
        for e, c in other._terms.items():
            if e >= order:
                break
            v = out.get(e)
            out[e] = c if v is None else v + c
        return GradedSeries._raw({e: out[e] for e in sorted(out) if out[e]}, order)

    __radd__ = __add__

    def __sub__(self, other) -> "GradedSeries":
        if not isinstance(other, GradedSeries):
            try:
                other = GradedSeries._coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "GradedSeries":
        return GradedSeries._coerce(other) - self

    def scale(self, c) -> "GradedSeries":
        c = as_rational(c)
        if not c:
            return GradedSeries.zero(self._order if not self._terms else INF).truncate(self._order)
        return GradedSeries._raw({e: v * c for e, v in self._terms.items()}, self._order)

    def __mul__(self, other) -> "GradedSeries":
        if not isinstance(other, GradedSeries):
            try:
                return self.scale(as_rational(other))
            except TypeError:
                return NotImplemented
        va, vb = self.valuation(), other.valuation()
        order = min(va + other._order, vb + self._order)
        if not self._terms or not other._terms:
            return GradedSeries._raw({}, order)
        out: dict[int, Fraction] = {}
        bitems = list(other._terms.items())
        for ea, ca in self._terms.items():
            limit = order - ea
            for eb, cb in bitems:
                if eb >= limit:
                    break
                k = ea + eb
                v = out.get(k)
                out[k] = ca * cb if v is None else v + ca * cb
        return GradedSeries._raw({e: out[e] for e in sorted(out) if out[e]}, order)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other) -> "GradedSeries":
        if not isinstance(other, GradedSeries):
            c = as_rational(other)
            if not c:
                raise ZeroDivisor("division by zero scalar")
            return self.scale(1 / c)
        return self.div(other)

    def __rtruediv__(self, other) -> "GradedSeries":
        return GradedSeries._coerce(other).div(self)

    def __pow__(self, n: int) -> "GradedSeries":
        if not isinstance(n, int):
            return self.pow_rational(n)
        if n < 0:
            return GradedSeries.constant(1).div(self) ** (-n)
        result = GradedSeries.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, k: int) -> "GradedSeries":
        """Multiply by s^k."""
        return GradedSeries._raw({e + k: c for e, c in self._terms.items()}, self._order + k)

    def inflate(self, k: int) -> "GradedSeries":
        """Substitute s -> s^k (used to move a t-series onto the s-lattice)."""
        if k <= 0:
            raise ValueError("inflate needs a positive factor")
        return GradedSeries._raw({e * k: c for e, c in self._terms.items()}, self._order * k)

    def deflate(self, k: int) -> "GradedSeries":
        """Inverse of ``inflate``; all exponents must be multiples of ``k``."""
        if any(e % k for e in self._terms):
            raise NonLatticeExponent(f"exponents not all divisible by {k}")
        order = self._order if self._order == INF else -((-self._order) // k)
        return GradedSeries._raw({e // k: c for e, c in self._terms.items()}, order)

    # dense helpers --------------------------------------------------------
    def _relative(self, length: int) -> list[Fraction]:
        v = self.valuation()
        return [self._terms.get(v + i, Fraction(0)) for i in range(length)]

    def div(self, other: "GradedSeries") -> "GradedSeries":
        if not other._terms:
            raise ZeroDivisor("divisor has no nonzero coefficient to its truncation order")
        vb, b0 = other.leading()
        if not self._terms:
            return GradedSeries._raw({}, self._order - vb)
        va = self.valuation()
        prec = min(self._order - va, other._order - vb)
        vq = va - vb
        if prec == INF:
            # exact quotient only when the division terminates
            return self._exact_div(other)
        prec = int(prec)
        a = self._relative(prec)
        b = other._relative(prec)
        nz = [(j, bj) for j, bj in enumerate(b) if j and bj]
        inv0 = 1 / b0
        q: list[Fraction] = [Fraction(0)] * prec
        for k in range(prec):
            acc = a[k]
            for j, bj in nz:
                if j > k:
                    break
                qk = q[k - j]
                if qk:
                    acc -= bj * qk
            q[k] = acc * inv0
        return GradedSeries._raw({vq + i: c for i, c in enumerate(q) if c}, vq + prec)

    def _exact_div(self, other: "GradedSeries") -> "GradedSeries":
        rem = dict(self._terms)
        vb, b0 = other.leading()
        bitems = list(other._terms.items())
        q: dict[int, Fraction] = {}
        guard = 0
        while rem:
            e = min(rem)
            c = rem[e] / b0
            q[e - vb] = c
            for eb, cb in bitems:
                k = e - vb + eb
                v = rem.get(k, Fraction(0)) - c * cb
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
            guard += 1
            if guard > 100000:
                raise SeriesError("division of exact series does not terminate; truncate first")
        return GradedSeries._raw({e: q[e] for e in sorted(q)}, INF)

    def inverse(self) -> "GradedSeries":
        return GradedSeries.constant(1).div(self)

    def pow_rational(self, p) -> "GradedSeries":
        p = as_rational(p)
        if not self._terms:
            raise ZeroDivisor("cannot raise a series with no known terms")
        v, c0 = self.leading()
        if (v * p).denominator != 1:
            raise NonLatticeExponent(f"leading exponent {v} times {p} is not an integer")
        if c0 != 1:
            raise NonUnitLeading(f"leading coefficient {c0} is not 1")
        if p == 0:
            return GradedSeries.constant(1, INF if self._order == INF else self._order - v)
        prec = self._order - v
        vr = int(v * p)
        if prec == INF:
            if p.denominator == 1 and p > 0:
                return self ** int(p)
            raise SeriesError("pow_rational of an exact series needs a truncation order")
        prec = int(prec)
        g = self._relative(prec)
        nz = [(j, gj) for j, gj in enumerate(g) if j and gj]
        f: list[Fraction] = [Fraction(0)] * prec
        f[0] = Fraction(1)
        for k in range(1, prec):
            acc = Fraction(0)
            for j, gj in nz:
                if j > k:
                    break
                fk = f[k - j]
                if fk:
                    acc += (p * j - (k - j)) * gj * fk
            f[k] = acc / k
        return GradedSeries._raw({vr + i: c for i, c in enumerate(f) if c}, vr + prec)

    def sqrt(self) -> "GradedSeries":
        return self.pow_rational(Fraction(1, 2))

    # calculus -------------------------------------------------------------
    def derivative_s(self) -> "GradedSeries":
        return GradedSeries._raw(
            {e - 1: c * e for e, c in self._terms.items() if e}, self._order - 1
        )

    def derivative_t(self) -> "GradedSeries":
        """d/dt with t = s^4, i.e. (1/(4 s^3)) d/ds."""
        return GradedSeries._raw(
            {e - 4: c * Fraction(e, 4) for e, c in self._terms.items() if e}, self._order - 4
        )

    def integrate_s(self) -> "GradedSeries":
        if -1 in self._terms:
            raise SeriesError("cannot integrate an s^-1 term")
        return GradedSeries._raw(
            {e + 1: c / (e + 1) for e, c in self._terms.items()}, self._order + 1
        )

    def log_derivative_t(self) -> "GradedSeries":
        return self.derivative_t().div(self)

    def log(self) -> "GradedSeries":
        if self.valuation() != 0 or self._terms.get(0) != 1:
            raise NonUnitLeading("log needs a series of the form 1 + O(s)")
        prec = self._order
        if prec == INF:
            raise SeriesError("log of an exact series needs a truncation order")
        prec = int(prec)
        a = self._relative(prec)
        nz = [(j, aj) for j, aj in enumerate(a) if j and aj]
        f: list[Fraction] = [Fraction(0)] * prec
        for k in range(1, prec):
            acc = k * a[k]
            for j, aj in nz:
                if j >= k:
                    break
                fk = f[k - j]
                if fk:
                    acc -= (k - j) * fk * aj
            f[k] = acc / k
        return GradedSeries._raw({i: c for i, c in enumerate(f) if c}, prec)

    def exp(self) -> "GradedSeries":
        if self.valuation() < 1:
            raise NonzeroConstantTerm("exp needs a series with positive valuation")
        prec = self._order
        if prec == INF:
            raise SeriesError("exp of an exact series needs a truncation order")
        prec = int(prec)
        b = [Fraction(0)] * prec
        for e, c in self._terms.items():
            b[e] = c
        nz = [(j, j * bj) for j, bj in enumerate(b) if bj]
        f: list[Fraction] = [Fraction(0)] * prec
        f[0] = Fraction(1)
        for k in range(1, prec):
            acc = Fraction(0)
            for j, jb in nz:
                if j > k:
                    break
                fk = f[k - j]
                if fk:
                    acc += jb * fk
            f[k] = acc / k
        return GradedSeries._raw({i: c for i, c in enumerate(f) if c}, prec)

    def compose(self, inner: "GradedSeries") -> "GradedSeries":
        """``self(inner(s))``; ``self`` a power series, ``inner`` with positive valuation."""
        if inner.valuation() < 1:
            raise NonzeroConstantTerm("inner series must have zero constant term")
        if self._terms and next(iter(self._terms)) < 0:
            raise SeriesError("outer series must be a power series")
        vi = inner.valuation()
        limit = self._order * vi if self._order != INF else INF
        result = GradedSeries.zero(INF)
        power = GradedSeries.constant(1)
        last = 0
        for e, c in self._terms.items():
            while last < e:
                power = power * inner
                last += 1
                if power.valuation() >= limit:
                    break
            if power.valuation() >= limit:
                break
            result = result + power.scale(c)
        return result.truncate(limit)

    def reversion(self) -> "GradedSeries":
        """Compositional inverse of a series ``c1 s + c2 s^2 + ...`` with c1 != 0."""
        if self.valuation() != 1:
            raise SeriesError("reversion needs valuation exactly 1")
        order = self._order
        if order == INF:
            raise SeriesError("reversion of an exact series needs a truncation order")
        c1 = self._terms[1]
        h = self.shift(-1).scale(1 / c1)  # unit leading, known to order-1
        out: dict[int, Fraction] = {}
        for k in range(1, int(order)):
            hk = h.pow_rational(-k)
            out[k] = hk[k - 1] / k / c1**k
        return GradedSeries(out, order)

    # numeric --------------------------------------------------------------
    def evaluate(self, s_value):
        total = 0
        for e, c in self._terms.items():
            total += float(c) * s_value**e if isinstance(s_value, float) else (c.numerator * s_value**e) / c.denominator
        return total

    def tail_estimate(self, s_value) -> float:
        """Magnitude of the last retained term, a heuristic for the truncation error."""
        if not self._terms:
            return 0.0
        e = next(reversed(self._terms))
        return abs(float(self._terms[e]) * float(s_value) ** e)

    # serialization --------------------------------------------------------
    def to_json_obj(self, variable: str = "s") -> dict:
        return {
            "variable": variable,
            "truncation": None if self._order == INF else int(self._order),
            "terms": [[e, format_rational(c)] for e, c in self._terms.items()],
        }

    def to_json(self, variable: str = "s") -> str:
        return json.dumps(self.to_json_obj(variable), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "GradedSeries":
        order = obj.get("truncation")
        return cls({int(e): parse_rational(c) for e, c in obj["terms"]}, INF if order is None else int(order))

    @classmethod
    def from_json(cls, text: str) -> "GradedSeries":
        return cls.from_json_obj(json.loads(text))


# ---------------------------------------------------------------------------
# bivariate series
# ---------------------------------------------------------------------------

_ZERO = GradedSeries.zero(INF)
_ONE = GradedSeries.constant(1)


class BiSeries:
    """Series in x with GradedSeries coefficients: ``sum_k c_k(s) x^k + O(x^x_order)``."""

    __slots__ = ("_coeffs", "_x_order")

    def __init__(self, coeffs: Mapping[int, GradedSeries] = (), x_order=INF):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        clean = {}
        for k, c in items:
            k = int(k)
            if k < 0:
                raise ValueError("x-exponents must be nonnegative")
            if k >= x_order:
                continue
            c = GradedSeries._coerce(c)
            if not c.is_exact_zero():
                clean[k] = c
        self._coeffs = {k: clean[k] for k in sorted(clean)}
        self._x_order = x_order

    @classmethod
    def _raw(cls, coeffs: dict[int, GradedSeries], x_order) -> "BiSeries":
        obj = cls.__new__(cls)
        obj._coeffs = coeffs
        obj._x_order = x_order
        return obj

    @classmethod
    def from_graded(cls, g: GradedSeries, x_order=INF) -> "BiSeries":
        return cls({0: g}, x_order)

    @classmethod
    def from_x_series(cls, f: GradedSeries) -> "BiSeries":
        """Lift a univariate series in x with rational coefficients."""
        if f.valuation() < 0:
            raise SeriesError("x-series must be a power series")
        return cls({e: GradedSeries.constant(c) for e, c in f.items()}, f.order)

    @classmethod
    def x(cls) -> "BiSeries":
        return cls({1: _ONE})

    @classmethod
    def constant(cls, c) -> "BiSeries":
        return cls({0: GradedSeries._coerce(c)})

    # accessors ------------------------------------------------------------
    @property
    def x_order(self):
        return self._x_order

    @property
    def s_order(self):
        """Smallest s-truncation over stored coefficients."""
        return min((c.order for c in self._coeffs.values()), default=INF)

    @property
    def truncation(self):
        return (self._x_order, self.s_order)

    def coefficient(self, k: int) -> GradedSeries:
        if k >= self._x_order:
            raise TruncationExhausted(f"x^{k} is beyond x-truncation {self._x_order}")
        return self._coeffs.get(k, _ZERO)

    __getitem__ = coefficient

    def items(self):
        return iter(self._coeffs.items())

    @property
    def coefficients(self) -> dict[int, GradedSeries]:
        return dict(self._coeffs)

    def terms(self) -> dict[tuple[int, int], Fraction]:
        out = {}
        for k, c in self._coeffs.items():
            for e, v in c.items():
                out[(k, e)] = v
        return out

    def x_valuation(self):
        for k in self._coeffs:
            return k
        return self._x_order

    def __repr__(self) -> str:
        inner = ", ".join(f"x^{k}: {c.pretty(max_terms=4)}" for k, c in self._coeffs.items())
        return f"BiSeries({{{inner}}}, x_order={self._x_order})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiSeries):
            return NotImplemented
        return self._x_order == other._x_order and self._coeffs == other._coeffs

    __hash__ = None  # type: ignore[assignment]

    def agrees_with(self, other: "BiSeries", x_order=None, s_order=None) -> bool:
        xo = min(self._x_order, other._x_order)
        if x_order is not None:
            if x_order > xo:
                return False
            xo = x_order
        for k in range(int(min(xo, 10**6))) if xo != INF else sorted(set(self._coeffs) | set(other._coeffs)):
            a, b = self._coeffs.get(k, _ZERO), other._coeffs.get(k, _ZERO)
            so = min(a.order, b.order)
            if s_order is not None:
                if s_order > so:
                    return False
                so = s_order
            if not a.agrees_with(b, so):
                return False
        return True

    def is_zero_to_order(self) -> bool:
        return all(c.is_zero() for c in self._coeffs.values())

    def truncate(self, x_order=INF, s_order=INF) -> "BiSeries":
        return BiSeries._raw(
            {k: c.truncate(s_order) for k, c in self._coeffs.items() if k < x_order},
            min(self._x_order, x_order),
        )

    def parity_in_x(self) -> str:
        keys = [k for k, c in self._coeffs.items() if not c.is_zero()]
        if all(k % 2 == 0 for k in keys):
            return "even"
        if all(k % 2 == 1 for k in keys):
            return "odd"
        return "mixed"

    # ring operations ------------------------------------------------------
    @staticmethod
    def _coerce(value) -> "BiSeries":
        if isinstance(value, BiSeries):
            return value
        return BiSeries.constant(value)

    def __neg__(self) -> "BiSeries":
        return BiSeries._raw({k: -c for k, c in self._coeffs.items()}, self._x_order)

    def __add__(self, other) -> "BiSeries":
        other = BiSeries._coerce(other)
        xo = min(self._x_order, other._x_order)
        out = {k: c for k, c in self._coeffs.items() if k < xo}
        for k, c in other._coeffs.items():
            if k >= xo:
                continue
            out[k] = out[k] + c if k in out else c
        return BiSeries._raw({k: out[k] for k in sorted(out) if not out[k].is_exact_zero()}, xo)

    __radd__ = __add__

    def __sub__(self, other) -> "BiSeries":
        return self + (-BiSeries._coerce(other))

    def __rsub__(self, other) -> "BiSeries":
        return BiSeries._coerce(other) - self

    def map_coefficients(self, f: Callable[[GradedSeries], GradedSeries]) -> "BiSeries":
        return BiSeries({k: f(c) for k, c in self._coeffs.items()}, self._x_order)

    def scale(self, c) -> "BiSeries":
        if isinstance(c, GradedSeries):
            return self.map_coefficients(lambda g: g * c)
        c = as_rational(c)
        return self.map_coefficients(lambda g: g.scale(c))

    def __mul__(self, other) -> "BiSeries":
        if isinstance(other, GradedSeries):
            return self.scale(other)
        if not isinstance(other, BiSeries):
            try:
                return self.scale(as_rational(other))
            except TypeError:
                return NotImplemented
        va, vb = self.x_valuation(), other.x_valuation()
        xo = min(va + other._x_order, vb + self._x_order)
        out: dict[int, GradedSeries] = {}
        bitems = list(other._coeffs.items())
        for i, ca in self._coeffs.items():
            for j, cb in bitems:
                k = i + j
                if k >= xo:
                    break
                p = ca * cb
                out[k] = out[k] + p if k in out else p
        return BiSeries._raw({k: out[k] for k in sorted(out) if not out[k].is_exact_zero()}, xo)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int) -> "BiSeries":
        if not isinstance(n, int) or n < 0:
            raise ValueError("BiSeries powers must be nonnegative integers")
        result = BiSeries.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other) -> "BiSeries":
        if isinstance(other, GradedSeries):
            return self.map_coefficients(lambda g: g.div(other))
        if not isinstance(other, BiSeries):
            c = as_rational(other)
            if not c:
                raise ZeroDivisor("division by zero scalar")
            return self.scale(1 / c)
        return self.div(other)

    def div(self, other: "BiSeries") -> "BiSeries":
        if not other._coeffs:
            raise ZeroDivisor("divisor has no nonzero x-coefficient")
        m = other.x_valuation()
        b0 = other._coeffs[m]
        if b0.is_zero():
            raise ZeroDivisor("leading x-coefficient of divisor vanishes to its s-order")
        if not self._coeffs:
            return BiSeries._raw({}, self._x_order - m)
        va = self.x_valuation()
        vq = va - m
        prec = min(self._x_order - va, other._x_order - m)
        if prec == INF:
            raise SeriesError("BiSeries division of exact values needs an x-truncation")
        prec = int(prec)
        bs = [(j, other._coeffs[m + j]) for j in range(1, prec) if (m + j) in other._coeffs]
        q: list[GradedSeries] = []
        for k in range(prec):
            acc = self._coeffs.get(va + k, _ZERO)
            for j, bj in bs:
                if j > k:
                    break
                qk = q[k - j]
                if not qk.is_exact_zero():
                    acc = acc - bj * qk
            q.append(acc.div(b0) if not acc.is_exact_zero() else _ZERO)
        return BiSeries._raw(
            {vq + i: c for i, c in enumerate(q) if not c.is_exact_zero()}, vq + prec
        )

    # calculus -------------------------------------------------------------
    def derivative_x(self) -> "BiSeries":
        return BiSeries._raw(
            {k - 1: c.scale(k) for k, c in self._coeffs.items() if k}, self._x_order - 1
        )

    def integrate_x(self) -> "BiSeries":
        return BiSeries._raw(
            {k + 1: c.scale(Fraction(1, k + 1)) for k, c in self._coeffs.items()}, self._x_order + 1
        )

    def derivative_t(self) -> "BiSeries":
        return BiSeries._raw(
            {k: c.derivative_t() for k, c in self._coeffs.items()}, self._x_order
        )

    def derivative_s(self) -> "BiSeries":
        return BiSeries._raw(
            {k: c.derivative_s() for k, c in self._coeffs.items()}, self._x_order
        )

    def log_derivative_t(self) -> "BiSeries":
        return self.derivative_t().div(self)

    def shift_s(self, k: int) -> "BiSeries":
        return BiSeries._raw({j: c.shift(k) for j, c in self._coeffs.items()}, self._x_order)

    def truncate_s(self, order) -> "BiSeries":
        return BiSeries._raw({k: c.truncate(order) for k, c in self._coeffs.items()}, self._x_order)

    def rescale_x(self, factor: GradedSeries) -> "BiSeries":
        """Substitute x -> factor(s) * x."""
        out = {}
        power = _ONE
        last = 0
        for k, c in self._coeffs.items():
            while last < k:
                power = power * factor
                last += 1
            out[k] = c * power
        return BiSeries(out, self._x_order)

    def compose_x(self, inner: GradedSeries) -> "BiSeries":
        """Substitute x -> inner(y), ``inner`` a rational series with positive valuation."""
        if inner.valuation() < 1:
            raise NonzeroConstantTerm("inner series must have zero constant term")
        vi = inner.valuation()
        limit = self._x_order * vi if self._x_order != INF else INF
        out: dict[int, GradedSeries] = {}
        power = GradedSeries.constant(1)
        last = 0
        for k, c in self._coeffs.items():
            while last < k:
                power = power * inner
                last += 1
            limit = min(limit, power.order)
            for e, v in power.items():
                if e >= limit:
                    break
                term = c.scale(v)
                out[e] = out[e] + term if e in out else term
        return BiSeries({e: g for e, g in out.items() if e < limit}, limit)

    def exp(self) -> "BiSeries":
        xo = self._x_order
        if xo == INF:
            raise SeriesError("exp of an exact BiSeries needs an x-truncation")
        w0 = self._coeffs.get(0, _ZERO)
        f0 = w0.exp() if not w0.is_exact_zero() else _ONE
        xo = int(xo)
        f: list[GradedSeries] = [f0]
        jw = [(j, self._coeffs[j].scale(j)) for j in range(1, xo) if j in self._coeffs]
        for k in range(1, xo):
            acc = _ZERO
            for j, wj in jw:
                if j > k:
                    break
                acc = acc + wj * f[k - j]
            f.append(acc.scale(Fraction(1, k)))
        return BiSeries({k: c for k, c in enumerate(f)}, xo)

    def log(self) -> "BiSeries":
        xo = self._x_order
        if xo == INF:
            raise SeriesError("log of an exact BiSeries needs an x-truncation")
        a0 = self._coeffs.get(0)
        if a0 is None:
            raise NonUnitLeading("log needs a nonzero x^0 coefficient")
        xo = int(xo)
        f: list[GradedSeries] = [a0.log()]
        for k in range(1, xo):
            acc = self._coeffs.get(k, _ZERO).scale(k)
            for j in range(1, k):
                aj = self._coeffs.get(k - j)
                if aj is not None:
                    acc = acc - f[j].scale(j) * aj
            f.append(acc.div(a0).scale(Fraction(1, k)) if not acc.is_exact_zero() else _ZERO)
        return BiSeries({k: c for k, c in enumerate(f)}, xo)

    def substitute_x_zero(self) -> GradedSeries:
        return self.coefficient(0)

    def evaluate(self, x_value, s_value):
        total = 0
        for k, c in self._coeffs.items():
            total += c.evaluate(s_value) * x_value**k
        return total

    # serialization --------------------------------------------------------
    def to_json_obj(self, variables=("x", "s")) -> dict:
        xo, so = self.truncation
        return {
            "variables": list(variables),
            "truncation": [None if xo == INF else int(xo), None if so == INF else int(so)],
            "terms": [[k, e, format_rational(v)] for (k, e), v in sorted(self.terms().items())],
            "coefficient_orders": {
                str(k): (None if c.order == INF else int(c.order)) for k, c in self._coeffs.items()
            },
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "BiSeries":
        xo, so = obj["truncation"]
        xo = INF if xo is None else int(xo)
        so = INF if so is None else int(so)
        orders = {int(k): (INF if v is None else int(v)) for k, v in obj.get("coefficient_orders", {}).items()}
        terms: dict[int, dict[int, Fraction]] = {}
        for k, e, v in obj["terms"]:
            terms.setdefault(int(k), {})[int(e)] = parse_rational(v)
        keys = set(terms) | set(orders)
        return cls({k: GradedSeries(terms.get(k, {}), orders.get(k, so)) for k in keys}, xo)


def x_series(f: Callable[[int], object], order: int, start: int = 0) -> GradedSeries:
    """Rational univariate series from a coefficient function."""
    return GradedSeries({k: f(k) for k in range(start, order)}, order)


def sin_series(order: int) -> GradedSeries:
    return x_series(lambda k: Fraction((-1) ** ((k - 1) // 2), math.factorial(k)) if k % 2 else 0, order)


def cos_series(order: int) -> GradedSeries:
    return x_series(lambda k: Fraction((-1) ** (k // 2), math.factorial(k)) if k % 2 == 0 else 0, order)


def arcsin_series(order: int) -> GradedSeries:
    def c(k):
        if k % 2 == 0:
            return 0
        n = (k - 1) // 2
        return Fraction(math.factorial(2 * n), 4**n * math.factorial(n) ** 2 * (2 * n + 1))

    return x_series(c, order)


def binomial_series(p, order: int) -> GradedSeries:
    """(1 + s)^p to the given order."""
    p = as_rational(p)
    coeffs = []
    c = Fraction(1)
    for k in range(order):
        coeffs.append(c)
        c = c * (p - k) / (k + 1)
    return GradedSeries.from_dense(coeffs, 0, order)
