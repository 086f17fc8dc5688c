"""Polynomials in the elliptic integrals K, E with polynomial-in-s coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .series import GradedSeries, format_rational

Coeff = dict[int, Fraction]  # s-exponent -> rational


def _clean(c: Mapping[int, Fraction]) -> Coeff:
    return {e: Fraction(v) for e, v in sorted(c.items()) if v}


def _cmul(a: Coeff, b: Coeff) -> Coeff:
    out: dict[int, Fraction] = {}
    for ea, va in a.items():
        for eb, vb in b.items():
            out[ea + eb] = out.get(ea + eb, 0) + va * vb
    return _clean(out)


class KEPolynomial:
    """Finite sum of c_{ij}(s) K^i E^j; coefficients are Laurent polynomials in s."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Mapping[int, object]] = ()):
        clean = {}
        for key, coeff in dict(terms).items():
            c = _clean({int(e): Fraction(v) for e, v in dict(coeff).items()})
            if c:
                clean[(int(key[0]), int(key[1]))] = c
        self._terms = dict(sorted(clean.items()))

    @classmethod
    def constant(cls, c) -> "KEPolynomial":
        return cls({(0, 0): {0: c}})

    @classmethod
    def K(cls) -> "KEPolynomial":
        return cls({(1, 0): {0: 1}})

    @classmethod
    def E(cls) -> "KEPolynomial":
        return cls({(0, 1): {0: 1}})

    @classmethod
    def s(cls) -> "KEPolynomial":
        return cls({(0, 0): {1: 1}})

    @classmethod
    def t(cls) -> "KEPolynomial":
        return cls({(0, 0): {4: 1}})

    @classmethod
    def parse(cls, expr: str) -> "KEPolynomial":
        """Evaluate an arithmetic expression in K, E, s, t with rational literals."""
        namespace = {"K": cls.K(), "E": cls.E(), "s": cls.s(), "t": cls.t(), "F": Fraction}
        value = eval(expr.replace("^", "**"), {"__builtins__": {}}, namespace)
        return value if isinstance(value, KEPolynomial) else cls.constant(value)

    @property
    def terms(self) -> dict[tuple[int, int], Coeff]:
        return {k: dict(v) for k, v in self._terms.items()}

    def coefficient(self, i: int, j: int) -> Coeff:
        return dict(self._terms.get((i, j), {}))

    def monomials(self) -> list[tuple[int, int]]:
        return list(self._terms)

    def degrees(self) -> set[int]:
        return {i + j for i, j in self._terms}

    def is_zero(self) -> bool:
        return not self._terms

    def is_homogeneous(self, degree: int) -> bool:
        return all(i + j == degree for i, j in self._terms)

    def e_free(self) -> bool:
        return all(j == 0 for _, j in self._terms)

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "KEPolynomial":
        if isinstance(other, KEPolynomial):
            return other
        return KEPolynomial.constant(other)

    def __add__(self, other) -> "KEPolynomial":
        other = self._coerce(other)
        out = self.terms
        for key, c in other._terms.items():
            cur = out.setdefault(key, {})
            for e, v in c.items():
                cur[e] = cur.get(e, 0) + v
        return KEPolynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "KEPolynomial":
        return KEPolynomial({k: {e: -v for e, v in c.items()} for k, c in self._terms.items()})

    def __sub__(self, other) -> "KEPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "KEPolynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "KEPolynomial":
        if not isinstance(other, KEPolynomial):
            other = Fraction(other)
            return KEPolynomial({k: {e: v * other for e, v in c.items()} for k, c in self._terms.items()})
        out: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                cur = out.setdefault((i1 + i2, j1 + j2), {})
                for e, v in _cmul(c1, c2).items():
                    cur[e] = cur.get(e, 0) + v
        return KEPolynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "KEPolynomial":
        return self * (1 / Fraction(other))

    def __pow__(self, n: int) -> "KEPolynomial":
        result = KEPolynomial.constant(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, KEPolynomial):
            try:
                other = KEPolynomial.constant(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._terms == other._terms

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"KEPolynomial({self.pretty()})"

    # evaluation -----------------------------------------------------------
    def to_series(self, K: GradedSeries, E: GradedSeries) -> GradedSeries:
        """Substitute s-series for K and E."""
        order = min(K.order, E.order)
        total = GradedSeries.zero(order)
        kp = [GradedSeries.constant(1)]
        ep = [GradedSeries.constant(1)]
        for i, j in self._terms:
            while len(kp) <= i:
                kp.append(kp[-1] * K)
            while len(ep) <= j:
                ep.append(ep[-1] * E)
        for (i, j), c in self._terms.items():
            total = total + kp[i] * ep[j] * GradedSeries(c)
        return total

    def evaluate(self, K, E, s):
        total = 0
        for (i, j), c in self._terms.items():
            total += sum(v * s**e for e, v in c.items()) * K**i * E**j
        return total

    def pretty(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (i, j), c in self._terms.items():
            coeff = " + ".join(f"{format_rational(v)}*s^{e}" if e else format_rational(v) for e, v in c.items())
            mono = "*".join(x for x in (f"K^{i}" if i else "", f"E^{j}" if j else "") if x)
            parts.append(f"({coeff})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def to_json_obj(self) -> list:
        return [
            [i, j, [[e, format_rational(v)] for e, v in c.items()]]
            for (i, j), c in self._terms.items()
        ]

    @classmethod
    def from_json_obj(cls, obj: Iterable) -> "KEPolynomial":
        return cls({(i, j): {e: Fraction(v) for e, v in c} for i, j, c in obj})
