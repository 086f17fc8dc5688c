"""n-fold form-factor integrals C^(n)(M, N) as exact s-series and numerically.

The integrand is

    (1/n!) prod_i x_i^M / sinh(gamma_i) * prod_{i<j} h_ij^2 * cos(N sum_i w_i)

with y = s + 1/s - cos w, sinh(gamma) = sqrt(y^2 - 1), x = y - sinh(gamma) and
h_ij^2 = 4 x_i x_j sin^2((w_i - w_j)/2) / (1 - x_i x_j)^2, averaged over the
n-torus.  Writing 4 sin^2((a-b)/2) = 2 - e^{i(a-b)} - e^{-i(a-b)} and
expanding 1/(1 - x_i x_j)^2 turns the average into sums of products of
one-angle moments

    I(a, m) = <x^a cos(m w) / sinh(gamma)>,

which :func:`formfactor_series` contracts one angle at a time.  The
:class:`FourierLaurent` route expands the full integrand instead and keeps
the zero-frequency part; it is slower and serves as a cross-check.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import flint
import numpy as np

from .errors import ConvergenceError, DomainError, TruncationExhausted
from .series import GradedSeries

_SC = flint.fmpq_mpoly_ctx.get(("s", "c"), ordering="lex")
_s, _c = _SC.gens()
_ONE = _SC.from_dict({(0, 0): 1})


def _q(v: Fraction) -> flint.fmpq:
    return flint.fmpq(v.numerator, v.denominator)


def _fr(v) -> Fraction:
    return Fraction(int(v.p), int(v.q))


def _trunc(p, L: int):
    """Drop s-degrees >= L."""
    return _SC.from_dict({(int(m[0]), int(m[1])): v for m, v in zip(p.monoms(), p.coeffs()) if m[0] < L})


def _binomial(z, alpha: Fraction, L: int):
    """(1 + z)^alpha truncated below s^L, for z = O(s)."""
    out = _ONE
    term = _ONE
    coef = Fraction(1)
    for k in range(1, L):
        term = _trunc(term * z, L)
        if term.is_zero():
            break
        coef = coef * (alpha - k + 1) / k
        out += term * _q(coef)
    return out


class OneAngleSeries:
    """s-expansions of sinh(gamma), 1/sinh(gamma) and x with cos(w) = c kept symbolic.

    With A = 1 - s(1 + c) + s^2 and B = 1 + s(1 - c) + s^2 one has
    s^2 (y^2 - 1) = A B, so sinh(gamma) = s^{-1} sqrt(AB) and
    x = s^{-1} (1 + s^2 - s c - sqrt(AB)).  Polynomials in (s, c) below are
    relative series: ``inv_sinh_rel`` is s^{-1}/sinh(gamma), ``x_rel`` is x/s,
    both exact below s^L.
    """

    def __init__(self, L: int):
        if L < 1:
            raise TruncationExhausted("need at least one relative order")
        self.L = L
        A = _ONE - _s * (_ONE + _c) + _s * _s
        B = _ONE + _s * (_ONE - _c) + _s * _s
        z = _trunc(A * B, L + 2) - _ONE
        root = _binomial(z, Fraction(1, 2), L + 2)
        self.sinh_rel = _trunc(root, L)  # s * sinh(gamma)
        self.inv_sinh_rel = _binomial(z, Fraction(-1, 2), L)
        numer = _ONE + _s * _s - _s * _c - root  # = s * x, starts at s^2
        self.x_rel = _trunc(
            _SC.from_dict({(int(m[0]) - 2, int(m[1])): v for m, v in zip(numer.monoms(), numer.coeffs())}), L
        )
        self._x_powers = [_ONE]
        self._moments: dict[tuple[int, int], GradedSeries] = {}

    def x_power(self, a: int):
        while len(self._x_powers) <= a:
            self._x_powers.append(_trunc(self._x_powers[-1] * self.x_rel, self.L))
        return self._x_powers[a]

    def moment(self, a: int, m: int) -> GradedSeries:
        """<x^a cos(m w)/sinh(gamma)> with exponents a+1 .. a+L exact."""
        m = abs(m)
        key = (a, m)
        if key not in self._moments:
            p = _trunc(self.x_power(a) * self.inv_sinh_rel, self.L)
            terms: dict[int, Fraction] = {}
            for mono, v in zip(p.monoms(), p.coeffs()):
                r, k = int(mono[0]), int(mono[1])
                if k < m or (k - m) % 2:
                    continue
                # <cos^k w cos(m w)> = 2^{-k} binom(k, (k - m)/2)
                val = _fr(v) * Fraction(math.comb(k, (k - m) // 2), 2**k)
                terms[a + 1 + r] = terms.get(a + 1 + r, 0) + val
            self._moments[key] = GradedSeries(terms, a + 1 + self.L)
        return self._moments[key]


@lru_cache(maxsize=8)
def _one_angle(L: int) -> OneAngleSeries:
    return OneAngleSeries(L)


def _relative_poly(g: GradedSeries, offset: int, L: int) -> flint.fmpq_poly:
    coeffs = [Fraction(0)] * L
    for e, v in g.items():
        r = e - offset
        if 0 <= r < L:
            coeffs[r] = v
    return flint.fmpq_poly([_q(c) for c in coeffs])


def _check_args(n: int, M: int, N: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if M < 0 or N < 0:
        raise ValueError("M and N must be nonnegative")


def formfactor_series(n: int, M: int, N: int, order_s: int) -> GradedSeries:
    """Exact s-series of C^(n)(M, N) with every exponent below ``order_s`` exact."""
    _check_args(n, M, N)
    base = M + n - 1  # every x_i carries x^M times x^(n-1) from the h factors
    offset = n * (base + 1)
    L = order_s - offset
    if L <= 0:
        return GradedSeries.zero(order_s)
    one_angle = _one_angle(L)
    moment_cache: dict[tuple[int, int], flint.fmpq_poly] = {}

    def moment_rel(extra: int, m: int) -> flint.fmpq_poly:
        key = (extra, abs(m))
        if key not in moment_cache:
            if extra >= L:
                moment_cache[key] = flint.fmpq_poly([])
            else:
                moment_cache[key] = _relative_poly(one_angle.moment(base + extra, m), base + 1, L)
        return moment_cache[key]

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    # remaining[k][q]: pair factors touching angle q after the k-th pair
    remaining = []
    for k in range(len(pairs)):
        r = [0] * n
        for a, b in pairs[k + 1:]:
            r[a] += 1
            r[b] += 1
        remaining.append(r)

    # state: (x-exponent extras, frequencies) of the angles not yet integrated
    states: dict[tuple, flint.fmpq_poly] = {((0,) * n, (0,) * n): flint.fmpq_poly([1])}
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            rem = remaining[k]
            k += 1
            new: dict[tuple, flint.fmpq_poly] = {}
            for (ex, ms), value in states.items():
                used = sum(ex)
                for kk in range(L):
                    if used + 2 * kk >= L:
                        break
                    for dm, cf in ((0, 2), (1, -1), (-1, -1)):
                        ms2 = list(ms)
                        ms2[i] += dm
                        ms2[j] -= dm
                        ex2 = list(ex)
                        ex2[i] += kk
                        ex2[j] += kk
                        # a frequency can only move by one per remaining pair factor
                        bound = used + 2 * kk + sum(
                            max(0, abs(ms2[q] + N) - rem[q]) for q in range(i, n)
                        )
                        if bound >= L:
                            continue
                        key = (tuple(ex2), tuple(ms2))
                        w = value * (cf * (kk + 1))
                        new[key] = new[key] + w if key in new else w
            states = new
        integrated: dict[tuple, flint.fmpq_poly] = {}
        for (ex, ms), value in states.items():
            p = value * moment_rel(ex[i], ms[i] + N)
            if p.degree() >= L:
                p = flint.fmpq_poly(p.coeffs()[:L])
            ex2 = ex[:i] + (0,) + ex[i + 1:]
            ms2 = ms[:i] + (0,) + ms[i + 1:]
            key = (ex2, ms2)
            integrated[key] = integrated[key] + p if key in integrated else p
        states = {key: v for key, v in integrated.items() if not v.is_zero()}
    total = sum(states.values(), flint.fmpq_poly([]))
    scale = Fraction(1, math.factorial(n))
    return GradedSeries(
        {offset + r: _fr(c) * scale for r, c in enumerate(total.coeffs()) if r < L and c != 0}, order_s
    )


# ---------------------------------------------------------------------------
# full integrand expansion
# ---------------------------------------------------------------------------

class FourierLaurent:
    """Laurent series in s whose coefficients are trigonometric polynomials in n angles.

    ``terms`` maps an s-exponent to {frequency vector: rational}; the
    coefficient of v equals that of -v (real integrand).  Exponents below
    ``order`` are exact.
    """

    __slots__ = ("n", "_terms", "order")

    def __init__(self, n: int, terms: Mapping[int, Mapping[tuple, object]], order):
        self.n = n
        self.order = order
        clean = {}
        for e, tp in terms.items():
            if e >= order:
                continue
            tp = {tuple(v): Fraction(c) for v, c in tp.items() if c}
            if tp:
                clean[e] = tp
        self._terms = dict(sorted(clean.items()))

    @property
    def terms(self) -> dict[int, dict[tuple, Fraction]]:
        return {e: dict(tp) for e, tp in self._terms.items()}

    def valuation(self):
        return next(iter(self._terms), self.order)

    def coefficient(self, e: int) -> dict[tuple, Fraction]:
        if e >= self.order:
            raise TruncationExhausted(f"s^{e} lies beyond the truncation s^{self.order}")
        return dict(self._terms.get(e, {}))

    @classmethod
    def from_one_angle(cls, n: int, angle: int, poly, shift: int, order) -> "FourierLaurent":
        """Embed s^shift * poly(s, cos w_angle) into n angles."""
        terms: dict[int, dict[tuple, Fraction]] = {}
        for mono, v in zip(poly.monoms(), poly.coeffs()):
            r, k = int(mono[0]), int(mono[1])
            val = _fr(v) / 2**k
            tp = terms.setdefault(shift + r, {})
            for j in range(k + 1):
                freq = [0] * n
                freq[angle] = k - 2 * j
                key = tuple(freq)
                tp[key] = tp.get(key, 0) + val * math.comb(k, j)
        return cls(n, terms, order)

    @classmethod
    def trig(cls, n: int, tp: Mapping[tuple, object]) -> "FourierLaurent":
        return cls(n, {0: tp}, math.inf)

    def is_real(self) -> bool:
        return all(tp.get(tuple(-x for x in v), 0) == c for tp in self._terms.values() for v, c in tp.items())

    def __add__(self, other: "FourierLaurent") -> "FourierLaurent":
        order = min(self.order, other.order)
        out = self.terms
        for e, tp in other._terms.items():
            cur = out.setdefault(e, {})
            for v, c in tp.items():
                cur[v] = cur.get(v, 0) + c
        return FourierLaurent(self.n, out, order)

    def scale(self, c) -> "FourierLaurent":
        c = Fraction(c)
        return FourierLaurent(self.n, {e: {v: x * c for v, x in tp.items()} for e, tp in self._terms.items()}, self.order)

    def __mul__(self, other: "FourierLaurent") -> "FourierLaurent":
        va, vb = self.valuation(), other.valuation()
        order = min(va + other.order, vb + self.order)
        out: dict[int, dict[tuple, Fraction]] = {}
        for ea, ta in self._terms.items():
            for eb, tb in other._terms.items():
                e = ea + eb
                if e >= order:
                    break
                cur = out.setdefault(e, {})
                for fa, ca in ta.items():
                    for fb, cb in tb.items():
                        f = tuple(x + y for x, y in zip(fa, fb))
                        cur[f] = cur.get(f, 0) + ca * cb
        return FourierLaurent(self.n, out, order)

    def truncate(self, order) -> "FourierLaurent":
        return FourierLaurent(self.n, self._terms, min(order, self.order))

    def shift_frequency(self, delta: tuple) -> "FourierLaurent":
        return FourierLaurent(
            self.n,
            {e: {tuple(x + d for x, d in zip(v, delta)): c for v, c in tp.items()} for e, tp in self._terms.items()},
            self.order,
        )

    def zero_frequency(self) -> GradedSeries:
        zero = (0,) * self.n
        return GradedSeries({e: tp.get(zero, 0) for e, tp in self._terms.items()}, self.order)


def one_angle_factors(n: int, angle: int, rel: int) -> dict[str, FourierLaurent]:
    """sinh(gamma), 1/sinh(gamma) and x for one angle, each with ``rel`` exact orders."""
    oa = _one_angle(rel)
    return {
        "sinh": FourierLaurent.from_one_angle(n, angle, oa.sinh_rel, -1, -1 + rel),
        "inv_sinh": FourierLaurent.from_one_angle(n, angle, oa.inv_sinh_rel, 1, 1 + rel),
        "x": FourierLaurent.from_one_angle(n, angle, oa.x_rel, 1, 1 + rel),
    }


def pair_factor(n: int, i: int, j: int, xi: FourierLaurent, xj: FourierLaurent, rel: int) -> FourierLaurent:
    """h_ij^2 = 4 x_i x_j sin^2((w_i - w_j)/2) / (1 - x_i x_j)^2 with ``rel`` exact orders."""
    u = (xi * xj).truncate(2 + rel)
    zero = (0,) * n
    power = FourierLaurent(n, {0: {zero: 1}}, math.inf)
    geo = FourierLaurent(n, {0: {zero: 1}}, rel)
    k = 1
    while True:
        power = (power * u).truncate(rel)
        if power.valuation() >= rel:
            break
        geo = geo + power.scale(k + 1)
        k += 1
    d = [0] * n
    d[i], d[j] = 1, -1
    sin2 = FourierLaurent.trig(n, {zero: Fraction(2), tuple(d): Fraction(-1), tuple(-x for x in d): Fraction(-1)})
    return (u * sin2 * geo).truncate(2 + rel)


def integrand(n: int, M: int, N: int, order_s: int) -> FourierLaurent:
    """The full integrand (without 1/n!) with exponents below ``order_s`` exact."""
    _check_args(n, M, N)
    leading = n * (M + 1) + n * (n - 1)
    rel = order_s - leading
    if rel <= 0:
        return FourierLaurent(n, {}, order_s)
    factors = [one_angle_factors(n, i, rel) for i in range(n)]
    total = FourierLaurent(n, {0: {(0,) * n: 1}}, math.inf)
    for i in range(n):
        f = factors[i]["inv_sinh"]
        for _ in range(M):
            f = (f * factors[i]["x"]).truncate(f.valuation() + 1 + rel)
        total = total * f
    for i, j in itertools.combinations(range(n), 2):
        total = (total * pair_factor(n, i, j, factors[i]["x"], factors[j]["x"], rel)).truncate(order_s)
    if N:
        shift = tuple([N] * n)
        total = (total.shift_frequency(shift) + total.shift_frequency(tuple(-x for x in shift))).scale(Fraction(1, 2))
    return total.truncate(order_s)


def formfactor_series_direct(n: int, M: int, N: int, order_s: int) -> GradedSeries:
    """Zero-frequency part of :func:`integrand`, divided by n!."""
    return integrand(n, M, N, order_s).zero_frequency().scale(Fraction(1, math.factorial(n)))


# ---------------------------------------------------------------------------
# numeric quadrature
# ---------------------------------------------------------------------------

def _map_parameter(s: float) -> float:
    """Clustering strength for w = 2 atan(kappa tan(theta/2)).

    The integrand has branch points at w = i acosh(s + 1/s - 1); the map with
    kappa ~ sqrt(d/2) balances that distance against the map's own poles.
    """
    d = math.acosh(s + 1 / s - 1)
    return min(1.0, math.sqrt(d / 2))


def _angle_grid(G: int, s: float):
    kappa = _map_parameter(s)
    theta = (np.arange(G) + 0.5) * (2 * np.pi / G) - np.pi
    w = 2 * np.arctan(kappa * np.tan(theta / 2))
    dw = kappa * (1 + np.tan(theta / 2) ** 2) / (1 + (kappa * np.tan(theta / 2)) ** 2)
    y = s + 1 / s - np.cos(w)
    sinh = np.sqrt(y * y - 1)
    x = 1 / (y + sinh)
    return w, dw / G, sinh, x


def _torus_average(n: int, M: int, N: int, s: float, G: int) -> float:
    w, wt, sinh, x = _angle_grid(G, s)
    one = wt * x**M / sinh
    shape = [1] * (n - 1)

    def along(arr, axis):
        sh = list(shape)
        sh[axis] = G
        return arr.reshape(sh)

    rest_w = [along(w, a) for a in range(n - 1)]
    rest_x = [along(x, a) for a in range(n - 1)]
    rest_one = [along(one, a) for a in range(n - 1)]
    base = np.ones([G] * (n - 1)) if n > 1 else np.ones(())
    for a in range(n - 1):
        base = base * rest_one[a]
    for a, b in itertools.combinations(range(n - 1), 2):
        base = base * _h2(rest_x[a], rest_x[b], rest_w[a], rest_w[b])
    phase_rest = sum(rest_w) if n > 1 else 0.0
    # the midpoint grid is symmetric under w -> -w on all angles at once, which
    # maps the slab at g onto the slab at G-1-g
    total = 0.0
    for g in range((G + 1) // 2):
        slab = base * one[g]
        for a in range(n - 1):
            slab = slab * _h2(x[g], rest_x[a], w[g], rest_w[a])
        slab = slab * np.cos(N * (w[g] + phase_rest))
        weight = 1.0 if 2 * g + 1 == G else 2.0
        total += weight * float(np.sum(slab))
    return total


def _h2(xa, xb, wa, wb):
    return 4 * xa * xb * np.sin((wa - wb) / 2) ** 2 / (1 - xa * xb) ** 2


def formfactor_numeric(n: int, M: int, N: int, s_value: float, tol: float = 1e-10,
                       grid_cap: int | None = None) -> dict:
    """Tensor trapezoid rule on the n-torus after a periodic clustering map.

    The grid grows until two successive values agree within ``tol``.
    Returns {s, n, M, N, value, est_error, grid}.
    """
    _check_args(n, M, N)
    if n > 4:
        raise ValueError("numeric quadrature is provided for n <= 4")
    s = float(s_value)
    if not (0 < s < 1):
        raise DomainError(f"s must lie in (0, 1), got {s_value}")
    cap = grid_cap or {1: 4096, 2: 1024, 3: 256, 4: 96}[n]
    G = 8
    prev = _torus_average(n, M, N, s, G)
    while True:
        G2 = int(G * 1.5) + 1 if n >= 3 else 2 * G
        if G2 > cap:
            raise ConvergenceError(f"quadrature did not reach {tol} with grids up to {G}")
        cur = _torus_average(n, M, N, s, G2)
        err = abs(cur - prev)
        G, prev = G2, cur
        if err < tol:
            break
    return {"s": s, "n": n, "M": M, "N": N, "value": cur / math.factorial(n), "est_error": err / math.factorial(n), "grid": G}


__all__ = [
    "FourierLaurent",
    "OneAngleSeries",
    "formfactor_numeric",
    "formfactor_series",
    "formfactor_series_direct",
    "integrand",
    "one_angle_factors",
    "pair_factor",
]
