"""Lambda-extended diagonal correlations C_N in both temperature regimes.

``plus`` is the high-temperature regime (series odd in x), ``minus`` the
low-temperature one (series even in x).  The theta argument x is tied to the
expansion parameter by lambda = sin x.

Two engines run the Toda recurrence

    C_{N+1} C_{N-1} (N^2 - 1/4) = (1-t)^2 [C_N (t C_N'' + C_N') - t C_N'^2] + N^2 C_N^2

starting from C_0 and C_1: a series engine on ``BiSeries`` and a closed-form
engine on ``DiffAlgElement`` (exact over Q, optionally multimodular).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Literal, Sequence

import flint
import mpmath
from mpmath import mp, mpf

from .diffalg import DiffAlgElement, PolyRing, parse, reconstruct_element
from .elliptic import EllipticContext
from .errors import NotDivisible, TruncationExhausted
from .kepoly import KEPolynomial
from .numeric import NumericEllipticContext
from .series import BiSeries, GradedSeries, arcsin_series

log = logging.getLogger(__name__)

Regime = Literal["plus", "minus"]
REGIMES: tuple[Regime, ...] = ("plus", "minus")

# The closed forms only need t, S, X: K and E never enter the recurrence.
CLOSED_RING = PolyRing(("t", "S", "X"))


def _check_regime(regime: str) -> Regime:
    if regime not in REGIMES:
        raise ValueError(f"regime must be 'plus' or 'minus', got {regime!r}")
    return regime  # type: ignore[return-value]


@dataclass(frozen=True)
class DiagonalCorrelation:
    regime: Regime
    N: int
    series: BiSeries | None = None
    closed_form: DiffAlgElement | None = field(default=None, compare=False)

    def series_in(self, ctx: EllipticContext) -> BiSeries:
        if self.series is not None:
            return self.series
        if self.closed_form is None:
            raise ValueError("correlation carries neither a series nor a closed form")
        return self.closed_form.to_series(ctx)

    def to_json_obj(self, lambda_order: int | None = None) -> dict:
        obj: dict = {"regime": self.regime, "N": self.N}
        if self.series is not None:
            ser = self.series if lambda_order is None else self.series.truncate(x_order=lambda_order + 1)
            obj["lambda_order"] = lambda_order if lambda_order is not None else _finite(ser.x_order)
            obj["series"] = ser.to_json_obj()
        if self.closed_form is not None:
            obj["closed_form"] = self.closed_form.pretty()
        return obj


def _finite(v):
    return None if v == math.inf else v


def _omt(order) -> GradedSeries:
    return GradedSeries({0: 1, 4: -1}, order)


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------

def c0_closed(regime: Regime, ring: PolyRing = CLOSED_RING) -> DiffAlgElement:
    phi = DiffAlgElement.gen("Phi", ring)
    if _check_regime(regime) == "minus":
        return phi
    return phi * DiffAlgElement.gen("S", ring)


def c1_closed(regime: Regime, ring: PolyRing = CLOSED_RING) -> DiffAlgElement:
    phi = DiffAlgElement.gen("Phi", ring)
    S, C, X = (DiffAlgElement.gen(g, ring) for g in "SCX")
    if _check_regime(regime) == "minus":
        return (phi * (C + S * X)).times_prefactor(cosp=-1)
    return (phi * X).times_t_power(Fraction(-1, 2)).times_prefactor(cosp=-1)


def c0(regime: Regime, ctx: EllipticContext) -> DiagonalCorrelation:
    """C_0 from theta functions: theta4(x)/theta3(0), or (1-t)^{1/4} t^{-1/4} theta1(x)/theta4(0)."""
    if _check_regime(regime) == "minus":
        ser = ctx.theta4 / ctx.theta3_0
    else:
        pre = _omt(ctx.s_order).pow_rational(Fraction(1, 4)).div(ctx.theta4_0)
        ser = ctx.theta1.shift_s(-1).scale(pre)
    return DiagonalCorrelation(regime, 0, ser, c0_closed(regime))


def c1(regime: Regime, ctx: EllipticContext) -> DiagonalCorrelation:
    """C_1 from the Jacobi functions and X, normalized by 1/cos x."""
    j = ctx.jacobi_x
    phi = ctx.theta4 / ctx.theta3_0
    if _check_regime(regime) == "minus":
        body = j.cn * j.dn + j.sn * ctx.bigX
    else:
        body = ctx.bigX.shift_s(-2)
    ser = (phi * body).div(ctx.cos_x)
    return DiagonalCorrelation(regime, 1, ser, c1_closed(regime))


# ---------------------------------------------------------------------------
# Toda recurrence
# ---------------------------------------------------------------------------

def toda_numerator_series(curr: BiSeries, N: int) -> BiSeries:
    d1 = curr.derivative_t()
    d2 = d1.derivative_t()
    t = GradedSeries.monomial(4)
    omt2 = _omt(math.inf) * _omt(math.inf)
    bracket = curr * (d2.scale(t) + d1) - (d1 * d1).scale(t)
    return bracket.scale(omt2) + (curr * curr).scale(GradedSeries.constant(N * N))


def toda_step_series(prev: BiSeries, curr: BiSeries, N: int) -> BiSeries:
    if N < 1:
        raise ValueError("the recurrence starts at N = 1")
    num = toda_numerator_series(curr, N)
    out = num.div(prev).scale(GradedSeries.constant(Fraction(4, 4 * N * N - 1)))
    if out.s_order < 1:
        raise TruncationExhausted(f"series order exhausted at N = {N + 1}")
    return out


def toda_step_closed(prev: DiffAlgElement, curr: DiffAlgElement, N: int) -> DiffAlgElement:
    """One exact step; raises NotDivisible if C_{N-1} fails to divide the numerator."""
    if N < 1:
        raise ValueError("the recurrence starts at N = 1")
    d1 = curr.d_dt()
    d2 = d1.d_dt()
    inner = d2.times_t_power(1) + d1 + (curr * (N * N)).times_t_power(0, -2)
    num = curr * inner - (d1 * d1).times_t_power(1)
    return (num / prev).times_t_power(0, 2) * Fraction(4, 4 * N * N - 1)


def toda_step(prev: DiagonalCorrelation, curr: DiagonalCorrelation, engine: str = "series",
              ctx: EllipticContext | None = None) -> DiagonalCorrelation:
    if prev.regime != curr.regime or curr.N != prev.N + 1:
        raise ValueError("toda_step needs consecutive correlations of one regime")
    N = curr.N
    if engine == "series":
        if prev.series is None or curr.series is None:
            raise ValueError("series engine needs series inputs")
        return DiagonalCorrelation(curr.regime, N + 1, toda_step_series(prev.series, curr.series, N))
    if engine != "closed":
        raise ValueError("engine must be 'series' or 'closed'")
    if prev.closed_form is None or curr.closed_form is None:
        raise ValueError("closed engine needs closed-form inputs")
    try:
        closed = toda_step_closed(prev.closed_form, curr.closed_form, N)
    except NotDivisible:
        log.warning("closed-form division failed at N=%d; using series division", N + 1)
        if ctx is None:
            raise
        ser = toda_step_series(prev.series_in(ctx), curr.series_in(ctx), N)
        return DiagonalCorrelation(curr.regime, N + 1, ser)
    ser = closed.to_series(ctx) if ctx is not None else None
    return DiagonalCorrelation(curr.regime, N + 1, ser, closed)


def closed_sequence(regime: Regime, n_max: int, ring: PolyRing = CLOSED_RING) -> list[DiffAlgElement]:
    """C_0 .. C_{n_max} in closed form over one coefficient ring."""
    seq = [c0_closed(regime, ring), c1_closed(regime, ring)]
    for N in range(1, n_max):
        seq.append(toda_step_closed(seq[-2], seq[-1], N))
    return seq[: n_max + 1]


def _primes_below(bound: int):
    n = bound - 1
    while n > 2:
        if flint.fmpz(n).is_prime():
            yield n
        n -= 1


def closed_sequence_modular(regime: Regime, n_max: int, max_primes: int = 64) -> list[DiffAlgElement]:
    """Same as :func:`closed_sequence`, computed modulo 63-bit primes and lifted to Q.

    A level is accepted once the rational reconstruction from the primes so
    far reproduces the image modulo one further prime.  Primes whose images
    disagree in shape with the majority are dropped as unlucky.
    """
    gens = CLOSED_RING.gens
    images: list[list[DiffAlgElement]] = []
    done: dict[int, DiffAlgElement] = {}
    for used, p in enumerate(_primes_below(2**63)):
        if used >= max_primes:
            raise NotDivisible("multimodular reconstruction did not stabilize")
        ring = PolyRing(gens, p)
        try:
            seq = closed_sequence(regime, n_max, ring)
        except (NotDivisible, ZeroDivisionError):
            continue
        if images and any(a.prefactor != b.prefactor for a, b in zip(seq, images[0])):
            # lucky images have the smallest prefactor exponents
            if all(a.texp <= b.texp and a.omtexp <= b.omtexp for a, b in zip(seq, images[0])):
                images = []
            else:
                continue
        images.append(seq)
        for k in range(n_max + 1):
            if k in done or len(images) < 2:
                continue
            cand = reconstruct_element([im[k] for im in images[:-1]], CLOSED_RING)
            if cand is not None and cand.to_ring(ring) == images[-1][k]:
                done[k] = cand
        if len(done) == n_max + 1:
            return [done[k] for k in range(n_max + 1)]
    raise NotDivisible("ran out of primes")


def required_s_order(n_target: int, s_target: int) -> int:
    """Initial s-truncation that leaves ``s_target`` orders after reaching C_{n_target}."""
    return s_target + 4 * max(n_target - 1, 0) + 8


def diagonal_sequence(regime: Regime, n_max: int, ctx: EllipticContext, engine: str = "series") -> list[DiagonalCorrelation]:
    seq = [c0(regime, ctx), c1(regime, ctx)]
    for _ in range(1, n_max):
        seq.append(toda_step(seq[-2], seq[-1], engine, ctx))
    return seq[: n_max + 1]


# ---------------------------------------------------------------------------
# sigma form and form factors
# ---------------------------------------------------------------------------

def sigma_function(c: DiagonalCorrelation, series: BiSeries | None = None) -> BiSeries:
    ser = c.series if series is None else series
    t = GradedSeries.monomial(4)
    tt1 = t * (t - 1)
    sigma = ser.derivative_t().div(ser).scale(tt1)
    shift = GradedSeries.constant(Fraction(1, 4)) if c.regime == "plus" else t.scale(Fraction(1, 4))
    return sigma - BiSeries.from_graded(shift)


def sigma_residual(c: DiagonalCorrelation, series: BiSeries | None = None) -> BiSeries:
    """Left minus right side of the sigma form of Painleve VI for sigma_N."""
    sig = sigma_function(c, series)
    t = GradedSeries.monomial(4)
    tm1 = t - 1
    d1 = sig.derivative_t()
    d2 = d1.derivative_t()
    a = d2.scale(t * tm1)
    b = d1.scale(tm1) - sig
    quarter = BiSeries.from_graded(GradedSeries.constant(Fraction(1, 4)))
    lhs = a * a + (d1 * (b - quarter) * (d1.scale(t) - sig)).scale(GradedSeries.constant(4))
    return lhs - (b * b).scale(GradedSeries.constant(c.N * c.N))


def extract_form_factors(c: DiagonalCorrelation, n_max: int, ctx: EllipticContext | None = None) -> list[GradedSeries]:
    """Normalized lambda^n coefficients [C^(0), ..., C^(n_max)] of C_N(lambda = sin x)."""
    ser = c.series if c.series is not None else c.series_in(ctx)
    return lambda_coefficients(ser, c.regime, n_max)


def lambda_coefficients(ser: BiSeries, regime: Regime, n_max: int) -> list[GradedSeries]:
    """Substitute x = arcsin(lambda) and strip the regime prefactor.

    The prefactor is (1-t)^{1/4} below T_c and s^{-1} (1-t)^{1/4} above.
    """
    _check_regime(regime)
    if n_max >= ser.x_order:
        raise TruncationExhausted("lambda order beyond the x truncation")
    lam = ser.truncate(x_order=n_max + 1).compose_x(arcsin_series(n_max + 1))
    order = ser.s_order
    pre = _omt(order + 4).pow_rational(Fraction(-1, 4))
    out = []
    for n in range(n_max + 1):
        coeff = lam.coefficient(n) * pre
        if regime == "plus":
            coeff = coeff.shift(1)
        out.append(coeff.truncate(coeff.order))
    return out


# ---------------------------------------------------------------------------
# reference closed forms
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _reference_data() -> dict:
    text = resources.files("isingtoda").joinpath("data/v1/diagonal_reference.json").read_text()
    return json.loads(text)


def reference_closed_form(regime: Regime, N: int, ring: PolyRing = CLOSED_RING) -> DiffAlgElement:
    """Reference closed form of C_N (N = 2, 3) as an element of the algebra."""
    entry = _reference_data()["closed_forms"][_check_regime(regime)][str(N)]
    body = entry["body"]
    for key, expr in entry.get("parts", {}).items():
        body = body.replace(key, f"({expr})")
    elem = parse(body, ring) * Fraction(entry["scale"])
    return elem.times_prefactor(phi=entry["phi"], cosp=entry["cos"]).times_t_power(
        Fraction(entry["texp"]), Fraction(entry["omtexp"])
    ).normalize()


def form_factor_00(n: int) -> KEPolynomial:
    """Closed form of the n-th N = 0 form factor, n = 1..7, in K, E, s, t."""
    return KEPolynomial.parse(_reference_data()["form_factors_00"][str(n)])


def homogeneous_combinations() -> list[tuple[int, dict[int, Fraction]]]:
    return [
        (item["degree"], {int(k): Fraction(v) for k, v in item["combo"].items()})
        for item in _reference_data()["homogeneous_combinations"]
    ]


def combination(combo: dict[int, Fraction]) -> KEPolynomial:
    total = KEPolynomial()
    for n, c in combo.items():
        total = total + form_factor_00(n) * c
    return total


def homogeneity_check(combo: dict[int, Fraction], degree: int) -> bool:
    return combination(combo).is_homogeneous(degree)


# ---------------------------------------------------------------------------
# boundary behaviour at t -> 0
# ---------------------------------------------------------------------------

def _poch(a: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for k in range(n):
        out *= a + k
    return out


def minus_leading_coefficient(N: int) -> Fraction:
    """Coefficient of lambda^2 t^{N+1} in C_N^- (leading correction)."""
    return _poch(Fraction(1, 2), N) * _poch(Fraction(3, 2), N) / (4 * math.factorial(N + 1) ** 2)


def plus_cubic_coefficient(N: int) -> Fraction:
    """Coefficient of lambda^3 t^{3N/2+2} in C_N^+."""
    return _poch(Fraction(1, 2), N) * _poch(Fraction(3, 2), N) ** 2 / (
        16 * math.factorial(N + 1) * math.factorial(N + 2) ** 2
    )


def plus_linear_series(N: int, s_order: int) -> GradedSeries:
    """t^{N/2} (1/2)_N / N! 2F1(1/2, N+1/2; N+1; t) as a series in s."""
    pre = _poch(Fraction(1, 2), N) / math.factorial(N)
    terms = {}
    c = Fraction(1)
    k = 0
    while 2 * N + 4 * k < s_order:
        terms[2 * N + 4 * k] = pre * c
        c = c * (Fraction(1, 2) + k) * (N + Fraction(1, 2) + k) / ((N + 1 + k) * (k + 1))
        k += 1
    return GradedSeries(terms, s_order)


# ---------------------------------------------------------------------------
# numeric evaluation of closed forms
# ---------------------------------------------------------------------------

def closed_form_numeric(e: DiffAlgElement, nctx: NumericEllipticContext, x) -> mpf:
    """Evaluate a closed form at real (s, x) through the numeric theta track."""
    x = mpf(x)
    u = x * nctx.K
    sn, cn, dn = nctx.jacobi(u)
    vals = {"t": nctx.t, "S": sn, "X": nctx.bigX(x), "K": nctx.K, "E": nctx.E, "x": x}
    gens = e.ring.gens

    def ev(p):
        total = mpf(0)
        for m, c in zip(p.monoms(), p.coeffs()):
            term = mpf(int(c.p)) / int(c.q)
            for g, k in zip(gens, m):
                if k:
                    term *= vals[g] ** int(k)
            total += term
        return total

    body = ev(e.p0) + cn * dn * ev(e.p1)
    phi = nctx.theta(4, x) / nctx.theta(3, 0)
    return (
        body * phi**e.phi * mpmath.cos(x) ** e.cosp
        * nctx.t ** (mpf(e.texp.numerator) / e.texp.denominator)
        * (1 - nctx.t) ** (mpf(e.omtexp.numerator) / e.omtexp.denominator)
    )


def lambda_one_value(e: DiffAlgElement, s_value, dps: int = 50, h: str = "1e-15") -> mpf:
    """Value at x = pi/2 (lambda = 1), where 1/cos x has removable singularities.

    Uses the symmetric average f(pi/2 - h) + f(pi/2 + h), accurate to O(h^2).
    """
    with mp.workdps(dps):
        nctx = NumericEllipticContext.at(s_value)
        hh = mpf(h)
        half = mp.pi / 2
        if e.cosp >= 0:
            return closed_form_numeric(e, nctx, half)
        return (closed_form_numeric(e, nctx, half - hh) + closed_form_numeric(e, nctx, half + hh)) / 2


def lambda_one_expected(regime: Regime, N: int, s_value, dps: int = 50) -> mpf:
    """Ising values at lambda = 1 for N = 0, 1 from K and E."""
    with mp.workdps(dps):
        nctx = NumericEllipticContext.at(s_value)
        if N == 0:
            return mpf(1)
        if N == 1:
            if regime == "minus":
                return nctx.E
            return ((nctx.t - 1) * nctx.K + nctx.E) / mpmath.sqrt(nctx.t)
    raise ValueError("reference values exist for N = 0, 1")


def c0_plus_theta_numeric(s_value, x, dps: int = 50) -> mpf:
    """(1-t)^{1/4} t^{-1/4} theta1(x)/theta4(0) directly from theta sums."""
    with mp.workdps(dps):
        nctx = NumericEllipticContext.at(s_value)
        return (1 - nctx.t) ** mpf(0.25) / nctx.t ** mpf(0.25) * nctx.theta(1, x) / nctx.theta(4, 0)


def c0_minus_theta_numeric(s_value, x, dps: int = 50) -> mpf:
    with mp.workdps(dps):
        nctx = NumericEllipticContext.at(s_value)
        return nctx.theta(4, x) / nctx.theta(3, 0)


__all__ = [
    "CLOSED_RING",
    "DiagonalCorrelation",
    "Regime",
    "c0",
    "c0_closed",
    "c1",
    "c1_closed",
    "closed_form_numeric",
    "closed_sequence",
    "closed_sequence_modular",
    "combination",
    "diagonal_sequence",
    "extract_form_factors",
    "lambda_coefficients",
    "form_factor_00",
    "homogeneity_check",
    "homogeneous_combinations",
    "lambda_one_expected",
    "lambda_one_value",
    "minus_leading_coefficient",
    "plus_cubic_coefficient",
    "plus_linear_series",
    "reference_closed_form",
    "required_s_order",
    "sigma_function",
    "sigma_residual",
    "toda_step",
    "toda_step_closed",
    "toda_step_series",
]
