"""Formal-series track for elliptic integrals, theta functions and Jacobi functions.

Conventions: ``t = s**4`` is the parameter, ``k = s**2`` the modulus, and the
theta functions have quasi-periods pi and pi*tau (Whittaker-Watson).  The
complete integrals are normalized, K = (2/pi) K(t), E = (2/pi) E(t), so both
start at 1.  Bivariate objects are ``BiSeries`` with the first variable
either ``x`` (theta argument, z = x K) or ``u`` (Jacobi argument).

All series are derived from a single source, the theta q-series evaluated at
the nome q(t); the nome itself is obtained by inverting k(q)^2 = t.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property

from .series import (
    INF,
    BiSeries,
    GradedSeries,
    cos_series,
    sin_series,
)


def _t_order(s_order: int) -> int:
    return -(-s_order // 4)


def k_series(t_order: int) -> GradedSeries:
    """Normalized K in the variable t (not inflated)."""
    coeffs, c = [], Fraction(1)
    for n in range(t_order):
        coeffs.append(c)
        c = c * Fraction(2 * n + 1, 2 * n + 2) ** 2
    return GradedSeries.from_dense(coeffs, 0, t_order)


def e_series(t_order: int) -> GradedSeries:
    """Normalized E in the variable t: sum (-1/2)_n (1/2)_n / (n!)^2 t^n."""
    coeffs, c = [], Fraction(1)
    for n in range(t_order):
        coeffs.append(c)
        c = c * Fraction(2 * n - 1, 2 * n + 2) * Fraction(2 * n + 1, 2 * n + 2)
    return GradedSeries.from_dense(coeffs, 0, t_order)


def _trig_coefficient(kind: str, freq: int, j: int) -> Fraction:
    """x^j coefficient of sin(freq*x) or cos(freq*x)."""
    if kind == "sin":
        if j % 2 == 0:
            return Fraction(0)
        return Fraction((-1) ** ((j - 1) // 2) * freq**j, math.factorial(j))
    if j % 2:
        return Fraction(0)
    return Fraction((-1) ** (j // 2) * freq**j, math.factorial(j))


class EllipticContext:
    """Cached elliptic series at fixed truncation (x_order, s_order).

    ``x_order`` bounds the argument expansion (exponents < x_order are exact),
    ``s_order`` the s-expansion.  Values are built on first use and never
    mutated afterwards.
    """

    def __init__(self, x_order: int = 9, s_order: int = 60):
        if x_order < 1 or s_order < 4:
            raise ValueError("need x_order >= 1 and s_order >= 4")
        self.x_order = int(x_order)
        self.s_order = int(s_order)

    def __repr__(self) -> str:
        return f"EllipticContext(x_order={self.x_order}, s_order={self.s_order})"

    # elementary series in s ----------------------------------------------
    @cached_property
    def t(self) -> GradedSeries:
        return GradedSeries.monomial(4)

    @cached_property
    def one_minus_t(self) -> GradedSeries:
        return GradedSeries({0: 1, 4: -1})

    @cached_property
    def K(self) -> GradedSeries:
        return k_series(_t_order(self.s_order)).inflate(4).truncate(self.s_order)

    @cached_property
    def E(self) -> GradedSeries:
        return e_series(_t_order(self.s_order)).inflate(4).truncate(self.s_order)

    @cached_property
    def nome(self) -> GradedSeries:
        """q(t) with q = t/16 + ..., on the s-lattice."""
        return self._nome_ext.truncate(self.s_order)

    @cached_property
    def _nome_ext(self) -> GradedSeries:
        # four extra s-orders so that q/t keeps the full precision
        tn = _t_order(self.s_order) + 2
        # t as a series in q:  16 q (sum q^{n(n+1)})^4 / theta3(q)^4
        a = GradedSeries({n * (n + 1): 1 for n in range(tn) if n * (n + 1) < tn}, tn)
        b = GradedSeries({0: 1, **{n * n: 2 for n in range(1, tn) if n * n < tn}}, tn)
        t_of_q = (a.div(b) ** 4).shift(1).scale(16).truncate(tn)
        q_of_t = t_of_q.reversion()
        return q_of_t.inflate(4).truncate(self.s_order + 4)

    @cached_property
    def _q_powers(self) -> list[GradedSeries]:
        q = self.nome
        m_max = self.s_order // 4 + 1
        powers = [GradedSeries.constant(1)]
        for _ in range(m_max):
            powers.append((powers[-1] * q).truncate(self.s_order))
        return powers

    def q_power(self, m: int) -> GradedSeries:
        """q^m truncated to s_order (zero beyond the provable range)."""
        if 4 * m >= self.s_order:
            return GradedSeries.zero(self.s_order)
        return self._q_powers[m]

    @cached_property
    def rho(self) -> GradedSeries:
        """(16 q / t)^{1/4}, so that 2 q^{1/4} = s * rho."""
        return self._nome_ext.shift(-4).scale(16).pow_rational(Fraction(1, 4))

    # theta constants ------------------------------------------------------
    def _theta_sum(self, kind: str, x_order: int | None = None) -> BiSeries:
        """Sum over n of the theta q-series without the s*rho prefactor.

        kind: 'odd1' -> sum (-1)^n q^{n(n+1)} sin((2n+1)x)
              'odd2' -> sum q^{n(n+1)} cos((2n+1)x)
              'three' -> theta3(x), 'four' -> theta4(x)
        """
        xo = self.x_order if x_order is None else x_order
        coeffs: dict[int, GradedSeries] = {}
        if kind in ("odd1", "odd2"):
            trig = "sin" if kind == "odd1" else "cos"
            n = 0
            while 4 * n * (n + 1) < self.s_order:
                qp = self.q_power(n * (n + 1))
                sign = -1 if (kind == "odd1" and n % 2) else 1
                for j in range(xo):
                    c = _trig_coefficient(trig, 2 * n + 1, j)
                    if c:
                        term = qp.scale(sign * c)
                        coeffs[j] = coeffs[j] + term if j in coeffs else term
                n += 1
        else:
            coeffs[0] = GradedSeries.constant(1, self.s_order)
            n = 1
            while 4 * n * n < self.s_order:
                qp = self.q_power(n * n)
                sign = -1 if (kind == "four" and n % 2) else 1
                for j in range(0, xo, 2):
                    c = 2 * sign * _trig_coefficient("cos", 2 * n, j)
                    term = qp.scale(c)
                    coeffs[j] = coeffs[j] + term if j in coeffs else term
                n += 1
        # every coefficient is known to s_order
        return BiSeries({j: c.truncate(self.s_order) + GradedSeries.zero(self.s_order) for j, c in coeffs.items()}, xo)

    def theta_const(self, i: int) -> GradedSeries:
        """theta_i(0|tau) for i in {2, 3, 4} as series in s."""
        if i == 2:
            return self._theta_sum("odd2", 1).coefficient(0).shift(1) * self.rho
        if i == 3:
            return self._theta_sum("three", 1).coefficient(0)
        if i == 4:
            return self._theta_sum("four", 1).coefficient(0)
        raise ValueError("theta constant index must be 2, 3 or 4")

    @cached_property
    def theta3_0(self) -> GradedSeries:
        return self.theta_const(3)

    @cached_property
    def theta4_0(self) -> GradedSeries:
        return self.theta_const(4)

    @cached_property
    def sqrt_kprime(self) -> GradedSeries:
        """theta4(0)/theta3(0), equal to (1-t)^{1/4}."""
        return self.theta4_0.div(self.theta3_0)

    # theta functions of x -------------------------------------------------
    def theta_fn(self, i: int) -> BiSeries:
        """theta_i(x|tau) as a BiSeries in (x, s), i in {1, 2, 3, 4}."""
        return {1: self.theta1, 2: self.theta2, 3: self.theta3, 4: self.theta4}[i]

    @cached_property
    def theta1(self) -> BiSeries:
        return self._theta_sum("odd1").shift_s(1).scale(self.rho)

    @cached_property
    def theta2(self) -> BiSeries:
        return self._theta_sum("odd2").shift_s(1).scale(self.rho)

    @cached_property
    def theta3(self) -> BiSeries:
        return self._theta_sum("three")

    @cached_property
    def theta4(self) -> BiSeries:
        return self._theta_sum("four")

    @cached_property
    def phi(self) -> BiSeries:
        """theta4(x)/theta3(0)."""
        return self.theta4 / self.theta3_0

    # Jacobi functions -----------------------------------------------------
    @cached_property
    def jacobi_x(self) -> "JacobiTriple":
        """sn, cn, dn at argument z = xK, as series in (x, s)."""
        th4 = self.theta4
        sn = self._theta_sum("odd1").scale(self.rho).div(th4)
        cn = self._theta_sum("odd2").scale(self.rho * self.sqrt_kprime).div(th4)
        dn = self.theta3.scale(self.sqrt_kprime).div(th4)
        return JacobiTriple(sn, cn, dn)

    @cached_property
    def jacobi(self) -> "JacobiTriple":
        """sn, cn, dn as series in (u, s); the theta argument is v = u/K."""
        inv_k = self.K.inverse()
        j = self.jacobi_x
        return JacobiTriple(j.sn.rescale_x(inv_k), j.cn.rescale_x(inv_k), j.dn.rescale_x(inv_k))

    @cached_property
    def eps_integral(self) -> BiSeries:
        """Fundamental integral of the second kind, int_0^u dn^2, in (u, s)."""
        dn = self.jacobi.dn
        return (dn * dn).integrate_x().truncate(self.x_order)

    @cached_property
    def bigX(self) -> BiSeries:
        """X = Eps(xK, t) - x E in (x, s)."""
        return self.eps_integral.rescale_x(self.K) - BiSeries({1: self.E})

    @cached_property
    def bigX_from_theta(self) -> BiSeries:
        """(1/K) d/dx log theta4(x): an independent route to X."""
        th4 = self.theta4
        return (th4.derivative_x().div(th4) / self.K).truncate(self.x_order)

    @cached_property
    def cos_x(self) -> BiSeries:
        return BiSeries.from_x_series(cos_series(self.x_order))

    @cached_property
    def sin_x(self) -> BiSeries:
        return BiSeries.from_x_series(sin_series(self.x_order))

    def with_orders(self, x_order: int | None = None, s_order: int | None = None) -> "EllipticContext":
        return EllipticContext(x_order or self.x_order, s_order or self.s_order)


class JacobiTriple:
    __slots__ = ("sn", "cn", "dn")

    def __init__(self, sn: BiSeries, cn: BiSeries, dn: BiSeries):
        self.sn, self.cn, self.dn = sn, cn, dn

    def __iter__(self):
        return iter((self.sn, self.cn, self.dn))


# ---------------------------------------------------------------------------
# differentiation formulae as series, for verification
# ---------------------------------------------------------------------------

def _u(ctx: EllipticContext) -> BiSeries:
    return BiSeries({1: GradedSeries.constant(1)}, ctx.x_order)


def dK_dt_formula(ctx: EllipticContext) -> GradedSeries:
    """E/(2t(1-t)) - K/(2t)."""
    K, E, omt = ctx.K, ctx.E, ctx.one_minus_t
    return (E - omt * K).div(omt).shift(-4).scale(Fraction(1, 2))


def dE_dt_formula(ctx: EllipticContext) -> GradedSeries:
    return (ctx.E - ctx.K).shift(-4).scale(Fraction(1, 2))


def _u_shift(ctx: EllipticContext) -> BiSeries:
    """u (t-1) + Eps(u, t)."""
    tm1 = GradedSeries({0: -1, 4: 1})
    return _u(ctx).scale(tm1) + ctx.eps_integral


def dsn_dt_formula(ctx: EllipticContext) -> BiSeries:
    sn, cn, dn = ctx.jacobi
    tm1 = GradedSeries({0: -1, 4: 1}).scale(2)
    first = -(sn * cn * cn) / tm1
    second = ((cn * dn * _u_shift(ctx)) / tm1).shift_s(-4)
    return first + second


def dcn_dt_formula(ctx: EllipticContext) -> BiSeries:
    sn, cn, dn = ctx.jacobi
    tm1 = GradedSeries({0: -1, 4: 1}).scale(2)
    return (sn * sn * cn) / tm1 - ((sn * dn * _u_shift(ctx)) / tm1).shift_s(-4)


def ddn_dt_formula(ctx: EllipticContext) -> BiSeries:
    sn, cn, dn = ctx.jacobi
    tm1 = GradedSeries({0: -1, 4: 1}).scale(2)
    return (sn * sn * dn) / tm1 - (sn * cn * _u_shift(ctx)) / tm1


def deps_dt_formula(ctx: EllipticContext) -> BiSeries:
    """Partial t-derivative of Eps at fixed u.

    Eps*cn^2/(2(t-1)) - u sn^2/2 - sn cn dn/(2(t-1)).
    """
    sn, cn, dn = ctx.jacobi
    eps = ctx.eps_integral
    tm1 = GradedSeries({0: -1, 4: 1}).scale(2)
    return (eps * cn * cn) / tm1 - (_u(ctx) * sn * sn).scale(Fraction(1, 2)) - (sn * cn * dn) / tm1


def dlog_theta4_ratio_formula(ctx: EllipticContext) -> BiSeries:
    """sn^2(xK)/(4(1-t)) + X^2/(4t(t-1)), at fixed x."""
    sn = ctx.jacobi_x.sn
    X = ctx.bigX
    four_omt = ctx.one_minus_t.scale(4)
    return (sn * sn) / four_omt - ((X * X) / four_omt).shift_s(-4)


def log_theta4_ratio(ctx: EllipticContext) -> BiSeries:
    return (ctx.theta4 / ctx.theta4_0).log()


def theta4_ratio_from_eps(ctx: EllipticContext) -> BiSeries:
    """exp(-x^2 K E/2 + int_0^{xK} Eps(y) dy)."""
    inner = ctx.eps_integral.integrate_x().truncate(ctx.x_order).rescale_x(ctx.K)
    quad = BiSeries({2: (ctx.K * ctx.E).scale(Fraction(-1, 2))}, ctx.x_order)
    return (inner + quad).exp()
