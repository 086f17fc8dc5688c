"""Numeric track: elliptic integrals, nome, theta and Jacobi functions at real s.

Everything here is computed from first principles (AGM, q-series sums and
theta quotients) with mpmath numbers as the carrier.  mpmath's own special
functions are deliberately not used so that they can serve as independent
references in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from .errors import ConvergenceError, DomainError

DEFAULT_DPS = 30


def _check_s(s_value) -> mpf:
    s = mpf(s_value)
    if not (0 < s < 1):
        raise DomainError(f"s must lie in (0, 1), got {s_value}")
    return s


def agm(a, b, max_iter: int = 200) -> mpf:
    a, b = mpf(a), mpf(b)
    tol = 16 * mp.eps
    for _ in range(max_iter):
        if abs(a - b) <= tol * abs(a):
            return (a + b) / 2
        a, b = (a + b) / 2, mpmath.sqrt(a * b)
    raise ConvergenceError("AGM did not converge")


def complete_k(t) -> mpf:
    """Unnormalized complete integral of the first kind, parameter t."""
    return mp.pi / (2 * agm(1, mpmath.sqrt(1 - mpf(t))))


def complete_e(t) -> mpf:
    """Unnormalized complete integral of the second kind via the AGM sum."""
    t = mpf(t)
    a, b = mpf(1), mpmath.sqrt(1 - t)
    c2sum = t / 2  # c_0^2 / 2 with c_0^2 = t
    power = mpf(1)
    tol = 16 * mp.eps
    for _ in range(200):
        if abs(a - b) <= tol * a:
            break
        c = (a - b) / 2
        a, b = (a + b) / 2, mpmath.sqrt(a * b)
        c2sum += power * c * c
        power *= 2
    else:
        raise ConvergenceError("AGM did not converge")
    return complete_k(t) * (1 - c2sum)


@dataclass(frozen=True)
class NumericEllipticContext:
    """Numeric values at a fixed s in (0, 1), t = s^4."""

    s: mpf
    t: mpf
    K: mpf  # normalized, (2/pi) K(t)
    E: mpf
    q: mpf
    kprime: mpf

    @classmethod
    def at(cls, s_value) -> "NumericEllipticContext":
        s = _check_s(s_value)
        t = s**4
        kk = complete_k(t)
        kkp = complete_k(1 - t)
        q = mpmath.exp(-mp.pi * kkp / kk)
        return cls(s, t, 2 * kk / mp.pi, 2 * complete_e(t) / mp.pi, q, mpmath.sqrt(1 - t))

    @property
    def k(self) -> mpf:
        return self.s**2

    # theta functions by direct summation ---------------------------------
    def theta(self, i: int, x) -> mpf:
        q = self.q
        x = mpf(x)
        tol = mpf(10) ** (-mp.dps - 3)
        total = mpf(0)
        if i in (1, 2):
            for n in range(0, 10000):
                w = q ** (n * (n + 1))
                if i == 1:
                    term = (-1) ** n * w * mpmath.sin((2 * n + 1) * x)
                else:
                    term = w * mpmath.cos((2 * n + 1) * x)
                total += term
                if w < tol:
                    return 2 * q ** mpf(0.25) * total
            raise ConvergenceError("theta series did not converge")
        if i in (3, 4):
            total = mpf(1)
            for n in range(1, 10000):
                w = q ** (n * n)
                sign = (-1) ** n if i == 4 else 1
                total += 2 * sign * w * mpmath.cos(2 * n * x)
                if w < tol:
                    return total
            raise ConvergenceError("theta series did not converge")
        raise ValueError("theta index must be 1..4")

    def theta4_dlog(self, x) -> mpf:
        """d/dx log theta4(x)."""
        q = self.q
        x = mpf(x)
        tol = mpf(10) ** (-mp.dps - 3)
        num = mpf(0)
        for n in range(1, 10000):
            w = q ** (n * n)
            num += (-1) ** (n + 1) * 4 * n * w * mpmath.sin(2 * n * x)
            if w < tol:
                return num / self.theta(4, x)
        raise ConvergenceError("theta series did not converge")

    # Jacobi functions of u -----------------------------------------------
    def jacobi(self, u) -> tuple[mpf, mpf, mpf]:
        v = mpf(u) / self.K
        th3, th4 = self.theta(3, 0), self.theta(4, 0)
        th2 = self.theta(2, 0)
        d = self.theta(4, v)
        sn = (th3 / th2) * self.theta(1, v) / d
        cn = (th4 / th2) * self.theta(2, v) / d
        dn = (th4 / th3) * self.theta(3, v) / d
        return sn, cn, dn

    def eps(self, u, method: str = "theta") -> mpf:
        """int_0^u dn^2; theta log-derivative route or direct quadrature."""
        u = mpf(u)
        if method == "theta":
            v = u / self.K
            return self.theta4_dlog(v) / self.K + u * self.E / self.K
        if method == "quad":
            return mpmath.quad(lambda y: self.jacobi(y)[2] ** 2, [0, u])
        raise ValueError("method must be 'theta' or 'quad'")

    def bigX(self, x) -> mpf:
        return self.theta4_dlog(x) / self.K


def numeric_eval(name: str, s_value, x_value=None, dps: int = DEFAULT_DPS):
    """Evaluate one named quantity at s (and argument x or u when needed).

    Names: K, E, q, k, kprime, theta1..theta4 (argument x), sn, cn, dn, eps
    (argument u), X (argument x).
    """
    with mp.workdps(dps):
        ctx = NumericEllipticContext.at(s_value)
        simple = {"K": ctx.K, "E": ctx.E, "q": ctx.q, "k": ctx.k, "kprime": ctx.kprime, "t": ctx.t}
        if name in simple:
            return +simple[name]
        if x_value is None:
            raise ValueError(f"{name} needs an argument")
        if name.startswith("theta"):
            return ctx.theta(int(name[5:]), x_value)
        if name in ("sn", "cn", "dn"):
            return ctx.jacobi(x_value)[("sn", "cn", "dn").index(name)]
        if name == "eps":
            try:
                return ctx.eps(x_value)
            except ConvergenceError:
                return ctx.eps(x_value, method="quad")
        if name == "X":
            return ctx.bigX(x_value)
        raise ValueError(f"unknown quantity {name!r}")


def format_real(value) -> str:
    """17 significant digits."""
    return mpmath.nstr(value, 17, min_fixed=-5, max_fixed=5)
