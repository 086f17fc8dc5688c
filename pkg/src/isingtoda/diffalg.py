"""Closed-form differential algebra over the generators {S, C, X, K, E, x}.

Elements have the shape

    Phi^a * cos(x)^c * t^alpha * (1-t)^beta * (p0 + C * p1)

with Phi = theta4(x)/theta3(0), S = sn(xK, t), C = cn(xK, t) dn(xK, t),
X = Eps(xK, t) - x E and p0, p1 polynomials in (t, S, X, K, E, x).  The
relation C^2 = F = (1 - S^2)(1 - t S^2) keeps every element linear in C.

The total t-derivative at fixed x closes on this set.  With D = 4t(t-1):

    D S' = 2 C X - 2 t S (1 - S^2)
    D C' = 4 t S^2 C - 2 S X (1 + t - 2 t S^2)
    D X' = 2 t X (1 - S^2) - 2 t S C
    D K' = -2 (E + (t - 1) K)
    D E' = 2 (t - 1)(E - K)
    D (log Phi)' = t (1 - S^2) + X^2

Polynomials are python-flint multivariate polynomials, over Q
(``fmpq_mpoly``) or over Z/p (``nmod_mpoly``).  The modular rings drive the
multimodular Toda recurrence; :func:`reconstruct_element` lifts images back
to Q.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Sequence

import flint
from flint.utils.flint_exceptions import DomainError as FlintDomainError

from .errors import NotDivisible
from .series import BiSeries, GradedSeries

ALL_GENS = ("t", "S", "X", "K", "E", "x")


class PolyRing:
    """Coefficient ring: a flint polynomial context plus the derivation data."""

    _cache: dict = {}

    def __new__(cls, gens: Sequence[str] = ALL_GENS, modulus: int | None = None):
        key = (tuple(gens), modulus)
        ring = cls._cache.get(key)
        if ring is None:
            ring = super().__new__(cls)
            ring._setup(tuple(gens), modulus)
            cls._cache[key] = ring
        return ring

    def _setup(self, gens: tuple[str, ...], modulus: int | None) -> None:
        if gens[:3] != ("t", "S", "X") or any(g not in ALL_GENS for g in gens):
            raise ValueError("generators must start with t, S, X and be drawn from t, S, X, K, E, x")
        if ("K" in gens) != ("E" in gens):
            raise ValueError("K and E must appear together")
        self.gens = gens
        self.modulus = modulus
        self.nvars = len(gens)
        rest = gens[:2] + gens[3:]
        if modulus is None:
            self.ctx = flint.fmpq_mpoly_ctx.get(gens, ordering="degrevlex")
            self.sub_ctx = flint.fmpq_mpoly_ctx.get(rest, ordering="degrevlex")
        else:
            self.ctx = flint.nmod_mpoly_ctx.get(gens, ordering="degrevlex", modulus=modulus)
            self.sub_ctx = flint.nmod_mpoly_ctx.get(rest, ordering="degrevlex", modulus=modulus)
        g = dict(zip(gens, self.ctx.gens()))
        self.g = g
        one = self.ctx.from_dict({(0,) * self.nvars: 1})
        self.one = one
        self.zero = self.ctx.from_dict({})
        t, S, X = g["t"], g["S"], g["X"]
        self.omt = one - t
        self.F = (one - S**2) * (one - t * S**2)
        self.DS = (-2 * t * S * (one - S**2), 2 * X)
        self.DC = (-2 * S * X * (one + t - 2 * t * S**2), 4 * t * S**2)
        self.DX = (2 * t * X * (one - S**2), -2 * t * S)
        self.D = 4 * t * (t - 1)
        self.DLOGPHI = t * (one - S**2) + X**2
        if "K" in g:
            self.DK = -2 * (g["E"] + (t - 1) * g["K"])
            self.DE = 2 * (t - 1) * (g["E"] - g["K"])
            self.k_index, self.e_index = gens.index("K"), gens.index("E")
        else:
            self.DK = self.DE = None
        x_index = gens.index("x") if "x" in gens else None
        self.x_index = x_index
        sub_one = self.sub_ctx.from_dict({(0,) * (self.nvars - 1): 1})
        st, sS = self.sub_ctx.gens()[:2]
        self.sub_zero = self.sub_ctx.from_dict({})
        self.sub_F = (sub_one - sS**2) * (sub_one - st * sS**2)

    def __repr__(self) -> str:
        base = "Q" if self.modulus is None else f"Z/{self.modulus}"
        return f"PolyRing({','.join(self.gens)} over {base})"

    def scalar(self, value):
        if self.modulus is None:
            value = Fraction(value)
            return flint.fmpq(value.numerator, value.denominator)
        p = self.modulus
        if isinstance(value, int):
            return value % p
        value = Fraction(value)
        if value.denominator % p == 0:
            raise ZeroDivisionError("denominator vanishes modulo the prime")
        return value.numerator * pow(value.denominator, -1, p) % p

    def poly(self, value):
        if isinstance(value, (flint.fmpq_mpoly, flint.nmod_mpoly)):
            if value.context() is not self.ctx:
                raise ValueError("polynomial from a different ring")
            return value
        return self.one * self.scalar(value)

    def t_valuation(self, p) -> int:
        exps = [int(m[0]) for m in p.monoms()]
        return min(exps) if exps else 0

    def divide_t_power(self, p, k: int):
        if k == 0 or p.is_zero():
            return p
        return self.ctx.from_dict(
            {(int(m[0]) - k,) + tuple(int(e) for e in m[1:]): c for m, c in zip(p.monoms(), p.coeffs())}
        )

    @staticmethod
    def vanishes_at_t1(p) -> bool:
        return p.is_zero() or p.subs({"t": 1}).is_zero()

    def split_x(self, p) -> dict:
        """X-exponent -> coefficient polynomial in the remaining generators."""
        groups: dict[int, dict] = {}
        for m, c in zip(p.monoms(), p.coeffs()):
            m = tuple(int(e) for e in m)
            groups.setdefault(m[2], {})[m[:2] + m[3:]] = c
        return {k: self.sub_ctx.from_dict(v) for k, v in groups.items()}

    def join_x(self, parts: Mapping) -> object:
        out = {}
        for k, p in parts.items():
            for m, c in zip(p.monoms(), p.coeffs()):
                m = tuple(int(e) for e in m)
                out[m[:2] + (k,) + m[2:]] = c
        return self.ctx.from_dict(out)


QQ = PolyRing()


def _mul_pair(ring: PolyRing, a0, a1, b0, b1, square: bool = False):
    """(a0 + C a1)(b0 + C b1) reduced by C^2 = F."""
    if a1.is_zero() and b1.is_zero():
        return a0 * b0, ring.zero
    if square:
        return a0 * a0 + ring.F * (a1 * a1), 2 * (a0 * a1)
    if a1.is_zero():
        return a0 * b0, a0 * b1
    if b1.is_zero():
        return a0 * b0, a1 * b0
    m0 = a0 * b0
    m1 = a1 * b1
    cross = (a0 + a1) * (b0 + b1) - m0 - m1
    return m0 + ring.F * m1, cross


class DiffAlgElement:
    """Immutable element Phi^a cos(x)^c t^alpha (1-t)^beta (p0 + C p1)."""

    __slots__ = ("ring", "phi", "cosp", "texp", "omtexp", "p0", "p1")

    def __init__(self, p0=0, p1=0, phi: int = 0, cosp: int = 0, texp=0, omtexp=0,
                 ring: PolyRing = QQ, normalize: bool = True):
        self.ring = ring
        self.p0 = ring.poly(p0)
        self.p1 = ring.poly(p1)
        self.phi = int(phi)
        self.cosp = int(cosp)
        self.texp = Fraction(texp)
        self.omtexp = Fraction(omtexp)
        if normalize:
            self._normalize()

    def _normalize(self) -> None:
        """Pull every factor of t and (1 - t) into the prefactor."""
        ring = self.ring
        p0, p1 = self.p0, self.p1
        if p0.is_zero() and p1.is_zero():
            self.texp = Fraction(0)
            self.omtexp = Fraction(0)
            return
        k = min(ring.t_valuation(p) for p in (p0, p1) if not p.is_zero())
        if k:
            p0, p1 = ring.divide_t_power(p0, k), ring.divide_t_power(p1, k)
            self.texp += k
        while ring.vanishes_at_t1(p0) and ring.vanishes_at_t1(p1):
            p0, p1 = p0 / ring.omt, p1 / ring.omt
            self.omtexp += 1
        self.p0, self.p1 = p0, p1

    def _like(self, p0, p1, phi=None, cosp=None, texp=None, omtexp=None, normalize=True) -> "DiffAlgElement":
        return DiffAlgElement(
            p0, p1,
            self.phi if phi is None else phi,
            self.cosp if cosp is None else cosp,
            self.texp if texp is None else texp,
            self.omtexp if omtexp is None else omtexp,
            ring=self.ring, normalize=normalize,
        )

    def normalize(self) -> "DiffAlgElement":
        return self._like(self.p0, self.p1)

    @classmethod
    def const(cls, c, ring: PolyRing = QQ) -> "DiffAlgElement":
        return cls(c, ring=ring)

    @classmethod
    def gen(cls, name: str, ring: PolyRing = QQ) -> "DiffAlgElement":
        if name == "C":
            return cls(0, 1, ring=ring)
        if name == "Phi":
            return cls(1, phi=1, ring=ring)
        if name == "cos":
            return cls(1, cosp=1, ring=ring)
        return cls(ring.g[name], ring=ring)

    @property
    def prefactor(self) -> tuple[int, int, Fraction, Fraction]:
        return (self.phi, self.cosp, self.texp, self.omtexp)

    def is_zero(self) -> bool:
        return self.p0.is_zero() and self.p1.is_zero()

    def size(self) -> tuple[int, int]:
        return len(self.p0), len(self.p1)

    def __repr__(self) -> str:
        return f"DiffAlgElement({self.pretty()})"

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "DiffAlgElement":
        if isinstance(other, DiffAlgElement):
            if other.ring is not self.ring:
                raise ValueError("elements live in different rings")
            return other
        return DiffAlgElement.const(other, self.ring)

    def __neg__(self) -> "DiffAlgElement":
        return self._like(-self.p0, -self.p1, normalize=False)

    def __add__(self, other) -> "DiffAlgElement":
        other = self._coerce(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if (self.phi, self.cosp) != (other.phi, other.cosp):
            raise ValueError("cannot add elements with different Phi or cos(x) powers")
        texp = min(self.texp, other.texp)
        omtexp = min(self.omtexp, other.omtexp)
        ring = self.ring

        def lift(e: "DiffAlgElement"):
            dt, do = e.texp - texp, e.omtexp - omtexp
            if dt.denominator != 1 or do.denominator != 1:
                raise ValueError("prefactor exponents differ by a non-integer")
            if not dt and not do:
                return e.p0, e.p1
            m = ring.g["t"] ** int(dt) * ring.omt ** int(do)
            return e.p0 * m, e.p1 * m

        a0, a1 = lift(self)
        b0, b1 = lift(other)
        return self._like(a0 + b0, a1 + b1, texp=texp, omtexp=omtexp)

    __radd__ = __add__

    def __sub__(self, other) -> "DiffAlgElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "DiffAlgElement":
        return self._coerce(other) - self

    def scale(self, c) -> "DiffAlgElement":
        c = self.ring.scalar(c)
        return self._like(self.p0 * c, self.p1 * c, normalize=False)

    def __mul__(self, other) -> "DiffAlgElement":
        if not isinstance(other, DiffAlgElement):
            return self.scale(other)
        other = self._coerce(other)
        even, odd = _mul_pair(self.ring, self.p0, self.p1, other.p0, other.p1, square=other is self)
        return self._like(
            even, odd,
            self.phi + other.phi,
            self.cosp + other.cosp,
            self.texp + other.texp,
            self.omtexp + other.omtexp,
        )

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "DiffAlgElement":
        if n < 0:
            raise ValueError("negative powers need exact_divide")
        result = DiffAlgElement.const(1, self.ring)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def times_t_power(self, alpha, beta=0) -> "DiffAlgElement":
        """Multiply by t^alpha (1-t)^beta."""
        return self._like(self.p0, self.p1, texp=self.texp + Fraction(alpha),
                          omtexp=self.omtexp + Fraction(beta), normalize=False)

    def times_prefactor(self, phi: int = 0, cosp: int = 0) -> "DiffAlgElement":
        return self._like(self.p0, self.p1, phi=self.phi + phi, cosp=self.cosp + cosp, normalize=False)

    def __eq__(self, other) -> bool:
        try:
            return (self - self._coerce(other)).is_zero()
        except ValueError:
            return False

    __hash__ = None  # type: ignore[assignment]

    # derivative -----------------------------------------------------------
    def _d_poly(self, p):
        """(A0, A1) with D * dp/dt = A0 + C A1 for a C-free polynomial p."""
        ring = self.ring
        if p.is_zero():
            return ring.zero, ring.zero
        a0 = ring.D * p.derivative(0)
        a1 = ring.zero
        ps = p.derivative(1)
        if not ps.is_zero():
            a0 += ring.DS[0] * ps
            a1 += ring.DS[1] * ps
        px = p.derivative(2)
        if not px.is_zero():
            a0 += ring.DX[0] * px
            a1 += ring.DX[1] * px
        if ring.DK is not None:
            pk = p.derivative(ring.k_index)
            if not pk.is_zero():
                a0 += ring.DK * pk
            pe = p.derivative(ring.e_index)
            if not pe.is_zero():
                a0 += ring.DE * pe
        return a0, a1

    def d_dt(self) -> "DiffAlgElement":
        """Total t-derivative at fixed x."""
        if self.is_zero():
            return self
        ring = self.ring
        p0, p1 = self.p0, self.p1
        a0, a1 = self._d_poly(p0)
        b0, b1 = self._d_poly(p1)
        even = a0
        odd = a1 + b0
        if not p1.is_zero():
            even += ring.DC[0] * p1 + ring.F * b1
            odd += ring.DC[1] * p1
        t = ring.g["t"]
        log_pre = ring.DLOGPHI * self.phi + (t - 1) * ring.scalar(4 * self.texp) + t * ring.scalar(4 * self.omtexp)
        even += log_pre * p0
        odd += log_pre * p1
        # 1/D = -1 / (4 t (1 - t))
        quarter = ring.scalar(Fraction(-1, 4))
        return self._like(even * quarter, odd * quarter, texp=self.texp - 1, omtexp=self.omtexp - 1)

    # division -------------------------------------------------------------
    def conjugate(self) -> "DiffAlgElement":
        return self._like(self.p0, -self.p1, normalize=False)

    def exact_divide(self, den) -> "DiffAlgElement":
        """Quotient q with q * den == self, or NotDivisible."""
        den = self._coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("division by the zero element")
        phi, cosp = self.phi - den.phi, self.cosp - den.cosp
        if self.is_zero():
            return DiffAlgElement(0, 0, phi, cosp, ring=self.ring)
        if den.p1.is_zero() and den.p0.is_constant():
            inv = self.ring.scalar(1) / den.p0.leading_coefficient()
            return self._like(self.p0 * inv, self.p1 * inv, phi, cosp,
                              self.texp - den.texp, self.omtexp - den.omtexp, normalize=False)
        try:
            q0, q1 = _x_long_division(self.ring, self.p0, self.p1, den.p0, den.p1)
        except FlintDomainError as exc:
            raise NotDivisible("numerator is not divisible by the denominator") from exc
        return self._like(q0, q1, phi, cosp, self.texp - den.texp, self.omtexp - den.omtexp)

    __truediv__ = exact_divide

    # change of ring ---------------------------------------------------------
    def to_ring(self, ring: PolyRing) -> "DiffAlgElement":
        """Map into another ring: drop unused generators, reduce modulo p."""
        src = self.ring
        if src.modulus is not None and ring.modulus != src.modulus:
            raise ValueError("modular elements can only move between rings with the same modulus")
        idx = [src.gens.index(g) if g in src.gens else None for g in ring.gens]
        absent = [j for j, g in enumerate(src.gens) if g not in ring.gens]

        def conv(p):
            out = {}
            for m, c in zip(p.monoms(), p.coeffs()):
                m = tuple(int(e) for e in m)
                if any(m[j] for j in absent):
                    raise ValueError("element uses a generator missing from the target ring")
                key = tuple(m[i] if i is not None else 0 for i in idx)
                if src.modulus is None:
                    out[key] = ring.scalar(Fraction(int(c.p), int(c.q)))
                else:
                    out[key] = int(c)
            return ring.ctx.from_dict(out)

        return DiffAlgElement(conv(self.p0), conv(self.p1), *self.prefactor, ring=ring, normalize=False)

    def to_series(self, ctx) -> BiSeries:
        """Evaluate in (x, s) using the series of an ``EllipticContext``."""
        if self.ring.modulus is not None:
            raise ValueError("only rational elements can be evaluated")
        return _Evaluator.for_context(ctx).evaluate(self)

    # printing and serialization ---------------------------------------------
    def pretty(self) -> str:
        parts = []
        if self.phi:
            parts.append("Phi" if self.phi == 1 else f"Phi^{self.phi}")
        if self.cosp:
            parts.append("cos(x)" if self.cosp == 1 else f"cos(x)^({self.cosp})")
        if self.texp:
            parts.append(f"t^({self.texp})")
        if self.omtexp:
            parts.append(f"(1-t)^({self.omtexp})")
        body = []
        if not self.p0.is_zero():
            body.append(f"({self.p0.str()})")
        if not self.p1.is_zero():
            body.append(f"C*({self.p1.str()})")
        poly = " + ".join(body) if body else "0"
        return " * ".join(parts + [f"[{poly}]"])

    def to_json_obj(self) -> dict:
        if self.ring.modulus is not None:
            raise ValueError("only rational elements are serialized")

        def terms(p):
            return [[[int(e) for e in m], f"{c.p}/{c.q}"] for m, c in zip(p.monoms(), p.coeffs())]

        return {
            "generators": list(self.ring.gens),
            "phi_power": self.phi,
            "cos_power": self.cosp,
            "t_exponent": str(self.texp),
            "one_minus_t_exponent": str(self.omtexp),
            "even": terms(self.p0),
            "odd": terms(self.p1),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "DiffAlgElement":
        ring = PolyRing(tuple(obj.get("generators", ALL_GENS)))

        def poly(items):
            return ring.ctx.from_dict({tuple(m): ring.scalar(Fraction(c)) for m, c in items})

        return cls(
            poly(obj["even"]), poly(obj["odd"]),
            obj["phi_power"], obj["cos_power"],
            Fraction(obj["t_exponent"]), Fraction(obj["one_minus_t_exponent"]),
            ring=ring,
        )


def _x_long_division(ring: PolyRing, a0, a1, c0, c1):
    """Solve (c0 + C c1)(q0 + C q1) = a0 + C a1, eliminating the top X-degree first.

    Each step divides by the norm of the leading X-coefficient of the
    denominator in the smaller ring over (t, S, ...).
    """
    zero = ring.sub_zero
    F = ring.sub_F
    A0, A1 = ring.split_x(a0), ring.split_x(a1)
    D0, D1 = ring.split_x(c0), ring.split_x(c1)
    den_keys = sorted(set(D0) | set(D1))
    m = den_keys[-1]
    l0, l1 = D0.get(m, zero), D1.get(m, zero)
    lnorm = l0 if l1.is_zero() else l0 * l0 - F * (l1 * l1)
    Q0: dict[int, object] = {}
    Q1: dict[int, object] = {}
    live = set(A0) | set(A1)
    while live:
        k = max(live)
        r0, r1 = A0.pop(k, zero), A1.pop(k, zero)
        live.discard(k)
        if r0.is_zero() and r1.is_zero():
            continue
        if k < m:
            raise NotDivisible("nonzero remainder in X-long division")
        if l1.is_zero():
            n0, n1 = r0, r1
        else:
            n0 = r0 * l0 - F * (r1 * l1)
            n1 = r1 * l0 - r0 * l1
        q0 = zero if n0.is_zero() else n0 / lnorm
        q1 = zero if n1.is_zero() else n1 / lnorm
        j = k - m
        Q0[j], Q1[j] = q0, q1
        for i in den_keys:
            if i == m:
                continue
            e0, e1 = _sub_pair_product(F, zero, q0, q1, D0.get(i, zero), D1.get(i, zero))
            key = i + j
            if not e0.is_zero():
                A0[key] = A0.get(key, zero) - e0
                live.add(key)
            if not e1.is_zero():
                A1[key] = A1.get(key, zero) - e1
                live.add(key)
    return ring.join_x(Q0), ring.join_x(Q1)


def _sub_pair_product(F, zero, a0, a1, b0, b1):
    even = zero
    odd = zero
    if not a0.is_zero():
        if not b0.is_zero():
            even = a0 * b0
        if not b1.is_zero():
            odd = a0 * b1
    if not a1.is_zero():
        if not b1.is_zero():
            even = even + F * (a1 * b1)
        if not b0.is_zero():
            odd = odd + a1 * b0
    return even, odd


# ---------------------------------------------------------------------------
# multimodular lifting
# ---------------------------------------------------------------------------

def rational_reconstruct(a: int, m: int) -> Fraction | None:
    """n/d with n = a d (mod m) and |n|, d <= sqrt(m/2); None if no such pair."""
    a %= m
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    if math.gcd(r1, s1) != 1:
        return None
    return Fraction(r1, s1)


def _crt_poly(parts: Sequence[tuple[object, int]]) -> tuple[dict[tuple, int], int]:
    acc: dict[tuple, int] = {}
    m = 1
    for poly, p in parts:
        vals = {tuple(int(e) for e in mono): int(c) for mono, c in zip(poly.monoms(), poly.coeffs())}
        if m == 1:
            acc = vals
        else:
            inv = pow(m, -1, p)
            for key in set(acc) | set(vals):
                x = acc.get(key, 0)
                h = (vals.get(key, 0) - x) * inv % p
                acc[key] = x + m * h
        m *= p
    return acc, m


def reconstruct_element(images: Sequence[DiffAlgElement], ring: PolyRing | None = None) -> DiffAlgElement | None:
    """Lift modular images sharing one prefactor to Q; None when the modulus is too small."""
    first = images[0]
    if any(e.prefactor != first.prefactor for e in images):
        raise ValueError("images disagree on the prefactor")
    target = ring or PolyRing(first.ring.gens)

    def lift(which: str):
        acc, m = _crt_poly([(getattr(e, which), e.ring.modulus) for e in images])
        out = {}
        for key, val in acc.items():
            if val % m == 0:
                continue
            q = rational_reconstruct(val, m)
            if q is None:
                return None
            out[key] = target.scalar(q)
        return target.ctx.from_dict(out)

    p0 = lift("p0")
    if p0 is None:
        return None
    p1 = lift("p1")
    if p1 is None:
        return None
    return DiffAlgElement(p0, p1, *first.prefactor, ring=target, normalize=False)


def parse(expr: str, ring: PolyRing = QQ, **prefactor) -> DiffAlgElement:
    """Build an element from a polynomial expression in t, S, C, X, K, E, x."""
    namespace = {name: DiffAlgElement.gen(name, ring) for name in ring.gens + ("C",)}
    value = eval(expr.replace("^", "**"), {"__builtins__": {}, "Fraction": Fraction, "F": Fraction}, namespace)
    if not isinstance(value, DiffAlgElement):
        value = DiffAlgElement.const(value, ring)
    if prefactor:
        value = DiffAlgElement(
            value.p0, value.p1,
            value.phi + prefactor.get("phi", 0),
            value.cosp + prefactor.get("cosp", 0),
            value.texp + Fraction(prefactor.get("texp", 0)),
            value.omtexp + Fraction(prefactor.get("omtexp", 0)),
            ring=ring,
        )
    return value


S = DiffAlgElement.gen("S")
C = DiffAlgElement.gen("C")
X = DiffAlgElement.gen("X")
K = DiffAlgElement.gen("K")
E = DiffAlgElement.gen("E")
T = DiffAlgElement.gen("t")
XARG = DiffAlgElement.gen("x")
PHI = DiffAlgElement.gen("Phi")
COS = DiffAlgElement.gen("cos")
ONE = DiffAlgElement.const(1)


class _Evaluator:
    """Series values of the generators, with cached powers."""

    _cache: dict = {}

    def __init__(self, ctx):
        self.ctx = ctx
        xo = ctx.x_order
        j = ctx.jacobi_x
        self.values = {
            "S": j.sn,
            "X": ctx.bigX,
            "K": BiSeries.from_graded(ctx.K, xo),
            "E": BiSeries.from_graded(ctx.E, xo),
            "x": BiSeries({1: GradedSeries.constant(1)}, xo),
        }
        self.c_value = j.cn * j.dn
        self.powers: dict[tuple[str, int], BiSeries] = {}

    @classmethod
    def for_context(cls, ctx) -> "_Evaluator":
        ev = cls._cache.get(id(ctx))
        if ev is None or ev.ctx is not ctx:
            ev = cls(ctx)
            cls._cache[id(ctx)] = ev
        return ev

    def power(self, gen: str, n: int) -> BiSeries:
        if n == 0:
            return BiSeries.constant(1)
        key = (gen, n)
        if key not in self.powers:
            self.powers[key] = self.power(gen, n - 1) * self.values[gen]
        return self.powers[key]

    def poly(self, p, gens: Sequence[str]) -> BiSeries:
        groups: dict[tuple, dict[int, Fraction]] = {}
        for m, c in zip(p.monoms(), p.coeffs()):
            m = tuple(int(e) for e in m)
            groups.setdefault(m[1:], {})[4 * m[0]] = Fraction(int(c.p), int(c.q))
        total = BiSeries({}, self.ctx.x_order)
        for rest, tpoly in groups.items():
            term = BiSeries.constant(1)
            for gen, n in zip(gens[1:], rest):
                if n:
                    term = term * self.power(gen, n)
            total = total + term.scale(GradedSeries(tpoly))
        return total

    def evaluate(self, e: DiffAlgElement) -> BiSeries:
        ctx = self.ctx
        val = self.poly(e.p0, e.ring.gens)
        if not e.p1.is_zero():
            val = val + self.c_value * self.poly(e.p1, e.ring.gens)
        if e.phi > 0:
            val = val * ctx.phi**e.phi
        elif e.phi < 0:
            val = val.div(ctx.phi ** (-e.phi))
        if e.cosp > 0:
            val = val * ctx.cos_x**e.cosp
        elif e.cosp < 0:
            val = val.div(ctx.cos_x ** (-e.cosp))
        shift = 4 * e.texp
        if shift.denominator != 1:
            raise ValueError("t exponent leaves the s-lattice")
        val = val.shift_s(int(shift))
        if e.omtexp:
            omt = GradedSeries({0: 1, 4: -1}, ctx.s_order)
            val = val.scale(omt.pow_rational(e.omtexp))
        return val
