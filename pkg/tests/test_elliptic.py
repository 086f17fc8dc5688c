from fractions import Fraction as F

import mpmath
import pytest
from mpmath import mp

from isingtoda.elliptic import EllipticContext, dK_dt_formula, theta4_ratio_from_eps
from isingtoda.errors import DomainError
from isingtoda.numeric import NumericEllipticContext, agm, complete_e, complete_k, numeric_eval
from isingtoda.series import GradedSeries as G


@pytest.fixture(scope="module")
def ctx():
    return EllipticContext(8, 24)


def test_complete_integrals(ctx):
    assert ctx.K.truncate(13) == G({0: 1, 4: F(1, 4), 8: F(9, 64), 12: F(25, 256)}, 13)
    assert ctx.E.truncate(13) == G({0: 1, 4: F(-1, 4), 8: F(-3, 64), 12: F(-5, 256)}, 13)
    assert ctx.K[0] == 1


def test_nome(ctx):
    assert ctx.nome.truncate(13) == G({4: F(1, 16), 8: F(1, 32), 12: F(21, 1024)}, 13)
    th2, th3 = ctx.theta_const(2), ctx.theta_const(3)
    assert (th2.div(th3) ** 2).agrees_with(G({2: 1}), 20)
    assert th3[0] == 1


def test_theta_constants(ctx):
    ratio = ctx.theta_const(4).div(ctx.theta_const(3))
    assert ratio.agrees_with(G({0: 1, 4: -1}, 24).pow_rational(F(1, 4)))


def test_theta_functions(ctx):
    assert ctx.theta_fn(1).coefficient(0).is_zero()
    assert theta4_ratio_from_eps(ctx).agrees_with(ctx.theta4 / ctx.theta4_0, x_order=7)


def test_jacobi(ctx):
    sn, cn, dn = ctx.jacobi
    assert sn.coefficient(1).agrees_with(G.constant(1))
    assert sn.coefficient(3).agrees_with(G({0: F(-1, 6), 4: F(-1, 6)}), 24)
    assert cn.coefficient(0).agrees_with(G.constant(1)) and dn.coefficient(0).agrees_with(G.constant(1))
    # at t = 0 dn is identically 1
    for k, c in dn.items():
        assert c[0] == (1 if k == 0 else 0)


def test_eps_and_big_x(ctx):
    eps = ctx.eps_integral
    assert eps.coefficient(0).is_zero()
    assert eps.coefficient(1).agrees_with(G.constant(1))
    assert eps.coefficient(3).truncate(9) == G({4: F(-1, 3)}, 9)
    big_x = ctx.bigX
    assert big_x.coefficient(0).is_zero()
    assert big_x.coefficient(1).agrees_with(ctx.K - ctx.E)
    assert big_x.coefficient(1).truncate(9) == G({4: F(1, 2), 8: F(3, 16)}, 9)
    for _, c in big_x.items():
        assert c[0] == 0


def test_derivative_formula(ctx):
    assert ctx.K.derivative_t().agrees_with(dK_dt_formula(ctx))


def test_numeric_track_against_mpmath():
    with mp.workdps(30):
        s = mpmath.mpf("0.6")
        t = s**4
        assert abs(complete_k(t) - mpmath.ellipk(t)) < mpmath.mpf("1e-25")
        assert abs(complete_e(t) - mpmath.ellipe(t)) < mpmath.mpf("1e-25")
        assert abs(agm(1, 2) - mpmath.agm(1, 2)) < mpmath.mpf("1e-25")
        nctx = NumericEllipticContext.at(s)
        assert abs(nctx.K - 2 / mp.pi * mpmath.ellipk(t)) < mpmath.mpf("1e-25")
        u = mpmath.mpf("0.7")
        sn, cn, dn = nctx.jacobi(u)
        m = s**4
        assert abs(sn - mpmath.ellipfun("sn", u, m=m)) < mpmath.mpf("1e-20")
        assert abs(dn - mpmath.ellipfun("dn", u, m=m)) < mpmath.mpf("1e-20")
        assert abs(nctx.eps(u) - nctx.eps(u, method="quad")) < mpmath.mpf("1e-20")


def test_numeric_eval_examples():
    with mp.workdps(30):
        assert abs(numeric_eval("K", "1e-6") - 1) < 1e-12
        kk = numeric_eval("k", 0.95) ** 2 + numeric_eval("kprime", 0.95) ** 2
        assert abs(kk - 1) < 1e-12
    with pytest.raises(DomainError):
        numeric_eval("K", 1.5)
    with pytest.raises(ValueError):
        numeric_eval("sn", 0.5)
