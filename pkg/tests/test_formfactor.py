from fractions import Fraction as F

import pytest

from isingtoda import formfactor as ff
from isingtoda.elliptic import EllipticContext
from isingtoda.errors import ConvergenceError, DomainError
from isingtoda.kepoly import KEPolynomial
from isingtoda.numeric import numeric_eval
from isingtoda.series import GradedSeries as G

HALF = F(1, 2)


@pytest.fixture(scope="module")
def ke():
    ctx = EllipticContext(2, 44)
    return ctx.K, ctx.E


def test_one_angle_expansions():
    f = ff.one_angle_factors(1, 0, 3)
    sinh = f["sinh"]
    assert sinh.valuation() == -1
    assert sinh.coefficient(-1) == {(0,): 1}
    assert sinh.coefficient(0) == {(1,): -HALF, (-1,): -HALF}
    x = f["x"]
    assert x.valuation() == 1
    assert x.coefficient(1) == {(0,): HALF}
    assert x.coefficient(2) == {(1,): F(1, 4), (-1,): F(1, 4)}


def test_pair_factor_leading():
    n, rel = 2, 2
    xs = [ff.one_angle_factors(n, i, rel)["x"] for i in range(n)]
    h = ff.pair_factor(n, 0, 1, xs[0], xs[1], rel)
    assert h.valuation() == 2
    # s^2 sin^2((w1 - w2)/2) = s^2 (1/2 - e^{i(w1-w2)}/4 - e^{-i(w1-w2)}/4)
    assert h.coefficient(2) == {(0, 0): HALF, (1, -1): F(-1, 4), (-1, 1): F(-1, 4)}
    assert h.is_real()


def test_small_cases_against_closed_forms(ke):
    K, E = ke
    c101 = ff.formfactor_series(1, 0, 1, 40)
    assert c101.agrees_with(KEPolynomial.parse("-1/2 + (1 + s^2)*K/2").to_series(K, E), 40)
    assert c101.truncate(5) == G({2: HALF, 4: F(1, 8)}, 5)
    c100 = ff.formfactor_series(1, 0, 0, 40)
    assert c100.agrees_with(K.shift(1), 40)
    assert c100.truncate(10) == G({1: 1, 5: F(1, 4), 9: F(9, 64)}, 10)


def test_kinematic_zero():
    c = ff.formfactor_series(2, 0, 1, 10)
    assert c.valuation() == 6 and c[6] == F(1, 16)


def test_routes_agree():
    for args in ((1, 1, 0, 12), (2, 0, 0, 12), (2, 1, 1, 16)):
        assert ff.formfactor_series(*args).agrees_with(ff.formfactor_series_direct(*args))


def test_below_leading_order_is_zero():
    c = ff.formfactor_series(3, 0, 0, 8)
    assert c.is_zero() and c.order == 8


def test_numeric_examples():
    r = ff.formfactor_numeric(1, 0, 1, 0.95, tol=1e-12)
    K = numeric_eval("K", 0.95)
    assert abs(r["value"] - (-0.5 + (1 + 0.95**2) * float(K) / 2)) < 1e-10
    r = ff.formfactor_numeric(2, 0, 0, 0.5, tol=1e-12)
    K, E = float(numeric_eval("K", 0.5)), float(numeric_eval("E", 0.5))
    assert abs(r["value"] - K * (K - E) / 2) < 1e-10
    assert set(r) >= {"s", "n", "M", "N", "value", "est_error", "grid"}


def test_numeric_kinematic_limit():
    r = ff.formfactor_numeric(1, 0, 0, 1e-4, tol=1e-14)
    assert abs(r["value"]) < 2e-4


def test_numeric_series_agreement():
    ser = ff.formfactor_series(2, 0, 1, 50)
    r = ff.formfactor_numeric(2, 0, 1, 0.3, tol=1e-14)
    assert abs(r["value"] - ser.evaluate(0.3)) < 1e-13


def test_numeric_errors():
    with pytest.raises(DomainError):
        ff.formfactor_numeric(1, 0, 0, 1.2)
    with pytest.raises(ConvergenceError):
        ff.formfactor_numeric(2, 0, 0, 0.999, tol=1e-15, grid_cap=16)


def test_bad_arguments():
    with pytest.raises(ValueError):
        ff.formfactor_series(0, 0, 0, 10)
    with pytest.raises(ValueError):
        ff.formfactor_series(1, -1, 0, 10)
