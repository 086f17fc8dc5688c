from fractions import Fraction as F

from isingtoda.elliptic import EllipticContext
from isingtoda.kepoly import KEPolynomial as P
from isingtoda.series import GradedSeries as G


def test_parse_and_terms():
    p = P.parse("K*(K - E)/2")
    assert p.terms == {(1, 1): {0: F(-1, 2)}, (2, 0): {0: F(1, 2)}}
    assert p.is_homogeneous(2) and not p.e_free()
    assert P.parse("t") == P({(0, 0): {4: 1}})
    assert P.parse("3/8 - K/4").degrees() == {0, 1}


def test_arithmetic():
    k, e = P.K(), P.E()
    assert (k + e) * (k - e) == k * k - e * e
    assert (k * 2 - k * 2).is_zero()


def test_series_expansion():
    ctx = EllipticContext(1, 13)
    got = (P.K() * (P.K() - P.E())).to_series(ctx.K, ctx.E)
    assert got.truncate(9) == G({4: F(1, 2), 8: F(5, 16)}, 9)


def test_numeric_evaluation():
    assert P.parse("1 + s*K - E^2").evaluate(2, 3, F(1, 2)) == 1 + 1 - 9


def test_json_round_trip():
    p = P.parse("(t - 2)*K^2*E/6 + s")
    assert P.from_json_obj(p.to_json_obj()) == p
