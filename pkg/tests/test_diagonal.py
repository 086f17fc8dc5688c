from fractions import Fraction as F

import pytest
from mpmath import mp

from isingtoda import diagonal
from isingtoda.elliptic import EllipticContext
from isingtoda.errors import TruncationExhausted
from isingtoda.kepoly import KEPolynomial
from isingtoda.series import BiSeries, GradedSeries as G, arcsin_series


@pytest.fixture(scope="module")
def ctx():
    return EllipticContext(8, 32)


@pytest.fixture(scope="module")
def sequences(ctx):
    return {r: diagonal.diagonal_sequence(r, 3, ctx) for r in diagonal.REGIMES}


def omt_quarter(order):
    return G({0: 1, 4: -1}, order).pow_rational(F(1, 4))


def test_c0_minus_at_x_zero(ctx):
    c = diagonal.c0("minus", ctx)
    assert c.series.coefficient(0).agrees_with(omt_quarter(32))


def test_c0_plus_linear_term_is_k(ctx):
    ff = diagonal.extract_form_factors(diagonal.c0("plus", ctx), 1)
    assert ff[1].agrees_with(ctx.K.shift(1))


def test_c1_plus_starts_at_s2(ctx):
    c = diagonal.c1("plus", ctx)
    assert min(ser.valuation() for _, ser in c.series.items()) >= 2


def test_minus_leading_correction(sequences):
    assert diagonal.minus_leading_coefficient(1) == F(3, 64)
    lam = sequences["minus"][1].series.truncate(x_order=3).compose_x(arcsin_series(3))
    c2 = lam.coefficient(2)
    assert c2.valuation() == 8 and c2[8] == F(3, 64)


def test_parity(sequences):
    for N in range(4):
        assert sequences["minus"][N].series.parity_in_x() == "even"
        assert sequences["plus"][N].series.parity_in_x() == "odd"


def test_engines_agree(ctx):
    closed = diagonal.closed_sequence("plus", 4)
    series = diagonal.diagonal_sequence("plus", 4, EllipticContext(8, diagonal.required_s_order(4, 24)))
    for N in range(5):
        assert closed[N].to_series(ctx).agrees_with(series[N].series, x_order=8, s_order=24)


def test_sigma_residual_and_negative_control(sequences):
    for regime in diagonal.REGIMES:
        for c in sequences[regime]:
            assert diagonal.sigma_residual(c).is_zero_to_order()
    c = sequences["minus"][1]
    bumped = c.series + BiSeries({2: G({12: F(1, 7)})}, c.series.x_order)
    assert not diagonal.sigma_residual(c, bumped).is_zero_to_order()


def test_form_factors_00(ctx):
    K, E = ctx.K, ctx.E
    assert diagonal.form_factor_00(1) == KEPolynomial.parse("s*K")
    c2 = diagonal.form_factor_00(2).to_series(K, E)
    assert c2.truncate(9) == G({4: F(1, 4), 8: F(5, 32)}, 9)
    ff = diagonal.extract_form_factors(diagonal.c0("minus", ctx), 4)
    assert ff[1].is_zero() and ff[3].is_zero()
    assert ff[4].agrees_with(diagonal.form_factor_00(4).to_series(K, E))


def test_homogeneity():
    combos = dict(diagonal.homogeneous_combinations())
    assert diagonal.homogeneity_check(combos[4], 4)
    low = {k: v for k, v in diagonal.combination(combos[4]).terms.items() if sum(k) < 4}
    assert low == {}
    # reference degree-6 combination: 1/45 leaves (K E - K^2)/90, 2/45 is homogeneous
    assert not diagonal.homogeneity_check(combos[6], 6)
    assert diagonal.homogeneity_check({6: F(1), 4: F(-2, 3), 2: F(2, 45)}, 6)


def test_truncation_budget():
    assert diagonal.required_s_order(5, 40) == 40 + 16 + 8
    with pytest.raises(TruncationExhausted):
        diagonal.lambda_coefficients(BiSeries({0: G.constant(1, 8)}, 3), "minus", 3)


def test_lambda_one():
    with mp.workdps(40):
        for regime in diagonal.REGIMES:
            got = diagonal.lambda_one_value(diagonal.c1_closed(regime), "0.5")
            assert abs(got - diagonal.lambda_one_expected(regime, 1, "0.5")) < 1e-10
        assert abs(diagonal.lambda_one_value(diagonal.c0_closed("minus"), "0.3") - 1) < 1e-10


def test_bad_regime(ctx):
    with pytest.raises(ValueError):
        diagonal.c0("sideways", ctx)
