import json
from fractions import Fraction as F
from pathlib import Path

import pytest
from mpmath import mp

from isingtoda import formfactor, offdiag
from isingtoda.elliptic import EllipticContext
from isingtoda.errors import DomainError, InconsistentFit
from isingtoda.kepoly import KEPolynomial
from isingtoda.numeric import NumericEllipticContext
from isingtoda.series import GradedSeries as G

GOLDEN = Path(__file__).parent / "golden" / "v1"


def test_ansatz_rows_n1_n2():
    f1 = offdiag.table_fit(1)
    assert f1.a == (F(-1, 2),) and f1.b == {(1, 0): F(1, 2)}
    assert offdiag.ansatz_evaluate(f1).agrees_with(offdiag.form_factor_01(1).to_series(*offdiag._ke_series(30)), 30)
    want = KEPolynomial.parse("3/8 - (1 + s^2)*K/4 - (s^2 - 3)*(1 + s^2)*K^2/8 - E*K/2")
    assert offdiag.table_fit(2).kepoly() == want
    assert offdiag.table_fit(2).p[1] == (-3, 1)
    assert offdiag.table_fit(3).p[2] == (-11, 6, 1)


def test_table_row_n4_matches_reference_form():
    fit = offdiag.table_fit(4)
    assert fit.a == (F(35, 128), F(-17, 48), F(1, 8))
    assert fit.kepoly() == offdiag.form_factor_01(4)


def test_json_round_trip_and_golden():
    golden = json.loads((GOLDEN / "ansatz_fits.json").read_text())
    for n in range(1, 7):
        fit = offdiag.table_fit(n)
        assert fit.to_json_obj() == golden[str(n)]
        assert offdiag.AnsatzFit.from_json_obj(golden[str(n)]) == fit


def test_zero_conditions():
    for n in (5, 6):
        assert offdiag.zero_condition_check(offdiag.table_fit(n))["pass"]
    fit = offdiag.table_fit(2)
    b = dict(fit.b)
    b[(2, 0)] += F(1, 3)
    assert not offdiag.zero_condition_check(offdiag.AnsatzFit(2, fit.a, b, fit.p))["pass"]


def test_fit_from_oracle():
    got = offdiag.ansatz_fit_from_oracle(2, formfactor.formfactor_series(2, 0, 1, 30))
    assert got == offdiag.table_fit(2)
    wrong = formfactor.formfactor_series(2, 0, 1, 30) + G({14: F(1, 5)})
    with pytest.raises(InconsistentFit):
        offdiag.ansatz_fit_from_oracle(2, wrong)


def test_closed_form_lambda_zero():
    ctx = EllipticContext(5, 30)
    c = offdiag.c01_closed_form("minus", ctx)
    assert c.coefficient(0).agrees_with(G({0: 1, 4: -1}, 30).pow_rational(F(1, 4)), 29)
    assert offdiag.c01_closed_form("minus", ctx).parity_in_x() == "even"
    assert offdiag.c01_closed_form("plus", ctx).parity_in_x() == "odd"


def test_closed_form_matches_oracle():
    ctx = EllipticContext(5, 34)
    ff = offdiag.c01_form_factors("minus", ctx, 4)
    assert ff[2].agrees_with(formfactor.formfactor_series(2, 0, 1, 30), 30)
    assert ff[4].agrees_with(formfactor.formfactor_series(4, 0, 1, 30), 30)


def test_lambda_one_limits():
    with mp.workdps(40):
        for regime in ("plus", "minus"):
            got = offdiag.c01_numeric(regime, "0.5", 1)
            assert abs(got - offdiag.c01_lambda_one_expected(regime, "0.5")) < 1e-10
        s = mp.mpf("0.5")
        K = NumericEllipticContext.at(s).K
        assert abs(offdiag.c01_lambda_one_expected("minus", s) - mp.sqrt(1 + s**2) / 2 * (1 - (s**2 - 1) * K)) < 1e-20
    with pytest.raises(DomainError):
        offdiag.c01_numeric("plus", "0.5", 1.5)


def test_numeric_closed_form_vs_series():
    ctx = EllipticContext(6, 40)
    ser = offdiag.c01_closed_form("minus", ctx)
    with mp.workdps(30):
        x = mp.mpf("0.3")
        approx = sum(c.evaluate(mp.mpf("0.2")) * x**k for k, c in ser.items())
        assert abs(offdiag.c01_numeric("minus", "0.2", mp.sin(x)) - approx) < 1e-6


def test_structure_checks_frozen():
    golden = json.loads((GOLDEN / "g_ode_coefficients.json").read_text())
    for which in ("even", "odd"):
        r = offdiag.g_ode_fit(which)
        assert r["polynomial"] and r["residual_zero"] and r["checked_through_y"] == 12
        assert {str(k): v for k, v in r["A"].items()} == golden[which]
    assert offdiag.beta_product_check()


def test_combinations():
    for degree, const, coeffs in offdiag.combination_identities():
        assert offdiag.combination_check(degree, const, coeffs)
    degree, const, coeffs = offdiag.combination_identities()[0]
    assert not offdiag.combination_check(degree, const + F(1, 100), coeffs)
