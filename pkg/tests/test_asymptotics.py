import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaplab.asymptotics import (
    EXPECTED,
    cardano_alpha,
    check_gap_quantities,
    classify_regime,
    compute_coefficients,
    cubic_residual,
    fit_rates,
    real_cbrt,
)
from chaplab.charmap import LocalChart
from chaplab.errors import ConfigError
from chaplab.singularity import analyze


@pytest.fixture(scope="module")
def cs(cusp, cusp_report):
    return compute_coefficients(cusp, cusp_report)


@pytest.fixture(scope="module")
def cs_point(point, point_report):
    return compute_coefficients(point, point_report)


def test_cusp_constants(cs):
    assert cs.kind == "H" and cs.shift == 0.0
    assert cs.B2 == -1.0
    assert cs.B1 == pytest.approx(-math.tanh(2) / 2, rel=1e-15)


def test_cusp_sign_invariants(cs):
    assert cs.B1 < 0 and cs.B2 < 0 and cs.B3 > 0
    assert cs.C1 < 0 and cs.C2 < 0 and cs.C3 < 0
    assert cs.M != 0


def test_d1_two_paths_agree(cusp, cs):
    direct = -float(cusp.lambda_plus(2.0, 1)) * float(cusp.lambda_minus(2.0))
    assert cs.D1 == direct


def test_cubic_coefficient_against_local_chart(cusp, cs):
    """On t~ = 0, x~ / a~^3 tends to B3: fit it from exact offsets."""
    chart = LocalChart(cusp, 0.0, 2.0)
    ratios = []
    for da in (1e-2, 1e-3, 1e-4):
        db = chart.beta_for_time(da, 0.0, da)
        _, xt = chart.forward(da, db)
        ratios.append(float(xt[0]) / da**3)
    assert abs(ratios[-1] - cs.B3) < 1e-3 * abs(cs.B3)
    assert abs(ratios[-1] - 1 / 3) < 1e-3
    # the alternative bracket sign gives the wrong value
    assert abs(cs.B3_printed - ratios[-1]) > 0.5


def test_point_constants_against_local_chart(point, cs_point):
    """b~ ~ B11 t~ and Lambda_+(beta) - Lambda_-(alpha) ~ B14 t~^2 along x~ = 0."""
    rep = check_gap_quantities(point, analyze(point)[0], "I", (-1e-4, 0.0))
    assert rep.deviation("beta_tilde") < 1e-3
    assert rep.deviation("gap") < 1e-3
    assert cs_point.B11 == pytest.approx(2.0, rel=1e-12)
    assert cs_point.B14 == pytest.approx(8.0, rel=1e-12)


def test_line_constants(line1):
    r = analyze(line1)[0]
    c = compute_coefficients(line1, r)
    assert c.V1 == pytest.approx((24 / 13) ** (1 / 3), rel=1e-14)
    assert c.V1_leading == pytest.approx(48 ** (1 / 3), rel=1e-14)


def test_line_gap_prefers_leading_order(line1):
    r = analyze(line1)[0]
    t_mid = 0.5 * sum(r.line_extent)
    devs = [check_gap_quantities(line1, r, "line", (0.0, x), line_t=t_mid) for x in (1e-5, 1e-7, 1e-9)]
    lead = [g.deviation("gap_leading") for g in devs]
    # next order is relative x~^(1/3): two decades shrink it by 100^(1/3)
    assert lead[2] < 1e-2
    for a, b in zip(lead, lead[1:]):
        assert a / b == pytest.approx(100 ** (1 / 3), rel=0.05)
    assert all(g.deviation("offset_stated") > 0.5 for g in devs)


def test_cardano_degenerate_cases(cs):
    assert cardano_alpha(cs, 0.0, 0.0).alpha == 0.0
    for x in (1e-6, -3e-5):
        assert cardano_alpha(cs, 0.0, x).alpha == pytest.approx(float(real_cbrt(-cs.C3 * x)), rel=1e-12)


def test_cardano_example_against_polynomial_roots(cs):
    tt, xt = -1e-3, 1e-5
    a = cardano_alpha(cs, tt, xt).alpha
    assert cubic_residual(cs, a, tt, xt) <= 1e-12
    roots = np.roots([cs.B3, 0.0, cs.B2 * tt, cs.B1 * tt * tt - xt])
    real = roots[np.abs(roots.imag) < 1e-12].real
    assert np.min(np.abs(real - a)) < 1e-12 * max(1.0, abs(a))


@given(st.floats(-1e-2, 0.0), st.floats(-1e-3, 1e-3))
def test_cardano_residual_property(cs, tt, xt):
    a = cardano_alpha(cs, tt, xt).alpha
    assert cubic_residual(cs, a, tt, xt) <= 1e-10


@given(st.floats(-1e-2, 1e-2), st.floats(-1e-3, 1e-3))
def test_cardano_backward_error_property(cs, tt, xt):
    # for t~ > 0 the root can be ~|t~|^(1/2) while B1 t~^2 and x~ are far smaller,
    # so rounding is measured against the largest term instead
    a = cardano_alpha(cs, tt, xt).alpha
    terms = [cs.B3 * a**3, cs.B2 * tt * a, cs.B1 * tt * tt, -xt]
    scale = max(abs(v) for v in terms)
    assert scale == 0.0 or abs(math.fsum(terms)) <= 1e-13 * scale


@given(st.floats(1e-6, 1e-2), st.floats(1e-9, 1e-3))
def test_trigonometric_branch_returns_a_root(cs, s, xt):
    # t~ > 0 makes the inner discriminant negative for small x~
    root = cardano_alpha(cs, s, xt)
    assert cubic_residual(cs, root.alpha, s, xt) <= 1e-10


def test_regime_examples():
    r = classify_regime("H", -1e-2, 1e-6)
    assert r.case == "I" and r.ratio == pytest.approx(1e-3)
    assert classify_regime("H", -1e-4, 1e-2).case == "II"
    r = classify_regime("H", -1e-2, 1e-3)
    assert r.case == "III" and r.ratio == pytest.approx(1.0)
    assert classify_regime("A", -1e-1, 1e-3).case == "III"
    with pytest.raises(ConfigError):
        classify_regime("H", 0.0, 0.0)


@given(st.floats(1e-8, 1e-3))
def test_case_three_path_stays_in_case_three(s):
    assert classify_regime("H", -s, 1.0 * s**1.5).case == "III"


@pytest.mark.parametrize(
    "quantity,path,expected",
    [("rho", "I", -1.0), ("rho", "II", -2 / 3), ("u_x", "I", -1.0), ("u-deviation", "II", 1 / 3)],
)
def test_cusp_rates(cusp, cusp_report, quantity, path, expected):
    rep = fit_rates(cusp, cusp_report, quantity, path)
    assert rep.expected_exponent == pytest.approx(expected)
    assert rep.passed(), rep.to_dict()


def test_cusp_density_gradient_case_two_bound_is_not_sharp(cusp, cusp_report, cs):
    """Observed |rho_x| ~ |x~|^(-5/3): the leading numerator cancels because f(alpha0) = 0."""
    assert EXPECTED[("H", "II")]["rho_x"] == -2.0
    lm1, lp1 = float(cusp.lambda_minus(0.0, 1)), float(cusp.lambda_plus(2.0, 1))
    assert lm1 * float(cusp.gap(0.0)) == pytest.approx(lp1 * float(cusp.gap(2.0)), abs=1e-15)
    rep = fit_rates(cusp, cusp_report, "rho_x", "II")
    assert rep.r_squared > 0.999
    assert rep.fitted_exponent == pytest.approx(-5 / 3, abs=0.01)
    # the bound itself holds: |rho_x| |x~|^2 shrinks
    vals = [abs(s["value"]) * s["s"] ** 2 for s in rep.samples]
    assert vals[-1] < vals[0]


@pytest.mark.parametrize("path,expected", [("I", -2.0), ("II", -2 / 3)])
def test_point_rates(point, point_report, path, expected):
    rep = fit_rates(point, point_report, "rho", path)
    assert rep.expected_exponent == pytest.approx(expected)
    assert rep.passed(), rep.to_dict()


def test_rate_report_invariants(cusp, cusp_report):
    rep = fit_rates(cusp, cusp_report, "rho", "I", samples=8)
    assert rep.n_points >= 8 and rep.decades >= 2.0
    with pytest.raises(ConfigError):
        fit_rates(cusp, cusp_report, "rho", "I", samples=4)
    with pytest.raises(ConfigError):
        fit_rates(cusp, cusp_report, "pressure", "I")


def test_gap_case_one_deviation_shrinks(cusp, cusp_report):
    devs = [check_gap_quantities(cusp, cusp_report, "I", (t, 0.0)).deviation("alpha_tilde") for t in (-1e-2, -1e-3, -1e-4)]
    assert devs[0] > devs[1] > devs[2]


def test_gap_case_two_deviation_shrinks(cusp, cusp_report):
    devs = [check_gap_quantities(cusp, cusp_report, "II", (0.0, x)).deviation("gap") for x in (1e-3, 1e-5, 1e-7)]
    assert devs[0] > devs[1] > devs[2] and devs[2] < 1e-2
