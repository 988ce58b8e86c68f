import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaplab.errors import ConfigError
from chaplab.initial_data import (
    SCENARIO_SETS,
    PlateauQuartic,
    Polynomial,
    Rational,
    Scale,
    Shift,
    Sum,
    TanhComposite,
    builtin_scenario,
    curve_from_spec,
    eval_curve,
    f_indicator,
    pair_from_config,
    validate_assumptions,
)

CURVES = {
    "polynomial": Polynomial((0.3, -1.0, 0.5, 0.25)),
    "rational": Rational((1.0, 2.0), (3.0, 0.0, 1.0)),
    "tanh": TanhComposite(-1.3, 0.7, 0.2, 0.1),
    "plateau": PlateauQuartic(-0.5, 0.75, 2.0, 0.5),
    "sum": Sum((Polynomial((0.0, 1.0)), TanhComposite())),
    "scale": Scale(-2.0, TanhComposite(1.0, 2.0)),
    "shift": Shift(1.5, Polynomial((0.0, 0.0, 1.0))),
}


def test_plateau_is_zero_inside():
    assert eval_curve(PlateauQuartic(2.0, 3.0), 2.5, 0) == 0.0


def test_polynomial_first_derivative():
    assert eval_curve(Polynomial((0.0, 0.0, -1.0)), 3.0, 1) == -6.0


def test_tanh_second_derivative_vanishes_at_origin():
    assert eval_curve(TanhComposite(-1.0), 0.0, 2) == 0.0


def test_bad_order_rejected():
    with pytest.raises(ConfigError):
        eval_curve(Polynomial((1.0,)), 0.0, 3)


@pytest.mark.parametrize("name", sorted(CURVES))
def test_derivatives_match_central_differences(name, rng):
    c = CURVES[name]
    x = rng.uniform(-3, 3, 1000)
    h = 1e-5
    for order in (1, 2):
        fd = (c(x + h, order - 1) - c(x - h, order - 1)) / (2 * h)
        exact = c(x, order)
        assert np.all(np.abs(exact - fd) <= 1e-6 * (1 + np.abs(exact)))


@given(st.floats(-5, 5), st.floats(0.1, 3), st.floats(-2, 2))
def test_shift_and_scale_compose(x, k, s):
    base = TanhComposite(1.0, 0.8)
    c = Scale(k, Shift(s, base))
    assert math.isclose(float(c(x)), k * math.tanh(0.8 * (x - s)), rel_tol=1e-13, abs_tol=1e-15)
    assert math.isclose(float(c(x, 1)), k * 0.8 / math.cosh(0.8 * (x - s)) ** 2, rel_tol=1e-12, abs_tol=1e-15)


def test_plateau_is_c2_at_knots():
    c = PlateauQuartic(2.0, 3.0, 1.5, 0.5)
    for knot in (2.0, 3.0):
        for order in (0, 1, 2):
            assert abs(float(c(knot - 1e-9, order)) - float(c(knot + 1e-9, order))) < 1e-12


def test_spec_builds_composites():
    c = curve_from_spec({"sum": [{"family": "polynomial", "params": [0, 1]}, {"family": "tanh-composite", "params": [1, 1, 0, 0]}], "scale": 2.0})
    assert math.isclose(float(c(0.5)), 2 * (0.5 + math.tanh(0.5)), rel_tol=1e-14)


@pytest.mark.parametrize(
    "spec",
    [{"family": "spline", "params": [1]}, {"family": "polynomial", "params": [1], "colour": 1}, {"sum": []}, "x^2"],
)
def test_bad_specs_rejected(spec):
    with pytest.raises(ConfigError):
        curve_from_spec(spec)


def test_inline_pair_matches_builtin():
    inline = pair_from_config(
        {
            "lambda_minus": {"family": "polynomial", "params": [0, 0, -1]},
            "lambda_plus": {"family": "polynomial", "params": [0, 0, 1], "shift": 2},
            "window": [-6, 8],
        }
    )
    ref = builtin_scenario("point-shape")
    x = np.linspace(-3, 5, 17)
    assert np.allclose(inline.lambda_plus(x), ref.lambda_plus(x), rtol=0, atol=1e-14)
    assert np.allclose(inline.lambda_minus(x), ref.lambda_minus(x), rtol=0, atol=1e-14)


def test_unknown_scenario():
    with pytest.raises(ConfigError):
        builtin_scenario("shock-tube")


def test_point_shape_curves():
    d = builtin_scenario("point-shape")
    x = np.linspace(-2, 4, 13)
    assert np.allclose(d.lambda_minus(x), -(x**2), atol=1e-14)
    assert np.allclose(d.lambda_plus(x), (x - 2) ** 2, atol=1e-13)


def test_line_shape_1_plus_curve():
    d = builtin_scenario("line-shape-1")
    x = np.array([0.0, 1.5, 2.0, 2.5, 3.0, 4.0])
    want = np.where(x < 2, (2 - x) ** 4, np.where(x > 3, (x - 3) ** 4, 0.0))
    assert np.allclose(d.lambda_plus(x), want, atol=1e-14)


@pytest.mark.parametrize("name", [n for n in SCENARIO_SETS if n != "degenerate-linear"])
def test_builtins_satisfy_advertised_set(name):
    rep = validate_assumptions(builtin_scenario(name), SCENARIO_SETS[name], tol=1e-9)
    assert rep.satisfied, rep.to_dict()["violations"]


def test_cusp_witnesses(cusp):
    rep = validate_assumptions(cusp, "H", interval=(-4.0, 6.0))
    assert rep.satisfied
    assert abs(rep.witnesses["alpha0"]) < 1e-9
    assert abs(rep.witnesses["beta0"] - 2.0) < 1e-9


def test_cusp_f_prime_negative_by_independent_difference(cusp):
    # f(a) from its definition with beta solving Lambda_+(beta) = Lambda_-(a): tanh(2 - beta) = -tanh(a), beta = 2 + a
    def f(a):
        return f_indicator(cusp, np.array([a]), np.array([2.0 + a]))[0]

    assert abs(f(0.0)) < 1e-14
    assert (f(1e-4) - f(-1e-4)) / 2e-4 < 0


def test_point_shape_witnesses(point):
    rep = validate_assumptions(point, "A", interval=(-3.0, 5.0))
    assert rep.satisfied
    assert abs(rep.witnesses["alpha0"]) < 1e-9 and abs(rep.witnesses["beta0"] - 2.0) < 1e-9


def test_degenerate_linear_fails_h5_only_on_flatness():
    rep = validate_assumptions(builtin_scenario("degenerate-linear"), "H")
    assert not rep.satisfied
    assert rep.failed("H5")
    assert rep.diagnostics["f_max_abs"] <= 1e-12


def test_degenerate_f_is_identically_zero():
    d = builtin_scenario("degenerate-linear")
    a = np.linspace(-1, 1, 11)
    assert np.all(np.abs(f_indicator(d, a, a + 2.0)) <= 1e-15)


def test_validation_is_deterministic(cusp):
    assert validate_assumptions(cusp, "H").to_dict() == validate_assumptions(cusp, "H").to_dict()


def test_validation_argument_checks(cusp):
    with pytest.raises(ConfigError):
        validate_assumptions(cusp, "Z")
    with pytest.raises(ConfigError):
        validate_assumptions(cusp, "H", grid_n=10)


def test_wrong_set_reports_violations(point):
    assert not validate_assumptions(point, "H").satisfied
