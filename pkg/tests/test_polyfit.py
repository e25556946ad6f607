import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

import oracles
from decfit.ccdf import CcdfPoint, CcdfSeries, Space
from decfit.errors import (
    BracketError,
    DegenerateVarianceError,
    InsufficientDataError,
    MonotonicityError,
    NoDegreesOfFreedomError,
    PreconditionError,
    SingularDesignError,
)
from decfit.fixtures import PHILIPPINE_1997, UGANDA_2006
from decfit.polyfit import (
    FitResult,
    PolynomialModel,
    confidence_intervals,
    evaluate,
    fit_ols,
    fit_polynomial,
    implied_density,
    invert_ccdf,
    r_squared,
    select_degree,
    select_polynomial,
    t_quantile,
)
from decfit.synth import sample_on_curve

X11 = np.arange(11.0)


def rel(a, b):
    return abs(a - b) / abs(b)


# -- fit_ols -----------------------------------------------------------------

def test_exact_line():
    fit = fit_polynomial(X11, 2 * X11 + 1, 1)
    assert fit.model.coefficients == pytest.approx((2, 1), rel=1e-12)
    assert fit.r_squared == pytest.approx(100, abs=1e-9)
    assert fit.dof == 9


def test_figure1_round_trip():
    series = sample_on_curve(PHILIPPINE_1997)
    assert len(series) == 11
    fit = fit_ols(series, 2)
    for got, want in zip(fit.model.coefficients, PHILIPPINE_1997.coefficients):
        assert rel(got, want) <= 1e-6
    assert fit.r_squared >= 99.99
    coef, _, _ = oracles.normal_equations_fit(series.x, series.p, 2)
    for got, want in zip(fit.model.coefficients, coef):
        assert rel(got, float(want)) <= 1e-9


def test_singular_design():
    with pytest.raises(SingularDesignError):
        fit_polynomial(np.full(11, 5.0), X11, 1)
    with pytest.raises(SingularDesignError):
        fit_polynomial([1, 1, 2, 2, 2], [5, 5, 3, 3, 3], 2)


def test_too_few_points():
    with pytest.raises(InsufficientDataError):
        fit_polynomial([0, 1, 2], [3, 2, 0], 2)


def test_bad_degree():
    with pytest.raises(PreconditionError):
        fit_polynomial(X11, X11, 3)


def test_space_flag_carried():
    s = CcdfSeries(tuple(CcdfPoint(x, p) for x, p in [(0, 1.9), (0.3, 1.8), (0.6, 1.5), (1, 1)]),
                   Space.LOGLOG)
    assert fit_ols(s, 1).space is Space.LOGLOG


# -- r_squared -----------------------------------------------------------------

def test_r_squared_examples():
    obs = [3.0, 1.0, 4.0, 1.5]
    assert r_squared(obs, obs) == 100
    assert r_squared(obs, [np.mean(obs)] * 4) == pytest.approx(0, abs=1e-12)
    # SSres = 4, SStot = 2
    assert r_squared([1, 2, 3], [1, 2, 5]) == pytest.approx(-100, abs=1e-12)


def test_r_squared_degenerate():
    with pytest.raises(DegenerateVarianceError):
        r_squared([2, 2, 2], [1, 2, 3])


# -- confidence intervals --------------------------------------------------------

def test_exact_fit_zero_width():
    fit = fit_polynomial(X11, 2 * X11 + 1, 1)
    for (lo, hi), c in zip(fit.ci, fit.model.coefficients):
        assert hi - lo <= 1e-9 * max(1, abs(c))


def test_t_multiplier():
    assert t_quantile(0.975, 8) == pytest.approx(2.306, abs=1e-3)
    assert t_quantile(0.975, 8) == pytest.approx(float(oracles.t_quantile(0.975, 8)), abs=1e-8)


@pytest.mark.parametrize("dof", [1, 2, 3, 5, 8, 9, 30, 200])
@pytest.mark.parametrize("prob", [0.6, 0.75, 0.9, 0.95, 0.975, 0.995])
def test_t_quantile_against_mpmath(prob, dof):
    want = float(oracles.t_quantile(prob, dof))
    assert t_quantile(prob, dof) == pytest.approx(want, abs=1e-8, rel=1e-10)
    assert t_quantile(1 - prob, dof) == -t_quantile(prob, dof)


def noisy_fit():
    rng = np.random.default_rng(7)
    y = 90 - 0.004 * X11 * 100 + 1e-6 * (X11 * 100) ** 2 + rng.normal(0, 1.5, 11)
    return fit_polynomial(X11 * 100, y, 2)


def test_level_monotone():
    fit = noisy_fit()
    assert fit.dof == 8
    narrow = confidence_intervals(fit, 0.5)
    for (lo50, hi50), (lo95, hi95) in zip(narrow, fit.ci):
        assert hi50 - lo50 < hi95 - lo95


def test_ci_contains_estimate():
    fit = noisy_fit()
    for (lo, hi), c in zip(fit.ci, fit.model.coefficients):
        assert lo <= c <= hi


def test_no_dof():
    fit = noisy_fit()
    squeezed = FitResult(fit.model, fit.r_squared, fit.ci, fit.residuals[:3], fit.space, 3,
                         fit.x[:3], fit.y[:3], fit.gram_inverse)
    with pytest.raises(NoDegreesOfFreedomError):
        confidence_intervals(squeezed)


# -- select_degree ---------------------------------------------------------------

def test_select_exact_line():
    sel = select_polynomial(X11, 3 - 0.2 * X11)
    assert sel.passed and sel.chosen.degree == 1
    assert len(sel.candidates) == 1


def test_select_parabola():
    y = (X11 - 5) ** 2
    sel = select_polynomial(X11, y)
    assert sel.candidates[0].r_squared == pytest.approx(0, abs=1e-9)
    assert sel.chosen.degree == 2 and sel.passed


def test_select_none_passes():
    rng = np.random.default_rng(3)
    y = rng.normal(size=11)
    sel = select_polynomial(X11, y, threshold=99.0)
    assert not sel.passed
    assert sel.chosen.r_squared == max(f.r_squared for f in sel.candidates)


def test_select_philippine_1997():
    series = sample_on_curve(PHILIPPINE_1997)
    sel = select_degree(series)
    # independent dual fit, 50-digit normal equations
    r2 = [float(oracles.r_squared_percent(series.p, oracles.normal_equations_fit(series.x, series.p, d)[2]))
          for d in (1, 2)]
    assert r2[0] == pytest.approx(95.9719369376, abs=1e-8)
    # the linear fit already clears 90%, so minimality stops at degree 1
    assert sel.chosen.degree == 1 and sel.passed
    assert sel.chosen.r_squared == pytest.approx(r2[0], abs=1e-9)
    forced = select_degree(series, threshold=99.0)
    assert forced.chosen.degree == 2
    assert forced.chosen.r_squared == pytest.approx(r2[1], abs=1e-9)


# -- evaluate / invert / density ---------------------------------------------------

def test_evaluate():
    assert evaluate(UGANDA_2006, 0) == 87.89
    assert evaluate(PHILIPPINE_1997, 0) == 90.89
    assert evaluate(PolynomialModel((0.0, 0.0, 0.0)), 123.4) == 0
    assert np.allclose(evaluate(PolynomialModel((1.0, 2.0, 3.0)), np.array([0, 1, 2])), [3, 6, 11])


def test_invert_line():
    bracket = (0.0, 5e5)
    assert invert_ccdf(UGANDA_2006, 87.89, bracket) == 0
    x = invert_ccdf(UGANDA_2006, 0.0, bracket)
    assert x == pytest.approx(415359.168241966, rel=1e-12)
    assert x == pytest.approx(87.89 / 0.0002116, rel=1e-12)


def test_invert_quadratic():
    x = invert_ccdf(PHILIPPINE_1997, 90.0, (0.0, 1e6))
    assert x == pytest.approx(4791.25884978116, rel=1e-10)
    assert x == pytest.approx(float(oracles.quadratic_decreasing_root(PHILIPPINE_1997.coefficients, 90)),
                              rel=1e-10)


def test_invert_errors():
    with pytest.raises(BracketError):
        invert_ccdf(UGANDA_2006, 95.0, (0.0, 5e5))
    with pytest.raises(MonotonicityError):
        invert_ccdf(PolynomialModel((1.0, 0.0, 0.0)), 1.0, (-1.0, 2.0))
    with pytest.raises(MonotonicityError):
        invert_ccdf(PolynomialModel((0.0, 5.0)), 5.0, (0.0, 1.0))


def test_implied_density():
    assert implied_density(UGANDA_2006).coefficients == (0.0002116,)
    assert implied_density(PolynomialModel((3.0, -2.0, 1.0))).coefficients == (-6.0, 2.0)
    assert evaluate(implied_density(PHILIPPINE_1997), 0) == 0.0001862


def test_density_finite_difference():
    dens = implied_density(PHILIPPINE_1997)
    for x in np.linspace(1e3, 9e5, 10):
        h = 1e-3 * x
        fd = -(evaluate(PHILIPPINE_1997, x + h) - evaluate(PHILIPPINE_1997, x - h)) / (2 * h)
        assert rel(evaluate(dens, x), fd) <= 1e-6


# -- properties ------------------------------------------------------------------

coef = st.floats(-10, 10, allow_nan=False).filter(lambda v: abs(v) > 1e-3)
xs_strategy = st.lists(st.integers(0, 10**6), min_size=5, max_size=15, unique=True).map(
    lambda v: np.array(sorted(v), dtype=float))


@settings(max_examples=200, deadline=None)
@given(xs_strategy, st.lists(st.floats(-100, 100, allow_nan=False), min_size=15, max_size=15),
       st.sampled_from([1, 2]))
def test_orthogonal_residuals_and_nesting(x, noise, degree):
    y = np.asarray(noise[: x.size])
    assume(np.ptp(y) > 1e-6)
    fit = fit_polynomial(x, y, degree)
    r = np.asarray(fit.residuals)
    u = x / x.max()
    for k in range(degree + 1):
        col = u ** k
        assert abs(r @ col) <= 1e-6 * (np.abs(y).max() * np.abs(col).sum() + 1)
    if x.size >= 4:
        assert fit_polynomial(x, y, 2).r_squared >= fit_polynomial(x, y, 1).r_squared - 1e-9


@settings(max_examples=100, deadline=None)
@given(xs_strategy, st.lists(st.floats(-100, 100, allow_nan=False), min_size=15, max_size=15),
       st.floats(1e-3, 1e3))
def test_scale_round_trip(x, noise, s):
    y = np.asarray(noise[: x.size])
    assume(np.ptp(y) > 1e-6)
    a = fit_polynomial(x, y, 2)
    b = fit_polynomial(x * s, y, 2)
    p1, p2, p3 = a.model.coefficients
    scale = max(abs(c) for c in (p1 * x.max() ** 2, p2 * x.max(), p3)) + 1e-12
    assert abs(b.model.coefficients[0] * s**2 - p1) * x.max() ** 2 <= 1e-8 * scale
    assert abs(b.model.coefficients[1] * s - p2) * x.max() <= 1e-8 * scale
    assert abs(b.model.coefficients[2] - p3) <= 1e-8 * scale
    assert b.r_squared == pytest.approx(a.r_squared, abs=1e-8)
    assert np.allclose(b.fitted, a.fitted, atol=1e-8 * scale)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-12, 1e-6), st.floats(-0.1, -1e-5), st.floats(80, 100),
       st.floats(0.01, 0.99))
def test_inversion_consistency(a, b, c, frac):
    model = PolynomialModel((a, b, c))
    vertex = -b / (2 * a)
    bottom = evaluate(model, vertex)
    p = bottom + frac * (c - bottom)
    x = invert_ccdf(model, p, (0.0, vertex))
    assert abs(evaluate(model, x) - p) <= 1e-9 * max(1, abs(p))
