import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tlrmt.garch import (
    REFERENCE_PARAMS,
    GjrGarchParams,
    conditional_variance,
    fit_gjr,
    forecast_from_state,
    forecast_variance,
    loglik,
    simulate_gjr,
    unconditional_variance,
)


@pytest.fixture(scope="module")
def ref_path():
    m, s2 = simulate_gjr(REFERENCE_PARAMS, 100_000, seed=101)
    return m, s2


@pytest.fixture(scope="module")
def ref_fit(ref_path):
    m, _ = ref_path
    return fit_gjr(m - m.mean())


def test_params_validation():
    with pytest.raises(ValueError):
        GjrGarchParams(0.0, 0.1, 0.1, 0.1)
    with pytest.raises(ValueError):
        GjrGarchParams(1.0, -0.1, 0.1, 0.1)


def test_unconditional_variance_reference_params():
    v = unconditional_variance(REFERENCE_PARAMS)
    assert v == pytest.approx(0.2486 / (1 - 0.0170 - 0.8790 - 0.1591 / 2), rel=1e-15)
    assert abs(v - 10.19) / 10.19 < 0.005


@pytest.mark.parametrize("params, expected", [
    (GjrGarchParams(0.7, 0.0, 0.0, 0.0), 0.7),
    (GjrGarchParams(0.1, 0.1, 0.7, 0.2), 1.0),
])
def test_unconditional_variance_direct(params, expected):
    assert unconditional_variance(params) == pytest.approx(expected, rel=1e-12)


def test_non_stationary_rejected():
    p = GjrGarchParams(0.1, 0.2, 0.8, 0.1)
    with pytest.raises(ValueError):
        unconditional_variance(p)
    with pytest.raises(ValueError):
        simulate_gjr(p, 200, seed=0)


def test_degenerate_is_iid_gaussian():
    m, s2 = simulate_gjr(GjrGarchParams(2.0, 0, 0, 0), 20_000, seed=1)
    assert (s2 == 2.0).all()
    assert m.var() == pytest.approx(2.0, rel=0.05)
    assert stats.normaltest(m).pvalue > 0.001


def test_simulation_deterministic():
    a = simulate_gjr(REFERENCE_PARAMS, 500, seed=9)
    b = simulate_gjr(REFERENCE_PARAMS, 500, seed=9)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_simulated_variance_matches_unconditional(ref_path):
    m, _ = ref_path
    assert m.var() == pytest.approx(unconditional_variance(REFERENCE_PARAMS), rel=0.05)


def test_filter_matches_loop(rng):
    e = rng.standard_normal(300)
    theta = (0.1, 0.05, 0.8, 0.1)
    s2 = [e.var()]
    for t in range(1, 300):
        s2.append(0.1 + (0.05 + 0.1 * (e[t - 1] < 0)) * e[t - 1] ** 2 + 0.8 * s2[-1])
    np.testing.assert_allclose(conditional_variance(e, theta, e.var()), s2, rtol=1e-12)


def test_simulated_variance_path_follows_recursion(ref_path):
    m, s2 = ref_path
    np.testing.assert_allclose(conditional_variance(m, REFERENCE_PARAMS.as_array(), s2[0]), s2, rtol=1e-10)


def test_recovery_reference_params(ref_fit):
    f = ref_fit
    z = (f.params.as_array() - REFERENCE_PARAMS.as_array()) / f.std_errors
    assert (np.abs(z) < 3).all(), z
    assert f.params.gamma > 0 and f.p_values[3] < 0.05


def test_fit_invariants(ref_fit):
    f = ref_fit
    assert (f.cond_variance >= f.params.alpha0).all()
    assert np.isfinite(f.loglik)
    assert f.loglik >= f.start_loglik
    np.testing.assert_allclose(f.t_values, f.params.as_array() / f.std_errors)
    d = f.to_dict()
    assert set(d) >= {"params", "std_errors", "t_values", "p_values", "loglik", "persistence",
                      "unconditional_variance"}


@pytest.fixture(scope="module")
def null_fit():
    x = np.random.default_rng(0).standard_normal(10_000) * 2
    x = x - x.mean()
    return x, fit_gjr(x)


def test_null_model_shock_terms_vanish(null_fit):
    _, f = null_fit
    assert abs(f.params.alpha1) < 3 * f.std_errors[1]
    assert abs(f.params.gamma) < 3 * f.std_errors[3]


@pytest.mark.xfail(strict=True, reason="beta1 (and with it alpha0) is not identified once "
                   "alpha1 = gamma = 0; the Hessian does not reflect the flat ridge")
def test_null_model_memory_terms(null_fit):
    x, f = null_fit
    assert abs(f.params.beta1) < 3 * f.std_errors[2]
    assert abs(f.params.alpha0 - x.var()) < 3 * f.std_errors[0]


@pytest.mark.slow
def test_kurtosis_round_trip(ref_path, ref_fit):
    m, _ = ref_path
    m2, _ = simulate_gjr(ref_fit.params, 100_000, seed=202)
    k1, k2 = stats.kurtosis(m, fisher=False), stats.kurtosis(m2, fisher=False)
    assert abs(k2 - k1) / k1 < 0.20


def test_fit_input_checks():
    with pytest.raises(ValueError):
        fit_gjr(np.ones(100))
    with pytest.raises(ValueError):
        fit_gjr(np.full(600, np.nan))


def test_forecast_fixed_point():
    v = unconditional_variance(REFERENCE_PARAMS)
    path = forecast_from_state(REFERENCE_PARAMS, v, -np.sqrt(v), 50, indicator=0.5)
    np.testing.assert_allclose(path, v, rtol=1e-12)


def test_forecast_long_horizon(ref_fit):
    f = forecast_variance(ref_fit, 10_000)
    v = unconditional_variance(ref_fit.params)
    assert abs(f[-1] - v) / v < 1e-3
    assert abs(f[-1] - v) / v < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 50), st.floats(-10, 10), st.floats(0.0, 0.2), st.floats(0.0, 0.9),
       st.floats(0.0, 0.2))
def test_forecast_monotone(s2, eps, a1, b1, g):
    p = GjrGarchParams(0.3, a1, b1, g)
    if p.persistence >= 0.99:
        return
    f = forecast_from_state(p, s2, eps, 3000)
    d = np.diff(f)
    assert (d >= -1e-12).all() or (d <= 1e-12).all()
    v = unconditional_variance(p)
    assert abs(f[-1] - v) <= 1e-9 * v


def test_forecast_against_monte_carlo(ref_fit):
    """Average of simulated continuations from the fitted end state."""
    p = ref_fit.params
    r = np.random.default_rng(77)
    paths = 100_000
    s2 = np.full(paths, ref_fit.cond_variance[-1])
    e = np.full(paths, ref_fit.last_shock)
    mc = []
    for _ in range(100):
        s2 = p.alpha0 + (p.alpha1 + p.gamma * (e < 0)) * e**2 + p.beta1 * s2
        e = np.sqrt(s2) * r.standard_normal(paths)
        mc.append((s2.mean(), s2.std() / np.sqrt(paths)))
    f = forecast_variance(ref_fit, 100)
    assert f[0] == pytest.approx(mc[0][0], rel=1e-12)
    for h in (5, 20, 100):
        mean, se = mc[h - 1]
        assert abs(f[h - 1] - mean) < 4 * se


def test_loglik_matches_scipy_density(rng):
    e = rng.standard_normal(600)
    theta = (0.2, 0.05, 0.7, 0.1)
    s2 = conditional_variance(e, theta, e.var())
    ref = stats.norm.logpdf(e, scale=np.sqrt(s2)).sum()
    assert loglik(e, theta) == pytest.approx(ref, rel=1e-12)
