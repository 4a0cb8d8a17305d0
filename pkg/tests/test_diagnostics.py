import numpy as np
import pytest

from elltail.diagnostics import (
    MarginalFitReport,
    TailShapeReport,
    fit_gpd_profile,
    fit_logistic,
    ks_statistic,
    ks_test_mc,
)
from elltail.errors import DomainError, InsufficientDataError


def test_logistic_fit_symmetric_data_centers_exactly():
    data = np.concatenate([3.0 + np.arange(1, 30), 3.0 - np.arange(1, 30), [3.0]])
    loc, scale = fit_logistic(data)
    assert loc == pytest.approx(3.0, abs=1e-8)
    assert scale > 0


def test_logistic_fit_consistency():
    rng = np.random.default_rng(1)
    loc, scale = fit_logistic(rng.logistic(0.0, 1.0, 100_000))
    assert abs(loc) < 0.02 and abs(scale - 1.0) < 0.02


def test_logistic_fit_affine_equivariance():
    rng = np.random.default_rng(5)
    data = rng.logistic(2.0, 0.7, 500)
    loc, scale = fit_logistic(data)
    loc2, scale2 = fit_logistic(5.0 + 2.0 * data)
    assert loc2 == pytest.approx(5.0 + 2.0 * loc, abs=1e-8)
    assert scale2 == pytest.approx(2.0 * scale, abs=1e-8)


def test_logistic_fit_needs_ten_points():
    with pytest.raises(InsufficientDataError):
        fit_logistic(np.arange(5.0))


def test_ks_perfect_fit_direction():
    # data placed at the fitted quantiles leaves a near-minimal statistic
    n = 200
    u = (np.arange(1, n + 1) - 0.5) / n
    data = 1.0 + 0.5 * np.log(u / (1 - u))
    rep = ks_test_mc(data, n_mc=99, seed=17)
    assert rep.ks_statistic < 0.01
    assert rep.p_value > 0.95


def test_ks_test_mc_determinism_and_affine_invariance():
    rng = np.random.default_rng(2)
    data = rng.logistic(0.3, 1.2, 300)
    r1 = ks_test_mc(data, n_mc=99, seed=4)
    r2 = ks_test_mc(data, n_mc=99, seed=4)
    assert r1.p_value == r2.p_value and r1.ks_statistic == r2.ks_statistic
    r3 = ks_test_mc(7.0 + 3.0 * data, n_mc=99, seed=4)
    assert r3.p_value == r1.p_value  # statistic lives on the PIT scale
    assert r3.ks_statistic == pytest.approx(r1.ks_statistic, abs=1e-12)


def test_ks_test_mc_validation():
    rng = np.random.default_rng(3)
    with pytest.raises(DomainError):
        ks_test_mc(rng.logistic(0, 1, 100), n_mc=50, seed=1)


def test_ks_statistic_known_value():
    # two points at CDF values 0.25 / 0.75: D = max(|0.5-0.25|, ...) = 0.25
    assert ks_statistic(np.array([0.0, 1.0]), cdf_values=[0.25, 0.75]) == pytest.approx(0.25)


def test_gpd_accepts_zero_shape_on_exponential_tail():
    rng = np.random.default_rng(10)
    rep = fit_gpd_profile(rng.exponential(1.0, 10_000), 0.15)
    assert rep.n_excess == 1500
    assert abs(rep.xi_hat) < 0.05
    assert rep.rapid_variation_ok
    assert rep.xi_ci_low <= rep.xi_hat <= rep.xi_ci_high


def test_gpd_rejects_zero_shape_on_pareto_tail():
    rng = np.random.default_rng(11)
    u = rng.random(10_000)
    data = (np.power(1 - u, -0.5) - 1.0) / 0.5  # GPD with shape 0.5
    rep = fit_gpd_profile(data, 0.15)
    assert not rep.rapid_variation_ok
    assert rep.xi_ci_low > 0.2


def test_gpd_default_tail_fraction_and_monotone_excess_count():
    import inspect

    assert inspect.signature(fit_gpd_profile).parameters["tail_fraction"].default == 0.15
    rng = np.random.default_rng(12)
    data = rng.exponential(1.0, 2_000)
    n1 = fit_gpd_profile(data, 0.10).n_excess
    n2 = fit_gpd_profile(data, 0.20).n_excess
    n3 = fit_gpd_profile(data, 0.40).n_excess
    assert n1 < n2 < n3


def test_gpd_validation():
    rng = np.random.default_rng(13)
    with pytest.raises(DomainError):
        fit_gpd_profile(rng.exponential(1.0, 1000), 0.7)
    with pytest.raises(InsufficientDataError):
        fit_gpd_profile(rng.exponential(1.0, 40), 0.15)


def test_report_invariants():
    with pytest.raises(DomainError):
        MarginalFitReport("logistic", 0.0, -1.0, 0.1, 0.5, 99)
    with pytest.raises(DomainError):
        TailShapeReport(0.0, 100, 0.5, 1.0, 0.6, 0.9, False)  # xi outside CI
