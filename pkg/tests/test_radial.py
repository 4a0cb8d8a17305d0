import math

import numpy as np
import pytest
from scipy.integrate import quad

from elltail.errors import DomainError, UnsupportedFamilyError
from elltail.radial import FAMILIES, make_radial

ALL_FAMILIES = [
    ("normal", {}),
    ("kotz", {"beta": 1.0}),
    ("kotz", {"beta": 4.0}),
    ("logis", {}),
    ("modkotz", {}),
    ("lognor", {}),
    ("student", {"nu": 3.0}),
    ("student", {"nu": 20.0}),
]
def all_laws():
    return [(f"{name}-{kw}", make_radial(name, **kw)) for name, kw in ALL_FAMILIES]


@pytest.mark.parametrize("label,law", all_laws())
def test_density_normalisation_and_second_moment(label, law):
    lo = law.support_low * law.scale
    mass, _ = quad(lambda r: law.density(r), lo, np.inf, limit=500)
    assert abs(mass - 1.0) < 1e-8
    m2, _ = quad(lambda r: r * r * law.density(r), lo, np.inf, limit=500)
    assert abs(m2 - 2.0) / 2.0 < 1e-6  # standardisation E[R^2] = 2


@pytest.mark.parametrize("label,law", all_laws())
def test_survival_shape(label, law):
    lo = law.support_low * law.scale
    assert float(law.survival(lo)) == pytest.approx(1.0, abs=1e-10)
    assert float(law.survival(lo - 0.5)) == 1.0
    grid = np.linspace(lo, law.quantile(1 - 1e-7), 400)
    surv = np.asarray(law.survival(grid))
    assert np.all(np.diff(surv) <= 1e-15)
    assert surv[-1] < 1e-6


@pytest.mark.parametrize("label,law", all_laws())
def test_quantile_inverts_survival(label, law):
    for p in (1e-6, 0.01, 0.5, 0.9, 0.999, 1 - 1e-6):
        r = law.quantile(p)
        assert abs(float(law.survival(r)) - (1.0 - p)) < 1e-10


@pytest.mark.parametrize("label,law", all_laws())
def test_density_matches_survival_derivative(label, law):
    # central difference of the survival vs -density on 100 interior points
    lo = law.support_low * law.scale
    r = np.linspace(lo + 0.05, law.quantile(0.999), 100)
    h = 1e-6
    num = -(np.asarray(law.survival(r + h)) - np.asarray(law.survival(r - h))) / (2 * h)
    den = np.asarray(law.density(r))
    assert np.max(np.abs(num - den) / np.maximum(np.abs(den), 1e-12)) < 1e-6


def test_quantile_rejects_bad_probability():
    law = make_radial("normal")
    for p in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(DomainError):
            law.quantile(p)


def test_kotz_unit_scale_closed_forms():
    # unit-scale survival derived from the generator: exp(-r^beta)
    k1 = make_radial("kotz", beta=1.0, standardized=False)
    r = np.array([0.3, 1.0, 4.0])
    assert np.allclose(k1.survival(r), np.exp(-r), rtol=1e-14)
    k2 = make_radial("kotz", beta=2.0, standardized=False)
    assert k2.quantile(1.0 - math.exp(-1.0)) == pytest.approx(1.0, abs=1e-12)


def test_standardized_kotz1_is_unit_exponential():
    # Gamma(1 + 2/1) = 2 already, so the E[R^2]=2 scale is exactly 1
    k1 = make_radial("kotz", beta=1.0)
    assert k1.scale == pytest.approx(1.0, abs=1e-15)
    assert float(k1.survival(2.5)) == pytest.approx(math.exp(-2.5), rel=1e-14)


def test_lognor_unit_median_is_one():
    law = make_radial("lognor", standardized=False)
    assert law.quantile(0.5) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("label,law", [(l, x) for l, x in all_laws() if x.gumbel_domain])
def test_aux_psi_equals_survival_over_density(label, law):
    rs = np.linspace(max(law.psi_valid_from, 0.2 * law.scale) + 0.05, law.quantile(0.999), 25)
    psi = np.asarray(law.aux_psi(rs))
    ratio = np.asarray(law.survival(rs)) / np.asarray(law.density(rs))
    assert np.max(np.abs(psi - ratio) / ratio) < 1e-10


def test_aux_psi_unit_scale_closed_forms():
    for beta in (1.0, 2.5, 4.0):
        k = make_radial("kotz", beta=beta, standardized=False)
        x = 3.7
        assert k.aux_psi(x) == pytest.approx(x ** (1 - beta) / beta, rel=1e-14)
    n = make_radial("normal", standardized=False)
    assert n.aux_psi(2.0) == pytest.approx(0.5, rel=1e-14)
    lg = make_radial("logis", standardized=False)
    x = 1.9
    assert lg.aux_psi(x) == pytest.approx((1 + math.exp(-x * x)) / (2 * x), rel=1e-14)
    mk = make_radial("modkotz", standardized=False)
    x = 2.4
    assert mk.aux_psi(x) == pytest.approx(x ** (-0.5) / (1 + 1.5 * math.log(x)), rel=1e-14)


def test_student_has_no_auxiliary_function():
    law = make_radial("student", nu=3.0)
    with pytest.raises(UnsupportedFamilyError):
        law.aux_psi(5.0)


def test_modkotz_survival_cross_checked_against_generator_density():
    # integrate the derived density upward and compare with the closed form
    law = make_radial("modkotz", standardized=False)
    assert law.support_low == 1.0
    for r in (1.2, 1.8, 2.5):
        tail, _ = quad(law.density, r, np.inf, limit=300)
        assert abs(tail - float(law.survival(r))) < 1e-8


@pytest.mark.parametrize("label,law", all_laws())
def test_sampler_determinism_and_pit(label, law):
    a = law.sample(12345, 20_000)
    b = law.sample(12345, 20_000)
    assert np.array_equal(a, b)
    q90 = law.quantile(0.9)
    prop = float(np.mean(a > q90))
    band = 3.0 * math.sqrt(0.1 * 0.9 / a.size)
    assert abs(prop - 0.1) < band


def test_sample_mean_square_is_two():
    law = make_radial("kotz", beta=1.0)
    r = law.sample(777, 100_000)
    assert abs(np.mean(r**2) - 2.0) < 0.05


def test_registry_and_parameter_validation():
    assert set(FAMILIES) == {"normal", "kotz", "logis", "modkotz", "lognor", "student"}
    with pytest.raises(DomainError):
        make_radial("cauchy")
    with pytest.raises(DomainError):
        make_radial("kotz", beta=-1.0)
    with pytest.raises(DomainError):
        make_radial("student", nu=2.0)  # infinite second moment
