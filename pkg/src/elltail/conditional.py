"""Conditional excess probabilities for elliptical pairs.

Exact values come from the angle-coordinate integral representation of
P(Y > y | X > x).  Writing u0 = arcsin(rho), t0 = (yh/xh - rho)/sqrt(1-rho^2)
for the standardised point (xh, yh) with xh > 0,

                 int_{atan(t0)}^{pi/2} Hbar(xh/cos u) du
                   + int_{-u0}^{atan(t0)} Hbar(yh/sin(u+u0)) du
  P(Y>y | X>x) = ------------------------------------------------ ,
                        2 int_0^{pi/2} Hbar(xh/cos u) du

valid for every real yh (for yh < 0 the second integral runs right-to-left
and is negative).  All integrands here are survival ratios Hbar(.)/Hbar(xh),
bounded by 1, so adaptive quadrature sees O(1) magnitudes even at extreme
thresholds.  An equivalent radial-coordinate form exists via v = 1/cos(u),
but its integrand carries a 1/sqrt(v^2-1) endpoint singularity, so it is
never used numerically.

Three closed-form tail approximations accompany the exact value.  With
z = (y - rho*x) / (sqrt(1-rho^2) sqrt(x psi(x))) on the standardised scale:

    first      Phi(z)
    corrected  Phi(z) - sqrt(psi(x)/x) * rho * phi(z) / sqrt(1-rho^2)
    shifted    Phi(z') with z' shifted by rho*psi(x) in the numerator

The corrected form is an asymptotic expansion, not a distribution function;
values outside [0, 1] are clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericFailure
from .model import EllipticalModel
from .normal import norm_cdf, norm_pdf
from .radial import RadialLaw

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 10_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_subdivisions < 10:
            raise DomainError("need max_subdivisions >= 10")


DEFAULT_QUAD = QuadratureSettings()


@dataclass(frozen=True)
class AngleTrace:
    """Intermediates of one exact evaluation, for debugging/--trace output."""

    x_hat: float
    y_hat: float
    rho: float
    t0: float
    u0: float
    upper: float  # int_{atan t0}^{pi/2} of the x-threshold ratio
    lower: float  # signed int_{-u0}^{atan t0} of the y-threshold ratio
    denom: float  # 2 int_0^{pi/2} of the x-threshold ratio
    err_upper: float
    err_lower: float
    err_denom: float

    @property
    def err_theta(self) -> float:
        num = self.upper + self.lower
        return (self.err_upper + self.err_lower + abs(num / self.denom) * self.err_denom) / self.denom


def _theta_from_ratio(surv_ratio, x_hat, y_hat, rho, settings):
    """Evaluate the angle-form representation for a survival-ratio callable.

    ``surv_ratio(v)`` must return Hbar(v)/Hbar(x_hat) for scalar v > 0 and
    decay to 0 as v -> inf.  Returns (theta, trace).
    """
    if x_hat <= 0:
        raise DomainError(f"need standardised x > 0, got {x_hat}")
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"angle form needs 0 <= rho < 1, got {rho}")
    root = math.sqrt(1.0 - rho * rho)
    u0 = math.asin(rho)  # == atan(rho/sqrt(1-rho^2))
    t0 = (y_hat / x_hat - rho) / root
    a0 = math.atan(t0)

    kw = dict(epsabs=settings.abs_tol, epsrel=settings.rel_tol, limit=settings.max_subdivisions)

    def f_x(u):
        return surv_ratio(x_hat / math.cos(u))

    def f_y(u):
        s = math.sin(u + u0)
        if s == 0.0 or (s > 0.0) != (y_hat > 0.0):
            return 0.0  # endpoint where the threshold diverges
        return surv_ratio(y_hat / s)

    upper, e_up = quad(f_x, a0, _HALF_PI, **kw)
    half, e_half = quad(f_x, 0.0, _HALF_PI, **kw)
    denom, e_den = 2.0 * half, 2.0 * e_half
    if y_hat == 0.0 or a0 == -u0:
        lower, e_low = 0.0, 0.0
    else:
        lower, e_low = quad(f_y, -u0, a0, **kw)

    if denom <= 0.0 or not np.isfinite(denom):
        raise NumericFailure("degenerate denominator in angle quadrature", denom=denom, x_hat=x_hat)
    trace = AngleTrace(x_hat, y_hat, rho, t0, u0, upper, lower, denom, e_up, abs(e_low), e_den)
    if not np.isfinite(trace.err_theta) or trace.err_theta > 1e-4:
        raise NumericFailure("angle quadrature did not converge",
                             achieved_error=trace.err_theta, x_hat=x_hat, y_hat=y_hat)
    theta = 1.0 - (upper + lower) / denom
    return min(1.0, max(0.0, theta)), trace


def _survival_ratio(law: RadialLaw, x_hat: float):
    s0 = float(law.survival(x_hat))
    if not s0 > 0.0:
        raise NumericFailure(
            "radial survival underflows at threshold; x beyond representable tail",
            x_hat=x_hat, survival=s0,
        )
    return lambda v: float(law.survival(v)) / s0


def cond_excess_exact(model: EllipticalModel, x: float, y: float,
                      settings: QuadratureSettings = DEFAULT_QUAD) -> float:
    """Exact theta(x, y) = P(Y <= y | X > x) by adaptive angle quadrature."""
    theta, _ = cond_excess_with_trace(model, x, y, settings)
    return theta


def cond_excess_with_trace(model: EllipticalModel, x: float, y: float,
                           settings: QuadratureSettings = DEFAULT_QUAD):
    """As cond_excess_exact, but also returns the AngleTrace of intermediates.

    For rho < 0 the trace describes the evaluation on the flipped pair
    (X, -Y), which is where the quadrature actually runs.
    """
    if model.rho < 0.0:
        # (X, -Y) is elliptical with correlation -rho; continuity of Y kills
        # the boundary term in P(Y <= y) = 1 - P(-Y <= -y)
        theta, trace = cond_excess_with_trace(model.flip_y(), x, -y, settings)
        return 1.0 - theta, trace
    x_hat, y_hat = model.standardize((x, y))
    ratio = _survival_ratio(model.radial, x_hat)
    theta_bar, trace = _theta_from_ratio(ratio, x_hat, y_hat, model.rho, settings)
    return theta_bar, trace


def cond_quantile_exact(model: EllipticalModel, x: float, theta: float,
                        settings: QuadratureSettings = DEFAULT_QUAD,
                        tol: float = 1e-9, max_iter: int = 200) -> float:
    """y with |cond_excess_exact(model, x, y) - theta| <= tol, by bisection.

    theta(x, .) is continuous and nondecreasing, so plain bisection on y with
    a doubling bracket is monotone-safe for every radial family.
    """
    if not 0.0 < theta < 1.0:
        raise DomainError(f"need 0 < theta < 1, got {theta}")
    if model.rho < 0.0:
        return -cond_quantile_exact(model.flip_y(), x, 1.0 - theta, settings, tol, max_iter)
    x_hat = (x - model.mu_x) / model.sigma_x
    if x_hat <= 0:
        raise DomainError(f"need standardised x > 0, got {x_hat}")

    def theta_at(y):
        return cond_excess_exact(model, x, y, settings)

    center = model.mu_y + model.sigma_y * model.rho * x_hat
    width = model.sigma_y * max(1.0, x_hat)
    lo, hi = center - width, center + width
    grow = 0
    while theta_at(lo) > theta:
        width *= 2.0
        lo = center - width
        grow += 1
        if grow > 60:
            raise NumericFailure("bracket expansion failed (low side)", lo=lo, theta=theta)
    while theta_at(hi) < theta:
        width *= 2.0
        hi = center + width
        grow += 1
        if grow > 60:
            raise NumericFailure("bracket expansion failed (high side)", hi=hi, theta=theta)

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        t_mid = theta_at(mid)
        if abs(t_mid - theta) <= tol:
            return mid
        if t_mid < theta:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * (1.0 + abs(mid)):
            raise NumericFailure(
                "bracket collapsed before reaching tolerance; quadrature noise?",
                lo=lo, hi=hi, theta=theta, achieved=abs(t_mid - theta),
            )
    raise NumericFailure("conditional quantile bisection hit iteration cap",
                         lo=lo, hi=hi, theta=theta)


def marginal_survival_x(model: EllipticalModel, x: float,
                        settings: QuadratureSettings = DEFAULT_QUAD) -> float:
    """P(X > x) = (1/pi) int_0^{pi/2} Hbar(xh/cos u) du for xh > 0.

    Negative xh is handled through the symmetry of X.
    """
    x_hat = (x - model.mu_x) / model.sigma_x
    if x_hat == 0.0:
        return 0.5
    if x_hat < 0.0:
        return 1.0 - marginal_survival_x(model, model.mu_x - model.sigma_x * x_hat, settings)
    law = model.radial
    s0 = float(law.survival(x_hat))
    if not s0 > 0.0:
        return 0.0
    ratio = _survival_ratio(law, x_hat)
    kw = dict(epsabs=settings.abs_tol, epsrel=settings.rel_tol, limit=settings.max_subdivisions)
    val, _ = quad(lambda u: ratio(x_hat / math.cos(u)), 0.0, _HALF_PI, **kw)
    return s0 * val / math.pi


def marginal_quantile_x(model: EllipticalModel, p: float,
                        settings: QuadratureSettings = DEFAULT_QUAD,
                        tol: float = 1e-10, max_iter: int = 200) -> float:
    """x with P(X > x) = p, solved to |survival - p| <= tol by bisection."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"need 0 < p < 1, got {p}")
    if p == 0.5:
        return model.mu_x
    if p > 0.5:
        # X is symmetric about mu_x
        x_sym = marginal_quantile_x(model, 1.0 - p, settings, tol, max_iter)
        return 2.0 * model.mu_x - x_sym

    lo = 0.0
    hi = model.radial.quantile(1.0 - p)  # P(X > r) <= P(R > r) = p
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        s = marginal_survival_x(model, model.mu_x + model.sigma_x * mid, settings)
        if abs(s - p) <= tol:
            return model.mu_x + model.sigma_x * mid
        if s > p:
            lo = mid
        else:
            hi = mid
    raise NumericFailure("marginal quantile bisection hit iteration cap", lo=lo, hi=hi, p=p)


def approx_theta(rho: float, psi_at_x: float, x: float, y: float, order: str = "shifted") -> float:
    """Closed-form tail approximations to theta(x, y) on the standardised scale."""
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"need 0 <= rho < 1, got {rho}")
    if x <= 0 or psi_at_x <= 0:
        raise DomainError("need x > 0 and psi_at_x > 0")
    root = math.sqrt(1.0 - rho * rho)
    spread = root * math.sqrt(x * psi_at_x)
    if order == "first":
        return float(norm_cdf((y - rho * x) / spread))
    if order == "corrected":
        z = (y - rho * x) / spread
        val = float(norm_cdf(z)) - math.sqrt(psi_at_x / x) * rho * float(norm_pdf(z)) / root
        return min(1.0, max(0.0, val))
    if order == "shifted":
        return float(norm_cdf((y - rho * x - rho * psi_at_x) / spread))
    raise DomainError(f"unknown order {order!r}; expected first/corrected/shifted")


def approx_joint(rho: float, psi_at_x: float, x: float, t: float, z: float) -> float:
    """Limiting joint law of (threshold excess of X, normalised Y) given X > x."""
    if t < 0:
        raise DomainError(f"need t >= 0, got {t}")
    return float(-math.expm1(-t) * norm_cdf(z))


def gumbel_ratio_error(law: RadialLaw, x: float, t_grid) -> float:
    """max_t |Hbar(x + t psi(x))/Hbar(x) - exp(-t)| over the given t grid."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0 or np.any(t < 0):
        raise DomainError("t_grid must be non-empty and nonnegative")
    psi = float(law.aux_psi(x))  # raises UnsupportedFamilyError for student
    s0 = float(law.survival(x))
    if not s0 > 0.0:
        raise NumericFailure("survival underflows at x", x=x)
    ratios = np.asarray(law.survival(x + t * psi), dtype=float) / s0
    return float(np.max(np.abs(ratios - np.exp(-t))))
