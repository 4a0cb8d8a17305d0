"""Statistical procedures for conditional excess estimation from paired data.

Pipeline: moment standardisation, Kendall-tau correlation (rho = sin(pi*tau/2)),
radius reconstruction, Weibull-type tail fit of the radius upper tail
(slope/intercept of the Weibull quantile plot at the top k_n order statistics),
and from those the plug-in auxiliary function

    psi_hat(x) = x^{1-beta_hat} / (c_hat * beta_hat).

Three probability estimators and two quantile estimators are provided:

    m1  Phi((yh - r*xh) / (sqrt(1-r^2) sqrt(xh psi)))
    m2  as m1 with the numerator shifted by r*psi  (second-order correction)
    m3  plug the fitted Weibull survival ratio into the exact angle-form
        integral representation; no asymptotic expansion involved

Negative dependence is reduced to the positive case by negating Y before
fitting; estimators undo the flip on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conditional import DEFAULT_QUAD, QuadratureSettings, _theta_from_ratio
from .errors import (
    DegenerateCorrelationError,
    DegenerateTailError,
    DomainError,
    InsufficientDataError,
    InvalidThresholdError,
)
from .model import PairedSample
from .normal import norm_cdf, norm_ppf

#: sample size above which Kendall's tau switches to merge-sort counting
KENDALL_MERGESORT_ABOVE = 5000

PROB_METHODS = ("m1", "m2", "m3")
QUANTILE_METHODS = ("m1", "m2")


@dataclass(frozen=True)
class TailFit:
    """Every fitted quantity the estimators need.

    When ``flipped`` is true the Y-moments and correlation refer to the
    negated series -Y (so rho_hat >= 0); x90_std is the 0.9 empirical
    quantile of the standardised X values, used for the low-threshold
    diagnostic.
    """

    mu_x_hat: float
    mu_y_hat: float
    sigma_x_hat: float
    sigma_y_hat: float
    rho_hat: float
    beta_hat: float
    c_hat: float
    k_n: int
    n: int
    flipped: bool = False
    x90_std: float = 0.0

    def __post_init__(self):
        if not (self.sigma_x_hat > 0 and self.sigma_y_hat > 0):
            raise DomainError("fitted scales must be positive")
        if not abs(self.rho_hat) <= 1:
            raise DomainError(f"fitted correlation out of [-1, 1]: {self.rho_hat}")
        if not (self.beta_hat > 0 and self.c_hat > 0):
            raise DomainError("tail coefficients must be positive")
        if not 1 <= self.k_n:
            raise InvalidThresholdError(f"need k_n >= 1, got {self.k_n}")
        if not self.k_n < self.n / math.e:
            raise InvalidThresholdError(f"need k_n < n/e, got k_n={self.k_n}, n={self.n}")

    def standardize_x(self, x: float) -> float:
        return (x - self.mu_x_hat) / self.sigma_x_hat

    def low_threshold(self, x: float) -> bool:
        """True when x sits below the 0.9 empirical quantile of the fitted X.

        The estimators stay defined there, but they are tail approximations;
        results at such x deserve a diagnostic flag.
        """
        return self.standardize_x(x) < self.x90_std


# ---------------------------------------------------------------------------
# Kendall's tau (tau-a: ties count zero, denominator C(n,2))
# ---------------------------------------------------------------------------


def _tau_numerator_naive(x: np.ndarray, y: np.ndarray) -> float:
    num = 0.0
    for i in range(x.size - 1):
        num += float(np.sum(np.sign(x[i + 1:] - x[i]) * np.sign(y[i + 1:] - y[i])))
    return num


def _count_inversions(a: list) -> int:
    """Strict inversions (i < j, a[i] > a[j]) by bottom-up merge sort."""
    a = list(a)
    n = len(a)
    buf = [0.0] * n
    inv = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[j] < a[i]:  # right before left: crosses mid-i remaining
                    buf[k] = a[j]
                    j += 1
                    inv += mid - i
                else:
                    buf[k] = a[i]
                    i += 1
                k += 1
            if i < mid:
                buf[k:hi] = a[i:mid]
            else:
                buf[k:hi] = a[j:hi]
            a[lo:hi] = buf[lo:hi]
        width *= 2
    return inv


def _tie_pairs(sorted_arr: np.ndarray) -> int:
    _, counts = np.unique(sorted_arr, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def _tau_numerator_mergesort(x: np.ndarray, y: np.ndarray) -> float:
    # Sort by x (ties broken by y): y-inversions in that order are exactly the
    # discordant pairs; tie corrections restore the concordant count.
    n = x.size
    order = np.lexsort((y, x))
    ys = y[order]
    n0 = n * (n - 1) // 2
    t_x = _tie_pairs(x[order])
    t_y = _tie_pairs(np.sort(y))
    xy = x[order] + 1j * ys  # pairwise-equal rows tie in both coordinates
    t_xy = _tie_pairs(xy)
    d = _count_inversions(ys.tolist())
    return float(n0 - t_x - t_y + t_xy - 2 * d)


def kendall_tau_a(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 2:
        raise InsufficientDataError("Kendall's tau needs at least 2 pairs")
    if n > KENDALL_MERGESORT_ABOVE:
        num = _tau_numerator_mergesort(x, y)
    else:
        num = _tau_numerator_naive(x, y)
    return num / (n * (n - 1) / 2.0)


def kendall_rho(sample: PairedSample) -> float:
    """Correlation estimate sin(pi * tau_hat / 2) from the empirical tau."""
    return math.sin(0.5 * math.pi * kendall_tau_a(sample.x, sample.y))


# ---------------------------------------------------------------------------
# Radius reconstruction and Weibull tail fit
# ---------------------------------------------------------------------------


def reconstruct_radii(sample: PairedSample, fit: TailFit) -> np.ndarray:
    """sqrt(xh^2 + (yh - rho*xh)^2 / (1 - rho^2)) for each standardised pair."""
    if abs(fit.rho_hat) >= 1:
        raise DegenerateCorrelationError("cannot reconstruct radii at |rho| = 1")
    y = -sample.y if fit.flipped else sample.y
    xh = (sample.x - fit.mu_x_hat) / fit.sigma_x_hat
    yh = (y - fit.mu_y_hat) / fit.sigma_y_hat
    resid = yh - fit.rho_hat * xh
    return np.sqrt(xh**2 + resid**2 / (1.0 - fit.rho_hat**2))


def fit_weibull_tail(radii, k_n: int) -> tuple[float, float]:
    """(beta_hat, c_hat) from the top k_n order statistics of the radii.

    beta_hat is the slope of the Weibull quantile plot through the top k_n
    points, anchored at the k_n-th largest radius (the anchor that makes the
    plot exactly linear on exact-quantile input, i.e. when the i-th largest
    radius equals (log(n/i)/c)^{1/beta}); c_hat matches the plot's level.
    """
    radii = np.asarray(radii, dtype=float)
    n = radii.size
    if not 1 <= k_n:
        raise InvalidThresholdError(f"need k_n >= 1, got {k_n}")
    if not k_n < n / math.e:
        raise InvalidThresholdError(f"need k_n < n/e, got k_n={k_n}, n={n}")
    srt = np.sort(radii)
    top = srt[n - k_n:][::-1]  # R_{n-i+1,n}, i = 1..k_n
    anchor = top[-1]  # the k_n-th largest
    if anchor <= 0:
        raise DegenerateTailError("top order statistics must be strictly positive")
    i = np.arange(1, k_n + 1, dtype=float)
    log_ni = np.log(n / i)
    num = np.mean(np.log(log_ni)) - math.log(math.log(n / k_n))
    den = np.mean(np.log(top)) - math.log(anchor)
    if den <= 0:
        raise DegenerateTailError("flat quantile plot: top radii carry no slope")
    beta = num / den
    c = float(np.mean(log_ni / top**beta))
    return float(beta), c


def fit_all(sample: PairedSample, k_fraction: float = 0.10) -> TailFit:
    """Full fit: moments, Kendall correlation (flip to rho >= 0), radii, tail.

    k_n = floor(k_fraction * n), clamped to [1, ceil(n/e) - 1]; the default
    fraction keeps the highest 10% of reconstructed radii.
    """
    if sample.n < 20:
        raise InsufficientDataError(f"need n >= 20 to fit, got {sample.n}")
    if not 0.0 < k_fraction < 1.0:
        raise DomainError(f"need k_fraction in (0,1), got {k_fraction}")
    x, y = sample.x, sample.y
    mu_x, mu_y = float(np.mean(x)), float(np.mean(y))
    sd_x, sd_y = float(np.std(x, ddof=1)), float(np.std(y, ddof=1))
    if not (sd_x > 0 and sd_y > 0):
        raise DomainError("sample has zero variance")
    rho = kendall_rho(sample)
    flipped = rho < 0
    if flipped:
        y, mu_y, rho = -y, -mu_y, -rho
    if rho >= 1.0:
        raise DegenerateCorrelationError("Kendall correlation estimate is numerically 1")
    xh = (x - mu_x) / sd_x
    yh = (y - mu_y) / sd_y
    resid = yh - rho * xh
    radii = np.sqrt(xh**2 + resid**2 / (1.0 - rho**2))
    k_n = min(max(int(k_fraction * sample.n), 1), math.ceil(sample.n / math.e) - 1)
    beta, c = fit_weibull_tail(radii, k_n)
    return TailFit(
        mu_x_hat=mu_x, mu_y_hat=mu_y, sigma_x_hat=sd_x, sigma_y_hat=sd_y,
        rho_hat=rho, beta_hat=beta, c_hat=c, k_n=k_n, n=sample.n,
        flipped=flipped, x90_std=float(np.quantile(xh, 0.9)),
    )


# ---------------------------------------------------------------------------
# Plug-in estimators
# ---------------------------------------------------------------------------


def psi_hat(fit: TailFit, x: float) -> float:
    """Fitted auxiliary function x^{1-beta}/(c*beta); x on the standardised scale."""
    if x <= 0:
        raise DomainError(f"psi_hat needs x > 0, got {x}")
    return x ** (1.0 - fit.beta_hat) / (fit.c_hat * fit.beta_hat)


def _weibull_ratio(beta: float, c: float, x_hat: float):
    """v -> exp(-c (v^beta - x_hat^beta)): fitted survival ratio Hbar(v)/Hbar(x_hat)."""
    xpow = x_hat**beta

    def ratio(v: float) -> float:
        if v <= 0.0:
            return 0.0
        lw = beta * math.log(v)
        if lw > 700.0:
            return 0.0
        return math.exp(-c * (math.exp(lw) - xpow))

    return ratio


def _theta_core(fit: TailFit, x: float, y: float, method: str,
                settings: QuadratureSettings) -> float:
    xh = fit.standardize_x(x)
    if xh <= 0:
        raise DomainError(f"need standardised x > 0, got {xh}")
    if abs(fit.rho_hat) >= 1:
        raise DegenerateCorrelationError("estimators undefined at |rho| = 1")
    yh = (y - fit.mu_y_hat) / fit.sigma_y_hat
    rho = fit.rho_hat
    if method == "m3":
        ratio = _weibull_ratio(fit.beta_hat, fit.c_hat, xh)
        theta, _ = _theta_from_ratio(ratio, xh, yh, rho, settings)
        return theta
    psi = psi_hat(fit, xh)
    spread = math.sqrt(1.0 - rho * rho) * math.sqrt(xh * psi)
    shift = rho * psi if method == "m2" else 0.0
    return float(norm_cdf((yh - rho * xh - shift) / spread))


def theta_hat(fit: TailFit, x: float, y: float, method: str,
              settings: QuadratureSettings = DEFAULT_QUAD) -> float:
    """Estimated P(Y <= y | X > x) by one of the three methods."""
    if method not in PROB_METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {PROB_METHODS}")
    if fit.flipped:
        return 1.0 - _theta_core(fit, x, -y, method, settings)
    return _theta_core(fit, x, y, method, settings)


def _quantile_core(fit: TailFit, x: float, theta: float, method: str) -> float:
    xh = fit.standardize_x(x)
    if xh <= 0:
        raise DomainError(f"need standardised x > 0, got {xh}")
    rho = fit.rho_hat
    psi = psi_hat(fit, xh)
    shift = rho * psi if method == "m2" else 0.0
    y_std = rho * xh + shift + math.sqrt(1.0 - rho * rho) * math.sqrt(xh * psi) * float(norm_ppf(theta))
    return fit.mu_y_hat + fit.sigma_y_hat * y_std


def quantile_hat(fit: TailFit, x: float, theta: float, method: str) -> float:
    """Estimated conditional theta-quantile of Y given X > x (methods m1, m2)."""
    if method not in QUANTILE_METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {QUANTILE_METHODS}")
    if not 0.0 < theta < 1.0:
        raise DomainError(f"need 0 < theta < 1, got {theta}")
    if fit.flipped:
        return -_quantile_core(fit, x, 1.0 - theta, method)
    return _quantile_core(fit, x, theta, method)
