"""Radial laws for bivariate elliptical models.

A bivariate elliptical density with generator g factorises through a radial
variable R whose density is proportional to r*g(r^2).  For each supported
generator the unit-scale survival function Hbar(w) = P(W > w) below was
obtained by integrating r*g(r^2) in closed form; the stated normalisation
makes Hbar(support_low) = 1 exactly.

    family   generator g(u)                    unit-scale survival Hbar(w)
    -------  --------------------------------  -------------------------------
    normal   exp(-u/2)                         exp(-w^2/2)          (Rayleigh)
    kotz     u^{b/2-1} exp(-u^{b/2})           exp(-w^b)            (Weibull b)
    logis    e^{-u}/(1+e^{-u})^2               2 e^{-w^2}/(1+e^{-w^2})
    modkotz  ((3/8)ln u + 1/2) u^{-1/4}
             * exp(-(1/2) u^{3/4} ln u)        exp(-w^{3/2} ln w) for w >= 1
    lognor   u^{-1} exp(-(ln u)^2/8)           Phi(-ln w)           (lognormal)
    student  (1+u/nu)^{-(nu+2)/2}              (1+w^2/nu)^{-nu/2}

The modkotz exponent -w^{3/2} ln w is negative only for w > 1, which forces
support_low = 1 there; all other families start at 0.  Each law is rescaled
by a factor ``scale`` so that R = scale * W satisfies E[R^2] = 2, the
standardisation the elliptical representation requires.  Unit-scale second
moments:

    normal 2            kotz Gamma(1+2/b)      logis 2 ln 2
    modkotz (quadrature, cached)               lognor e^2
    student 2 nu/(nu-2) for nu > 2

The auxiliary function psi = Hbar/H' (exact ratio of the closed forms, never a
numeric derivative) characterises the rapid-variation tail; at unit scale

    normal 1/w          kotz w^{1-b}/b         logis (1+e^{-w^2})/(2w)
    modkotz w^{-1/2}/(1+(3/2)ln w)             lognor w * Mills(ln w)

and a scaled law has psi_scaled(r) = scale * psi_unit(r/scale).  The student
family has a regularly varying (power) tail, so no auxiliary function exists
and ``aux_psi`` raises UnsupportedFamilyError for it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import erfcx, ndtr, ndtri

from .errors import DomainError, NumericFailure, UnsupportedFamilyError
from .normal import norm_pdf

#: probability tolerance for numeric quantile inversion
QUANTILE_TOL = 1e-12
#: iteration cap shared by bracket expansion and bisection
QUANTILE_MAX_ITER = 200


class RadialLaw:
    """A positive radial law, optionally rescaled so that E[R^2] = 2.

    Instances are immutable after construction and all methods are pure, so
    sharing a law across threads is safe.
    """

    name: str = ""
    support_low: float = 0.0  # unit-scale; survival is 1 at or below support_low*scale
    gumbel_domain: bool = True

    def __init__(self, standardized: bool = True, **params):
        self.params = dict(params)
        self.standardized = bool(standardized)
        self.scale = math.sqrt(2.0 / self._unit_second_moment()) if standardized else 1.0
        # documented threshold above which aux_psi is positive and meaningful
        self.psi_valid_from = self.support_low * self.scale

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner}) scale={self.scale:.12g}"

    # ---- family hooks (unit scale, w = r/scale) --------------------------

    def _unit_second_moment(self) -> float:
        raise NotImplementedError

    def _surv_unit(self, w):
        raise NotImplementedError

    def _dens_unit(self, w):
        raise NotImplementedError

    def _quant_unit(self, p):
        """Closed-form unit-scale quantile, or None to use bisection."""
        return None

    def _psi_unit(self, w):
        raise NotImplementedError

    # ---- public surface --------------------------------------------------

    def survival(self, r):
        """P(R > r).  Accepts scalars or arrays; equals 1 below the support."""
        w = np.maximum(np.asarray(r, dtype=float) / self.scale, self.support_low)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = self._surv_unit(w)
        return out if out.shape else float(out)

    def density(self, r):
        """dH/dr at r; zero below the support."""
        w = np.asarray(r, dtype=float) / self.scale
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = self._dens_unit(w) / self.scale
        return out if out.shape else float(out)

    def aux_psi(self, r):
        """The exact Von Mises ratio Hbar(r)/H'(r), from closed forms."""
        if not self.gumbel_domain:
            raise UnsupportedFamilyError(
                f"{self.name}: regularly varying tail, no auxiliary function"
            )
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < self.psi_valid_from) or np.any(r_arr <= 0.0):
            raise DomainError(
                f"aux_psi defined for r >= {self.psi_valid_from:g} (and r > 0), got {r!r}"
            )
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = self.scale * self._psi_unit(r_arr / self.scale)
        return out if out.shape else float(out)

    def quantile(self, p: float) -> float:
        """r such that |H(r) - p| <= 1e-12, H = 1 - survival."""
        if not 0.0 < p < 1.0:
            raise DomainError(f"quantile needs 0 < p < 1, got {p}")
        w = self._quant_unit(p)
        if w is None:
            w = self._quant_bisect(p)
        return float(w) * self.scale

    def quantile_vec(self, p):
        """Vectorised quantile; p entries in [0, 1)."""
        p = np.asarray(p, dtype=float)
        w = self._quant_unit(p)
        if w is None:
            w = self._quant_bisect_vec(p)
        return np.asarray(w, dtype=float) * self.scale

    def sample(self, seed: int, n: int) -> np.ndarray:
        """n i.i.d. draws by inverse transform on a Philox stream."""
        if n < 1:
            raise DomainError(f"need n >= 1, got {n}")
        rng = np.random.Generator(np.random.Philox(seed))
        return self.quantile_vec(rng.random(n))

    # ---- numeric inversion ----------------------------------------------

    def _quant_bisect(self, p: float) -> float:
        target = 1.0 - p  # work on the survival scale
        lo = self.support_low
        hi = self.support_low + 1.0
        iters = 0
        while float(self._surv_unit(np.float64(hi))) > target:
            lo = hi
            hi = self.support_low + 2.0 * (hi - self.support_low)
            iters += 1
            if iters > QUANTILE_MAX_ITER:
                raise NumericFailure(
                    f"{self.name}: quantile bracket expansion failed", p=p, lo=lo, hi=hi
                )
        while iters < QUANTILE_MAX_ITER:
            mid = 0.5 * (lo + hi)
            s = float(self._surv_unit(np.float64(mid)))
            if abs(s - target) <= QUANTILE_TOL:
                return mid
            if s > target:
                lo = mid
            else:
                hi = mid
            iters += 1
        raise NumericFailure(
            f"{self.name}: quantile bisection did not converge", p=p, lo=lo, hi=hi
        )

    def _quant_bisect_vec(self, p):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        target = 1.0 - p
        lo = np.full_like(p, self.support_low)
        hi = lo + 1.0
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            for _ in range(QUANTILE_MAX_ITER):
                need = self._surv_unit(hi) > target
                if not need.any():
                    break
                lo = np.where(need, hi, lo)
                hi = np.where(need, self.support_low + 2.0 * (hi - self.support_low), hi)
            for _ in range(QUANTILE_MAX_ITER):
                mid = 0.5 * (lo + hi)
                s = self._surv_unit(mid)
                err = np.abs(s - target)
                if err.max() <= QUANTILE_TOL:
                    return mid
                above = s > target
                lo = np.where(above, mid, lo)
                hi = np.where(above, hi, mid)
        raise NumericFailure(f"{self.name}: vector quantile did not converge")


class NormalRadial(RadialLaw):
    name = "normal"

    def _unit_second_moment(self):
        return 2.0

    def _surv_unit(self, w):
        return np.exp(-0.5 * w * w)

    def _dens_unit(self, w):
        return np.where(w > 0.0, w * np.exp(-0.5 * w * w), 0.0)

    def _quant_unit(self, p):
        return np.sqrt(-2.0 * np.log1p(-np.asarray(p, dtype=float)))

    def _psi_unit(self, w):
        return 1.0 / w


class KotzRadial(RadialLaw):
    name = "kotz"

    def __init__(self, beta: float = 1.0, standardized: bool = True):
        if beta <= 0:
            raise DomainError(f"kotz needs beta > 0, got {beta}")
        self.beta = float(beta)
        super().__init__(standardized=standardized, beta=self.beta)

    def _unit_second_moment(self):
        return math.gamma(1.0 + 2.0 / self.beta)

    def _surv_unit(self, w):
        wl = np.maximum(w, 0.0)
        return np.exp(-np.power(wl, self.beta))

    def _dens_unit(self, w):
        wl = np.maximum(w, 1e-300)
        out = self.beta * np.power(wl, self.beta - 1.0) * np.exp(-np.power(wl, self.beta))
        return np.where(w > 0.0, out, 0.0)

    def _quant_unit(self, p):
        return np.power(-np.log1p(-np.asarray(p, dtype=float)), 1.0 / self.beta)

    def _psi_unit(self, w):
        return np.power(w, 1.0 - self.beta) / self.beta


class LogisticRadial(RadialLaw):
    name = "logis"

    def _unit_second_moment(self):
        return 2.0 * math.log(2.0)

    def _surv_unit(self, w):
        e = np.exp(-w * w)
        return 2.0 * e / (1.0 + e)

    def _dens_unit(self, w):
        e = np.exp(-w * w)
        return np.where(w > 0.0, 4.0 * w * e / (1.0 + e) ** 2, 0.0)

    def _quant_unit(self, p):
        p = np.asarray(p, dtype=float)
        return np.sqrt(np.log((1.0 + p) / (1.0 - p)))

    def _psi_unit(self, w):
        return (1.0 + np.exp(-w * w)) / (2.0 * w)


class ModifiedKotzRadial(RadialLaw):
    name = "modkotz"
    support_low = 1.0
    _unit_m2_cache: float | None = None

    def _unit_second_moment(self):
        # E[W^2] = 1 + 2 * int_1^inf w exp(-w^{3/2} ln w) dw, by parts; no closed form
        if ModifiedKotzRadial._unit_m2_cache is None:
            tail, _ = quad(
                lambda w: w * math.exp(-(w**1.5) * math.log(w)), 1.0, np.inf,
                epsabs=1e-13, epsrel=1e-12, limit=500,
            )
            ModifiedKotzRadial._unit_m2_cache = 1.0 + 2.0 * tail
        return ModifiedKotzRadial._unit_m2_cache

    def _surv_unit(self, w):
        wl = np.maximum(w, 1.0)
        return np.where(w > 1.0, np.exp(-np.power(wl, 1.5) * np.log(wl)), 1.0)

    def _dens_unit(self, w):
        wl = np.maximum(w, 1.0)
        lw = np.log(wl)
        out = np.sqrt(wl) * (1.0 + 1.5 * lw) * np.exp(-np.power(wl, 1.5) * lw)
        return np.where(w > 1.0, out, 0.0)

    def _psi_unit(self, w):
        return 1.0 / (np.sqrt(w) * (1.0 + 1.5 * np.log(w)))


class LognormalRadial(RadialLaw):
    name = "lognor"

    def _unit_second_moment(self):
        return math.e**2

    def _surv_unit(self, w):
        wl = np.maximum(w, 1e-300)
        return np.where(w > 0.0, ndtr(-np.log(wl)), 1.0)

    def _dens_unit(self, w):
        wl = np.maximum(w, 1e-300)
        return np.where(w > 0.0, norm_pdf(np.log(wl)) / wl, 0.0)

    def _quant_unit(self, p):
        return np.exp(ndtri(np.asarray(p, dtype=float)))

    def _psi_unit(self, w):
        # Hbar/H' = w * Mills(ln w); Mills(z) = sqrt(pi/2) * erfcx(z/sqrt(2))
        z = np.log(w)
        return w * math.sqrt(math.pi / 2.0) * erfcx(z / math.sqrt(2.0))


class StudentRadial(RadialLaw):
    name = "student"
    gumbel_domain = False

    def __init__(self, nu: float = 3.0, standardized: bool = True):
        if nu <= 2:
            raise DomainError(f"student needs nu > 2 for E[R^2] < inf, got {nu}")
        self.nu = float(nu)
        super().__init__(standardized=standardized, nu=self.nu)

    def _unit_second_moment(self):
        return 2.0 * self.nu / (self.nu - 2.0)

    def _surv_unit(self, w):
        return np.power(1.0 + w * w / self.nu, -0.5 * self.nu)

    def _dens_unit(self, w):
        out = w * np.power(1.0 + w * w / self.nu, -0.5 * (self.nu + 2.0))
        return np.where(w > 0.0, out, 0.0)

    def _quant_unit(self, p):
        p = np.asarray(p, dtype=float)
        return np.sqrt(self.nu * (np.power(1.0 - p, -2.0 / self.nu) - 1.0))

    def _psi_unit(self, w):
        raise UnsupportedFamilyError("student: no auxiliary function")


FAMILIES = {
    "normal": NormalRadial,
    "kotz": KotzRadial,
    "logis": LogisticRadial,
    "modkotz": ModifiedKotzRadial,
    "lognor": LognormalRadial,
    "student": StudentRadial,
}


def make_radial(name: str, standardized: bool = True, **params) -> RadialLaw:
    """Build a radial law by family name (see FAMILIES for the registry)."""
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown radial family {name!r}; known: {sorted(FAMILIES)}") from None
    return cls(standardized=standardized, **params)
