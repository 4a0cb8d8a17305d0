"""Standard normal CDF, density and quantile.

The CDF is the erf-based routine ``scipy.special.ndtr`` (relative accuracy at
double precision, ~1e-16); the quantile is the rational-approximation routine
``scipy.special.ndtri``, which round-trips through ``ndtr`` to better than
1e-13 over (1e-300, 1-1e-16).  Both accept scalars or arrays.
"""

import numpy as np
from scipy.special import ndtr as norm_cdf
from scipy.special import ndtri as norm_ppf

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


__all__ = ["norm_cdf", "norm_pdf", "norm_ppf"]
