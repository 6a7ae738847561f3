"""Continuous power-law model ``p(x) = K x**-alpha`` for ``x >= x_min``.

Maximum-likelihood exponent, Kolmogorov-Smirnov lower-limit search, the
semi-parametric bootstrap goodness-of-fit test, and the closed-form
quantiles and band medians the QuickCent estimator is built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .exceptions import (
    DegenerateSampleError,
    DivergenceError,
    InputError,
    InsufficientDataError,
)

__all__ = [
    "PowerLawModel",
    "PowerLawFit",
    "mle_alpha",
    "quantile_value",
    "interval_median",
    "open_tail_median",
    "ks_distance",
    "fit_xmin",
    "fixed_fit",
    "bootstrap_pvalue",
    "moment",
    "sample_power_law",
]


@dataclass(frozen=True)
class PowerLawModel:
    alpha: float
    x_min: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 1.0):
            raise DivergenceError(f"power-law exponent must be > 1, got {self.alpha}")
        if not (math.isfinite(self.x_min) and self.x_min > 0.0):
            raise InputError(f"x_min must be positive, got {self.x_min}")

    @property
    def norm_k(self) -> float:
        """Normalisation ``K = (alpha - 1) x_min**(alpha - 1)``."""
        return (self.alpha - 1.0) * math.exp((self.alpha - 1.0) * math.log(self.x_min))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            val = self.norm_k * np.exp(-self.alpha * np.log(x))
        return np.where(x >= self.x_min, val, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -np.expm1((1.0 - self.alpha) * np.log(x / self.x_min))
        return np.where(x >= self.x_min, val, 0.0)


@dataclass(frozen=True)
class PowerLawFit:
    """A fitted model plus its KS distance and the size of the fitted tail.

    ``percentile`` is the candidate search bound that produced the fit, or
    ``None`` when ``x_min`` was fixed in advance.
    """

    model: PowerLawModel
    ks_distance: float
    n_tail: int
    percentile: float | None = None

    @property
    def alpha(self) -> float:
        return self.model.alpha

    @property
    def x_min(self) -> float:
        return self.model.x_min


@numba.njit(cache=True)
def _tail_log_sum(logx, start, log_xmin):
    s = 0.0
    for j in range(start, logx.size):
        s += logx[j] - log_xmin
    return s


@numba.njit(cache=True)
def _ks_sorted(logx, start, log_xmin, alpha):
    m = logx.size - start
    e = 1.0 - alpha
    d = 0.0
    for j in range(start, logx.size):
        p = 1.0 - math.exp(e * (logx[j] - log_xmin))
        lo = (j - start) / m
        hi = (j - start + 1) / m
        if p - lo > d:
            d = p - lo
        if hi - p > d:
            d = hi - p
    return d


@numba.njit(cache=True)
def _scan_candidates(logx, starts, fixed_alpha):
    n = starts.size
    alphas = np.empty(n)
    ks = np.empty(n)
    for i in range(n):
        k = starts[i]
        m = logx.size - k
        if math.isnan(fixed_alpha):
            alphas[i] = 1.0 + m / _tail_log_sum(logx, k, logx[k])
        else:
            alphas[i] = fixed_alpha
        ks[i] = _ks_sorted(logx, k, logx[k], alphas[i])
    return alphas, ks


def _retained_sorted(sample, x_min) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    x = x[(x > 0) & (x >= x_min)]
    x.sort()
    return x


def mle_alpha(sample, x_min: float) -> float:
    """Continuous MLE ``1 + m / sum(ln(x_i / x_min))`` over values ``>= x_min``."""
    if not x_min > 0:
        raise InputError("x_min must be positive")
    x = _retained_sorted(sample, x_min)
    if x.size < 2:
        raise InsufficientDataError(f"need >= 2 values >= x_min, have {x.size}")
    s = _tail_log_sum(np.log(x), 0, math.log(x_min))
    if s <= 0.0:
        raise DegenerateSampleError("all retained values equal x_min; exponent diverges")
    return 1.0 + x.size / s


def _check_prob(p):
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise InputError(f"probability {p} outside [0, 1)")
    if p == 1.0:
        raise DivergenceError("the quantile at p = 1 is infinite")


def quantile_value(model: PowerLawModel, p: float) -> float:
    """Value ``C`` with model CDF ``p``: ``x_min (1 - p)**(1 / (1 - alpha))``."""
    _check_prob(p)
    return model.x_min * math.exp(math.log1p(-p) / (1.0 - model.alpha))


def _quantiles(model: PowerLawModel, u: np.ndarray) -> np.ndarray:
    return model.x_min * np.exp(np.log1p(-u) / (1.0 - model.alpha))


def interval_median(model: PowerLawModel, c_lo: float, c_hi: float) -> float:
    """Median of the model restricted to ``[c_lo, c_hi]``."""
    if c_lo < model.x_min:
        raise InputError(f"c_lo={c_lo} below x_min={model.x_min}")
    if not c_hi >= c_lo or not math.isfinite(c_hi):
        raise InputError("need finite c_hi >= c_lo")
    if c_lo == c_hi:
        return float(c_lo)
    e = 1.0 - model.alpha
    a, b = e * math.log(c_lo), e * math.log(c_hi)
    log_mean = np.logaddexp(a, b) - math.log(2.0)
    md = math.exp(log_mean / e)
    return min(max(md, c_lo), c_hi)


def open_tail_median(model: PowerLawModel, c_n: float) -> float:
    """Median of the model restricted to ``[c_n, inf)``: ``2**(1/(alpha-1)) c_n``."""
    if model.alpha <= 1.0:
        raise DivergenceError("alpha <= 1 has no finite tail median")
    if c_n < model.x_min:
        raise InputError(f"c_n={c_n} below x_min={model.x_min}")
    return math.exp(math.log(2.0) / (model.alpha - 1.0)) * c_n


def ks_distance(sample, model: PowerLawModel) -> float:
    """Sup gap between the empirical CDF of values ``>= x_min`` and the model CDF.

    Both one-sided gaps are checked at every retained point.
    """
    x = _retained_sorted(sample, model.x_min)
    if x.size < 2:
        raise InsufficientDataError(f"need >= 2 values >= x_min, have {x.size}")
    return float(_ks_sorted(np.log(x), 0, math.log(model.x_min), model.alpha))


def fixed_fit(sample, x_min: float) -> PowerLawFit:
    """Fit with a prescribed ``x_min``; only the exponent is estimated."""
    alpha = mle_alpha(sample, x_min)
    model = PowerLawModel(alpha, float(x_min))
    x = _retained_sorted(sample, x_min)
    return PowerLawFit(model, ks_distance(x, model), int(x.size), None)


def fit_xmin(sample, candidate_upper_bound_percentile: float = 20.0,
             alpha: float | None = None) -> PowerLawFit:
    """Choose ``x_min`` by minimising the KS distance.

    Candidates are the distinct positive sample values not above the given
    percentile (linear interpolation) of the positive values.  Each candidate
    is fitted by :func:`mle_alpha`, or uses ``alpha`` when given.  Ties on KS
    go to the smallest candidate.
    """
    x = np.asarray(sample, dtype=float).ravel()
    x = np.sort(x[x > 0])
    if x.size < 10:
        raise InsufficientDataError(f"need >= 10 positive values, have {x.size}")
    q = float(candidate_upper_bound_percentile)
    if not 0.0 <= q <= 100.0:
        raise InputError("percentile bound must lie in [0, 100]")
    bound = np.percentile(x, q)
    values, starts = np.unique(x, return_index=True)
    # the largest value leaves a constant tail
    keep = (values <= bound) & (values < x[-1]) & (x.size - starts >= 2)
    starts = starts[keep]
    if starts.size == 0:
        raise InsufficientDataError("no x_min candidate below the percentile bound")
    fixed = math.nan if alpha is None else float(alpha)
    alphas, ks = _scan_candidates(np.log(x), starts.astype(np.int64), fixed)
    best = int(np.argmin(ks))
    k = int(starts[best])
    return PowerLawFit(PowerLawModel(float(alphas[best]), float(x[k])),
                       float(ks[best]), int(x.size - k), q)


def sample_power_law(model: PowerLawModel, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from the model."""
    return _quantiles(model, rng.random(size))


def bootstrap_pvalue(sample, fit: PowerLawFit, n_boot: int, seed) -> float:
    """Semi-parametric bootstrap p-value of a power-law fit.

    Each replicate keeps the sample size of the positive values.  A value
    comes from the fitted model with probability ``n_tail / m`` and otherwise
    is resampled uniformly from the observed values below ``x_min``.  The
    replicate is refitted the same way as ``fit`` (same percentile bound, or
    same fixed ``x_min``) and the p-value is the fraction of replicates whose
    KS distance exceeds ``fit.ks_distance``.  Replicate ``b`` uses the ``b``-th
    child of ``SeedSequence(seed)``; replicates whose refit fails are dropped.
    """
    if n_boot < 1:
        raise InputError("n_boot must be >= 1")
    x = np.asarray(sample, dtype=float).ravel()
    x = x[x > 0]
    below = np.sort(x[x < fit.x_min])
    m = x.size
    tail_share = fit.n_tail / m
    exceed = 0
    used = 0
    for child in np.random.SeedSequence(seed).spawn(n_boot):
        rng = np.random.Generator(np.random.PCG64(child))
        from_tail = rng.random(m) < tail_share if below.size else np.ones(m, dtype=bool)
        k = int(from_tail.sum())
        sim = np.empty(m)
        sim[:k] = sample_power_law(fit.model, k, rng)
        if m - k:
            sim[k:] = below[rng.integers(0, below.size, m - k)]
        try:
            if fit.percentile is None:
                refit = fixed_fit(sim, fit.x_min)
            else:
                refit = fit_xmin(sim, fit.percentile)
        except (InsufficientDataError, DegenerateSampleError, DivergenceError):
            continue
        used += 1
        exceed += refit.ks_distance > fit.ks_distance
    return exceed / used if used else math.nan


def moment(model: PowerLawModel, ell: int) -> float:
    """``<x**ell> = (alpha - 1) / (alpha - 1 - ell) x_min**ell`` for ``ell < alpha - 1``."""
    if ell < 0:
        raise InputError("moment order must be non-negative")
    if ell >= model.alpha - 1.0:
        raise DivergenceError(f"moment {ell} diverges for alpha={model.alpha}")
    return (model.alpha - 1.0) / (model.alpha - 1.0 - ell) * model.x_min ** ell
