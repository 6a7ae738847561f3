"""Error and association metrics used to score estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _sps

from .exceptions import InputError, InsufficientDataError

__all__ = ["SummaryStats", "mae", "spearman_log", "summarize", "P_VALUE_FLOOR"]

#: Smallest reported correlation p-value; exact zeros are clamped to it.
P_VALUE_FLOOR = 1e-300


@dataclass(frozen=True)
class SummaryStats:
    q25: float
    median: float
    mean: float
    q75: float
    n: int

    @property
    def iqr(self) -> float:
        return self.q75 - self.q25


def mae(truth, estimate) -> float:
    """Mean absolute error."""
    t = np.asarray(truth, dtype=float).ravel()
    e = np.asarray(estimate, dtype=float).ravel()
    if t.size != e.size:
        raise InputError(f"length mismatch: {t.size} vs {e.size}")
    if t.size == 0:
        raise InputError("mae of empty vectors")
    return float(np.mean(np.abs(t - e)))


def spearman_log(x, y) -> tuple[float, float]:
    """Spearman correlation of ``log x`` and ``log y`` with a two-sided t-test p-value.

    Pairs with a non-positive entry are dropped first.  Ranks average ties,
    so the log only matters for reporting.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise InputError(f"length mismatch: {x.size} vs {y.size}")
    keep = (x > 0) & (y > 0)
    n = int(keep.sum())
    if n < 3:
        raise InsufficientDataError(f"need >= 3 positive pairs, have {n}")
    rx = _sps.rankdata(np.log(x[keep]))
    ry = _sps.rankdata(np.log(y[keep]))
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        raise InsufficientDataError("correlation undefined for constant input")
    rho = float(np.clip((rx @ ry) / denom, -1.0, 1.0))
    dof = n - 2
    if abs(rho) >= 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt(dof / ((1.0 - rho) * (1.0 + rho)))
        p = float(2.0 * _sps.t.sf(abs(t), dof))
    return rho, max(p, P_VALUE_FLOOR)


def summarize(values) -> SummaryStats:
    """Quartiles (linear interpolation between order statistics), median and mean."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise InputError("cannot summarise an empty vector")
    q25, med, q75 = np.percentile(v, [25, 50, 75])
    return SummaryStats(float(q25), float(med), float(v.mean()), float(q75), int(v.size))
