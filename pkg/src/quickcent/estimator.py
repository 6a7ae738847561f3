"""The QuickCent estimator.

In-degree thresholds ``d0 <= d1 <= ... <= dn`` split the nodes into bands.
A node is scanned against the thresholds in order and the scan stops at the
first threshold its in-degree does not exceed; the band's stored median is
the estimate.  Band medians come from a power law fitted to a sample of
exact centralities, evaluated in closed form; the lowest band (below
``x_min``) uses the empirical median of the sampled low-degree nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import powerlaw as pl
from .digraph import Digraph, harmonic_for
from .exceptions import (
    DegenerateSampleError,
    DivergenceError,
    InputError,
    InsufficientDataError,
    ModelConsistencyError,
    ModelFormatError,
    TrainingError,
)

__all__ = [
    "XminMode",
    "ProportionsSpec",
    "QuickCentModel",
    "proportions_from_sample",
    "degree_threshold",
    "train",
    "predict",
    "clue_scan",
    "predict_all",
    "save_model",
    "load_model",
    "MODEL_HEADER",
]

MODEL_HEADER = "quickcent-model v1"


@dataclass(frozen=True)
class XminMode:
    """How the power-law lower limit is chosen during training.

    ``fixed`` uses ``value`` as ``x_min``; ``fitted`` runs the KS search
    with ``value`` as the percentile bound on candidates.
    """

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("fixed", "fitted"):
            raise InputError(f"unknown x_min mode {self.kind!r}")
        if self.kind == "fixed" and not self.value > 0:
            raise InputError("fixed x_min must be positive")
        if self.kind == "fitted" and not 0 <= self.value <= 100:
            raise InputError("percentile bound must lie in [0, 100]")

    @classmethod
    def fixed(cls, x_min: float = 1.0) -> "XminMode":
        return cls("fixed", float(x_min))

    @classmethod
    def fitted(cls, percentile: float = 20.0) -> "XminMode":
        return cls("fitted", float(percentile))

    @classmethod
    def parse(cls, text: str) -> "XminMode":
        """Parse ``fixed:<x_min>`` or ``fit:<percentile>``."""
        kind, _, value = str(text).partition(":")
        kind = kind.strip().lower()
        try:
            number = float(value)
        except ValueError:
            raise InputError(f"bad x_min mode {text!r}; use fixed:<x> or fit:<pct>") from None
        if kind == "fixed":
            return cls.fixed(number)
        if kind in ("fit", "fitted"):
            return cls.fitted(number)
        raise InputError(f"bad x_min mode {text!r}; use fixed:<x> or fit:<pct>")

    def __str__(self) -> str:
        tag = "fixed" if self.kind == "fixed" else "fit"
        return f"{tag}:{self.value:g}"


@dataclass(frozen=True)
class ProportionsSpec:
    """Proportions vector of a centrality sample.

    ``probs[j]`` is the empirical CDF at ``log_points[j]`` and ``p0`` the
    share of the sample strictly below ``x_min``.
    """

    probs: tuple[float, ...]
    log_points: tuple[float, ...]
    p0: float

    def __post_init__(self):
        if len(self.probs) != len(self.log_points) or not self.probs:
            raise InputError("probs and log_points must be non-empty and equally long")
        if any(b < a for a, b in zip(self.probs, self.probs[1:])):
            raise InputError("probs must be non-decreasing")
        if not 0.0 <= self.p0 <= self.probs[0]:
            raise InputError("p0 must lie in [0, probs[0]]")
        if self.probs[-1] >= 1.0:
            raise InputError("probs must stay below 1")

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def tail_probs(self) -> tuple[float, ...]:
        """Proportions conditioned on the power-law tail, ``(p - p0) / (1 - p0)``."""
        return tuple((p - self.p0) / (1.0 - self.p0) for p in self.probs)


@dataclass(frozen=True)
class QuickCentModel:
    """A trained estimator.

    ``cuts`` are the band edges ``C_0 = x_min, C_1, ..., C_n`` and ``bands``
    the 1-based band numbers kept after empty bands (repeated degree
    thresholds) were merged away.  ``thresholds[k]`` and ``medians[k + 1]``
    belong to band ``bands[k]``; ``medians[0]`` is the sub-``x_min`` band and
    ``medians[-1]`` the open tail above ``C_n``.
    """

    alpha: float
    x_min: float
    d0: int
    thresholds: tuple[int, ...]
    medians: tuple[float, ...]
    cuts: tuple[float, ...]
    bands: tuple[int, ...]
    proportions: ProportionsSpec = field(repr=False)

    def __post_init__(self):
        if len(self.medians) != len(self.thresholds) + 2:
            raise InputError("need len(medians) == len(thresholds) + 2")
        if len(self.bands) != len(self.thresholds):
            raise InputError("need one band number per threshold")
        if len(self.cuts) != self.proportions.n + 1:
            raise InputError("need n + 1 cuts")

    @property
    def fit(self) -> pl.PowerLawModel:
        return pl.PowerLawModel(self.alpha, self.x_min)

    @property
    def n(self) -> int:
        return self.proportions.n

    @property
    def n_effective(self) -> int:
        return len(self.thresholds)

    @property
    def boundaries(self) -> np.ndarray:
        return np.array((self.d0,) + self.thresholds, dtype=np.int64)


def proportions_from_sample(centralities, x_min: float, n: int) -> ProportionsSpec:
    """Proportions from ``n`` log-equidistant points strictly between ``x_min`` and the max."""
    if n < 1:
        raise InputError("n must be >= 1")
    h = np.asarray(centralities, dtype=float).ravel()
    tail = h[h >= x_min]
    if tail.size == 0:
        raise InsufficientDataError("no centrality value reaches x_min")
    top = float(tail.max())
    if top <= x_min:
        raise DegenerateSampleError("maximum equals x_min; log range is empty")
    lo, span = math.log(x_min), math.log(top) - math.log(x_min)
    points = tuple(math.exp(lo + span * j / (n + 1)) for j in range(1, n + 1))
    hs = np.sort(h)
    probs = tuple(float(np.searchsorted(hs, t, side="right")) / h.size for t in points)
    p0 = float(np.searchsorted(hs, x_min, side="left")) / h.size
    return ProportionsSpec(probs, points, p0)


def _degree_quantile(sorted_degrees: np.ndarray, p: float) -> int:
    n = sorted_degrees.size
    cdf = np.arange(1, n + 1) / n
    k = int(np.searchsorted(cdf, p, side="left"))
    return int(sorted_degrees[min(k, n - 1)])


def degree_threshold(g, p: float) -> int:
    """Smallest in-degree ``d`` whose empirical CDF reaches ``p``.

    ``g`` is a :class:`Digraph` or an array of in-degrees.
    """
    if not 0.0 <= p <= 1.0:
        raise InputError(f"probability {p} outside [0, 1]")
    deg = g.in_degree if isinstance(g, Digraph) else np.asarray(g)
    if deg.size == 0:
        raise InputError("empty degree sequence")
    return _degree_quantile(np.sort(deg), p)


def train(g: Digraph, training_nodes, n: int = 8, xmin_mode: XminMode | str = XminMode.fixed(1.0),
          *, centralities=None, proportions: ProportionsSpec | None = None,
          proportions_from=None, thresholds: tuple[int, list[int]] | None = None) -> QuickCentModel:
    """Train QuickCent from exact centralities of a node sample.

    Degree thresholds come from the in-degree distribution of the whole
    graph; everything centrality-based uses the sample only.

    Parameters
    ----------
    g : Digraph
    training_nodes : sequence of int
        At least 10 distinct node ids.
    n : int
        Length of the proportions vector.
    xmin_mode : XminMode or str
        ``fixed:<x>`` or ``fit:<percentile>``.
    centralities : array, optional
        Exact centralities aligned with ``training_nodes``; computed by
        reverse BFS when omitted.
    proportions : ProportionsSpec, optional
        Use a prescribed proportions vector instead of deriving it from
        the sample (``n`` is then ignored).
    proportions_from : array, optional
        Centralities to derive the proportions vector from (for instance
        the whole graph's) once ``x_min`` is known; the training sample by
        default.
    thresholds : (d0, [d1, ..., dn]), optional
        Prescribed degree thresholds, bypassing the quantile rule.

    Raises
    ------
    TrainingError
        The power-law fit or proportions are degenerate.
    ModelConsistencyError
        The band medians do not increase.
    """
    if isinstance(xmin_mode, str):
        xmin_mode = XminMode.parse(xmin_mode)
    nodes = np.asarray(training_nodes, dtype=np.int64).ravel()
    if centralities is not None:
        h_given = np.asarray(centralities, dtype=float).ravel()
        if h_given.size != nodes.size:
            raise InputError("centralities must align with training_nodes")
    nodes, first = np.unique(nodes, return_index=True)
    if nodes.size < 10:
        raise InputError(f"need >= 10 distinct training nodes, have {nodes.size}")
    h = h_given[first] if centralities is not None else harmonic_for(g, nodes)

    try:
        if xmin_mode.kind == "fixed":
            x_min = xmin_mode.value
            alpha = pl.mle_alpha(h, x_min)
        else:
            fitted = pl.fit_xmin(h, xmin_mode.value)
            x_min, alpha = fitted.x_min, fitted.alpha
        law = pl.PowerLawModel(alpha, x_min)
        if proportions is None:
            source = h if proportions_from is None else proportions_from
            proportions = proportions_from_sample(source, x_min, n)
        props = proportions
        cuts = [x_min] + [pl.quantile_value(law, q) for q in props.tail_probs]
    except (InsufficientDataError, DegenerateSampleError, DivergenceError) as exc:
        raise TrainingError(f"power-law fit failed: {exc}") from exc

    if thresholds is None:
        deg_sorted = np.sort(g.in_degree)
        d0 = _degree_quantile(deg_sorted, props.p0)
        d = [_degree_quantile(deg_sorted, p) for p in props.probs]
    else:
        d0, d = int(thresholds[0]), [int(v) for v in thresholds[1]]
        if len(d) != props.n:
            raise InputError("need one prescribed threshold per proportion")

    low = h[g.in_degree[nodes] <= d0]
    f0 = float(np.median(low)) if low.size else float(h.min())

    kept, kept_d, mids = [], [], []
    prev = d0
    for i in range(1, props.n + 1):
        if d[i - 1] <= prev:
            continue
        prev = d[i - 1]
        kept.append(i)
        kept_d.append(d[i - 1])
        mids.append(pl.interval_median(law, cuts[i - 1], cuts[i]))
    medians = [f0] + mids + [pl.open_tail_median(law, cuts[-1])]

    if f0 > medians[1] or any(b <= a for a, b in zip(medians[1:], medians[2:])):
        raise ModelConsistencyError(f"band medians not increasing: {medians}")
    return QuickCentModel(float(alpha), float(x_min), int(d0), tuple(kept_d), tuple(medians),
                          tuple(float(c) for c in cuts), tuple(kept), props)


def clue_scan(model: QuickCentModel, in_degree: int) -> tuple[float, int]:
    """Estimate plus the number of thresholds inspected before stopping."""
    if in_degree < 0:
        raise InputError("in-degree must be non-negative")
    if in_degree <= model.d0:
        return model.medians[0], 1
    for k, d in enumerate(model.thresholds):
        if in_degree <= d:
            return model.medians[k + 1], k + 2
    return model.medians[-1], len(model.thresholds) + 1


def predict(model: QuickCentModel, in_degree: int) -> float:
    return clue_scan(model, in_degree)[0]


def predict_all(model: QuickCentModel, g) -> np.ndarray:
    """Estimates for every node of ``g`` (or for an array of in-degrees)."""
    deg = g.in_degree if isinstance(g, Digraph) else np.asarray(g)
    idx = np.searchsorted(model.boundaries, deg, side="left")
    return np.asarray(model.medians, dtype=float)[idx]


_FIELDS = ("alpha", "x_min", "n", "d0", "thresholds", "bands", "cuts", "medians",
           "p0", "probs", "log_points")


def _fmt(values) -> str:
    return " ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in values)


def save_model(model: QuickCentModel, path) -> None:
    """Write the model as versioned ``key = value`` text (floats via ``repr``)."""
    p = model.proportions
    rows = {
        "alpha": repr(model.alpha),
        "x_min": repr(model.x_min),
        "n": str(model.n),
        "d0": str(model.d0),
        "thresholds": _fmt(model.thresholds),
        "bands": _fmt(model.bands),
        "cuts": _fmt(model.cuts),
        "medians": _fmt(model.medians),
        "p0": repr(p.p0),
        "probs": _fmt(p.probs),
        "log_points": _fmt(p.log_points),
    }
    text = MODEL_HEADER + "\n" + "".join(f"{k} = {rows[k]}\n" for k in _FIELDS)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def load_model(path) -> QuickCentModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ModelFormatError("empty model file", 1)
    header = lines[0].strip()
    if header != MODEL_HEADER:
        if header.startswith("quickcent-model"):
            raise ModelFormatError(f"unsupported model version {header!r}", 1)
        raise ModelFormatError("missing 'quickcent-model v1' header", 1)

    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _FIELDS:
            raise ModelFormatError(f"unrecognised line {line!r}", lineno)
        raw[key] = (value.strip(), lineno)
    missing = [k for k in _FIELDS if k not in raw]
    if missing:
        raise ModelFormatError(f"unexpected end of file, missing {', '.join(missing)}",
                               len(lines) + 1)

    def nums(key, kind):
        text, lineno = raw[key]
        try:
            return [kind(tok) for tok in text.split()]
        except ValueError:
            raise ModelFormatError(f"bad value for {key}: {text!r}", lineno) from None

    def one(key, kind):
        vals = nums(key, kind)
        if len(vals) != 1:
            raise ModelFormatError(f"{key} expects one value", raw[key][1])
        return vals[0]

    n = one("n", int)
    try:
        props = ProportionsSpec(tuple(nums("probs", float)), tuple(nums("log_points", float)),
                                one("p0", float))
        if props.n != n:
            raise InputError(f"n = {n} but {props.n} proportions")
        return QuickCentModel(one("alpha", float), one("x_min", float), one("d0", int),
                              tuple(nums("thresholds", int)), tuple(nums("medians", float)),
                              tuple(nums("cuts", float)), tuple(nums("bands", int)), props)
    except InputError as exc:
        raise ModelFormatError(f"inconsistent model: {exc}", len(lines)) from None
