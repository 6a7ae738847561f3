"""Reference regressors of centrality on in-degree: OLS line and a CART tree."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import InputError, InsufficientDataError

__all__ = ["OlsModel", "TreeNode", "TreeModel", "ols_fit", "tree_fit", "baseline_predict", "best_split"]


@dataclass(frozen=True)
class OlsModel:
    slope: float
    intercept: float

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


@dataclass(frozen=True)
class TreeNode:
    """Leaf when ``threshold`` is None; otherwise ``x <= threshold`` goes left."""

    value: float
    n: int
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.threshold is None


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    min_leaf: int
    max_depth: int

    def leaves(self) -> list[TreeNode]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend((node.right, node.left))
        return out

    @cached_property
    def _steps(self):
        # a single-feature tree is a step function; list (breakpoints, values)
        cuts, vals = [], []

        def walk(node):
            if node.is_leaf:
                vals.append(node.value)
                return
            walk(node.left)
            cuts.append(node.threshold)
            walk(node.right)

        walk(self.root)
        return np.array(cuts, dtype=float), np.array(vals, dtype=float)

    def predict(self, x):
        cuts, vals = self._steps
        x = np.asarray(x, dtype=float)
        return vals[np.searchsorted(cuts, x, side="left")]


def _pairs(pairs):
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("expected a sequence of (degree, centrality) pairs")
    return arr[:, 0], arr[:, 1]


def ols_fit(pairs) -> OlsModel:
    x, y = _pairs(pairs)
    if x.size < 2:
        raise InsufficientDataError("OLS needs at least 2 pairs")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise InputError("OLS undefined for a constant predictor")
    slope = float(xc @ (y - y.mean())) / sxx
    return OlsModel(slope, float(y.mean() - slope * x.mean()))


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """Threshold minimising the summed squared deviation of the two children.

    Returns ``(threshold, sse)`` or ``None`` when no admissible split exists.
    Thresholds sit halfway between consecutive distinct ``x`` values; ties in
    SSE resolve to the smallest threshold.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = xs.size
    csum = np.cumsum(ys)
    csq = np.cumsum(ys * ys)
    nl = np.arange(1, n)
    # split after position i (left = xs[:i+1]) only between distinct values
    ok = (xs[1:] != xs[:-1]) & (nl >= min_leaf) & (n - nl >= min_leaf)
    if not ok.any():
        return None
    sl, ql = csum[:-1], csq[:-1]
    sr, qr = csum[-1] - sl, csq[-1] - ql
    sse = (ql - sl * sl / nl) + (qr - sr * sr / (n - nl))
    sse = np.where(ok, sse, np.inf)
    i = int(np.argmin(sse))
    return 0.5 * (xs[i] + xs[i + 1]), float(sse[i])


def _grow(x, y, depth, min_leaf, max_depth):
    mean = float(y.mean())
    node = TreeNode(mean, int(y.size))
    if depth >= max_depth or y.size < 2 * min_leaf or np.all(y == y[0]):
        return node
    found = best_split(x, y, min_leaf)
    if found is None:
        return node
    thr, sse = found
    parent_sse = float(((y - mean) ** 2).sum())
    if not sse < parent_sse:
        return node
    mask = x <= thr
    return TreeNode(mean, int(y.size), float(thr),
                    _grow(x[mask], y[mask], depth + 1, min_leaf, max_depth),
                    _grow(x[~mask], y[~mask], depth + 1, min_leaf, max_depth))


def tree_fit(pairs, min_leaf: int = 2, max_depth: int = 20) -> TreeModel:
    """Greedy variance-reduction regression tree without pruning."""
    if min_leaf < 1 or max_depth < 0:
        raise InputError("min_leaf must be >= 1 and max_depth >= 0")
    x, y = _pairs(pairs)
    if x.size < 2 * min_leaf or x.size == 0:
        raise InsufficientDataError(f"need at least {2 * min_leaf} pairs")
    return TreeModel(_grow(x, y, 0, min_leaf, max_depth), min_leaf, max_depth)


def baseline_predict(model, in_degree):
    """Evaluate an :class:`OlsModel` or :class:`TreeModel`; scalars stay scalars."""
    out = model.predict(in_degree)
    return float(out) if np.ndim(out) == 0 else out
