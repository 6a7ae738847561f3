"""Synthetic digraphs and null models.

All randomness comes from :class:`numpy.random.Generator` on the PCG64 bit
generator, seeded explicitly.  Random numbers are drawn in bulk, in a fixed
order, before any graph logic runs, so a seed maps to the same graph on
every platform that implements IEEE-754 double arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .digraph import Digraph
from .exceptions import InputError

__all__ = ["PaConfig", "ErConfig", "make_rng", "gen_pa", "gen_er", "rewire_degree_preserving"]


def make_rng(seed) -> np.random.Generator:
    """The package's RNG: PCG64 seeded through :class:`numpy.random.SeedSequence`."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if seed is None:
        raise InputError("an explicit seed is required")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class PaConfig:
    """Generalised preferential attachment.

    A node with in-degree ``k`` attracts each new arc with weight
    ``k**beta + zero_appeal``.
    """

    n_nodes: int
    beta: float = 1.0
    zero_appeal: float = 1.0
    arcs_per_node: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 1:
            raise InputError("n_nodes must be >= 1")
        if self.arcs_per_node < 1:
            raise InputError("arcs_per_node must be >= 1")
        if not self.zero_appeal > 0:
            raise InputError("zero_appeal must be > 0")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise InputError("beta must be a finite non-negative number")


@dataclass(frozen=True)
class ErConfig:
    """Directed Erdos-Renyi graph: every ordered pair is an arc with probability ``p``."""

    n_nodes: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 0:
            raise InputError("n_nodes must be >= 0")
        if not 0.0 <= self.p <= 1.0:
            raise InputError("p must lie in [0, 1]")

    @classmethod
    def from_mean_degree(cls, n_nodes: int, mean_in_degree: float, seed: int = 0) -> "ErConfig":
        """Config whose expected in-degree is ``mean_in_degree = p (N - 1)``."""
        return cls(n_nodes, mean_in_degree / (n_nodes - 1), seed)


@numba.njit(cache=True)
def _fenwick_add(tree, i, delta):
    n = tree.size
    i += 1
    while i <= n:
        tree[i - 1] += delta
        i += i & (-i)


@numba.njit(cache=True)
def _fenwick_find(tree, value):
    # largest prefix whose sum is <= value, i.e. the 0-based index of the
    # first element where the running sum exceeds value
    n = tree.size
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step:
        nxt = pos + step
        if nxt <= n and tree[nxt - 1] <= value:
            pos = nxt
            value -= tree[nxt - 1]
        step //= 2
    return pos


@numba.njit(cache=True)
def _pa_kernel(n, beta, appeal, m, uniforms):
    n_arcs = 0
    for t in range(1, n):
        n_arcs += min(m, t)
    src = np.empty(n_arcs, dtype=np.int64)
    dst = np.empty(n_arcs, dtype=np.int64)
    tree = np.zeros(n)
    weight = np.zeros(n)
    indeg = np.zeros(n, dtype=np.int64)
    chosen = np.empty(m, dtype=np.int64)
    base = 0.0 ** beta + appeal

    weight[0] = base
    _fenwick_add(tree, 0, base)
    total = base
    k = 0
    u = 0
    for t in range(1, n):
        n_new = min(m, t)
        for a in range(n_new):
            j = _fenwick_find(tree, uniforms[u] * total)
            u += 1
            if j >= t:
                j = t - 1
            while weight[j] <= 0.0:
                j -= 1
            chosen[a] = j
            # no repeated target within one arrival
            _fenwick_add(tree, j, -weight[j])
            total -= weight[j]
            weight[j] = 0.0
            src[k] = t
            dst[k] = j
            k += 1
        for a in range(n_new):
            j = chosen[a]
            indeg[j] += 1
            w = float(indeg[j]) ** beta + appeal
            weight[j] = w
            _fenwick_add(tree, j, w)
            total += w
        weight[t] = base
        _fenwick_add(tree, t, base)
        total += base
        if t % 4096 == 0:
            # bound drift of the running float total
            total = 0.0
            for i in range(t + 1):
                total += weight[i]
    return src, dst


def gen_pa(cfg: PaConfig) -> Digraph:
    """Grow a preferential attachment digraph.

    Starts from a single node.  Node ``t`` then emits ``arcs_per_node`` arcs
    (fewer while ``t`` is smaller) towards distinct older nodes, each chosen
    with probability proportional to ``in_degree**beta + zero_appeal``.
    Weights are updated after all arcs of an arrival are placed.
    """
    rng = make_rng(cfg.seed)
    n, m = int(cfg.n_nodes), int(cfg.arcs_per_node)
    n_draws = sum(min(m, t) for t in range(1, n)) if m > 1 else n - 1
    uniforms = rng.random(n_draws)
    src, dst = _pa_kernel(n, float(cfg.beta), float(cfg.zero_appeal), m, uniforms)
    return Digraph(n, src, dst)


def gen_er(cfg: ErConfig) -> Digraph:
    """Directed G(n, p); arcs are emitted in row-major ``(u, v)`` order."""
    rng = make_rng(cfg.seed)
    n = int(cfg.n_nodes)
    src, dst = [], []
    for u in range(n):
        row = rng.random(n)
        row[u] = np.inf
        v = np.flatnonzero(row < cfg.p)
        src.append(np.full(v.size, u, dtype=np.int64))
        dst.append(v)
    if n == 0:
        return Digraph(0, np.zeros(0, np.int64), np.zeros(0, np.int64))
    return Digraph(n, np.concatenate(src), np.concatenate(dst))


def rewire_degree_preserving(g: Digraph, n_swap_attempts: int, seed) -> Digraph:
    """Degree-preserving arc randomisation.

    Each attempt picks two distinct arcs ``(a, b)`` and ``(c, d)`` uniformly
    and replaces them by ``(a, d)`` and ``(c, b)`` unless that would create a
    self-loop or an arc already present.  Rejected attempts still count.
    """
    m = g.n_arcs
    if m < 2:
        raise InputError("degree-preserving rewiring needs at least 2 arcs")
    if n_swap_attempts < 0:
        raise InputError("n_swap_attempts must be >= 0")
    rng = make_rng(seed)
    first = rng.integers(0, m, size=n_swap_attempts)
    second = rng.integers(0, m - 1, size=n_swap_attempts)
    second += second >= first

    n = g.n_nodes
    src = g.sources.copy()
    dst = g.targets.copy()
    present: dict[int, int] = {}
    for key in (src * n + dst).tolist():
        present[key] = present.get(key, 0) + 1

    for i, j in zip(first.tolist(), second.tolist()):
        a, b = int(src[i]), int(dst[i])
        c, d = int(src[j]), int(dst[j])
        if a == d or c == b:
            continue
        new1, new2 = a * n + d, c * n + b
        if new1 in present or new2 in present:
            continue
        for old in (a * n + b, c * n + d):
            left = present[old] - 1
            if left:
                present[old] = left
            else:
                del present[old]
        present[new1] = 1
        present[new2] = 1
        dst[i], dst[j] = d, b
    return g.with_arcs(src, dst)
