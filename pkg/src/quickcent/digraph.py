"""Directed graphs, reverse BFS distances and exact harmonic centrality.

Harmonic centrality of ``x`` is the sum of ``1/d(y, x)`` over every other
node ``y`` that can reach ``x``; unreachable nodes add nothing.  It is the
ground truth every estimator in this package is scored against.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numba
import numpy as np

from .exceptions import InputError

__all__ = [
    "UNREACHABLE",
    "Digraph",
    "from_edge_pairs",
    "read_edge_list",
    "write_edge_list",
    "reverse_bfs_distances",
    "harmonic_all",
    "harmonic_for",
]

#: Distance sentinel for nodes that cannot reach the target.
UNREACHABLE = np.iinfo(np.int64).max

_NODES_DIRECTIVE = re.compile(r"^[#%]\s*nodes\s*:\s*(\d+)\s*$")


@dataclass(frozen=True, eq=False)
class Digraph:
    """Immutable directed multigraph on dense node ids ``0..n_nodes-1``.

    Arcs are kept exactly as given (duplicates included) so that degrees
    count arcs; shortest-path searches treat parallel arcs as one edge.
    """

    n_nodes: int
    sources: np.ndarray = field(repr=False)
    targets: np.ndarray = field(repr=False)

    def __post_init__(self):
        src = np.ascontiguousarray(self.sources, dtype=np.int64)
        dst = np.ascontiguousarray(self.targets, dtype=np.int64)
        if src.shape != dst.shape or src.ndim != 1:
            raise InputError("sources and targets must be 1-d arrays of equal length")
        if self.n_nodes < 0:
            raise InputError("n_nodes must be non-negative")
        if src.size and (min(src.min(), dst.min()) < 0
                         or max(src.max(), dst.max()) >= self.n_nodes):
            raise InputError("arc endpoint outside [0, n_nodes)")
        src.flags.writeable = False
        dst.flags.writeable = False
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        object.__setattr__(self, "sources", src)
        object.__setattr__(self, "targets", dst)

    @property
    def n_arcs(self) -> int:
        return int(self.sources.size)

    @property
    def arcs(self) -> list[tuple[int, int]]:
        return list(zip(self.sources.tolist(), self.targets.tolist()))

    @cached_property
    def in_degree(self) -> np.ndarray:
        deg = np.bincount(self.targets, minlength=self.n_nodes).astype(np.int64)
        deg.flags.writeable = False
        return deg

    @cached_property
    def out_degree(self) -> np.ndarray:
        deg = np.bincount(self.sources, minlength=self.n_nodes).astype(np.int64)
        deg.flags.writeable = False
        return deg

    @cached_property
    def reverse_adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, indices)`` listing the distinct in-neighbours of each node."""
        if self.n_arcs:
            key = np.unique(self.targets * self.n_nodes + self.sources)
            dst, src = np.divmod(key, self.n_nodes)
        else:
            dst = src = np.zeros(0, dtype=np.int64)
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=self.n_nodes), out=indptr[1:])
        return indptr, np.ascontiguousarray(src, dtype=np.int64)

    def with_arcs(self, sources, targets) -> "Digraph":
        return Digraph(self.n_nodes, np.asarray(sources), np.asarray(targets))

    def relabel(self, perm) -> "Digraph":
        """Graph where node ``i`` becomes ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        return Digraph(self.n_nodes, perm[self.sources], perm[self.targets])


def from_edge_pairs(pairs, allow_self_loops: bool = False) -> Digraph:
    """Build a digraph from integer-labelled arcs.

    Labels may be sparse; they are mapped to dense ids in order of first
    appearance (source before target within a pair).  Self-loops are
    dropped unless ``allow_self_loops`` is set.  Duplicate arcs are kept.
    """
    labels: dict[int, int] = {}
    src, dst = [], []
    for pair in pairs:
        u, v = int(pair[0]), int(pair[1])
        if u < 0 or v < 0:
            raise InputError(f"negative node label in arc ({u}, {v})")
        iu = labels.setdefault(u, len(labels))
        iv = labels.setdefault(v, len(labels))
        if iu == iv and not allow_self_loops:
            continue
        src.append(iu)
        dst.append(iv)
    return Digraph(len(labels), np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))


def read_edge_list(path, allow_self_loops: bool = False) -> Digraph:
    """Read a whitespace separated edge list (KONECT style).

    Lines starting with ``%`` or ``#`` are comments and columns beyond the
    second are ignored.  A ``# nodes: N`` comment, as written by
    :func:`write_edge_list`, marks the labels as dense ids so isolated
    nodes survive a round trip.
    """
    n_declared = None
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped[0] in "%#":
                m = _NODES_DIRECTIVE.match(stripped)
                if m:
                    n_declared = int(m.group(1))
                continue
            cols = stripped.split()
            if len(cols) < 2:
                raise InputError(f"{path}:{lineno}: expected 'source target'")
            try:
                pairs.append((int(cols[0]), int(cols[1])))
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-integer node label") from None
    if n_declared is None:
        return from_edge_pairs(pairs, allow_self_loops)

    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= n_declared):
        raise InputError(f"{path}: label outside declared node range [0, {n_declared})")
    if not allow_self_loops:
        arr = arr[arr[:, 0] != arr[:, 1]]
    return Digraph(n_declared, arr[:, 0], arr[:, 1])


def write_edge_list(g: Digraph, path) -> None:
    lines = [f"# nodes: {g.n_nodes}\n"]
    lines.extend(f"{u} {v}\n" for u, v in zip(g.sources.tolist(), g.targets.tolist()))
    Path(path).write_text("".join(lines), encoding="utf-8", newline="\n")


@numba.njit(cache=True)
def _bfs_layers(indptr, indices, source, dist, queue):
    # dist must be filled with -1 on entry; returns the number of visited nodes
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        x = queue[head]
        head += 1
        nd = dist[x] + 1
        for k in range(indptr[x], indptr[x + 1]):
            y = indices[k]
            if dist[y] < 0:
                dist[y] = nd
                queue[tail] = y
                tail += 1
    return tail


@numba.njit(cache=True)
def _harmonic_kernel(indptr, indices, nodes, n_nodes):
    out = np.zeros(nodes.size)
    dist = np.full(n_nodes, -1, dtype=np.int64)
    queue = np.empty(n_nodes, dtype=np.int64)
    for i in range(nodes.size):
        visited = _bfs_layers(indptr, indices, nodes[i], dist, queue)
        h = 0.0
        layer, count = 1, 0
        for k in range(1, visited):
            d = dist[queue[k]]
            if d != layer:
                h += count / layer
                layer, count = d, 0
            count += 1
        if count:
            h += count / layer
        out[i] = h
        for k in range(visited):
            dist[queue[k]] = -1
    return out


def reverse_bfs_distances(g: Digraph, target: int) -> np.ndarray:
    """Hop distance ``d(y, target)`` for every node ``y``.

    Unreachable nodes get :data:`UNREACHABLE`.
    """
    if not 0 <= target < g.n_nodes:
        raise InputError(f"target {target} outside [0, {g.n_nodes})")
    indptr, indices = g.reverse_adjacency
    dist = np.full(g.n_nodes, -1, dtype=np.int64)
    queue = np.empty(g.n_nodes, dtype=np.int64)
    _bfs_layers(indptr, indices, int(target), dist, queue)
    dist[dist < 0] = UNREACHABLE
    return dist


def harmonic_for(g: Digraph, nodes) -> np.ndarray:
    """Exact harmonic centrality of the given nodes only (one reverse BFS each)."""
    nodes = np.ascontiguousarray(nodes, dtype=np.int64)
    if nodes.size and (nodes.min() < 0 or nodes.max() >= g.n_nodes):
        raise InputError("node id outside graph")
    if g.n_nodes == 0 or nodes.size == 0:
        return np.zeros(nodes.size)
    indptr, indices = g.reverse_adjacency
    return _harmonic_kernel(indptr, indices, nodes, g.n_nodes)


def harmonic_all(g: Digraph) -> np.ndarray:
    """Exact harmonic centrality of every node, ``O(n (n + m))``."""
    return harmonic_for(g, np.arange(g.n_nodes, dtype=np.int64))
