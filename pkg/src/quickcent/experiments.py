"""Replicated experiment protocols and their CSV reports.

Every scenario is a loop over replicates.  Replicate ``r`` derives its own
integer seed from ``SeedSequence(cfg.seed)``; the graph, the training
sample, the rewiring and the bootstrap each draw from a separate stream of
that seed, so replicates are independent jobs that can run in any order or
on any number of worker processes and still produce the same report.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import powerlaw as pl
from .baselines import ols_fit, tree_fit
from .digraph import Digraph, harmonic_all, read_edge_list
from .estimator import XminMode, predict_all, proportions_from_sample, train
from .exceptions import InputError, QuickCentError
from .generators import ErConfig, PaConfig, gen_er, gen_pa, make_rng, rewire_degree_preserving
from .stats import SummaryStats, mae, spearman_log, summarize

__all__ = [
    "SCENARIOS",
    "CSV_COLUMNS",
    "TABLE3_ER_ROWS",
    "ExperimentConfig",
    "Record",
    "ExperimentReport",
    "run",
    "run_compare",
    "run_robustness",
    "run_randomize",
    "run_er_null",
    "run_assumptions",
    "run_empirical",
    "emit_csv",
    "parse_csv",
    "replicate_seeds",
]

SCENARIOS = ("compare", "robustness", "randomize", "er_null", "assumptions", "empirical")

CSV_COLUMNS = ("scenario", "replicate", "method", "phase", "mae", "alpha_hat", "xmin_hat",
               "spearman", "pvalue", "elapsed_ms", "seed", "spearman_p", "error")

#: (N, mean in-degree) of the two control networks the ER null model copies.
TABLE3_ER_ROWS = {"moreno_blogs": (990, 19.21), "subelj_jung-j": (2208, 62.81)}

# stream ids spawned from a replicate seed
_GRAPH, _SAMPLE, _REWIRE, _BOOT = 0, 1, 2, 3


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.

    ``graph`` is a :class:`PaConfig`, an :class:`ErConfig` (their ``seed``
    is replaced per replicate) or the path of an edge-list file.

    ``proportions_source`` picks the centralities the QuickCent proportions
    vector is computed from: ``"graph"`` (all nodes, the default) or
    ``"sample"`` (training nodes only).
    """

    scenario: str
    graph: PaConfig | ErConfig | str | Path
    replicates: int = 100
    train_fraction: float = 0.1
    n_proportions: int = 8
    xmin_mode: XminMode = field(default_factory=XminMode.fixed)
    seed: int = 0
    fractions: tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(1, 11))
    n_swaps: int = 10000
    n_boot: int = 100
    fit_percentile: float = 100.0
    n_grid: tuple[int, ...] = (1, 2, 4, 8)
    proportions_source: str = "graph"
    methods: tuple[str, ...] = ("QC", "L", "T")
    workers: int = 1
    record_timing: bool = False

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise InputError(f"unknown scenario {self.scenario!r}")
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if not 0.0 < self.train_fraction <= 1.0:
            raise InputError("train_fraction must lie in (0, 1]")
        if any(not 0.0 < f <= 1.0 for f in self.fractions) or not self.fractions:
            raise InputError("fractions must be non-empty and lie in (0, 1]")
        if self.n_proportions < 1 or any(k < 1 for k in self.n_grid):
            raise InputError("proportions vector length must be >= 1")
        if self.proportions_source not in ("graph", "sample"):
            raise InputError("proportions_source must be 'graph' or 'sample'")
        unknown = set(self.methods) - {"QC", "L", "T"}
        if unknown:
            raise InputError(f"unknown methods {sorted(unknown)}")
        if self.workers < 1:
            raise InputError("workers must be >= 1")
        if self.n_swaps < 0 or self.n_boot < 1:
            raise InputError("n_swaps must be >= 0 and n_boot >= 1")
        if isinstance(self.xmin_mode, str):
            object.__setattr__(self, "xmin_mode", XminMode.parse(self.xmin_mode))

    @classmethod
    def default(cls, scenario: str, graph=None, **overrides) -> "ExperimentConfig":
        """Config with the published settings of ``scenario``.

        ``graph`` defaults to a 10^4-node PA graph with ``beta = 1`` (1000
        nodes for ``randomize``); ``er_null`` defaults to the moreno_blogs
        row of the control-network table.
        """
        base: dict = {}
        if scenario == "randomize":
            graph = graph or PaConfig(1000)
            base = dict(train_fraction=0.3)
        elif scenario == "er_null":
            if graph is None:
                n, mean = TABLE3_ER_ROWS["moreno_blogs"]
                graph = ErConfig.from_mean_degree(n, mean)
            base = dict(train_fraction=0.3, xmin_mode=XminMode.fitted(20.0))
        elif scenario == "empirical":
            if graph is None:
                raise InputError("the empirical scenario needs an edge-list path")
            base = dict(n_proportions=2, xmin_mode=XminMode.fitted(20.0))
        elif graph is None:
            graph = PaConfig(10_000)
        base.update(overrides)
        return cls(scenario, graph, **base)

    @property
    def method_names(self) -> tuple[str, ...]:
        if self.scenario == "er_null":
            qc = tuple(f"QC{k}" for k in self.n_grid) if "QC" in self.methods else ()
            return qc + tuple(m for m in self.methods if m != "QC")
        if self.scenario == "robustness":
            return ("QC",)
        if self.scenario == "assumptions":
            return ("PL", "PL1")
        return self.methods

    @property
    def phases(self) -> tuple[str, ...]:
        if self.scenario == "robustness":
            return tuple(f"{f:g}" for f in self.fractions)
        if self.scenario == "randomize":
            return ("PL", "RPL")
        return ("",)


@dataclass(frozen=True)
class Record:
    """One CSV row; fields a scenario does not produce stay ``None``."""

    scenario: str
    replicate: int
    method: str
    phase: str = ""
    mae: float | None = None
    alpha_hat: float | None = None
    xmin_hat: float | None = None
    spearman: float | None = None
    pvalue: float | None = None
    elapsed_ms: float | None = None
    seed: int | None = None
    spearman_p: float | None = None
    error: str = ""


@dataclass(frozen=True)
class ExperimentReport:
    scenario: str
    records: tuple[Record, ...]

    def values(self, column: str, method: str, phase: str = "") -> np.ndarray:
        """Non-empty values of ``column`` for one method and phase."""
        out = [getattr(r, column) for r in self.records
               if r.method == method and r.phase == phase and getattr(r, column) is not None]
        return np.asarray(out, dtype=float)

    def summary(self, method: str, phase: str = "", column: str = "mae") -> SummaryStats:
        return summarize(self.values(column, method, phase))

    def summaries(self, column: str = "mae") -> dict[tuple[str, str], SummaryStats]:
        """Summary per (method, phase) over the records that carry ``column``."""
        keys = dict.fromkeys((r.method, r.phase) for r in self.records)
        out = {}
        for method, phase in keys:
            v = self.values(column, method, phase)
            if v.size:
                out[(method, phase)] = summarize(v)
        return out

    def failures(self) -> list[Record]:
        return [r for r in self.records if r.error]

    def best_method(self, prefix: str = "QC", phase: str = "") -> str:
        """Method starting with ``prefix`` with the lowest median MAE."""
        stats = {m: s for (m, ph), s in self.summaries().items()
                 if m.startswith(prefix) and ph == phase}
        if not stats:
            raise InputError(f"no successful {prefix} records")
        return min(stats, key=lambda m: (stats[m].median, m))


def replicate_seeds(seed, replicates: int) -> list[int]:
    """Integer seed of every replicate, spawned from ``SeedSequence(seed)``."""
    children = np.random.SeedSequence(seed).spawn(replicates)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def _stream(rep_seed: int, stream: int):
    return [rep_seed, stream]


@lru_cache(maxsize=4)
def _load_file_graph(path: str) -> tuple[Digraph, np.ndarray]:
    g = read_edge_list(path)
    if g.n_nodes == 0:
        raise InputError(f"{path}: empty graph")
    return g, harmonic_all(g)


def _graph_and_truth(cfg: ExperimentConfig, rep_seed: int) -> tuple[Digraph, np.ndarray]:
    src = cfg.graph
    if isinstance(src, PaConfig):
        g = gen_pa(replace(src, seed=_stream(rep_seed, _GRAPH)))
    elif isinstance(src, ErConfig):
        g = gen_er(replace(src, seed=_stream(rep_seed, _GRAPH)))
    else:
        return _load_file_graph(str(src))
    return g, harmonic_all(g)


def _sample_nodes(rng, n_nodes: int, fraction: float) -> np.ndarray:
    k = max(1, int(round(fraction * n_nodes)))
    return np.sort(rng.choice(n_nodes, size=k, replace=False))


def _spearman(g: Digraph, h: np.ndarray) -> tuple[float | None, float | None]:
    try:
        return spearman_log(g.in_degree, h)
    except QuickCentError:
        return None, None


def _fit_methods(cfg, g, h, nodes, methods, base: dict) -> list[Record]:
    """Train each method on ``nodes`` and score it on every node of ``g``."""
    deg = g.in_degree
    pairs = np.column_stack((deg[nodes], h[nodes]))
    out = []
    for name in methods:
        rec = dict(base, method=name)
        try:
            if name.startswith("QC"):
                n = int(name[2:]) if len(name) > 2 else cfg.n_proportions
                kw = {}
                if cfg.proportions_source == "graph":
                    if cfg.xmin_mode.kind == "fixed":
                        # computed before the timer starts
                        kw["proportions"] = proportions_from_sample(h, cfg.xmin_mode.value, n)
                    else:
                        kw["proportions_from"] = h
                t0 = time.perf_counter()
                model = train(g, nodes, n, cfg.xmin_mode, centralities=h[nodes], **kw)
                est = predict_all(model, deg)
                t1 = time.perf_counter()
                rec.update(alpha_hat=model.alpha, xmin_hat=model.x_min)
            else:
                t0 = time.perf_counter()
                model = ols_fit(pairs) if name == "L" else tree_fit(pairs)
                est = model.predict(deg)
                t1 = time.perf_counter()
            rec["mae"] = mae(h, est)
            if cfg.record_timing:
                rec["elapsed_ms"] = 1000.0 * (t1 - t0)
        except QuickCentError as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
        out.append(Record(**rec))
    return out


def _compare_replicate(cfg, r, rep_seed) -> list[Record]:
    g, h = _graph_and_truth(cfg, rep_seed)
    rho, rho_p = _spearman(g, h)
    nodes = _sample_nodes(make_rng(_stream(rep_seed, _SAMPLE)), g.n_nodes, cfg.train_fraction)
    base = dict(scenario=cfg.scenario, replicate=r, seed=rep_seed, spearman=rho, spearman_p=rho_p)
    return _fit_methods(cfg, g, h, nodes, cfg.method_names, base)


def _robustness_replicate(cfg, r, rep_seed) -> list[Record]:
    g, h = _graph_and_truth(cfg, rep_seed)
    rng = make_rng(_stream(rep_seed, _SAMPLE))
    out = []
    for frac, phase in zip(cfg.fractions, cfg.phases):
        nodes = _sample_nodes(rng, g.n_nodes, frac)
        base = dict(scenario=cfg.scenario, replicate=r, seed=rep_seed, phase=phase)
        out += _fit_methods(cfg, g, h, nodes, ("QC",), base)
    return out


def _randomize_replicate(cfg, r, rep_seed) -> list[Record]:
    g, h = _graph_and_truth(cfg, rep_seed)
    # one training sample shared by both phases
    nodes = _sample_nodes(make_rng(_stream(rep_seed, _SAMPLE)), g.n_nodes, cfg.train_fraction)
    if cfg.n_swaps:
        g2 = rewire_degree_preserving(g, cfg.n_swaps, _stream(rep_seed, _REWIRE))
        h2 = harmonic_all(g2)
    else:
        g2, h2 = g, h
    out = []
    for phase, gg, hh in (("PL", g, h), ("RPL", g2, h2)):
        rho, rho_p = _spearman(gg, hh)
        base = dict(scenario=cfg.scenario, replicate=r, seed=rep_seed, phase=phase,
                    spearman=rho, spearman_p=rho_p)
        out += _fit_methods(cfg, gg, hh, nodes, cfg.method_names, base)
    return out


def _assumptions_replicate(cfg, r, rep_seed) -> list[Record]:
    g, h = _graph_and_truth(cfg, rep_seed)
    rho, rho_p = _spearman(g, h)
    base = dict(scenario=cfg.scenario, replicate=r, seed=rep_seed, spearman=rho, spearman_p=rho_p)
    out = []
    for name in ("PL", "PL1"):
        rec = dict(base, method=name)
        try:
            fit = pl.fit_xmin(h, cfg.fit_percentile) if name == "PL" else pl.fixed_fit(h, 1.0)
            rec.update(alpha_hat=fit.alpha, xmin_hat=fit.x_min)
            rec["pvalue"] = pl.bootstrap_pvalue(h, fit, cfg.n_boot, _stream(rep_seed, _BOOT))
        except QuickCentError as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
        out.append(Record(**rec))
    return out


_REPLICATE = {
    "compare": _compare_replicate,
    "empirical": _compare_replicate,
    "er_null": _compare_replicate,
    "robustness": _robustness_replicate,
    "randomize": _randomize_replicate,
    "assumptions": _assumptions_replicate,
}


def _run_one(cfg: ExperimentConfig, r: int, rep_seed: int) -> list[Record]:
    try:
        return _REPLICATE[cfg.scenario](cfg, r, rep_seed)
    except QuickCentError as exc:
        raise type(exc)(f"{cfg.scenario} replicate {r}: {exc}") from exc


def run(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every replicate of ``cfg`` (on ``cfg.workers`` processes)."""
    seeds = replicate_seeds(cfg.seed, cfg.replicates)
    jobs = list(enumerate(seeds))
    if cfg.workers == 1:
        parts = [_run_one(cfg, r, s) for r, s in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_run_one, [cfg] * len(jobs), *zip(*jobs)))
    records = tuple(rec for part in parts for rec in part)
    return ExperimentReport(cfg.scenario, records)


def _check(cfg: ExperimentConfig, scenario: str) -> ExperimentConfig:
    if cfg.scenario != scenario:
        raise InputError(f"expected a {scenario!r} config, got {cfg.scenario!r}")
    return cfg


def run_compare(cfg: ExperimentConfig) -> ExperimentReport:
    """QuickCent against the OLS line and the regression tree."""
    return run(_check(cfg, "compare"))


def run_robustness(cfg: ExperimentConfig) -> ExperimentReport:
    """QuickCent MAE over a sweep of training fractions (one phase per fraction)."""
    _check(cfg, "robustness")
    return run(replace(cfg, xmin_mode=XminMode.fixed(1.0)))


def run_randomize(cfg: ExperimentConfig) -> ExperimentReport:
    """All methods before (``PL``) and after (``RPL``) degree-preserving rewiring."""
    return run(_check(cfg, "randomize"))


def run_er_null(cfg: ExperimentConfig) -> ExperimentReport:
    """All methods on Erdos-Renyi digraphs; QuickCent once per length in ``n_grid``."""
    _check(cfg, "er_null")
    if cfg.xmin_mode.kind != "fitted":
        raise InputError("the ER null model needs a fitted x_min")
    return run(cfg)


def run_assumptions(cfg: ExperimentConfig) -> ExperimentReport:
    """Power-law fit, bootstrap p-value and log-log Spearman per replicate.

    ``PL`` rows hold the KS-fitted lower limit and exponent, ``PL1`` rows the
    exponent with ``x_min = 1``; each carries the p-value of its own fit.
    """
    return run(_check(cfg, "assumptions"))


def run_empirical(cfg: ExperimentConfig) -> ExperimentReport:
    """Compare protocol on a fixed graph read from an edge list."""
    _check(cfg, "empirical")
    if isinstance(cfg.graph, (PaConfig, ErConfig)):
        raise InputError("the empirical scenario needs an edge-list path")
    return run(cfg)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(report: ExperimentReport, path=None) -> str:
    """Serialise ``report``; also written to ``path`` when given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in report.records:
        writer.writerow([_cell(getattr(rec, c)) for c in CSV_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text


_TYPES = {f.name: f.type for f in fields(Record)}


def _parse_cell(name: str, text: str):
    kind = _TYPES[name]
    if kind == "str":
        return text
    if text == "":
        return None
    if kind.startswith("int"):
        return int(text)
    return float(text)


def parse_csv(source) -> ExperimentReport:
    """Inverse of :func:`emit_csv`; ``source`` is CSV text or a path."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        source = Path(source).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(source)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise InputError("missing or unexpected CSV header")
    records = []
    for row in rows[1:]:
        if len(row) != len(CSV_COLUMNS):
            raise InputError(f"expected {len(CSV_COLUMNS)} columns, got {len(row)}")
        records.append(Record(**{c: _parse_cell(c, v) for c, v in zip(CSV_COLUMNS, row)}))
    scenario = records[0].scenario if records else ""
    return ExperimentReport(scenario, tuple(records))
