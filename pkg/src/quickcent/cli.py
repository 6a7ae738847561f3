"""``quickcent`` command line.

Exit status is 0 on success, 1 when the library reports an error and 2 on
bad usage.  Every command that draws random numbers requires ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import powerlaw as pl
from .digraph import harmonic_all, read_edge_list, write_edge_list
from .estimator import XminMode, load_model, predict_all, save_model, train
from .exceptions import QuickCentError
from .generators import ErConfig, PaConfig, gen_er, gen_pa, make_rng
from .stats import summarize

__all__ = ["main", "build_parser"]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _fraction(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {v}")
    return v


def _probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0.0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _xmin(text: str) -> XminMode:
    try:
        return XminMode.parse(text)
    except QuickCentError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _write_text(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(v) -> str:
    v = float(v)
    return repr(int(v)) if v.is_integer() else repr(v)


# commands

def cmd_gen(args) -> int:
    if args.model == "pa":
        g = gen_pa(PaConfig(args.n, args.beta, args.zero_appeal, args.arcs_per_node, args.seed))
    else:
        cfg = (ErConfig(args.n, args.p, args.seed) if args.p is not None
               else ErConfig.from_mean_degree(args.n, args.mean_degree, args.seed))
        g = gen_er(cfg)
    write_edge_list(g, args.out)
    print(f"nodes={g.n_nodes} arcs={g.n_arcs}")
    return 0


def cmd_exact(args) -> int:
    g = read_edge_list(args.input)
    h = harmonic_all(g)
    rows = ((v, int(d), _num(x)) for v, (d, x) in enumerate(zip(g.in_degree, h)))
    _write_text(_csv_text(("node", "in_degree", "harmonic"), rows), args.out)
    return 0


def cmd_fit(args) -> int:
    g = read_edge_list(args.input)
    h = harmonic_all(g)
    mode = args.xmin
    fit = pl.fixed_fit(h, mode.value) if mode.kind == "fixed" else pl.fit_xmin(h, mode.value)
    lines = [f"x_min = {fit.x_min!r}", f"alpha = {fit.alpha!r}",
             f"ks_distance = {fit.ks_distance!r}", f"n_tail = {fit.n_tail}"]
    if args.n_boot:
        if args.seed is None:
            raise _Usage("--seed is required with --n-boot")
        lines.append(f"pvalue = {pl.bootstrap_pvalue(h, fit, args.n_boot, args.seed)!r}")
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def cmd_train(args) -> int:
    g = read_edge_list(args.input)
    rng = make_rng(args.seed)
    k = max(1, int(round(args.train_frac * g.n_nodes)))
    nodes = np.sort(rng.choice(g.n_nodes, size=k, replace=False)) if g.n_nodes else []
    model = train(g, nodes, args.n_props, args.xmin)
    save_model(model, args.out)
    print(f"alpha={model.alpha!r} x_min={model.x_min!r} bands={model.n_effective}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    g = read_edge_list(args.input)
    est = predict_all(model, g)
    rows = ((v, int(d), _num(x)) for v, (d, x) in enumerate(zip(g.in_degree, est)))
    _write_text(_csv_text(("node", "in_degree", "estimate"), rows), args.out)
    return 0


def _graph_source(args, scenario):
    if args.input is not None:
        return str(args.input)
    if scenario == "er_null":
        if args.p is not None:
            return ErConfig(args.n or 1000, args.p)
        if args.mean_degree is not None:
            return ErConfig.from_mean_degree(args.n or 1000, args.mean_degree)
        n, mean = ex.TABLE3_ER_ROWS[args.er_row]
        return ErConfig.from_mean_degree(args.n or n, mean)
    if scenario == "empirical":
        raise _Usage("the empirical scenario needs --in")
    n = args.n or (1000 if scenario == "randomize" else 10_000)
    return PaConfig(n, args.beta, args.zero_appeal, args.arcs_per_node)


def _experiment(args, scenario) -> ex.ExperimentConfig:
    overrides = dict(replicates=args.replicates, seed=args.seed, workers=args.workers)
    for key, attr in (("train_fraction", "train_frac"), ("n_proportions", "n_props"),
                      ("xmin_mode", "xmin"), ("n_swaps", "swaps"), ("n_boot", "n_boot"),
                      ("fit_percentile", "percentile"), ("proportions_source", "proportions")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "timing", False):
        overrides["record_timing"] = True
    if getattr(args, "fractions", None):
        overrides["fractions"] = tuple(args.fractions)
    return ex.ExperimentConfig.default(scenario, _graph_source(args, scenario), **overrides)


_RUNNERS = {
    "compare": ex.run_compare,
    "robustness": ex.run_robustness,
    "randomize": ex.run_randomize,
    "er_null": ex.run_er_null,
    "assumptions": ex.run_assumptions,
    "empirical": ex.run_empirical,
}


def _print_summary(report: ex.ExperimentReport, columns) -> None:
    for (method, phase), _ in report.summaries(columns[0]).items():
        tag = f"{method}.{phase}" if phase else method
        parts = []
        for col in columns:
            v = report.values(col, method, phase)
            if v.size:
                s = summarize(v)
                parts.append(f"{col}: q25={s.q25:.4g} median={s.median:.4g} "
                             f"mean={s.mean:.4g} q75={s.q75:.4g}")
        print(f"{tag:10s} " + "; ".join(parts), file=sys.stderr)
    failed = report.failures()
    if failed:
        print(f"{len(failed)} record(s) failed, first: {failed[0].error}", file=sys.stderr)


def cmd_bench(args) -> int:
    cfg = _experiment(args, args.scenario)
    report = _RUNNERS[args.scenario](cfg)
    _write_text(ex.emit_csv(report), args.out)
    cols = ("alpha_hat", "xmin_hat", "pvalue", "spearman") if args.scenario == "assumptions" else ("mae",)
    _print_summary(report, cols)
    return 0


def cmd_assumptions(args) -> int:
    args.scenario = "assumptions"
    return cmd_bench(args)


class _Usage(Exception):
    pass


# parser

def _add_seed(p, required=True):
    p.add_argument("--seed", type=int, required=required, default=None,
                   help="RNG seed (required)" if required else "RNG seed")


def _add_pa_flags(p):
    p.add_argument("--n", type=_positive_int, default=None,
                   help="number of nodes (default: 10000; 1000 for randomize)")
    p.add_argument("--beta", type=_nonneg_float, default=1.0,
                   help="attachment exponent (default: %(default)s)")
    p.add_argument("--zero-appeal", type=float, default=1.0,
                   help="attachment weight of in-degree 0 nodes (default: %(default)s)")
    p.add_argument("--arcs-per-node", type=_positive_int, default=1,
                   help="arcs emitted by each new node (default: %(default)s)")


def _add_run_flags(p):
    p.add_argument("--in", dest="input", type=Path, default=None,
                   help="edge-list file instead of a generated graph")
    _add_pa_flags(p)
    p.add_argument("--replicates", type=_positive_int, default=100,
                   help="number of replicates (default: %(default)s)")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="worker processes (default: %(default)s)")
    _add_seed(p)
    p.add_argument("--out", default=None, help="CSV report path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quickcent",
        description="Estimate harmonic centrality from in-degree and run the benchmark protocols.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic digraph")
    gsub = gen.add_subparsers(dest="model", required=True)
    pa = gsub.add_parser("pa", help="preferential attachment")
    pa.add_argument("--n", type=_positive_int, default=10_000, help="number of nodes (default: %(default)s)")
    pa.add_argument("--beta", type=_nonneg_float, default=1.0, help="attachment exponent (default: %(default)s)")
    pa.add_argument("--zero-appeal", type=float, default=1.0,
                    help="attachment weight of in-degree 0 nodes (default: %(default)s)")
    pa.add_argument("--arcs-per-node", type=_positive_int, default=1,
                    help="arcs emitted by each new node (default: %(default)s)")
    _add_seed(pa)
    pa.add_argument("--out", required=True, help="edge-list output path")
    er = gsub.add_parser("er", help="directed Erdos-Renyi")
    er.add_argument("--n", type=_positive_int, default=1000, help="number of nodes (default: %(default)s)")
    grp = er.add_mutually_exclusive_group(required=True)
    grp.add_argument("--p", type=_probability, help="arc probability")
    grp.add_argument("--mean-degree", type=_nonneg_float, help="expected in-degree p (N - 1)")
    _add_seed(er)
    er.add_argument("--out", required=True, help="edge-list output path")

    exact = sub.add_parser("exact", help="exact harmonic centrality of every node")
    exact.add_argument("--in", dest="input", type=Path, required=True, help="edge-list file")
    exact.add_argument("--out", default=None, help="CSV path (default: stdout)")

    fit = sub.add_parser("fit", help="fit a power law to the harmonic centralities")
    fit.add_argument("--in", dest="input", type=Path, required=True, help="edge-list file")
    fit.add_argument("--xmin", type=_xmin, default=XminMode.fitted(20.0),
                     help="fixed:<x_min> or fit:<percentile bound> (default: fit:20)")
    fit.add_argument("--n-boot", type=_nonneg_int, default=0,
                     help="bootstrap replicates for the p-value; 0 skips it (default: %(default)s)")
    _add_seed(fit, required=False)
    fit.add_argument("--out", default=None, help="output path (default: stdout)")

    tr = sub.add_parser("train", help="train a QuickCent model on a uniform node sample")
    tr.add_argument("--in", dest="input", type=Path, required=True, help="edge-list file")
    tr.add_argument("--train-frac", type=_fraction, default=0.1,
                    help="share of nodes in the training sample (default: %(default)s)")
    tr.add_argument("--n-props", type=_positive_int, default=8,
                    help="length of the proportions vector; 2 is the empirical-network setting "
                         "(default: %(default)s)")
    tr.add_argument("--xmin", type=_xmin, default=XminMode.fixed(1.0),
                    help="fixed:<x_min> or fit:<percentile bound> (default: fixed:1)")
    _add_seed(tr)
    tr.add_argument("--out", required=True, help="model file path")

    pr = sub.add_parser("predict", help="estimate every node's centrality with a saved model")
    pr.add_argument("--model", type=Path, required=True, help="model file")
    pr.add_argument("--in", dest="input", type=Path, required=True, help="edge-list file")
    pr.add_argument("--out", default=None, help="CSV path (default: stdout)")

    bench = sub.add_parser("bench", help="run a replicated experiment and write its CSV report")
    bench.add_argument("scenario", choices=[s for s in ex.SCENARIOS if s != "assumptions"])
    _add_run_flags(bench)
    bench.add_argument("--train-frac", type=_fraction, default=None,
                       help="training share (default: 0.1; 0.3 for randomize and er_null)")
    bench.add_argument("--n-props", type=_positive_int, default=None,
                       help="proportions vector length (default: 8; 2 for empirical)")
    bench.add_argument("--xmin", type=_xmin, default=None,
                       help="fixed:<x_min> or fit:<pct> (default: fixed:1; fit:20 for er_null and empirical)")
    bench.add_argument("--fractions", type=_fraction, nargs="+", default=None,
                       help="training shares swept by robustness (default: 0.1 .. 1.0)")
    bench.add_argument("--swaps", type=_nonneg_int, default=None,
                       help="rewiring attempts for randomize (default: 10000)")
    bench.add_argument("--p", type=_probability, default=None, help="ER arc probability")
    bench.add_argument("--mean-degree", type=_nonneg_float, default=None, help="ER expected in-degree")
    bench.add_argument("--er-row", choices=sorted(ex.TABLE3_ER_ROWS), default="moreno_blogs",
                       help="control network whose size and mean degree the ER graphs copy "
                            "(default: %(default)s)")
    bench.add_argument("--proportions", choices=("graph", "sample"), default=None,
                       help="centralities the proportions vector comes from (default: graph)")
    bench.add_argument("--timing", action="store_true",
                       help="record train+predict wall time (makes the CSV non-reproducible)")

    asm = sub.add_parser("assumptions", help="power-law and monotonicity checks per replicate")
    _add_run_flags(asm)
    asm.add_argument("--n-boot", type=_positive_int, default=None,
                     help="bootstrap replicates per p-value (default: 100)")
    asm.add_argument("--percentile", type=_nonneg_float, default=None,
                     help="x_min candidate bound as a percentile (default: 100, i.e. unbounded)")

    return parser


_COMMANDS = {"gen": cmd_gen, "exact": cmd_exact, "fit": cmd_fit, "train": cmd_train,
             "predict": cmd_predict, "bench": cmd_bench, "assumptions": cmd_assumptions}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cmd = args.command if args.command != "bench" else f"bench {args.scenario}"
    try:
        return _COMMANDS[args.command](args)
    except _Usage as exc:
        parser.error(str(exc))
    except (QuickCentError, OSError) as exc:
        print(f"quickcent {cmd}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
