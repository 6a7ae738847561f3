import subprocess
import sys

import numpy as np
import pytest

from quickcent.cli import build_parser, main
from quickcent.digraph import harmonic_all, read_edge_list, write_edge_list
from quickcent.estimator import load_model, predict_all
from quickcent.experiments import parse_csv
from quickcent.generators import ErConfig, gen_er


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_gen_pa_and_er(tmp_path, capsys):
    out = tmp_path / "pa.txt"
    assert run_cli("gen", "pa", "--n", 25, "--beta", 1, "--seed", 7, "--out", out) == 0
    assert read_edge_list(out).n_arcs == 24
    assert "arcs=24" in capsys.readouterr().out
    out2 = tmp_path / "er.txt"
    assert run_cli("gen", "er", "--n", 4, "--p", 1, "--seed", 1, "--out", out2) == 0
    assert read_edge_list(out2).n_arcs == 12


@pytest.mark.parametrize("argv", [
    ["gen", "pa", "--n", "0", "--seed", "1", "--out", "x"],
    ["gen", "pa", "--n", "10", "--out", "x"],
    ["train", "--in", "x", "--out", "m", "--train-frac", "1.5", "--seed", "1"],
    ["bench", "compare", "--replicates", "2"],
    ["fit", "--in", "x", "--xmin", "auto"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_console_script_exit_codes(tmp_path):
    cmd = [sys.executable, "-m", "quickcent.cli"]
    r = subprocess.run(cmd + ["gen", "pa", "--n", "0", "--seed", "1", "--out", str(tmp_path / "g")],
                       capture_output=True, text=True)
    assert r.returncode == 2 and "must be >= 1" in r.stderr
    r = subprocess.run(cmd + ["exact", "--in", str(tmp_path / "missing")], capture_output=True, text=True)
    assert r.returncode == 1 and "quickcent exact: error" in r.stderr


def test_exact_path_graph(tmp_path):
    g = tmp_path / "path.txt"
    g.write_text("0 1\n1 2\n")
    out = tmp_path / "h.csv"
    assert run_cli("exact", "--in", g, "--out", out) == 0
    assert out.read_text() == "node,in_degree,harmonic\n0,0,0\n1,1,1\n2,1,1.5\n"


def test_exact_empty_file(tmp_path):
    g = tmp_path / "empty.txt"
    g.write_text("")
    out = tmp_path / "h.csv"
    assert run_cli("exact", "--in", g, "--out", out) == 0
    assert out.read_text() == "node,in_degree,harmonic\n"


def test_exact_matches_library(tmp_path):
    graph = gen_er(ErConfig(12, 0.2, seed=4))
    path = tmp_path / "g.txt"
    write_edge_list(graph, path)
    out = tmp_path / "h.csv"
    run_cli("exact", "--in", path, "--out", out)
    h = harmonic_all(graph)
    fmt = lambda v: repr(int(v)) if float(v).is_integer() else repr(float(v))
    want = "node,in_degree,harmonic\n" + "".join(
        f"{i},{graph.in_degree[i]},{fmt(h[i])}\n" for i in range(12))
    assert out.read_bytes() == want.encode()


def test_train_then_predict_reproduces_predict_all(tmp_path):
    g = tmp_path / "g.txt"
    run_cli("gen", "pa", "--n", 3000, "--seed", 2, "--out", g)
    model = tmp_path / "m.txt"
    assert run_cli("train", "--in", g, "--train-frac", 0.2, "--seed", 5, "--out", model) == 0
    out = tmp_path / "p.csv"
    assert run_cli("predict", "--model", model, "--in", g, "--out", out) == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    want = predict_all(load_model(model), read_edge_list(g))
    np.testing.assert_array_equal(rows[:, 2], want)


def test_fit_reports_parameters(tmp_path, capsys):
    g = tmp_path / "g.txt"
    run_cli("gen", "pa", "--n", 3000, "--seed", 2, "--out", g)
    capsys.readouterr()
    assert run_cli("fit", "--in", g, "--xmin", "fit:100", "--n-boot", 5, "--seed", 1) == 0
    out = capsys.readouterr().out
    keys = [line.split(" = ")[0] for line in out.splitlines()]
    assert keys == ["x_min", "alpha", "ks_distance", "n_tail", "pvalue"]
    with pytest.raises(SystemExit):
        run_cli("fit", "--in", g, "--n-boot", 5)


def test_runtime_error_exit_1(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("0 1\n1 2\n")
    assert run_cli("train", "--in", g, "--seed", 1, "--out", tmp_path / "m") == 1
    assert "quickcent train: error" in capsys.readouterr().err


def test_bench_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run_cli("bench", "compare", "--beta", 1, "--replicates", 5, "--seed", 3,
                       "--n", 2000, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = parse_csv(a)
    assert len(rep.records) == 15


def test_bench_other_scenarios(tmp_path):
    out = tmp_path / "r.csv"
    assert run_cli("bench", "randomize", "--replicates", 1, "--seed", 0, "--n", 300,
                   "--swaps", 100, "--out", out) == 0
    assert {r.phase for r in parse_csv(out).records} == {"PL", "RPL"}
    assert run_cli("bench", "er_null", "--replicates", 1, "--seed", 0, "--n", 150,
                   "--mean-degree", 5, "--out", out) == 0
    assert run_cli("bench", "robustness", "--replicates", 1, "--seed", 0, "--n", 1000,
                   "--fractions", 0.5, 1.0, "--out", out) == 0
    assert len(parse_csv(out).records) == 2
    assert run_cli("assumptions", "--replicates", 1, "--seed", 0, "--n", 1000,
                   "--n-boot", 5, "--out", out) == 0
    with pytest.raises(SystemExit):
        run_cli("bench", "empirical", "--seed", 0)


def test_help_lists_defaults():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    bench_help = sub["bench"].format_help()
    for flag in ("--train-frac", "--n-props", "--xmin", "--replicates", "--workers", "--seed"):
        assert flag in bench_help
    train_help = " ".join(sub["train"].format_help().split())
    assert "(default: 0.1)" in train_help and "(default: 8)" in train_help
    pa_help = " ".join(sub["gen"]._subparsers._group_actions[0].choices["pa"].format_help().split())
    assert "(default: 10000)" in pa_help
