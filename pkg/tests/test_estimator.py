import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from quickcent import powerlaw as pl
from quickcent.digraph import Digraph, harmonic_all
from quickcent.estimator import (
    MODEL_HEADER,
    ProportionsSpec,
    XminMode,
    clue_scan,
    degree_threshold,
    load_model,
    predict,
    predict_all,
    proportions_from_sample,
    save_model,
    train,
)
from quickcent.exceptions import InputError, ModelFormatError, TrainingError
from quickcent.generators import PaConfig, gen_pa, make_rng

from conftest import EXAMPLE_TABLE

# thresholds listed with the worked example; see test_example_default_thresholds
EXAMPLE_THRESHOLDS = (0, [3, 4])


def test_example_proportions(example_graph):
    h = harmonic_all(example_graph)
    props = proportions_from_sample(h, 1.0, 2)
    assert props.log_points == pytest.approx((2.506, 6.283), abs=1e-3)
    assert props.probs == pytest.approx((0.84, 0.96))
    assert props.p0 == pytest.approx(0.68)
    assert props.tail_probs == pytest.approx((0.5, 0.875))


def test_example_default_thresholds(example_graph):
    # the smallest degree whose CDF reaches 0.84 is 1 (F(1) = 21/25 exactly)
    assert degree_threshold(example_graph, 0.68) == 0
    assert degree_threshold(example_graph, 0.84) == 1
    assert degree_threshold(example_graph, 0.96) == 4
    # an upward rounding of the probability moves the threshold to 3
    assert degree_threshold(example_graph, 0.68 + 0.32 * 0.5) == 3


def _check_rows(model, graph, column):
    est = predict_all(model, graph)
    for label, row in EXAMPLE_TABLE.items():
        assert est[label - 1] == pytest.approx(row[column], abs=0.01)


def test_example_full_sample_model(example_graph):
    h = harmonic_all(example_graph)
    model = train(example_graph, range(25), 2, XminMode.fixed(1.0), thresholds=EXAMPLE_THRESHOLDS)
    assert model.alpha == pytest.approx(2.067, abs=1e-3)
    assert model.medians == pytest.approx((0.0, 1.309, 2.973, 13.429), abs=1e-3)
    _check_rows(model, example_graph, 2)
    assert np.mean(np.abs(predict_all(model, example_graph) - h)) == pytest.approx(0.3606, abs=1e-3)


def test_example_subsample_model(example_graph):
    # exponent from a 17-node sample without the root, proportions from the whole graph
    h = harmonic_all(example_graph)
    named = [label - 1 for label in EXAMPLE_TABLE if label != 1]
    zeros = [v for v in range(25) if h[v] == 0][:10]
    props = proportions_from_sample(h, 1.0, 2)
    model = train(example_graph, named + zeros, 2, "fixed:1", proportions=props,
                  thresholds=EXAMPLE_THRESHOLDS)
    assert model.alpha == pytest.approx(2.477, abs=1e-3)
    _check_rows(model, example_graph, 3)
    assert np.mean(np.abs(predict_all(model, example_graph) - h)) == pytest.approx(0.6948, abs=1e-3)


def test_example_quantile_rule_model(example_graph):
    model = train(example_graph, range(25), 2, "fixed:1")
    assert model.d0 == 0 and model.thresholds == (1, 4)
    assert model.bands == (1, 2)
    # estimates are medians of the fitted law, cut at the tail-conditional quantiles
    law = pl.PowerLawModel(model.alpha, 1.0)
    c1, c2 = pl.quantile_value(law, 0.5), pl.quantile_value(law, 0.875)
    assert model.cuts == pytest.approx((1.0, c1, c2))
    assert model.medians[1] == pytest.approx(pl.interval_median(law, 1.0, c1))
    assert model.medians[-1] == pytest.approx(pl.open_tail_median(law, c2))


def test_clue_scan_stops_at_first_unexceeded_threshold(example_graph):
    model = train(example_graph, range(25), 2, "fixed:1", thresholds=EXAMPLE_THRESHOLDS)
    assert clue_scan(model, 0) == (model.medians[0], 1)
    assert clue_scan(model, 2) == (model.medians[1], 2)
    assert clue_scan(model, 4) == (model.medians[2], 3)
    assert clue_scan(model, 100) == (model.medians[3], 3)
    assert predict(model, 9) == model.medians[-1]
    with pytest.raises(InputError):
        clue_scan(model, -1)


def test_repeated_thresholds_merge_bands():
    g = gen_pa(PaConfig(3000, seed=4))
    h = harmonic_all(g)
    model = train(g, range(g.n_nodes), 20, "fixed:1", centralities=h)
    assert len(model.thresholds) == len(set(model.thresholds)) < 20
    assert list(model.thresholds) == sorted(model.thresholds)
    assert len(model.medians) == model.n_effective + 2
    # the kept band keeps its own cut interval
    for k, band in enumerate(model.bands):
        law = model.fit
        want = pl.interval_median(law, model.cuts[band - 1], model.cuts[band])
        assert model.medians[k + 1] == pytest.approx(want)


def test_train_computes_centralities_itself():
    g = gen_pa(PaConfig(800, seed=1))
    nodes = make_rng(2).choice(800, 200, replace=False)
    a = train(g, nodes, 4, "fixed:1")
    b = train(g, nodes, 4, "fixed:1", centralities=harmonic_all(g)[nodes])
    assert a == b


def test_train_with_fitted_xmin():
    g = gen_pa(PaConfig(5000, seed=3))
    h = harmonic_all(g)
    model = train(g, range(5000), 2, XminMode.fitted(100.0), centralities=h)
    fit = pl.fit_xmin(h, 100.0)
    assert (model.x_min, model.alpha) == (fit.x_min, fit.alpha)


def test_train_errors():
    g = gen_pa(PaConfig(100, seed=0))
    with pytest.raises(InputError):
        train(g, range(5), 2)
    # only leaves in the sample: no centrality reaches x_min
    leaves = np.flatnonzero(g.in_degree == 0)[:20]
    with pytest.raises(TrainingError):
        train(g, leaves, 2)


def test_xmin_mode_parse():
    assert XminMode.parse("fixed:1") == XminMode.fixed(1.0)
    assert XminMode.parse("fit:20") == XminMode.fitted(20.0)
    assert str(XminMode.fitted(20)) == "fit:20"
    for bad in ("fixed", "fit:200", "auto:3", "fixed:0"):
        with pytest.raises(InputError):
            XminMode.parse(bad)


def test_model_file_round_trip(tmp_path, example_graph):
    model = train(example_graph, range(25), 2, "fixed:1", thresholds=EXAMPLE_THRESHOLDS)
    path = tmp_path / "m.txt"
    save_model(model, path)
    assert load_model(path) == model
    assert path.read_text().startswith(MODEL_HEADER + "\n")


@pytest.mark.parametrize("mutate, pattern", [
    (lambda lines: ["quickcent-model v9"] + lines[1:], "line 1: unsupported model version"),
    (lambda lines: ["hello"] + lines[1:], "line 1: missing"),
    (lambda lines: lines[:3], "line 4: unexpected end of file"),
    (lambda lines: lines[:2] + ["bogus = 1"] + lines[2:], "line 3: unrecognised"),
    (lambda lines: [l if not l.startswith("alpha") else "alpha = x" for l in lines], "line 2: bad value"),
])
def test_model_file_errors(tmp_path, example_graph, mutate, pattern):
    model = train(example_graph, range(25), 2, "fixed:1", thresholds=EXAMPLE_THRESHOLDS)
    path = tmp_path / "m.txt"
    save_model(model, path)
    path.write_text("\n".join(mutate(path.read_text().splitlines())) + "\n")
    with pytest.raises(ModelFormatError, match=pattern):
        load_model(path)


def test_proportions_spec_validation():
    with pytest.raises(InputError):
        ProportionsSpec((0.5, 0.4), (1.0, 2.0), 0.1)
    with pytest.raises(InputError):
        ProportionsSpec((0.5, 1.0), (1.0, 2.0), 0.1)
    with pytest.raises(InputError):
        ProportionsSpec((0.5,), (1.0,), 0.6)


_GRAPHS = {}


def _graph(seed, beta):
    key = (seed, beta)
    if key not in _GRAPHS:
        g = gen_pa(PaConfig(2000, beta=beta, seed=seed))
        _GRAPHS[key] = (g, harmonic_all(g))
    return _GRAPHS[key]


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 7), st.sampled_from([0.5, 1.0, 1.5]), st.integers(1, 10),
       st.floats(0.05, 1.0), st.integers(0, 2**31))
def test_trained_models_are_monotone_step_functions(seed, beta, n, frac, sample_seed):
    g, h = _graph(seed, beta)
    nodes = make_rng(sample_seed).choice(g.n_nodes, max(10, int(frac * g.n_nodes)), replace=False)
    try:
        model = train(g, nodes, n, "fixed:1", centralities=h[nodes])
    except TrainingError:
        return
    m = np.asarray(model.medians)
    # strict order of the power-law medians, lowest band not above them
    assert np.all(np.diff(m[1:]) > 0) and m[0] <= m[1]
    degrees = np.arange(0, g.in_degree.max() + 5)
    est = predict_all(model, degrees)
    assert np.all(np.diff(est) >= 0)
    assert set(est.tolist()) <= set(model.medians)
    assert np.all(np.isfinite(est))
    assert [predict(model, int(d)) for d in degrees[:20]] == est[:20].tolist()


def test_single_point_is_geometric_midpoint():
    props = proportions_from_sample([0, 2.0, 5.0, 32.0], 2.0, 1)
    assert props.log_points == pytest.approx((8.0,))


def test_degree_threshold_edges(example_graph):
    assert degree_threshold(example_graph, 0.0) == 0
    assert degree_threshold(example_graph, 1.0) == 9
    assert degree_threshold([3, 5, 7], 0.0) == 3
    with pytest.raises(InputError):
        degree_threshold(example_graph, 1.5)


def test_open_tail_clamps_and_huge_d0_gives_constant(example_graph):
    model = train(example_graph, range(25), 2, "fixed:1", thresholds=EXAMPLE_THRESHOLDS)
    assert predict(model, 10**6) == model.medians[-1]
    const = train(example_graph, range(25), 1, "fixed:1", thresholds=(10**9, [10**9 + 1]))
    est = predict_all(const, example_graph)
    assert np.all(est == const.medians[0])


def test_equal_training_centralities_fail():
    # disjoint arcs: every target has centrality exactly 1
    g = Digraph(40, np.arange(0, 40, 2), np.arange(1, 40, 2))
    with pytest.raises(TrainingError, match="diverges"):
        train(g, np.arange(1, 40, 2), 2)


def test_reloaded_model_predicts_identically(tmp_path):
    g = gen_pa(PaConfig(3000, seed=12))
    nodes = make_rng(12).choice(3000, 300, replace=False)
    model = train(g, nodes, 8, "fixed:1")
    save_model(model, tmp_path / "m")
    np.testing.assert_array_equal(predict_all(load_model(tmp_path / "m"), g), predict_all(model, g))
