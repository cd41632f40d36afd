import numpy as np
import pytest

from disruptnet import (
    ExperimentConfig,
    GeneratorSpec,
    dauc,
    disruption_curve,
    ingest_edge_list,
    removal_plan,
    run_experiment,
)
from disruptnet.experiment import (
    ExperimentError,
    RewiringSettings,
    derive_seeds,
    mean_ci,
)
from disruptnet.io import write_edge_list

from conftest import random_graph


def test_exactly_one_source():
    with pytest.raises(ExperimentError):
        ExperimentConfig()
    with pytest.raises(ExperimentError):
        ExperimentConfig(edge_list="x.csv", generator=GeneratorSpec("er"))


@pytest.mark.parametrize("bad", [
    {"generator": {"topology": "er"}, "runs": 0},
    {"generator": {"topology": "er"}, "metrics": ["nope"]},
    {"generator": {"topology": "er"}, "runs": 2, "seeds": [1]},
    {"edge_list": "x.csv", "runs": 3},
    {"generator": {"topology": "er"}, "extra": 1},
    {"generator": {"topology": "bogus"}},
])
def test_invalid_configs(bad):
    with pytest.raises(ExperimentError):
        ExperimentConfig.from_dict(bad)


def test_config_round_trip():
    cfg = ExperimentConfig(generator=GeneratorSpec("ba", communities=20, users=100), runs=3,
                           rewiring=RewiringSettings("decrease", (0, 0.1)))
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_seed_derivation():
    assert derive_seeds(0, 5) == derive_seeds(0, 5)
    assert len(set(derive_seeds(0, 100))) == 100
    assert derive_seeds(0, 3) != derive_seeds(1, 3)


def test_mean_ci_single_run():
    out = mean_ci(np.array([[0.2, 0.4]]))
    assert out["half_width"].tolist() == [0.0, 0.0]


def test_mean_ci_formula():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    out = mean_ci(x)
    assert out["mean"] == 2.5
    assert out["half_width"] == pytest.approx(1.96 * np.std(x, ddof=1) / 2)


def test_single_run_zero_width():
    cfg = ExperimentConfig(generator=GeneratorSpec("er", communities=20, users=100, p=0.1))
    rep = run_experiment(cfg)
    assert np.all(rep.aggregate["disruption"]["half_width"] == 0)
    assert rep.dauc["half_width"] == 0


def test_near_star_ensemble():
    cfg = ExperimentConfig(generator=GeneratorSpec("near-star", communities=30, users=300),
                           runs=100, seed=1)
    rep = run_experiment(cfg)
    agg = rep.aggregate["disruption"]
    assert agg["mean"][0] == 0.5 and agg["half_width"][0] == 0.0
    assert len(rep.seeds) == 100
    assert [r["seed"] for r in rep.runs] == rep.seeds


def test_differing_lengths_refused():
    # small-world community counts depend on the seed
    cfg = ExperimentConfig(generator=GeneratorSpec("small-world", users=120, neighbors=4, p=0.3),
                           runs=8)
    with pytest.raises(ExperimentError):
        run_experiment(cfg)


def test_file_input_matches_cli_chain(tmp_path):
    g = random_graph(np.random.default_rng(12))
    write_edge_list(g, tmp_path / "g.csv")
    rep = run_experiment(ExperimentConfig(edge_list=str(tmp_path / "g.csv")))
    h, _ = ingest_edge_list(tmp_path / "g.csv")
    curve = disruption_curve(h, removal_plan(h))
    assert rep.runs[0]["disruption"].tolist() == curve.disruption.tolist()
    assert rep.runs[0]["dauc"] == dauc(curve)


def test_parallel_matches_serial():
    spec = GeneratorSpec("powerlaw", communities=40, users=400)
    a = run_experiment(ExperimentConfig(generator=spec, runs=4, jobs=1))
    b = run_experiment(ExperimentConfig(generator=spec, runs=4, jobs=2))
    for x, y in zip(a.runs, b.runs):
        assert x["disruption"].tolist() == y["disruption"].tolist()


def test_all_metrics_and_rewiring():
    cfg = ExperimentConfig(
        generator=GeneratorSpec("er", communities=15, users=100, p=0.1),
        metrics=("disruption", "dauc", "population", "giant", "local_cheeger", "cheeger"),
        runs=3, rewiring=RewiringSettings("increase", (0, 0.05)),
    )
    rep = run_experiment(cfg)
    for key in ("disruption", "population", "giant", "local_cheeger", "dauc", "lambda2"):
        assert key in rep.aggregate
    assert len(rep.aggregate["rewiring"]["dauc"]["mean"]) == 2
    d = rep.to_dict()
    assert d["version"] and d["seeds"] == rep.seeds and d["config"]["runs"] == 3
