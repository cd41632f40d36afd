"""Seeded ensemble runs with per-step means and confidence intervals."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .generators import GeneratorSpec
from .graph import BipartiteGraph, RankKey, removal_plan
from .io import ingest_edge_list
from .metrics import (
    dauc,
    disruption_curve,
    giant_component_curve,
    local_cheeger_curve,
    population_curve,
)
from .rewiring import Direction, rewiring_sweep

METRICS = ("disruption", "dauc", "population", "giant", "local_cheeger", "cheeger")
Z95 = 1.96


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class RewiringSettings:
    direction: Direction
    fractions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        if not self.fractions:
            raise ExperimentError("rewiring needs at least one fraction")

    def to_dict(self) -> dict:
        return {"direction": self.direction.value, "fractions": list(self.fractions)}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a run.

    Exactly one of ``edge_list`` and ``generator`` is set. Generator inputs
    run ``runs`` replicates, one per seed; seeds are derived from ``seed``
    unless listed explicitly in ``seeds``. File inputs run once.
    """

    edge_list: str | None = None
    edge_format: str = "csv"
    generator: GeneratorSpec | None = None
    metrics: tuple[str, ...] = ("disruption", "dauc")
    rank_by: RankKey = RankKey.USERS
    weighted: bool = True
    seed: int = 0
    runs: int = 1
    seeds: tuple[int, ...] | None = None
    rewiring: RewiringSettings | None = None
    output: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if (self.edge_list is None) == (self.generator is None):
            raise ExperimentError("config needs exactly one of 'edge_list' and 'generator'")
        object.__setattr__(self, "rank_by", RankKey(self.rank_by))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ExperimentError(f"unknown metrics: {sorted(unknown)}")
        if self.runs < 1:
            raise ExperimentError("runs must be >= 1")
        if self.jobs < 1:
            raise ExperimentError("jobs must be >= 1")
        if self.seeds is not None:
            object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
            if len(self.seeds) != self.runs:
                raise ExperimentError("number of seeds must equal runs")
        if self.edge_list is not None and self.runs != 1:
            raise ExperimentError("file inputs are deterministic; runs must be 1")

    def replicate_seeds(self) -> list[int]:
        if self.seeds is not None:
            return list(self.seeds)
        if self.generator is None:
            return [int(self.seed)]
        return derive_seeds(self.seed, self.runs)

    def to_dict(self) -> dict:
        return {
            "edge_list": self.edge_list,
            "edge_format": self.edge_format,
            "generator": self.generator.to_dict() if self.generator else None,
            "metrics": list(self.metrics),
            "rank_by": self.rank_by.value,
            "weighted": self.weighted,
            "seed": self.seed,
            "runs": self.runs,
            "seeds": list(self.seeds) if self.seeds is not None else None,
            "rewiring": self.rewiring.to_dict() if self.rewiring else None,
            "output": self.output,
            "jobs": self.jobs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ExperimentError(f"unknown config fields: {sorted(unknown)}")
        d = dict(d)
        try:
            if d.get("generator") is not None:
                d["generator"] = GeneratorSpec.from_dict(d["generator"])
            if d.get("rewiring") is not None:
                d["rewiring"] = RewiringSettings(**d["rewiring"])
        except (TypeError, ValueError) as err:
            raise ExperimentError(str(err)) from err
        try:
            return cls(**d)
        except ExperimentError:
            raise
        except (TypeError, ValueError) as err:
            raise ExperimentError(str(err)) from err


def derive_seeds(seed: int, runs: int) -> list[int]:
    """Independent 64-bit replicate seeds from one base seed."""
    state = np.random.SeedSequence(int(seed)).generate_state(runs, np.uint64)
    return [int(s) for s in state]


def mean_ci(values: np.ndarray) -> dict:
    """Mean and normal-approximation 95% interval along axis 0."""
    values = np.asarray(values, dtype=float)
    runs = values.shape[0]
    mean = values.mean(axis=0)
    sd = values.std(axis=0, ddof=1) if runs > 1 else np.zeros_like(mean)
    half = Z95 * sd / math.sqrt(runs)
    return {"mean": mean, "half_width": half, "low": mean - half, "high": mean + half}


def _load(config: ExperimentConfig, seed: int) -> BipartiteGraph:
    if config.generator is not None:
        return config.generator.build(seed)
    return ingest_edge_list(config.edge_list, config.edge_format)[0]


def run_single(config: ExperimentConfig, seed: int, graph: BipartiteGraph | None = None) -> dict:
    """All selected metrics for one replicate."""
    from .spectral import cheeger_bounds

    g = graph if graph is not None else _load(config, seed)
    plan = removal_plan(g, config.rank_by)
    out: dict[str, Any] = {"seed": seed, "n_communities": g.n_communities,
                           "n_users": g.n_users, "n_edges": g.n_edges}
    metrics = set(config.metrics)
    if metrics & {"disruption", "dauc"}:
        curve = disruption_curve(g, plan, weighted=config.weighted)
        if "disruption" in metrics:
            out["disruption"] = curve.disruption
        out["dauc"] = dauc(curve)
    if "population" in metrics:
        out["population"] = population_curve(g, plan)[1]
    if "giant" in metrics:
        out["giant"] = giant_component_curve(g, plan)[1]
    if "local_cheeger" in metrics:
        out["local_cheeger"] = local_cheeger_curve(g, plan, weighted=config.weighted).value
    if "cheeger" in metrics:
        est = cheeger_bounds(g, weighted=config.weighted, exact=False)
        out["lambda2"] = est.lambda2
        out["cheeger_lower"] = est.lower
        out["cheeger_upper"] = est.upper
    if config.rewiring is not None:
        trace = rewiring_sweep(g, config.rewiring.direction, config.rewiring.fractions,
                               seed=seed, weighted=config.weighted, rank_by=config.rank_by)
        out["rewiring"] = [p.as_row() for p in trace.points]
    return out


def _run_one(args):
    config, seed = args
    return run_single(config, seed)


CURVE_KEYS = ("disruption", "population", "giant", "local_cheeger")
SCALAR_KEYS = ("dauc", "lambda2", "cheeger_lower", "cheeger_upper")
TRACE_KEYS = ("dauc", "user_community_assortativity", "projected_degree_assortativity",
              "projected_population_assortativity", "achieved_fraction")


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    seeds: list[int]
    runs: list[dict]
    aggregate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tool": "disruptnet",
            "version": __version__,
            "config": self.config.to_dict(),
            "seeds": self.seeds,
            "runs": self.runs,
            "aggregate": self.aggregate,
        }

    def curve_mean(self, key: str = "disruption") -> np.ndarray:
        return np.asarray(self.aggregate[key]["mean"])

    @property
    def dauc(self) -> dict:
        return self.aggregate["dauc"]


def aggregate(runs: Sequence[dict]) -> dict:
    out: dict[str, Any] = {}
    for key in CURVE_KEYS:
        if key not in runs[0]:
            continue
        lengths = {len(r[key]) for r in runs}
        if len(lengths) != 1:
            raise ExperimentError(
                f"cannot aggregate '{key}': replicate curves differ in length {sorted(lengths)}"
            )
        out[key] = mean_ci(np.stack([r[key] for r in runs]))
    for key in SCALAR_KEYS:
        if key in runs[0]:
            out[key] = mean_ci(np.array([r[key] for r in runs]))
    if "rewiring" in runs[0]:
        out["rewiring"] = {
            key: mean_ci(np.array([[p[key] for p in r["rewiring"]] for r in runs]))
            for key in TRACE_KEYS
        }
    return out


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every replicate and summarise with mean and 95% intervals.

    Replicates are independent given their seed, so ``jobs > 1`` spreads
    them over processes; results keep seed order either way.
    """
    seeds = config.replicate_seeds()
    if config.jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            runs = list(pool.map(_run_one, [(config, s) for s in seeds]))
    else:
        runs = [run_single(config, s) for s in seeds]
    return ExperimentReport(config=config, seeds=seeds, runs=runs, aggregate=aggregate(runs))


def load_config(path: str | Path) -> ExperimentConfig:
    import json

    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ExperimentError(f"{path}: cannot read config: {err.strerror or err}") from err
    except json.JSONDecodeError as err:
        raise ExperimentError(f"{path}:{err.lineno}: invalid JSON: {err.msg}") from err
    if not isinstance(data, dict):
        raise ExperimentError(f"{path}: config must be a JSON object")
    return ExperimentConfig.from_dict(data)
