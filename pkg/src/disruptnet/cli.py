"""Command-line interface.

Each subcommand reads an edge list, generator flags, or a JSON config and
writes CSV or JSON. Without ``-o`` output goes to ``$DISRUPTNET_OUTPUT_DIR``
(one file per subcommand) if that is set, else to stdout. Failures exit
nonzero and print a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analytic import (
    CorrelationDirection,
    analytic_disruption,
    correlation_experiment,
    er_like_distributions,
    random_joint,
)
from .experiment import ExperimentConfig, ExperimentError, RewiringSettings, load_config, run_experiment
from .generators import GeneratorSpec, Topology
from .graph import GraphError, RankKey, removal_plan
from .io import (
    CURVE_COLUMNS,
    TRACE_COLUMNS,
    FormatError,
    curve_dict,
    curve_rows,
    dumps,
    ingest_edge_list,
    read_curve,
    read_model,
    read_unipartite,
    table_csv,
    trace_dict,
    trace_rows,
    write_text,
)
from .metrics import dauc, disruption_curve, giant_component_curve, local_cheeger_curve, population_curve
from .rewiring import Direction, rewire
from .spectral import ConvergenceError, cheeger_bounds
from .unipartite import convert as convert_graph

OUTPUT_DIR_ENV = "DISRUPTNET_OUTPUT_DIR"

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RUNTIME = 4


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE, kind: str = "usage"):
        super().__init__(message)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(f"{self.prog}: {message}")


# -- shared options ---------------------------------------------------------


def _add_output(p, default_format="csv", formats=("csv", "json")):
    p.add_argument("-o", "--output", help="output file (default: $%s or stdout)" % OUTPUT_DIR_ENV)
    p.add_argument("--output-format", choices=formats, default=default_format)


def _add_ranking(p):
    p.add_argument("--rank-by", choices=[k.value for k in RankKey], default=RankKey.USERS.value,
                   help="removal order: unique users or total weight (default: users)")
    p.add_argument("--weighted", dest="weighted", action="store_true", default=True,
                   help="use edge weights (default)")
    p.add_argument("--unweighted", dest="weighted", action="store_false",
                   help="count distinct edges only")


def _add_generator(p):
    g = p.add_argument_group("generator (instead of an input file)")
    g.add_argument("--topology", choices=[t.value for t in Topology])
    g.add_argument("--communities", type=int, default=150)
    g.add_argument("--users", type=int, default=3000)
    g.add_argument("--gamma", type=float, default=2.5)
    g.add_argument("-p", "--edge-probability", dest="p", type=float, default=0.05)
    g.add_argument("--neighbors", type=int, default=5)
    g.add_argument("--edges-per-user", type=int, default=2)


def _add_source(p, ensemble=True):
    p.add_argument("input", nargs="?", help="edge list with header user,community[,weight]")
    p.add_argument("--input-format", choices=("csv", "tsv"), default="csv")
    p.add_argument("--seed", type=int, default=0)
    if ensemble:
        p.add_argument("--runs", type=int, default=1,
                       help="replicates for generator input; >1 writes an ensemble report")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--config", help="JSON experiment config (overrides other input options)")
    _add_generator(p)


def _spec(args) -> GeneratorSpec:
    return GeneratorSpec(
        topology=args.topology, communities=args.communities, users=args.users,
        gamma=args.gamma, p=args.p, neighbors=args.neighbors,
        edges_per_user=args.edges_per_user,
    )


def _graph(args):
    if (args.input is None) == (args.topology is None):
        raise CLIError("give exactly one of an input file and --topology")
    if args.input is not None:
        return ingest_edge_list(args.input, args.input_format)[0]
    return _spec(args).build(args.seed)


def _wants_ensemble(args) -> bool:
    return getattr(args, "config", None) is not None or getattr(args, "runs", 1) > 1


def _ensemble(args, metrics: Sequence[str]) -> str:
    if args.config is not None:
        config = load_config(args.config)
    else:
        if args.topology is None:
            raise CLIError("--runs > 1 needs a generator (--topology)")
        config = ExperimentConfig(
            generator=_spec(args), metrics=tuple(metrics), rank_by=args.rank_by,
            weighted=args.weighted, seed=args.seed, runs=args.runs, jobs=args.jobs,
        )
    return dumps(run_experiment(config).to_dict())


def _emit(args, text: str, name: str) -> None:
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        ext = "json" if text.lstrip().startswith(("{", "[")) else "csv"
        target = str(Path(os.environ[OUTPUT_DIR_ENV]) / f"{name}.{ext}")
    if target is None:
        sys.stdout.write(text)
    else:
        write_text(target, text)


def _provenance(args, extra: dict | None = None) -> dict:
    skip = {"func", "output", "output_format", "verbose"}
    if getattr(args, "topology", None) is None:
        skip |= {"communities", "users", "gamma", "p", "neighbors", "edges_per_user"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {"tool": "disruptnet", "version": __version__, "parameters": params, **(extra or {})}


# -- subcommands ------------------------------------------------------------


def cmd_disrupt(args) -> None:
    if _wants_ensemble(args):
        return _emit(args, _ensemble(args, ("disruption", "dauc")), "disrupt")
    g = _graph(args)
    curve = disruption_curve(g, removal_plan(g, args.rank_by), weighted=args.weighted)
    if args.output_format == "csv":
        text = table_csv(CURVE_COLUMNS, curve_rows(curve))
    else:
        text = dumps({**curve_dict(curve), "dauc": dauc(curve),
                      "seeds": [args.seed] if args.topology else [],
                      "provenance": _provenance(args)})
    _emit(args, text, "disrupt")


def cmd_dauc(args) -> None:
    if args.curve is not None:
        if args.input is not None or args.topology is not None:
            raise CLIError("--curve excludes other inputs")
        value = dauc(read_curve(args.curve))
        return _emit(args, dumps({"dauc": value, "provenance": _provenance(args)}), "dauc")
    if _wants_ensemble(args):
        return _emit(args, _ensemble(args, ("dauc",)), "dauc")
    g = _graph(args)
    curve = disruption_curve(g, removal_plan(g, args.rank_by), weighted=args.weighted)
    payload = {"dauc": dauc(curve), "seeds": [args.seed] if args.topology else [],
               "provenance": _provenance(args)}
    _emit(args, dumps(payload), "dauc")


def cmd_population(args) -> None:
    if _wants_ensemble(args):
        return _emit(args, _ensemble(args, ("population",)), "population")
    g = _graph(args)
    x, y = population_curve(g, removal_plan(g, args.rank_by))
    if args.output_format == "csv":
        text = table_csv(("fraction_communities", "cumulative_fraction"), zip(x, y))
    else:
        text = dumps({"fraction_communities": x, "cumulative_fraction": y,
                      "provenance": _provenance(args)})
    _emit(args, text, "population")


def cmd_giant(args) -> None:
    if _wants_ensemble(args):
        return _emit(args, _ensemble(args, ("giant",)), "giant")
    g = _graph(args)
    k, frac = giant_component_curve(g, removal_plan(g, args.rank_by))
    removed = k / g.n_communities
    if args.output_format == "csv":
        text = table_csv(("k", "fraction_removed", "giant_fraction"), zip(k, removed, frac))
    else:
        text = dumps({"k": k, "fraction_removed": removed, "giant_fraction": frac,
                      "provenance": _provenance(args)})
    _emit(args, text, "giant")


def cmd_cheeger(args) -> None:
    g = _graph(args)
    if args.local:
        plan = removal_plan(g, args.rank_by)
        cur = local_cheeger_curve(g, plan, weighted=args.weighted)
        removed = cur.k / g.n_communities
        if args.output_format == "csv":
            text = table_csv(("k", "fraction_removed", "local_cheeger", "boundary", "incident"),
                             zip(cur.k, removed, cur.value, cur.boundary, cur.incident))
        else:
            text = dumps({"k": cur.k, "fraction_removed": removed, "local_cheeger": cur.value,
                          "boundary": cur.boundary, "incident": cur.incident,
                          "provenance": _provenance(args)})
        return _emit(args, text, "cheeger")
    est = cheeger_bounds(g, tolerance=args.tolerance, weighted=args.weighted,
                         exact=False if args.no_exact else None)
    payload = {"lambda2": est.lambda2, "lower": est.lower, "upper": est.upper,
               "exact": est.exact, "weighted": est.weighted, "provenance": _provenance(args)}
    _emit(args, dumps(payload), "cheeger")


def cmd_generate(args) -> None:
    if args.topology is None:
        raise CLIError("--topology is required")
    g = _spec(args).build(args.seed)
    lines = ["user,community,weight"] + [f"{u},{c},{w}" for u, c, w in g.edge_records()]
    _emit(args, "\n".join(lines) + "\n", "generate")


def cmd_rewire(args) -> None:
    try:
        fractions = [float(f) for f in args.fractions.split(",") if f.strip()]
    except ValueError:
        raise CLIError(f"--fractions must be comma-separated numbers, got {args.fractions!r}")
    if _wants_ensemble(args):
        if args.config is not None:
            config = load_config(args.config)
        else:
            if args.topology is None:
                raise CLIError("--runs > 1 needs a generator (--topology)")
            config = ExperimentConfig(
                generator=_spec(args), metrics=("dauc",), rank_by=args.rank_by,
                weighted=args.weighted, seed=args.seed, runs=args.runs, jobs=args.jobs,
                rewiring=RewiringSettings(args.direction, tuple(fractions)),
            )
        return _emit(args, dumps(run_experiment(config).to_dict()), "rewire")
    g = _graph(args)
    from .rewiring import _sweep

    final, trace = _sweep(g, args.direction, fractions, args.seed, args.weighted,
                          RankKey(args.rank_by))
    if args.graph_out:
        lines = ["user,community,weight"] + [f"{u},{c},{w}" for u, c, w in final.edge_records()]
        write_text(args.graph_out, "\n".join(lines) + "\n")
    if args.output_format == "csv":
        text = table_csv(TRACE_COLUMNS, trace_rows(trace))
    else:
        text = dumps({**trace_dict(trace), "provenance": _provenance(args)})
    _emit(args, text, "rewire")


def cmd_analytic(args) -> None:
    if args.model is not None:
        model = read_model(args.model)
        sizes, degrees = model.sizes, model.degrees
    else:
        sizes, degrees = er_like_distributions(args.ratio, args.mean_memberships, args.trials)
        model = random_joint(sizes, degrees)
    if args.rho is None:
        cur = analytic_disruption(model)
        cols = ("n", "disruption", "u", "zero_denominator")
        rows = list(zip(cur.sizes, cur.D, cur.u, cur.zero_denominator))
        payload = {"n": cur.sizes, "disruption": cur.D, "u": cur.u,
                   "zero_denominator": cur.zero_denominator}
    else:
        if args.model is not None and not np.allclose(model.P, random_joint(sizes, degrees).P):
            logging.getLogger(__name__).warning(
                "--rho interpolates from the uncorrelated model; the file's joint matrix is ignored"
            )
        rel = correlation_experiment(sizes, degrees, args.rho, args.direction)
        cols = ("n", "disruption_random", "disruption_correlated", "relative_difference",
                "defined")
        rows = list(zip(rel.sizes, rel.baseline.D, rel.correlated.D, rel.value, rel.defined))
        payload = {"n": rel.sizes, "disruption_random": rel.baseline.D,
                   "disruption_correlated": rel.correlated.D,
                   "relative_difference": rel.value, "defined": rel.defined}
    if args.output_format == "csv":
        text = table_csv(cols, rows)
    else:
        text = dumps({**payload, "sizes": sizes.to_dict(), "degrees": degrees.to_dict(),
                      "provenance": _provenance(args)})
    _emit(args, text, "analytic")


def cmd_convert(args) -> None:
    ug = read_unipartite(args.input)
    g = convert_graph(ug, seed=args.seed, max_rounds=args.max_rounds)
    lines = ["user,community,weight"] + [f"{u},{c},{w}" for u, c, w in g.edge_records()]
    _emit(args, "\n".join(lines) + "\n", "convert")


def cmd_run(args) -> None:
    config = load_config(args.config)
    text = dumps(run_experiment(config).to_dict())
    if args.output is None and config.output is not None:
        args.output = config.output
    _emit(args, text, "run")


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="disruptnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"disruptnet {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("disrupt", help="cumulative disruption curve")
    _add_source(p)
    _add_ranking(p)
    _add_output(p)
    p.set_defaults(func=cmd_disrupt)

    p = sub.add_parser("dauc", help="area under the disruption curve (log space)")
    _add_source(p)
    p.add_argument("--curve", help="compute from a curve CSV written by 'disrupt'")
    _add_ranking(p)
    _add_output(p, "json", ("json",))
    p.set_defaults(func=cmd_dauc)

    p = sub.add_parser("population", help="cumulative population share, smallest first")
    _add_source(p)
    _add_ranking(p)
    _add_output(p)
    p.set_defaults(func=cmd_population)

    p = sub.add_parser("giant", help="giant component under removal")
    _add_source(p)
    _add_ranking(p)
    _add_output(p)
    p.set_defaults(func=cmd_giant)

    p = sub.add_parser("cheeger", help="spectral Cheeger bounds or local Cheeger curve")
    _add_source(p, ensemble=False)
    _add_ranking(p)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--local", action="store_true", help="ratio for removed prefixes instead")
    p.add_argument("--no-exact", action="store_true", help="skip brute force on small graphs")
    _add_output(p, "json")
    p.set_defaults(func=cmd_cheeger)

    p = sub.add_parser("generate", help="write a synthetic edge list")
    p.add_argument("--seed", type=int, default=0)
    _add_generator(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("rewire", help="assortativity rewiring sweep")
    _add_source(p)
    _add_ranking(p)
    p.add_argument("--direction", choices=[d.value for d in Direction], required=True)
    p.add_argument("--fractions", default="0,0.1,0.2,0.3,0.4,0.5",
                   help="comma-separated ascending swap fractions")
    p.add_argument("--graph-out", help="also write the final rewired edge list")
    _add_output(p)
    p.set_defaults(func=cmd_rewire)

    p = sub.add_parser("analytic", help="closed-form disruption per community size")
    p.add_argument("--model", help="JSON with 'sizes', 'degrees' and optional 'joint'")
    p.add_argument("--ratio", type=float, default=30.0, help="users per community")
    p.add_argument("--mean-memberships", type=float, default=1.2)
    p.add_argument("--trials", type=int, default=10, help="binomial trials for memberships")
    p.add_argument("--rho", type=float, help="interpolate toward an extreme coupling")
    p.add_argument("--direction", choices=[d.value for d in CorrelationDirection],
                   default=CorrelationDirection.TOWARD_MAX.value)
    _add_output(p)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("convert", help="unipartite source,target[,weight] to bipartite")
    p.add_argument("input")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("run", help="run a JSON experiment config")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_run)
    return parser


def _error(kind: str, message: str, code: int, **extra) -> int:
    payload = {"error": {"type": kind, "message": message, "exit_code": code, **extra}}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CLIError as err:
        return _error(err.kind, str(err), err.code)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except CLIError as err:
        return _error(err.kind, str(err), err.code)
    except FormatError as err:
        extra = {k: v for k, v in (("path", err.path), ("line", err.line)) if v is not None}
        return _error("format", str(err), EXIT_INPUT, **extra)
    except (GraphError, ExperimentError) as err:
        return _error("input", str(err), EXIT_INPUT)
    except ConvergenceError as err:
        return _error("convergence", str(err), EXIT_RUNTIME, residual=err.residual)
    except ValueError as err:
        return _error("value", str(err), EXIT_USAGE)
    except OSError as err:
        return _error("io", str(err), EXIT_RUNTIME)
    return 0


if __name__ == "__main__":
    sys.exit(main())
