"""CSV/JSON readers and writers.

Numbers are written with 12 significant digits. JSON is written with
sorted keys and no timestamps so repeated runs give identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .graph import BipartiteGraph, build_graph, GraphError
from .metrics import DisruptionCurve
from .rewiring import RewiringTrace
from .unipartite import UnipartiteGraph

SIG_DIGITS = 12


class FormatError(ValueError):
    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = str(path) if path is not None else None
        self.line = line


def fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return format(x, f".{SIG_DIGITS}g")
    return str(x)


def round_sig(x: float) -> float:
    return float(format(float(x), f".{SIG_DIGITS}g"))


def jsonable(obj: Any) -> Any:
    """Convert numpy values and containers to plain JSON types, rounding floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) or math.isinf(x) else round_sig(x)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(payload: Any) -> str:
    return json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror or err}") from err


# -- bipartite edge lists ---------------------------------------------------


@dataclass(frozen=True)
class IngestReport:
    path: str
    rows: int
    compressed: int
    communities: int
    users: int
    edges: int
    total_weight: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _open_rows(path: Path, delimiter: str):
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as err:
        raise FormatError(f"cannot open: {err.strerror or err}", path) from err
    return fh, csv.reader(fh, delimiter=delimiter)


def ingest_edge_list(path: str | Path, format: str = "csv") -> tuple[BipartiteGraph, IngestReport]:
    """Read a ``user,community[,weight]`` table into a graph.

    ``format`` is ``csv`` or ``tsv``. Missing weights default to 1.
    """
    path = Path(path)
    delimiter = {"csv": ",", "tsv": "\t"}.get(format)
    if delimiter is None:
        raise FormatError(f"unknown edge-list format {format!r}")
    fh, reader = _open_rows(path, delimiter)
    records = []
    with fh:
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("file is empty", path) from None
        except UnicodeDecodeError as err:
            raise FormatError(f"not UTF-8: {err.reason}", path, 1) from None
        cols = [h.strip().lower() for h in header]
        if cols[:2] != ["user", "community"] or len(cols) > 3 or (
            len(cols) == 3 and cols[2] != "weight"
        ):
            raise FormatError("header must be 'user,community[,weight]'", path, 1)
        has_weight = len(cols) == 3
        try:
            for row in reader:
                line = reader.line_num
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(cols):
                    raise FormatError(f"expected {len(cols)} fields, got {len(row)}", path, line)
                user, comm = row[0].strip(), row[1].strip()
                if not user or not comm:
                    raise FormatError("empty identifier", path, line)
                weight = 1
                if has_weight and row[2].strip():
                    try:
                        weight = int(row[2])
                    except ValueError:
                        raise FormatError(f"weight {row[2]!r} is not an integer", path,
                                          line) from None
                    if weight < 1:
                        raise FormatError(f"weight must be >= 1, got {weight}", path, line)
                records.append((user, comm, weight))
        except UnicodeDecodeError as err:
            raise FormatError(f"not UTF-8: {err.reason}", path, reader.line_num + 1) from None
    if not records:
        raise FormatError("no edge rows", path)
    try:
        g = build_graph(records)
    except GraphError as err:
        raise FormatError(str(err), path) from err
    report = IngestReport(
        path=str(path),
        rows=len(records),
        compressed=len(records) - g.n_edges,
        communities=g.n_communities,
        users=g.n_users,
        edges=g.n_edges,
        total_weight=g.total_weight,
    )
    return g, report


def write_edge_list(g: BipartiteGraph, path: str | Path) -> None:
    lines = ["user,community,weight"]
    lines += [f"{u},{c},{w}" for u, c, w in g.edge_records()]
    write_text(path, "\n".join(lines) + "\n")


def read_unipartite(path: str | Path) -> UnipartiteGraph:
    """Read a ``source,target[,weight]`` table."""
    path = Path(path)
    fh, reader = _open_rows(path, ",")
    records = []
    with fh:
        header = next(reader, None)
        if header is None:
            raise FormatError("file is empty", path)
        cols = [h.strip().lower() for h in header]
        if cols[:2] != ["source", "target"] or len(cols) > 3 or (
            len(cols) == 3 and cols[2] != "weight"
        ):
            raise FormatError("header must be 'source,target[,weight]'", path, 1)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(cols):
                raise FormatError(f"expected {len(cols)} fields, got {len(row)}", path, line)
            a, b = row[0].strip(), row[1].strip()
            if not a or not b:
                raise FormatError("empty identifier", path, line)
            if a == b:
                raise FormatError("self-loop", path, line)
            w = 1
            if len(cols) == 3 and row[2].strip():
                try:
                    w = int(row[2])
                except ValueError:
                    raise FormatError(f"weight {row[2]!r} is not an integer", path, line) from None
                if w < 1:
                    raise FormatError(f"weight must be >= 1, got {w}", path, line)
            records.append((a, b, w))
    if not records:
        raise FormatError("no edge rows", path)
    return UnipartiteGraph.from_records(records)


def write_unipartite(g: UnipartiteGraph, path: str | Path) -> None:
    lines = ["source,target,weight"]
    lines += [
        f"{g.node_ids[a]},{g.node_ids[b]},{w}"
        for a, b, w in zip(g.source.tolist(), g.target.tolist(), g.weight.tolist())
    ]
    write_text(path, "\n".join(lines) + "\n")


# -- curves and tables ------------------------------------------------------


def table_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    out = [",".join(columns)]
    out += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(out) + "\n"


CURVE_COLUMNS = (
    "k", "fraction_removed", "disruption",
    "surviving_users", "cut_weight", "original_weight",
)


def curve_rows(curve: DisruptionCurve) -> list[tuple]:
    return list(zip(
        curve.k.tolist(), curve.fraction_removed.tolist(), curve.disruption.tolist(),
        curve.surviving_users.tolist(), curve.cut_weight.tolist(),
        curve.original_weight.tolist(),
    ))


def curve_dict(curve: DisruptionCurve) -> dict:
    return {
        "weighted": curve.weighted,
        "n_communities": curve.n_communities,
        "k": curve.k,
        "fraction_removed": curve.fraction_removed,
        "disruption": curve.disruption,
        "surviving_users": curve.surviving_users,
        "cut_weight": curve.cut_weight,
        "original_weight": curve.original_weight,
    }


TRACE_COLUMNS = ("target_fraction", "metric", "value")


def trace_rows(trace: RewiringTrace) -> list[tuple]:
    """Long format: one row per checkpoint and metric."""
    rows = []
    for p in trace.points:
        row = p.as_row()
        target = row.pop("target_fraction")
        for name, value in row.items():
            rows.append((target, name, value))
    return rows


def trace_dict(trace: RewiringTrace) -> dict:
    return {
        "direction": trace.direction.value,
        "seed": trace.seed,
        "n_edges": trace.n_edges,
        "complete": trace.complete,
        "points": [p.as_row() for p in trace.points],
    }


def read_curve(path: str | Path) -> DisruptionCurve:
    """Read a curve CSV written by :func:`export_curve`.

    When the integer columns are present the curve is rebuilt exactly;
    otherwise the rounded ``disruption`` column is used as-is.
    """
    path = Path(path)
    fh, reader = _open_rows(path, ",")
    with fh:
        header = next(reader, None)
        if header is None:
            raise FormatError("file is empty", path)
        cols = [h.strip() for h in header]
        if cols[:3] != ["k", "fraction_removed", "disruption"]:
            raise FormatError("header must start with 'k,fraction_removed,disruption'", path, 1)
        rows = [r for r in reader if r]
    if not rows:
        raise FormatError("no curve rows", path)
    data = {c: [r[i] for r in rows] for i, c in enumerate(cols)}
    k = np.array([int(v) for v in data["k"]])
    n = len(k)
    if not np.array_equal(k, np.arange(1, n + 1)):
        raise FormatError("k must run 1..C", path)
    if all(c in data for c in ("cut_weight", "original_weight", "surviving_users")):
        return DisruptionCurve(
            k=k, n_communities=n,
            cut_weight=np.array([int(v) for v in data["cut_weight"]]),
            original_weight=np.array([int(v) for v in data["original_weight"]]),
            surviving_users=np.array([int(v) for v in data["surviving_users"]]),
            weighted=True,
        )
    return _FloatCurve(k=k, values=np.array([float(v) for v in data["disruption"]]))


@dataclass(frozen=True, eq=False)
class _FloatCurve:
    k: np.ndarray
    values: np.ndarray

    @property
    def disruption(self) -> np.ndarray:
        return self.values


def export_curve(obj: Any, path: str | Path, format: str = "csv", extra: dict | None = None) -> None:
    """Write a disruption curve, rewiring trace, or report dict.

    Reports (plain dicts) are JSON only. ``extra`` is merged into JSON output,
    typically the config echo, seeds and DAUC.
    """
    if format not in ("csv", "json"):
        raise FormatError(f"unknown output format {format!r}")
    if isinstance(obj, DisruptionCurve):
        if format == "csv":
            text = table_csv(CURVE_COLUMNS, curve_rows(obj))
        else:
            text = dumps({**curve_dict(obj), **(extra or {})})
    elif isinstance(obj, RewiringTrace):
        if format == "csv":
            text = table_csv(TRACE_COLUMNS, trace_rows(obj))
        else:
            text = dumps({**trace_dict(obj), **(extra or {})})
    elif isinstance(obj, dict):
        if format == "csv":
            raise FormatError("reports are written as JSON")
        text = dumps({**obj, **(extra or {})})
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    write_text(path, text)


# -- analytic models --------------------------------------------------------


def _distribution(d: Any, name: str, path: Path):
    from .analytic import Distribution

    if not isinstance(d, dict) or "support" not in d or "probs" not in d:
        raise FormatError(f"'{name}' must be an object with 'support' and 'probs'", path)
    try:
        return Distribution.of(d["support"], d["probs"])
    except (TypeError, ValueError) as err:
        raise FormatError(f"'{name}': {err}", path) from err


def read_model(path: str | Path):
    """Read ``{"sizes": {...}, "degrees": {...}}`` with an optional ``"joint"`` matrix.

    Returns a :class:`~disruptnet.analytic.JointDegreeModel`; without a
    joint matrix the uncorrelated one is used.
    """
    from .analytic import JointDegreeModel, random_joint

    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise FormatError(f"cannot read: {err.strerror or err}", path) from err
    except json.JSONDecodeError as err:
        raise FormatError(f"invalid JSON: {err.msg}", path, err.lineno) from err
    if not isinstance(data, dict):
        raise FormatError("model must be a JSON object", path)
    sizes = _distribution(data.get("sizes"), "sizes", path)
    degrees = _distribution(data.get("degrees"), "degrees", path)
    if data.get("joint") is None:
        return random_joint(sizes, degrees)
    try:
        P = np.asarray(data["joint"], dtype=float)
        return JointDegreeModel(sizes, degrees, P / P.sum())
    except (TypeError, ValueError) as err:
        raise FormatError(f"'joint': {err}", path) from err


def model_dict(model) -> dict:
    return {"sizes": model.sizes.to_dict(), "degrees": model.degrees.to_dict(), "joint": model.P}
