import json

import numpy as np
import pytest

from disruptnet import (
    build_graph,
    dauc,
    disruption_curve,
    er_like_distributions,
    export_curve,
    extreme_joint,
    ingest_edge_list,
    random_joint,
    removal_plan,
    rewiring_sweep,
)
from disruptnet.io import (
    FormatError,
    fmt,
    read_curve,
    read_model,
    read_unipartite,
    write_edge_list,
    write_text,
)
from disruptnet.rewiring import RewiringTrace

from conftest import random_graph


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_ingest_with_duplicate(tmp_path):
    p = write(tmp_path, "e.csv", "user,community,weight\na,X,1\nb,X,2\na,X,3\n")
    g, report = ingest_edge_list(p)
    assert g.n_edges == 2
    assert report.rows == 3 and report.compressed == 1
    assert (report.users, report.communities, report.total_weight) == (2, 1, 6)


def test_ingest_weightless(tmp_path):
    p = write(tmp_path, "e.csv", "user,community\na,X\nb,Y\n")
    g, _ = ingest_edge_list(p)
    assert g.edge_weight.tolist() == [1, 1]


def test_ingest_tsv(tmp_path):
    p = write(tmp_path, "e.tsv", "user\tcommunity\tweight\na\tX\t4\n")
    g, _ = ingest_edge_list(p, "tsv")
    assert g.edge_records() == [("a", "X", 4)]


@pytest.mark.parametrize("text,line", [
    ("user,community\na,X\nb\n", 3),
    ("user,community,weight\na,X,zero\n", 2),
    ("user,community,weight\na,X,0\n", 2),
    ("user,community\n,X\n", 2),
])
def test_malformed_rows_report_line(tmp_path, text, line):
    p = write(tmp_path, "e.csv", text)
    with pytest.raises(FormatError) as info:
        ingest_edge_list(p)
    assert info.value.line == line
    assert f":{line}:" in str(info.value)


@pytest.mark.parametrize("text", ["", "a,X\nb,Y\n", "user,group\na,X\n", "user,community\n"])
def test_bad_header_or_empty(tmp_path, text):
    p = write(tmp_path, "e.csv", text)
    with pytest.raises(FormatError):
        ingest_edge_list(p)


def test_missing_file(tmp_path):
    with pytest.raises(FormatError) as info:
        ingest_edge_list(tmp_path / "nope.csv")
    assert "nope.csv" in str(info.value)


def test_round_trip(tmp_path):
    g = random_graph(np.random.default_rng(7))
    write_edge_list(g, tmp_path / "g.csv")
    h, _ = ingest_edge_list(tmp_path / "g.csv")
    assert h.same_as(g)


def test_unipartite_reader(tmp_path):
    p = write(tmp_path, "u.csv", "source,target,weight\na,b,2\nb,a,1\nb,c,1\n")
    g = read_unipartite(p)
    assert g.total_weight == 4 and len(g.weight) == 2
    with pytest.raises(FormatError):
        read_unipartite(write(tmp_path, "v.csv", "source,target\na,a\n"))


def test_fmt_twelve_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(2.0) == "2"
    assert fmt(np.int64(5)) == "5"
    assert fmt(True) == "true"


def test_curve_csv_rows(tmp_path, toy):
    curve = disruption_curve(toy, removal_plan(toy))
    export_curve(curve, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0].startswith("k,fraction_removed,disruption")
    assert len(lines) == 1 + 3
    assert lines[1].split(",")[:3] == ["1", "0.333333333333", "0.5"]


def test_curve_csv_round_trip_exact(tmp_path):
    g = random_graph(np.random.default_rng(3))
    curve = disruption_curve(g, removal_plan(g))
    export_curve(curve, tmp_path / "c.csv")
    back = read_curve(tmp_path / "c.csv")
    assert back.disruption.tolist() == curve.disruption.tolist()
    assert dauc(back) == dauc(curve)


def test_curve_json_round_trip(tmp_path):
    g = random_graph(np.random.default_rng(4))
    curve = disruption_curve(g, removal_plan(g))
    export_curve(curve, tmp_path / "c.json", "json", extra={"dauc": dauc(curve), "seeds": [1]})
    data = json.loads((tmp_path / "c.json").read_text())
    expected = [float(f"{x:.12g}") for x in curve.disruption]
    assert data["disruption"] == expected
    assert data["dauc"] == float(f"{dauc(curve):.12g}")
    assert data["seeds"] == [1]


def test_empty_trace_header_only(tmp_path):
    from disruptnet import Direction

    export_curve(RewiringTrace(Direction.INCREASE, 0, 10), tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text() == "target_fraction,metric,value\n"


def test_trace_long_format(tmp_path):
    from disruptnet import bipartite_er

    trace = rewiring_sweep(bipartite_er(10, 80, 0.2, seed=0), "increase", [0, 0.1], seed=0)
    export_curve(trace, tmp_path / "t.csv")
    rows = (tmp_path / "t.csv").read_text().splitlines()[1:]
    assert len(rows) == 2 * len(trace.points[0].as_row()) - 2
    assert {r.split(",")[1] for r in rows} >= {"dauc", "user_community_assortativity"}


def test_report_csv_rejected(tmp_path):
    with pytest.raises(FormatError):
        export_curve({"a": 1}, tmp_path / "r.csv", "csv")


def test_write_error_names_path(tmp_path):
    target = tmp_path / "file"
    target.write_text("x")
    with pytest.raises(OSError) as info:
        write_text(target / "sub.csv", "data")
    assert str(target / "sub.csv") in str(info.value)


def test_model_json(tmp_path):
    s, d = er_like_distributions()
    p = write(tmp_path, "m.json", json.dumps({"sizes": s.to_dict(), "degrees": d.to_dict()}))
    m = read_model(p)
    assert np.allclose(m.P, random_joint(s, d).P)
    mx = extreme_joint(s, d, "max")
    p = write(tmp_path, "n.json", json.dumps({"sizes": s.to_dict(), "degrees": d.to_dict(),
                                              "joint": mx.P.tolist()}))
    assert np.allclose(read_model(p).P, mx.P)
    with pytest.raises(FormatError):
        read_model(write(tmp_path, "bad.json", json.dumps({"sizes": {}})))
