import json
from fractions import Fraction as F

import pytest

from conedensity import (
    Generator, GraphPoint, MetricGraph, TwistedComplex, constant,
    distance_cone, docio,
)
from conedensity.cli import main

V = GraphPoint.V


@pytest.fixture
def workdir(tmp_path):
    g = MetricGraph(("v0", "v1", "v2"), (("v0", "v1", F(1)), ("v1", "v2", F(1))))
    (tmp_path / "g.json").write_text(docio.dumps(docio.graph_doc(g)))
    flat = TwistedComplex(g, (Generator(constant(g, F(1)), 0),), (0,))
    (tmp_path / "f.json").write_text(docio.dumps(docio.cx_doc(flat)))
    ca = TwistedComplex(g, (Generator(distance_cone(g, V("v0")), 0),), (0,))
    cb = TwistedComplex(g, (Generator(distance_cone(g, V("v2"), base=F(1, 2)), 0),),
                        (0,))
    (tmp_path / "a.json").write_text(docio.dumps(docio.cx_doc(ca)))
    (tmp_path / "b.json").write_text(docio.dumps(docio.cx_doc(cb)))
    pair = TwistedComplex(
        g, (Generator(distance_cone(g, V("v0")), 0),
            Generator(distance_cone(g, V("v2"), base=F(5, 2)), 1)), (2, 0))
    (tmp_path / "pair.json").write_text(docio.dumps(docio.cx_doc(pair)))
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for name, cx in (("c0.json", ca), ("c1.json", cb)):
        (corpus / name).write_text(docio.dumps(docio.cx_doc(cx)))
    return tmp_path


def test_densify_then_verify(workdir, capsys):
    report = workdir / "report.json"
    code = main(["densify", "--graph", str(workdir / "g.json"),
                 "--sheaf", str(workdir / "f.json"),
                 "--epsilon", "1/4", "--out", str(report)])
    assert code == 0
    out = capsys.readouterr().out
    assert "certified" in out and "2 layers" in out
    assert main(["verify", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["kind"] == "densify"
    assert doc["version"]
    assert doc["replay"].startswith("conedensity densify")


def test_verify_rejects_tampering(workdir):
    report = workdir / "report.json"
    main(["densify", "--sheaf", str(workdir / "f.json"),
          "--epsilon", "1/4", "--out", str(report)])
    doc = json.loads(report.read_text())
    doc["certificate"]["u"]["cols"][0] = []
    bad = workdir / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["verify", str(bad)]) == 2


def test_verify_missing_file_is_input_error(workdir):
    assert main(["verify", str(workdir / "nope.json")]) == 4


def test_distance_exact(workdir, capsys):
    code = main(["distance", str(workdir / "a.json"), str(workdir / "b.json"),
                 "--exact"])
    assert code == 0
    assert "distance: 4" in capsys.readouterr().out


def test_distance_bounds_report_replays(workdir):
    out = workdir / "dist.json"
    code = main(["distance", str(workdir / "a.json"), str(workdir / "b.json"),
                 "--bounds", "--samples", "4", "--out", str(out)])
    assert code == 0
    assert main(["verify", str(out)]) == 0


def test_distance_rejects_mismatched_graphs(workdir, tmp_path):
    other = MetricGraph(("w0", "w1"), (("w0", "w1", F(2)),))
    cx = TwistedComplex(other, (Generator(constant(other, F(0)), 0),), (0,))
    alien = tmp_path / "alien.json"
    alien.write_text(docio.dumps(docio.cx_doc(cx)))
    assert main(["distance", str(workdir / "a.json"), str(alien)]) == 4


def test_decompose_vertex_and_edge_points(workdir, capsys):
    out = workdir / "dec.json"
    code = main(["decompose", "--sheaf", str(workdir / "pair.json"),
                 "--point", "v1", "--out", str(out)])
    assert code == 0
    assert "[1, 7/2)" in capsys.readouterr().out
    assert main(["verify", str(out)]) == 0
    assert main(["decompose", "--sheaf", str(workdir / "pair.json"),
                 "--point", "e0:1/2"]) == 0
    assert "[1/2, 4)" in capsys.readouterr().out
    assert main(["decompose", "--sheaf", str(workdir / "pair.json"),
                 "--point", "zz"]) == 4


def test_irdim_corpus(workdir, capsys):
    out = workdir / "ir.json"
    code = main(["irdim", "--corpus", str(workdir / "corpus"),
                 "--epsilon", "1/4", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "2 layers" in text
    assert main(["verify", str(out)]) == 0


def test_bad_epsilon_and_bad_graph(workdir, tmp_path):
    assert main(["densify", "--sheaf", str(workdir / "f.json"),
                 "--epsilon", "0"]) == 4
    bad = tmp_path / "badg.json"
    bad.write_text('{"schema": "conedensity/graph@1", "vertices": ["a"],'
                   ' "edges": [{"a": "a", "b": "a", "len": "0"}]}')
    assert main(["densify", "--graph", str(bad),
                 "--sheaf", str(workdir / "f.json"), "--epsilon", "1/4"]) == 4


def test_non_lipschitz_input_is_input_error(workdir, tmp_path):
    g = docio.parse_graph(docio.loads((workdir / "g.json").read_text()))
    steep = TwistedComplex(
        g, (Generator(distance_cone(g, V("v0"), slope=2), 0),), (0,))
    p = tmp_path / "steep.json"
    p.write_text(docio.dumps(docio.cx_doc(steep)))
    assert main(["densify", "--sheaf", str(p), "--epsilon", "1/4"]) == 4


def test_reports_identical_across_thread_counts(workdir):
    r1, r2 = workdir / "r1.json", workdir / "r2.json"
    common = ["densify", "--graph", str(workdir / "g.json"),
              "--sheaf", str(workdir / "f.json"), "--epsilon", "1/4"]
    assert main(common + ["--out", str(r1), "--threads", "1"]) == 0
    assert main(common + ["--out", str(r2), "--threads", "3"]) == 0
    assert r1.read_bytes() == r2.read_bytes()
