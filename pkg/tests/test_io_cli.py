import json

import networkx as nx
import pytest

from branchflip import io
from branchflip.builders import NAMED, distinguished_branched, klein_bigons, sphere3
from branchflip.cli import main
from branchflip.errors import SchemaError
from branchflip.moves import BFlip, InvertEdge, MoveLog, Stellar13, bflip_choices, replay, state_key
from branchflip.transit import components, connect_by_inversions, inversion_graph
from branchflip.verify import Report, verify_theorems, write_report


def _doc(b, log=None):
    return io.Document(b.triangulation, b.branching, log, {"k": 1})


@pytest.mark.parametrize("name", sorted(NAMED))
def test_round_trip_named(name):
    d = _doc(NAMED[name]())
    text = io.emit(d)
    back = io.parse(text)
    assert back.triangulation.glue == d.triangulation.glue
    assert back.triangulation.labels == d.triangulation.labels
    assert back.branching == d.branching
    assert io.emit(back) == text


def test_round_trip_with_log(tmp_path):
    b = distinguished_branched("T2", 2)
    B = b.branching
    moves = [Stellar13(0), InvertEdge(0)]
    B1 = replay(B, moves[:1])
    e = next(e for e in range(B1.owner.E) if not B1.owner.edges[e].trapped)
    moves[1] = BFlip(e, bflip_choices(B1, e)[0])
    log = MoveLog(state_key(B), moves)
    d = io.Document(b.triangulation, B, log)
    path = tmp_path / "d.json"
    io.save(d, path)
    back = io.load(path)
    assert back.log == log
    assert replay(back.branching, back.log) == replay(B, moves)


def test_triangulation_only_document():
    T = sphere3().triangulation
    back = io.parse(io.emit(io.Document(T)))
    assert back.branching is None and back.log is None


def _valid():
    return io.Document(sphere3().triangulation, sphere3().branching).to_json()


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d["triangulation"]["gluings"][0].__setitem__(3, 7), "triangulation/gluings/0/3"),
    (lambda d: d["triangulation"]["gluings"][1].pop(), "triangulation/gluings/1"),
    (lambda d: d.__setitem__("format_version", 9), "format_version"),
    (lambda d: d["triangulation"].pop("labels"), "triangulation"),
    (lambda d: d["branching"]["orient"].__setitem__(0, 2), "branching/orient/0"),
    (lambda d: d["branching"].__setitem__("orient", [0, 1]), "branching/orient"),
    (lambda d: d["triangulation"]["gluings"][0].__setitem__(0, 5), "triangulation/gluings/0"),
    (lambda d: d["triangulation"]["gluings"].pop(), "triangulation/gluings"),
    (lambda d: d.__setitem__("extra", 1), "/"),
])
def test_schema_errors_carry_paths(mutate, path):
    d = _valid()
    mutate(d)
    with pytest.raises(SchemaError) as exc:
        io.from_json(d)
    assert exc.value.path == path


def test_cyclic_orientation_rejected():
    d = _valid()
    T = sphere3().triangulation
    from branchflip.branching import enumerate_branchings
    good = {b.orient for b in enumerate_branchings(T)}
    bad = next(o for o in ((a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)) if o not in good)
    d["branching"]["orient"] = list(bad)
    with pytest.raises(SchemaError) as exc:
        io.from_json(d)
    assert exc.value.path == "branching/orient"


def test_not_json():
    with pytest.raises(SchemaError):
        io.parse("{nope")


def test_export_dot_sphere():
    T = sphere3().triangulation
    text = io.export_dot(inversion_graph(T), T)
    assert text.startswith("digraph")
    assert text.count("[label=") == 6
    assert text.count("->") == inversion_graph(T).number_of_edges()
    assert io.export_dot(inversion_graph(T), T) == text


def test_export_dot_empty_graph():
    assert io.export_dot(nx.Graph()) == "digraph branchings {\n}\n"


def test_export_dot_census():
    from branchflip.transit import bounded_bflip_census

    c = bounded_bflip_census([sphere3().branching], 1000, keep_graph=True)
    text = io.export_dot(c)
    assert text.count("[label=") == c.explored
    assert text.count("->") == len(c.edges)


# -- CLI --------------------------------------------------------------------------

def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_build_and_read_back(capsys, tmp_path):
    p = tmp_path / "t.json"
    assert _run(capsys, "build", "T2:2", "-o", str(p))[0] == 0
    code, out, _ = _run(capsys, "branchings", str(p), "--count")
    assert code == 0 and int(out) > 0
    code, out, _ = _run(capsys, "build", "Sg2:1", "--seed", "3", "--walk", "10")
    assert code == 0 and io.parse(out).triangulation.euler == -2


def test_cli_branchings_list(capsys):
    code, out, _ = _run(capsys, "branchings", "sphere3")
    assert code == 0 and len(out.splitlines()) == 6


def test_cli_classify_flips(capsys):
    code, out, _ = _run(capsys, "classify-flips", "klein_bigons")
    rows = json.loads(out)
    assert code == 0 and sum(r.get("trapped", False) for r in rows) == 2
    code, out, _ = _run(capsys, "classify-flips", "torus1", "--index", "0")
    assert {r["class"] for r in json.loads(out)} <= {"non-ambiguous", "forced-ambiguous", "inverse-forced", "bump"}


def test_cli_connect_methods(capsys, tmp_path):
    for method in ("inversions", "strategy-b", "complete"):
        p = tmp_path / f"{method}.json"
        code, _, err = _run(capsys, "connect", "T2:2", "--index", "0", "--to-index", "3", "--method", method,
                            "-o", str(p))
        assert code == 0, err
        rep = json.loads(p.read_text())
        assert rep["success"] and rep["endpoint_key"]
        assert all({"move", "lemma_tag", "delta_size"} <= set(s) for s in rep["steps"])


def test_cli_connect_klein_bigons(capsys):
    code, _, err = _run(capsys, "connect", "klein_bigons", "--index", "0", "--to-index", "1")
    assert code == 3 and "TrappedEdgesPresent" in err
    code, _, err = _run(capsys, "connect", "klein_bigons", "--index", "0", "--to-index", "1", "--allow-trapped")
    assert code == 2 and "NotConnected" in err
    code, out, _ = _run(capsys, "connect", "klein_bigons", "--index", "0", "--to-index", "1", "--allow-trapped",
                        "--symmetrized")
    assert code == 0 and json.loads(out)["symmetrized"]


def test_cli_census(capsys):
    code, out, _ = _run(capsys, "census", "sphere3", "--budget", "1000")
    assert code == 0 and json.loads(out)["components"] == [[0, 1, 2, 3, 4, 5]]
    code, _, err = _run(capsys, "census", "sphere3", "--budget", "0")
    assert code == 3
    code, _, err = _run(capsys, "census", "sphere3", "--budget", "3")
    assert code == 2 and "BudgetExhausted" in err


def test_cli_dual(capsys):
    code, out, _ = _run(capsys, "dual", "torus1", "--cycles")
    data = json.loads(out)
    assert code == 0 and data["dimension"] == 2 and data["branches"] == 3
    code, out, _ = _run(capsys, "dual", "torus1", "--cone", "0,0,0")
    assert json.loads(out)["cone"] == "boundary"
    code, _, err = _run(capsys, "dual", "torus1", "--cone", "1,0,0")
    assert code == 3


def test_cli_export_dot(capsys):
    code, out, _ = _run(capsys, "export-dot", "sphere3")
    assert code == 0 and out.count("[label=") == 6


@pytest.mark.parametrize("argv", [
    ["branchings", "no_such_thing"],
    ["classify-flips", "torus1", "--bits", "01"],
    ["classify-flips", "torus1", "--index", "999"],
    ["build", "Q9:1"],
    ["branchings", "S2:1"],
])
def test_cli_input_errors_exit_3(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 3 and err.startswith("error:")


def test_cli_bad_document_exit_3(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"format_version": 1, "triangulation": {"triangles": 1, "gluings": [], "labels": [[0,0,0]]}}')
    code, _, err = _run(capsys, "branchings", str(p))
    assert code == 3


def test_verify_empty_corpus(tmp_path):
    r = verify_theorems([])
    assert r.rows == [] and r.ok
    files = write_report(r, tmp_path)
    assert json.loads((tmp_path / "report.json").read_text()) == {"ok": True, "rows": []}
    assert (tmp_path / "report.tsv").read_text().splitlines() == ["claim\tinstance\tstatus\tpassed\tdetail"]
    assert len(files) == 2


def test_verify_small_corpus_writes_figures(tmp_path, capsys):
    corpus = tmp_path / "c.json"
    corpus.write_text(json.dumps({"instances": [{"surface": "T2", "n": 1}, {"name": "klein_bigons"}]}))
    out = tmp_path / "out"
    code, stdout, _ = _run(capsys, "verify-theorems", "--corpus", str(corpus), "--out", str(out))
    assert code == 0
    assert all(line.startswith("PASS") for line in stdout.splitlines())
    names = {p.name for p in out.iterdir()}
    assert {"report.json", "report.tsv", "delta_trace.png", "inversion_graph_T2_1.png",
            "inversion_graph_klein_bigons.png"} <= names
    rows = json.loads((out / "report.json").read_text())["rows"]
    claims = {r["claim"] for r in rows}
    assert {"inversion-connectivity", "complete-transit", "inversive-trapped-free", "paired-connector",
            "cycle-dimension"} <= claims


def test_verify_reports_failure_exit_2(tmp_path, capsys, monkeypatch):
    import branchflip.verify as v

    monkeypatch.setattr(v, "components", lambda *a, **k: [[0], [1]])
    corpus = tmp_path / "c.json"
    corpus.write_text(json.dumps([{"name": "sphere3"}]))
    code, stdout, _ = _run(capsys, "verify-theorems", "--corpus", str(corpus), "--no-figures")
    assert code == 2 and "FAIL" in stdout
