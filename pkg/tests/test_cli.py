import json
import subprocess
import sys

import pytest

from biresolve.cli import run
from biresolve.graph import graph_to_dict
from biresolve.homomorphism import homomorphism_to_dict, identity_homomorphism
from biresolve.shift import code_from_homomorphism, code_to_dict, forbidden_shift, subshift_to_dict

from helpers import (
    ab_path_cover,
    disjoint_loops_over_loop,
    one_loop,
    single_a_loop,
    two_cycle,
    two_loop_codomain,
    two_loops_one_vertex,
)


@pytest.fixture
def write(tmp_path):
    def _write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)
    return _write


def hom_files(write, phi, tag="phi"):
    return (write(f"{tag}_g.json", graph_to_dict(phi.domain)),
            write(f"{tag}_h.json", graph_to_dict(phi.codomain)),
            write(f"{tag}.json", homomorphism_to_dict(phi)))


def test_exists_example(write, capsys):
    g = write("two_cycle.json", graph_to_dict(two_cycle()))
    h = write("loop.json", graph_to_dict(one_loop()))
    code, doc = run(["exists", g, h, "--mode", "eq", "--json"])
    assert code == 0
    assert doc["payload"]["S"]["rows"] == [[1], [1]]
    assert json.loads(capsys.readouterr().out) == doc


def test_exists_none_is_success(write):
    g = write("two.json", graph_to_dict(two_loops_one_vertex()))
    h = write("loop.json", graph_to_dict(one_loop()))
    code, doc = run(["exists", g, h, "--mode", "le", "--json"])
    assert code == 0 and doc["status"] == "none" and doc["payload"]["S"] is None


def test_exists_accepts_matrix_documents(write):
    g = write("m.json", {"order": ["1", "2"], "rows": [[0, 1], [1, 0]]})
    h = write("loop.json", {"order": ["v"], "rows": [[1]]})
    code, doc = run(["exists", g, h])
    assert code == 0 and doc["payload"]["S"]["rows"] == [[1], [1]]


def test_exists_timeout(write):
    k = 40
    n = 2 * k + 1
    rows = [[0] * n for _ in range(n)]
    for c in range(k):
        for i in (2 * c, 2 * c + 1):
            for j in (2 * c, 2 * c + 1):
                rows[i][j] = 1
    rows[n - 1][n - 1] = 2
    g = write("slow.json", {"order": [str(i) for i in range(n)], "rows": rows})
    h = write("h.json", {"order": ["A", "B"], "rows": [[1, 1], [1, 1]]})
    code, doc = run(["exists", g, h, "--timeout-ms", "50"])
    assert code == 4 and doc["payload"]["error"] == "SearchTimeout"


def test_hom_check_identity(write):
    g = write("g.json", graph_to_dict(two_cycle()))
    phi = write("id.json", homomorphism_to_dict(identity_homomorphism(two_cycle())))
    code, doc = run(["hom", "check", g, g, phi])
    assert code == 0
    prof = doc["payload"]["profile"]
    assert all(prof[k] for k in ("right_resolving", "left_resolving", "right_covering",
                                 "left_covering", "bi_resolving", "bi_covering"))


def test_graph_info(write):
    code, doc = run(["graph", "info", write("g.json", graph_to_dict(two_cycle())), "--json"])
    assert code == 0
    assert doc["payload"]["irreducible"] and doc["payload"]["spectral_radius"] == pytest.approx(1.0)


def test_bad_files(write, tmp_path):
    code, doc = run(["graph", "info", str(tmp_path / "missing.json")])
    assert code == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["graph", "info", str(bad)])[0] == 3
    dangling = write("d.json", {"vertices": ["1"], "edges": [{"id": "e", "src": "1", "dst": "2"}]})
    assert run(["graph", "info", dangling])[0] == 3
    g = write("g.json", graph_to_dict(two_cycle()))
    broken = write("phi.json", {"vertex_map": {"1": "1", "2": "2"}, "edge_map": {"e": "f", "f": "f"}})
    code, doc = run(["hom", "check", g, g, broken])
    assert code == 3 and doc["payload"]["error"] == "HomomorphismError"


def test_synthesize_and_verify(write, tmp_path):
    g = write("g.json", graph_to_dict(two_cycle()))
    h = write("h.json", graph_to_dict(one_loop()))
    s = write("s.json", {"row_order": ["1", "2"], "col_order": ["v"], "rows": [[1], [1]]})
    out = str(tmp_path / "rep.json")
    code, doc = run(["synthesize", g, h, s, "--mode", "eq", "--out", out])
    assert code == 0 and all(c["pass"] for c in doc["checks"])
    code, doc = run(["verify", out])
    assert code == 0 and doc["checks"]

    lone = write("lone.json", {"vertices": ["x"], "edges": []})
    s1 = write("s1.json", {"row_order": ["x"], "col_order": ["v"], "rows": [[1]]})
    code, doc = run(["synthesize", lone, h, s1, "--mode", "le", "--out", out])
    assert code == 0 and doc["payload"]["extension"]["new_edges"] == ["pad:v>v#0"]
    assert run(["verify", out])[0] == 0


def test_synthesize_relation_failure(write):
    g = write("g.json", graph_to_dict(two_loops_one_vertex()))
    h = write("h.json", graph_to_dict(one_loop()))
    s = write("s.json", {"row_order": ["v"], "col_order": ["v"], "rows": [[1]]})
    assert run(["synthesize", g, h, s])[0] == 2


def test_extend_same_rejects_disconnected(write):
    g, h, phi = hom_files(write, disjoint_loops_over_loop())
    code, doc = run(["extend", g, h, phi, "--degree", "same"])
    assert code == 2
    assert doc["payload"]["message"] == "weakly connected hypothesis fails"
    assert doc["payload"]["diagnosis"]["holds"]


def test_extend_degree_n_and_verify(write, tmp_path):
    g, h, phi = hom_files(write, single_a_loop())
    out = str(tmp_path / "ext.json")
    code, doc = run(["extend", g, h, phi, "--degree", "2", "--out", out])
    assert code == 0 and doc["payload"]["degree"] == 2
    assert all(s["connected"] and s["covers_all"] for s in doc["payload"]["merge_steps"])
    code, vdoc = run(["verify", out])
    assert code == 0 and len(vdoc["checks"]) >= 4


def test_extend_bad_degree(write):
    g, h, phi = hom_files(write, single_a_loop())
    assert run(["extend", g, h, phi, "--degree", "many"])[0] == 3


def test_degree(write):
    g, h, phi = hom_files(write, ab_path_cover())
    code, doc = run(["degree", g, h, phi, "--json"])
    assert code == 0
    assert (doc["payload"]["d"], doc["payload"]["N"], doc["payload"]["vertex_degree"]) == (1, 2, 2)


def test_closing(write):
    from biresolve.homomorphism import GraphHomomorphism
    phi = GraphHomomorphism(two_loops_one_vertex(), one_loop(), {"v": "v"}, {"e": "a", "f": "a"})
    path = write("code.json", code_to_dict(code_from_homomorphism(phi)))
    code, doc = run(["closing", path])
    assert code == 0
    assert not doc["payload"]["right_closing"] and not doc["payload"]["left_closing"]
    code, vdoc = run(["verify", path])
    assert code == 0


@pytest.mark.parametrize("n", [1, 2])
def test_extend_code_and_verify(write, tmp_path, n):
    g, h, phi = hom_files(write, single_a_loop())
    out = str(tmp_path / f"ec{n}.json")
    code, doc = run(["extend-code", g, h, phi, "--n", str(n), "--out", out])
    assert code == 0 and doc["payload"]["part"] == n
    assert all(c["pass"] for c in doc["checks"])
    assert run(["verify", out])[0] == 0


def test_extend_code_perron_failure(write):
    g, h, phi = hom_files(write, identity_homomorphism(two_loop_codomain()))
    code, doc = run(["extend-code", g, h, phi, "--n", "2"])
    assert code == 2 and doc["payload"]["hypothesis"] == "Perron"


def test_approx_extend(write):
    orbit = forbidden_shift(["a", "b"], ["aa", "bb"])
    x = write("x.json", subshift_to_dict(orbit))
    code_doc = {"codomain": {"kind": "edge", "graph": graph_to_dict(two_loop_codomain())},
                "memory": 0, "anticipation": 0, "blocks": {"a": "a", "b": "b"}}
    c = write("code.json", code_doc)
    code, doc = run(["approx-extend", x, c, "--n", "2"])
    assert code == 0 and doc["payload"]["k"] == 2

    full = write("full.json", subshift_to_dict(forbidden_shift(["a", "b"], [])))
    code, doc = run(["approx-extend", full, c, "--n", "2"])
    assert code == 2 and doc["payload"]["hypothesis"] == "entropy"


def test_determinism(write):
    g, h, phi = hom_files(write, single_a_loop())
    first = run(["extend-code", g, h, phi, "--n", "2", "--json"])
    second = run(["extend-code", g, h, phi, "--n", "2", "--json"])
    assert first == second


def test_text_output(write, capsys):
    g = write("g.json", graph_to_dict(two_cycle()))
    run(["graph", "info", g])
    out = capsys.readouterr().out
    assert out.startswith("graph info: ok")


def test_console_entry_point(tmp_path):
    g = tmp_path / "g.json"
    g.write_text(json.dumps(graph_to_dict(one_loop())))
    proc = subprocess.run([sys.executable, "-m", "biresolve.cli", "graph", "info", str(g), "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["payload"]["vertices"] == 1
