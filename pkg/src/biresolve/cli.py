"""Command-line interface.

Every command prints a report: human-readable by default, or with ``--json``
the document ``{"command", "status", "payload", "checks"}``. ``verify`` reads
such a document back and re-runs the applicable checks.

Exit codes: 0 ok or none, 1 a verification check failed, 2 a precondition
failed, 3 malformed input, 4 timeout or cap reached.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import __version__
from .errors import (
    CapReached,
    FormatError,
    GraphError,
    HomomorphismError,
    PreconditionError,
    SearchTimeout,
    UnsupportedPresentation,
)
from .extension import (
    ExtensionResult,
    bicovering_completion,
    irreducible_extension_degree_n,
    irreducible_extension_same_degree,
    perron_obstruction_check,
)
from .graph import (
    DirectedMultigraph,
    connectivity,
    graph_from_dict,
    graph_from_matrix,
    graph_spectral_radius,
    graph_to_dict,
    is_essential,
    is_irreducible,
    matrix_from_dict,
    strongly_connected_components,
)
from .homomorphism import (
    GraphHomomorphism,
    SubamalgamationMatrix,
    homomorphism_from_dict,
    homomorphism_to_dict,
    matrix_from_vertex_map,
    matrix_relations,
    resolving_profile,
    vertex_degree,
)
from .shift import (
    approximate_and_extend,
    closing_profile,
    code_from_dict,
    code_to_dict,
    count_preimages,
    extend_biclosing_code,
    periodic_points,
    point_degree,
    subshift_from_dict,
    subshift_to_dict,
    validate_code,
    word_str,
)
from .synthesis import bicovering_with_blocks, build_biresolving, find_subamalgamation

EXIT_OK, EXIT_CHECK, EXIT_PRECONDITION, EXIT_FORMAT, EXIT_CAP = 0, 1, 2, 3, 4


@dataclass
class Report:
    command: str
    status: str = "ok"
    payload: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.checks.append({"name": name, "pass": bool(passed), "detail": detail})

    def to_dict(self) -> dict:
        return {"command": self.command, "status": self.status,
                "payload": _jsonable(self.payload), "checks": self.checks}


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# -- loading -----------------------------------------------------------------------

def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise FormatError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def _graph_doc(doc) -> DirectedMultigraph:
    if isinstance(doc, dict) and "rows" in doc:
        m, order = matrix_from_dict(doc)
        return graph_from_matrix(m, order)
    try:
        return graph_from_dict(doc)
    except GraphError as exc:
        raise FormatError(str(exc)) from exc


def load_graph(path: str) -> DirectedMultigraph:
    return _graph_doc(_read_json(path))


def load_homomorphism(g: DirectedMultigraph, h: DirectedMultigraph, path: str) -> GraphHomomorphism:
    return homomorphism_from_dict(g, h, _read_json(path))


def hom_payload(phi: GraphHomomorphism) -> dict:
    return {"domain": graph_to_dict(phi.domain), "codomain": graph_to_dict(phi.codomain),
            "homomorphism": homomorphism_to_dict(phi)}


def hom_from_payload(doc) -> GraphHomomorphism:
    return homomorphism_from_dict(_graph_doc(doc["domain"]), _graph_doc(doc["codomain"]),
                                  doc["homomorphism"])


# -- commands ----------------------------------------------------------------------------

def cmd_graph_info(args) -> Report:
    g = load_graph(args.graph)
    rep = connectivity(g)
    lam = graph_spectral_radius(g)
    r = Report("graph info")
    r.payload = {
        "vertices": len(g.vertices), "edges": len(g.edges),
        "strong_components": [list(c) for c in strongly_connected_components(g)],
        "irreducible_components": [list(c) for c in rep.irreducible_components],
        "weak_components": [list(c) for c in rep.weak_components],
        "irreducible": rep.irreducible, "weakly_connected": rep.weakly_connected,
        "essential": is_essential(g),
        "spectral_radius": lam,
        "entropy": math.log(lam) if lam > 0 else -math.inf,
    }
    return r


def cmd_hom_check(args) -> Report:
    g, h = load_graph(args.g), load_graph(args.h)
    phi = load_homomorphism(g, h, args.phi)
    prof = resolving_profile(phi)
    s = matrix_from_vertex_map(phi)
    rel = matrix_relations(g, h, s)
    r = Report("hom check")
    r.payload = {"profile": prof.as_dict(), "S": s.to_dict(), "relations": rel.as_dict(),
                 "vertex_degree": vertex_degree(phi)}
    # the two matrix characterizations, checked against the direct classification
    r.check("bi-covering implies the equalities", not prof.bi_covering or rel.equalities)
    r.check("bi-resolving implies the inequalities", not prof.bi_resolving or rel.inequalities)
    return r


def cmd_exists(args) -> Report:
    g, h = load_graph(args.g), load_graph(args.h)
    timeout = None if args.timeout_ms is None else args.timeout_ms / 1000.0
    s = find_subamalgamation(g, h, args.mode, timeout)
    r = Report("exists")
    r.payload = {"mode": args.mode}
    if s is None:
        r.status = "none"
        r.payload["S"] = None
    else:
        r.payload["S"] = s.to_dict()
        rel = matrix_relations(g, h, s)
        r.check("relations hold", rel.equalities if args.mode == "eq" else rel.inequalities)
    return r


def cmd_synthesize(args) -> Report:
    g, h = load_graph(args.g), load_graph(args.h)
    s = SubamalgamationMatrix.from_dict(_read_json(args.S))
    r = Report("synthesize")
    if args.mode == "eq":
        phi, blocks = bicovering_with_blocks(g, h, s)
        r.payload = hom_payload(phi)
        r.payload["blocks"] = [{"source": b.source, "target": b.target,
                                "permutations": [p.tolist() for p in b.permutations]}
                               for b in blocks]
        r.check("bi-covering", resolving_profile(phi).bi_covering)
    else:
        con = build_biresolving(g, h, s)
        phi = con.homomorphism
        r.payload = hom_payload(phi)
        r.payload["extension"] = {**hom_payload(con.cover), "new_vertices": list(con.new_vertices),
                                  "new_edges": list(con.new_edges)}
        r.check("bi-resolving", resolving_profile(phi).bi_resolving)
        r.check("padded map bi-covering", resolving_profile(con.cover).bi_covering)
    r.check("vertex map realizes S", matrix_from_vertex_map(phi) == s)
    return r


def extension_checks(r: Report, res: ExtensionResult, irreducible: bool, weak: bool):
    rep = connectivity(res.extended_graph)
    r.check("restricts to the input", res.restriction_matches())
    r.check("bi-covering", resolving_profile(res.extension).bi_covering)
    r.check(f"vertex degree {res.degree}", vertex_degree(res.extension) == res.degree)
    if irreducible:
        if weak:
            r.check("weakly connected", rep.weakly_connected)
        else:
            r.check("irreducible", rep.irreducible)


def extension_payload(res: ExtensionResult) -> dict:
    doc = hom_payload(res.extension)
    doc["original_domain"] = graph_to_dict(res.original.domain)
    doc["new_edges"] = list(res.new_edges)
    doc["new_vertices"] = list(res.new_vertices)
    doc["degree"] = res.degree
    doc["connectivity"] = None
    doc["merge_steps"] = [{"component": list(s.component), "edge": s.edge, "partner": s.partner,
                           "image": s.image, "connected": s.connected,
                           "covers_all": s.covers_all} for s in res.steps]
    return doc


def cmd_extend(args) -> Report:
    g, h = load_graph(args.g), load_graph(args.h)
    phi = load_homomorphism(g, h, args.phi)
    mode = "weak" if args.weak else "irreducible"
    r = Report("extend")
    if args.degree == "same":
        res = irreducible_extension_same_degree(phi, mode)
    elif args.degree == "complete":
        res = bicovering_completion(phi)
    else:
        try:
            n = int(args.degree)
        except ValueError as exc:
            raise FormatError("--degree must be an integer, 'same' or 'complete'") from exc
        res = irreducible_extension_degree_n(phi, n, mode)
    r.payload = extension_payload(res)
    if args.degree != "complete":
        r.payload["connectivity"] = mode
    r.payload["perron"] = perron_obstruction_check(phi).as_dict()
    extension_checks(r, res, args.degree != "complete", args.weak)
    return r


def cmd_degree(args) -> Report:
    g, h = load_graph(args.g), load_graph(args.h)
    phi = load_homomorphism(g, h, args.phi)
    pd = point_degree(phi, args.period_cap, args.n_cap)
    r = Report("degree", status=pd.status)
    r.payload = {**pd.as_dict(), "vertex_degree": vertex_degree(phi)}
    return r


def cmd_closing(args) -> Report:
    code = code_from_dict(_read_json(args.code))
    prof = closing_profile(code)
    r = Report("closing")
    r.payload = prof.as_dict()
    return r


def _pipeline_payload(res) -> dict:
    return {
        "part": res.part, "n": res.n, "d": res.degree.degree, "N": res.degree.n,
        "extended_graph": graph_to_dict(res.extension.extended_graph),
        "new_edges": list(res.extension.new_edges),
        "x_tilde": subshift_to_dict(res.x_tilde),
        "code": code_to_dict(res.code),
        "source_code": code_to_dict(res.source_code),
    }


def _add_checks(r: Report, checks):
    for name, ok, detail in checks:
        r.check(name, ok, detail)


def cmd_extend_code(args) -> Report:
    g, h = load_graph(args.g), load_graph(args.h)
    phi = load_homomorphism(g, h, args.phi)
    res = extend_biclosing_code(phi, args.n, period_cap=args.period_cap, n_cap=args.n_cap)
    r = Report("extend-code")
    r.payload = _pipeline_payload(res)
    _add_checks(r, res.checks)
    return r


def cmd_approx_extend(args) -> Report:
    x = subshift_from_dict(_read_json(args.X))
    code = code_from_dict(_read_json(args.code), domain=x)
    res = approximate_and_extend(x, code, args.n, k_cap=args.k_cap,
                                 period_cap=args.period_cap, n_cap=args.n_cap)
    r = Report("approx-extend")
    r.payload = {"k": res.k, "approximation": subshift_to_dict(res.approximation),
                 "obstructions": [{"k": k, "reason": why} for k, why in res.obstructions],
                 **_pipeline_payload(res.result)}
    _add_checks(r, res.result.checks)
    return r


# -- verify ------------------------------------------------------------------------------

def _roundtrip(r: Report, name: str, doc, load: Callable, dump: Callable):
    obj = load(doc)
    r.check(f"{name} reloads identically", dumps(dump(obj)) == dumps(doc))
    return obj


def _verify_hom(r: Report, doc, prefix: str = "") -> GraphHomomorphism:
    phi = hom_from_payload(doc)
    r.check(f"{prefix}homomorphism reloads identically",
            dumps(hom_payload(phi)) == dumps({k: doc[k] for k in ("domain", "codomain", "homomorphism")}))
    return phi


def _verify_code_doc(r: Report, doc, args, name: str = "code"):
    code = _roundtrip(r, name, doc, code_from_dict, code_to_dict)
    _add_checks(r, validate_code(code, args.word_cap))
    return code


def cmd_verify(args) -> Report:
    doc = _read_json(args.artifact)
    r = Report("verify")
    if not isinstance(doc, dict):
        raise FormatError("artifact must be a JSON object")
    cmd = doc.get("command")
    payload = doc.get("payload", {})
    r.payload = {"artifact": cmd or doc.get("kind") or "document"}
    if cmd is None:
        if "kind" in doc:
            _roundtrip(r, "subshift", doc, subshift_from_dict, subshift_to_dict)
        elif "blocks" in doc:
            code = _verify_code_doc(r, doc, args)
            prof = closing_profile(code)
            r.payload["closing"] = prof.as_dict()
        elif "vertices" in doc or "rows" in doc:
            g = _graph_doc(doc)
            if "vertices" in doc:
                r.check("graph reloads identically", dumps(graph_to_dict(g)) == dumps(doc))
        else:
            raise FormatError("unrecognized artifact")
        return r
    if cmd in ("synthesize",):
        phi = _verify_hom(r, payload)
        prof = resolving_profile(phi)
        if "extension" in payload:
            cover = _verify_hom(r, payload["extension"], "extension ")
            r.check("bi-resolving", prof.bi_resolving)
            r.check("padded map bi-covering", resolving_profile(cover).bi_covering)
        else:
            r.check("bi-covering", prof.bi_covering)
    elif cmd == "extend":
        ext = _verify_hom(r, payload)
        orig = _graph_doc(payload["original_domain"])
        r.check("restricts to the original domain",
                all(ext.domain.edge_by_id.get(e.id) == e for e in orig.edges)
                and set(orig.vertices) <= set(ext.domain.vertices))
        r.check("bi-covering", resolving_profile(ext).bi_covering)
        r.check(f"vertex degree {payload['degree']}", vertex_degree(ext) == payload["degree"])
        new = set(payload["new_edges"])
        r.check("new edges are exactly the added edges",
                new == set(ext.domain.edge_by_id) - set(orig.edge_by_id))
        rep = connectivity(ext.domain)
        if payload.get("connectivity") == "irreducible":
            r.check("irreducible", rep.irreducible)
        elif payload.get("connectivity") == "weak":
            r.check("weakly connected", rep.weakly_connected)
    elif cmd in ("extend-code", "approx-extend"):
        code = _verify_code_doc(r, payload["code"], args)
        src = _verify_code_doc(r, payload["source_code"], args, "source code")
        n = payload["n"]
        bad = None
        for p in range(1, args.period_cap + 1):
            for y in periodic_points(code.codomain, p):
                if count_preimages(code, y) != n and bad is None:
                    bad = y
        r.check(f"exactly {n} preimages on periodic points up to period {args.period_cap}",
                bad is None, "" if bad is None else word_str(bad))
        bad = None
        for p in range(1, args.period_cap + 1):
            for x in periodic_points(src.domain, p):
                try:
                    same = code.apply_periodic(x) == src.apply_periodic(x)
                except KeyError:
                    same = False
                if not same and bad is None:
                    bad = x
        r.check("extends the source code on periodic points", bad is None,
                "" if bad is None else word_str(bad))
        k, _ = code.domain.labeled
        r.check("presentation of X~ irreducible", is_irreducible(k))
    elif cmd == "closing":
        r.check("report recorded", "bi_closing" in payload)
    elif cmd == "exists":
        if payload.get("S") is not None:
            _roundtrip(r, "S", payload["S"], SubamalgamationMatrix.from_dict,
                       lambda s: s.to_dict())
    r.payload["checked_command"] = cmd
    return r


# -- driver ------------------------------------------------------------------------------

def _render_text(rep: dict) -> str:
    lines = [f"{rep['command']}: {rep['status']}"]

    def walk(obj, indent):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k, v in obj.items():
                if isinstance(v, (dict, list)) and v and not _flat(v):
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {json.dumps(v, ensure_ascii=False)}")
        elif isinstance(obj, list):
            for v in obj:
                if isinstance(v, (dict, list)) and not _flat(v):
                    lines.append(f"{pad}-")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}- {json.dumps(v, ensure_ascii=False)}")

    walk(rep["payload"], 1)
    for c in rep["checks"]:
        mark = "PASS" if c["pass"] else "FAIL"
        detail = f" ({c['detail']})" if c["detail"] else ""
        lines.append(f"  [{mark}] {c['name']}{detail}")
    return "\n".join(lines) + "\n"


def _flat(v) -> bool:
    if isinstance(v, list):
        return all(not isinstance(x, (dict, list)) for x in v)
    return False


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    common.add_argument("--out", help="also write the JSON report to this file")
    common.add_argument("--period-cap", type=int, default=6,
                        help="largest period for periodic-point checks (default 6)")
    common.add_argument("--word-cap", type=int, default=12,
                        help="longest word for bounded word checks (default 12)")
    common.add_argument("--n-cap", type=int, default=12,
                        help="largest block length tried by the degree search (default 12)")
    common.add_argument("--timeout-ms", type=int, default=None,
                        help="time budget for the existence search")

    parser = argparse.ArgumentParser(prog="biresolve", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="graph reports")
    gsub = graph.add_subparsers(dest="graph_command", required=True)
    p = gsub.add_parser("info", parents=[common], help="connectivity and spectral report")
    p.add_argument("graph")
    p.set_defaults(func=cmd_graph_info)

    hom = sub.add_parser("hom", help="homomorphism reports")
    hsub = hom.add_subparsers(dest="hom_command", required=True)
    p = hsub.add_parser("check", parents=[common], help="resolving profile and matrix relations")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("phi")
    p.set_defaults(func=cmd_hom_check)

    p = sub.add_parser("exists", parents=[common], help="search for a subamalgamation matrix")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("--mode", choices=["eq", "le"], default="eq")
    p.set_defaults(func=cmd_exists)

    p = sub.add_parser("synthesize", parents=[common], help="build a homomorphism from S")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("S")
    p.add_argument("--mode", choices=["eq", "le"], default="eq")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("extend", parents=[common], help="bi-covering extension")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("phi")
    p.add_argument("--degree", default="same",
                   help="an integer n, 'same', or 'complete' (plain completion)")
    p.add_argument("--weak", action="store_true",
                   help="require weak connectivity instead of irreducibility")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("degree", parents=[common], help="degree of the induced code")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("phi")
    p.set_defaults(func=cmd_degree)

    p = sub.add_parser("closing", parents=[common], help="closing profile of a code")
    p.add_argument("code")
    p.set_defaults(func=cmd_closing)

    p = sub.add_parser("extend-code", parents=[common], help="n-to-1 extension of a code")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("phi")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_extend_code)

    p = sub.add_parser("approx-extend", parents=[common],
                       help="extension through a Markov approximation")
    p.add_argument("X")
    p.add_argument("code")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-cap", type=int, default=12)
    p.set_defaults(func=cmd_approx_extend)

    p = sub.add_parser("verify", parents=[common], help="re-check a saved report or artifact")
    p.add_argument("artifact")
    p.set_defaults(func=cmd_verify)
    return parser


def _error_report(command: str, exc: Exception) -> Report:
    r = Report(command, status="error")
    r.payload = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, PreconditionError):
        r.payload["hypothesis"] = exc.hypothesis
        diag = getattr(exc, "diagnosis", None)
        if diag is not None:
            r.payload["diagnosis"] = diag.as_dict()
    if isinstance(exc, CapReached) and exc.obstructions:
        r.payload["obstructions"] = [{"k": k, "reason": why} for k, why in exc.obstructions]
    return r


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    args = build_parser().parse_args(argv)
    name = " ".join(x for x in (args.command, getattr(args, "graph_command", None),
                                getattr(args, "hom_command", None)) if x)
    try:
        report = args.func(args)
        if report.status in ("ok", "none"):
            code = EXIT_OK if all(c["pass"] for c in report.checks) else EXIT_CHECK
            if code:
                report.status = "error"
        else:
            code = EXIT_CAP
    except (PreconditionError, UnsupportedPresentation) as exc:
        report, code = _error_report(name, exc), EXIT_PRECONDITION
    except (FormatError, HomomorphismError, GraphError) as exc:
        report, code = _error_report(name, exc), EXIT_FORMAT
    except (SearchTimeout, CapReached) as exc:
        report, code = _error_report(name, exc), EXIT_CAP
    doc = report.to_dict()
    text = dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text if args.json else _render_text(doc))
    return code, doc


def main(argv: list[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
