"""Graph homomorphisms, their resolving/covering classification and matrix relations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import FormatError, HomomorphismError
from .graph import DirectedMultigraph, adjacency_matrix, higher_graph


@dataclass(frozen=True, eq=False)
class GraphHomomorphism:
    domain: DirectedMultigraph
    codomain: DirectedMultigraph
    vertex_map: Mapping[str, str]
    edge_map: Mapping[str, str]

    def __eq__(self, other):
        if not isinstance(other, GraphHomomorphism):
            return NotImplemented
        return (self.domain == other.domain and self.codomain == other.codomain
                and dict(self.vertex_map) == dict(other.vertex_map)
                and dict(self.edge_map) == dict(other.edge_map))

    def fiber(self, codomain_vertex: str) -> list[str]:
        return [v for v in self.domain.vertices if self.vertex_map[v] == codomain_vertex]

    def edge_fiber(self, codomain_edge: str) -> list[str]:
        return [e.id for e in self.domain.edges if self.edge_map[e.id] == codomain_edge]

    def image_path(self, path) -> tuple[str, ...]:
        return tuple(self.edge_map[e] for e in path)


def validate_homomorphism(g: DirectedMultigraph, h: DirectedMultigraph,
                          vertex_map: Mapping, edge_map: Mapping) -> GraphHomomorphism:
    """Check totality and adjacency; raise :class:`HomomorphismError` at the first violation."""
    vmap = {str(k): str(v) for k, v in vertex_map.items()}
    emap = {str(k): str(v) for k, v in edge_map.items()}
    for v in g.vertices:
        if v not in vmap:
            raise HomomorphismError(f"vertex {v!r} has no image")
        if vmap[v] not in h.vertex_index:
            raise HomomorphismError(f"vertex {v!r} maps to unknown vertex {vmap[v]!r}")
    extra = set(vmap) - set(g.vertices)
    if extra:
        raise HomomorphismError(f"vertex map mentions unknown vertices {sorted(extra)}")
    extra = set(emap) - set(g.edge_by_id)
    if extra:
        raise HomomorphismError(f"edge map mentions unknown edges {sorted(extra)}")
    for e in g.edges:
        if e.id not in emap:
            raise HomomorphismError(f"edge {e.id!r} has no image", edge=e.id)
        b = h.edge_by_id.get(emap[e.id])
        if b is None:
            raise HomomorphismError(f"edge {e.id!r} maps to unknown edge {emap[e.id]!r}", edge=e.id)
        if vmap[e.src] != b.src or vmap[e.dst] != b.dst:
            raise HomomorphismError(
                f"edge {e.id!r} ({e.src}->{e.dst}) maps to {b.id!r} ({b.src}->{b.dst}) "
                f"but its endpoints map to {vmap[e.src]}->{vmap[e.dst]}", edge=e.id)
    return GraphHomomorphism(g, h, vmap, emap)


def identity_homomorphism(g: DirectedMultigraph) -> GraphHomomorphism:
    return GraphHomomorphism(g, g, {v: v for v in g.vertices}, {e.id: e.id for e in g.edges})


def restrict(phi: GraphHomomorphism, sub: DirectedMultigraph) -> GraphHomomorphism:
    """Restriction of ``phi`` to a subgraph of its domain."""
    return GraphHomomorphism(
        sub, phi.codomain,
        {v: phi.vertex_map[v] for v in sub.vertices},
        {e.id: phi.edge_map[e.id] for e in sub.edges},
    )


@dataclass(frozen=True)
class ResolvingProfile:
    right_resolving: bool
    left_resolving: bool
    right_covering: bool
    left_covering: bool
    # flag name -> (vertex, detail...) for the first violation in declaration order
    witnesses: Mapping[str, tuple] = field(default_factory=dict)

    @property
    def bi_resolving(self) -> bool:
        return self.right_resolving and self.left_resolving

    @property
    def bi_covering(self) -> bool:
        return self.right_covering and self.left_covering

    def as_dict(self) -> dict:
        return {
            "right_resolving": self.right_resolving,
            "left_resolving": self.left_resolving,
            "right_covering": self.right_covering,
            "left_covering": self.left_covering,
            "bi_resolving": self.bi_resolving,
            "bi_covering": self.bi_covering,
            "witnesses": {k: list(v) for k, v in self.witnesses.items()},
        }


def _side(phi: GraphHomomorphism, outgoing: bool):
    """(resolving witness, covering witness) for one side; None means the flag holds."""
    g, h = phi.domain, phi.codomain
    g_star = g.out_edges if outgoing else g.in_edges
    h_star = h.out_edges if outgoing else h.in_edges
    res_w = cov_w = None
    for v in g.vertices:
        seen: dict[str, str] = {}
        dup = None
        for e in g_star[v]:
            b = phi.edge_map[e.id]
            if b in seen:
                dup = (v, seen[b], e.id)
                break
            seen[b] = e.id
        if dup is not None:
            if res_w is None:
                res_w = dup
            if cov_w is None:
                cov_w = dup
        elif cov_w is None:
            missing = [b.id for b in h_star[phi.vertex_map[v]] if b.id not in seen]
            if missing:
                cov_w = (v, "missing", missing[0])
        if res_w is not None and cov_w is not None:
            break
    return res_w, cov_w


def resolving_profile(phi: GraphHomomorphism) -> ResolvingProfile:
    rr, rc = _side(phi, outgoing=True)
    lr, lc = _side(phi, outgoing=False)
    witnesses = {}
    for name, w in (("right_resolving", rr), ("left_resolving", lr),
                    ("right_covering", rc), ("left_covering", lc)):
        if w is not None:
            witnesses[name] = w
    return ResolvingProfile(rr is None, lr is None, rc is None, lc is None, witnesses)


def vertex_degree(phi: GraphHomomorphism) -> int:
    counts: dict[str, int] = {}
    for v in phi.domain.vertices:
        w = phi.vertex_map[v]
        counts[w] = counts.get(w, 0) + 1
    return max(counts.values(), default=0)


# -- subamalgamation matrices -------------------------------------------------

@dataclass(frozen=True, eq=False)
class SubamalgamationMatrix:
    """0-1 matrix indexed by ``rows x cols`` with exactly one 1 per row."""

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int64)
        object.__setattr__(self, "entries", e)
        if e.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"entries shape {e.shape} does not match index sets")
        if e.size and (e.min() < 0 or e.max() > 1):
            raise ValueError("subamalgamation matrix must be 0-1")
        if len(self.rows) and not (e.sum(axis=1) == 1).all():
            raise ValueError("subamalgamation matrix needs exactly one 1 per row")

    @property
    def is_amalgamation(self) -> bool:
        return bool((self.entries.sum(axis=0) >= 1).all())

    def __eq__(self, other):
        if not isinstance(other, SubamalgamationMatrix):
            return NotImplemented
        return (self.rows == other.rows and self.cols == other.cols
                and np.array_equal(self.entries, other.entries))

    def to_dict(self) -> dict:
        return {"row_order": list(self.rows), "col_order": list(self.cols),
                "rows": self.entries.tolist()}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SubamalgamationMatrix":
        try:
            return cls(tuple(doc["row_order"]), tuple(doc["col_order"]),
                       np.asarray(doc["rows"], dtype=np.int64).reshape(
                           len(doc["row_order"]), len(doc["col_order"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed subamalgamation matrix: {exc}") from exc


def subamalgamation_from_map(g: DirectedMultigraph, h: DirectedMultigraph,
                             vertex_map: Mapping[str, str]) -> SubamalgamationMatrix:
    s = np.zeros((len(g.vertices), len(h.vertices)), dtype=np.int64)
    hidx = h.vertex_index
    for i, v in enumerate(g.vertices):
        s[i, hidx[vertex_map[v]]] = 1
    return SubamalgamationMatrix(g.vertices, h.vertices, s)


def matrix_from_vertex_map(phi: GraphHomomorphism) -> SubamalgamationMatrix:
    return subamalgamation_from_map(phi.domain, phi.codomain, phi.vertex_map)


def vertex_map_from_matrix(s: SubamalgamationMatrix) -> dict[str, str]:
    cols = s.cols
    return {r: cols[k] for r, k in zip(s.rows, s.entries.argmax(axis=1).tolist())}


@dataclass(frozen=True, eq=False)
class RelationReport:
    """Products ``A_G S``, ``S A_H``, ``S^T A_G``, ``A_H S^T`` and their comparisons."""

    ag_s: np.ndarray
    s_ah: np.ndarray
    st_ag: np.ndarray
    ah_st: np.ndarray

    @property
    def right_equal(self) -> bool:
        return bool(np.array_equal(self.ag_s, self.s_ah))

    @property
    def right_le(self) -> bool:
        return bool((self.ag_s <= self.s_ah).all())

    @property
    def left_equal(self) -> bool:
        return bool(np.array_equal(self.st_ag, self.ah_st))

    @property
    def left_le(self) -> bool:
        return bool((self.st_ag <= self.ah_st).all())

    @property
    def equalities(self) -> bool:
        return self.right_equal and self.left_equal

    @property
    def inequalities(self) -> bool:
        return self.right_le and self.left_le

    def as_dict(self) -> dict:
        return {
            "AG_S": self.ag_s.tolist(), "S_AH": self.s_ah.tolist(),
            "ST_AG": self.st_ag.tolist(), "AH_ST": self.ah_st.tolist(),
            "AG_S == S_AH": self.right_equal, "AG_S <= S_AH": self.right_le,
            "ST_AG == AH_ST": self.left_equal, "ST_AG <= AH_ST": self.left_le,
        }


def matrix_relations(g: DirectedMultigraph, h: DirectedMultigraph,
                     s: SubamalgamationMatrix) -> RelationReport:
    if s.rows != g.vertices or s.cols != h.vertices:
        raise ValueError("subamalgamation matrix is not indexed by V(G) x V(H)")
    ag, ah, sm = adjacency_matrix(g), adjacency_matrix(h), s.entries
    return RelationReport(ag @ sm, sm @ ah, sm.T @ ag, ah @ sm.T)


# -- higher homomorphisms ----------------------------------------------------------

def higher_homomorphism(phi: GraphHomomorphism, n: int) -> GraphHomomorphism:
    """``Phi^[N]``: sends a path of ``G`` to its image path in ``H``."""
    if n == 1:
        return phi
    gh = higher_graph(phi.domain, n)
    hh = higher_graph(phi.codomain, n)
    v_of = hh.vertex_of_path
    e_of = hh.edge_of_path
    vmap = {v: v_of[phi.image_path(p)] for v, p in gh.vertex_paths.items()}
    emap = {e: e_of[phi.image_path(p)] for e, p in gh.edge_paths.items()}
    return GraphHomomorphism(gh.graph, hh.graph, vmap, emap)


# -- JSON ------------------------------------------------------------------------

def homomorphism_to_dict(phi: GraphHomomorphism) -> dict:
    return {"vertex_map": dict(phi.vertex_map), "edge_map": dict(phi.edge_map)}


def homomorphism_from_dict(g: DirectedMultigraph, h: DirectedMultigraph,
                           doc: Mapping) -> GraphHomomorphism:
    try:
        vmap, emap = doc["vertex_map"], doc["edge_map"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed homomorphism document: {exc}") from exc
    if not isinstance(vmap, Mapping) or not isinstance(emap, Mapping):
        raise FormatError("vertex_map and edge_map must be objects")
    return validate_homomorphism(g, h, vmap, emap)
