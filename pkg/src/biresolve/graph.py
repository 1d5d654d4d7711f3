"""Finite directed multigraphs and the graph-level primitives everything else uses.

Vertices and edges are opaque string ids. Declaration order is significant:
every algorithm iterates in it, so all results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import FormatError, GraphError

#: relative tolerance used when comparing two spectral radii
SPECTRAL_TOL = 1e-9


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str


@dataclass(frozen=True)
class DirectedMultigraph:
    """Vertex ids plus edges ``(id, src, dst)``; loops and parallel edges allowed."""

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            seen = set()
            dup = next(v for v in self.vertices if v in seen or seen.add(v))
            raise GraphError(f"duplicate vertex id {dup!r}")
        vs = set(self.vertices)
        ids = set()
        for e in self.edges:
            if e.id in ids:
                raise GraphError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
            for end in (e.src, e.dst):
                if end not in vs:
                    raise GraphError(f"edge {e.id!r} has dangling endpoint {end!r}")

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.src].append(e)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[Edge, ...]]:
        inc: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            inc[e.dst].append(e)
        return {v: tuple(es) for v, es in inc.items()}

    def edge(self, edge_id: str) -> Edge:
        return self.edge_by_id[edge_id]

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"DirectedMultigraph({len(self.vertices)} vertices, {len(self.edges)} edges)"


def build_graph(vertices: Iterable, edges: Iterable) -> DirectedMultigraph:
    """Validate and build a graph; edges are ``Edge`` objects or ``(id, src, dst)``."""
    es = []
    for e in edges:
        if isinstance(e, Edge):
            es.append(e)
        else:
            eid, src, dst = e
            es.append(Edge(str(eid), str(src), str(dst)))
    return DirectedMultigraph(tuple(str(v) for v in vertices), tuple(es))


def graph_from_matrix(matrix, order: Sequence[str] | None = None) -> DirectedMultigraph:
    """Graph with ``matrix[i][j]`` parallel edges ``i>j#k`` (k from 0)."""
    m = np.asarray(matrix, dtype=np.int64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise GraphError("adjacency matrix must be square")
    if (m < 0).any():
        raise GraphError("adjacency matrix must be nonnegative")
    n = m.shape[0]
    order = [str(i) for i in range(n)] if order is None else [str(v) for v in order]
    if len(order) != n:
        raise GraphError("vertex order does not match matrix size")
    edges = []
    for i in range(n):
        for j in range(n):
            for k in range(int(m[i, j])):
                edges.append(Edge(f"{order[i]}>{order[j]}#{k}", order[i], order[j]))
    return DirectedMultigraph(tuple(order), tuple(edges))


def adjacency_matrix(g: DirectedMultigraph) -> np.ndarray:
    idx = g.vertex_index
    a = np.zeros((len(g.vertices), len(g.vertices)), dtype=np.int64)
    for e in g.edges:
        a[idx[e.src], idx[e.dst]] += 1
    return a


def subgraph(g: DirectedMultigraph, vertices: Iterable[str],
             edges: Iterable[str] | None = None) -> DirectedMultigraph:
    """Subgraph on ``vertices``; all edges among them unless ``edges`` is given."""
    keep = set(vertices)
    vs = tuple(v for v in g.vertices if v in keep)
    if edges is None:
        es = tuple(e for e in g.edges if e.src in keep and e.dst in keep)
    else:
        wanted = set(edges)
        es = tuple(e for e in g.edges if e.id in wanted)
    return DirectedMultigraph(vs, es)


def disjoint_union(*graphs: DirectedMultigraph) -> DirectedMultigraph:
    return DirectedMultigraph(
        tuple(v for g in graphs for v in g.vertices),
        tuple(e for g in graphs for e in g.edges),
    )


# -- connectivity -----------------------------------------------------------

def _scc_indices(n: int, succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components sorted by least member."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def strongly_connected_components(g: DirectedMultigraph) -> list[tuple[str, ...]]:
    """All strong components, including trivial ones, in declaration order."""
    idx = g.vertex_index
    succ = [sorted({idx[e.dst] for e in g.out_edges[v]}) for v in g.vertices]
    return [tuple(g.vertices[i] for i in c) for c in _scc_indices(len(g.vertices), succ)]


def irreducible_components(g: DirectedMultigraph) -> list[tuple[str, ...]]:
    """Strong components that carry at least one edge (so every vertex lies on a cycle)."""
    comps = []
    for comp in strongly_connected_components(g):
        if len(comp) > 1 or any(e.dst == comp[0] for e in g.out_edges[comp[0]]):
            comps.append(comp)
    return comps


def weak_components(g: DirectedMultigraph) -> list[tuple[str, ...]]:
    parent = {v: v for v in g.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in g.edges:
        a, b = find(e.src), find(e.dst)
        if a != b:
            parent[max(a, b, key=g.vertex_index.get)] = min(a, b, key=g.vertex_index.get)
    groups: dict[str, list[str]] = {}
    for v in g.vertices:
        groups.setdefault(find(v), []).append(v)
    return [tuple(vs) for vs in groups.values()]


@dataclass(frozen=True)
class ConnectivityReport:
    irreducible: bool
    weakly_connected: bool
    irreducible_components: tuple[tuple[str, ...], ...]
    weak_components: tuple[tuple[str, ...], ...]


def connectivity(g: DirectedMultigraph) -> ConnectivityReport:
    irr = irreducible_components(g)
    weak = weak_components(g)
    return ConnectivityReport(
        irreducible=len(irr) == 1 and len(irr[0]) == len(g.vertices),
        weakly_connected=len(weak) == 1,
        irreducible_components=tuple(irr),
        weak_components=tuple(weak),
    )


def is_irreducible(g: DirectedMultigraph) -> bool:
    return connectivity(g).irreducible


def is_weakly_connected(g: DirectedMultigraph) -> bool:
    return len(weak_components(g)) == 1


def is_essential(g: DirectedMultigraph) -> bool:
    return all(g.out_edges[v] and g.in_edges[v] for v in g.vertices)


def essentialize(g: DirectedMultigraph) -> DirectedMultigraph:
    """Strip vertices without an in- or out-edge until nothing changes."""
    alive = set(g.vertices)
    edges = list(g.edges)
    while True:
        outd = {v: 0 for v in alive}
        ind = {v: 0 for v in alive}
        for e in edges:
            outd[e.src] += 1
            ind[e.dst] += 1
        dead = {v for v in alive if outd[v] == 0 or ind[v] == 0}
        if not dead:
            break
        alive -= dead
        edges = [e for e in edges if e.src in alive and e.dst in alive]
    return DirectedMultigraph(tuple(v for v in g.vertices if v in alive), tuple(edges))


# -- spectral radius ----------------------------------------------------------

def _perron_root(block: np.ndarray, tol: float, max_iter: int) -> float:
    # irreducible block: block + I is primitive, so power iteration converges
    b = block + np.eye(block.shape[0])
    x = np.full(block.shape[0], 1.0 / block.shape[0])
    prev = None
    for _ in range(max_iter):
        y = b @ x
        r = float(x @ y) / float(x @ x)
        x = y / np.linalg.norm(y)
        if prev is not None and abs(r - prev) < tol:
            break
        prev = r
    return r - 1.0


def spectral_radius(matrix, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Perron root of a square nonnegative matrix.

    Computed per strong component (the radius of a reducible matrix is the max
    over its diagonal blocks), by power iteration on ``block + I``.
    """
    m = np.asarray(matrix, dtype=float)
    if m.size == 0:
        raise ValueError("spectral radius of an empty matrix")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if (m < 0).any():
        raise ValueError("matrix must be nonnegative")
    n = m.shape[0]
    succ = [list(np.nonzero(m[i] > 0)[0]) for i in range(n)]
    best = 0.0
    for comp in _scc_indices(n, succ):
        block = m[np.ix_(comp, comp)]
        if len(comp) == 1:
            best = max(best, float(block[0, 0]))
        else:
            best = max(best, _perron_root(block, tol, max_iter))
    return best


def graph_spectral_radius(g: DirectedMultigraph) -> float:
    """Spectral radius of the adjacency matrix; 0 for the empty graph."""
    if not g.vertices:
        return 0.0
    return spectral_radius(adjacency_matrix(g))


def spectral_less(a: float, b: float, tol: float = SPECTRAL_TOL) -> bool:
    return a < b - tol * max(1.0, abs(b))


def spectral_close(a: float, b: float, tol: float = SPECTRAL_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# -- paths and higher graphs ------------------------------------------------------

def paths(g: DirectedMultigraph, length: int) -> list[tuple[str, ...]]:
    """All paths with ``length`` edges, lexicographic in declaration order."""
    if length < 1:
        raise ValueError("path length must be positive")
    level = [(e.id,) for e in g.edges]
    for _ in range(length - 1):
        level = [p + (f.id,) for p in level for f in g.out_edges[g.edge_by_id[p[-1]].dst]]
    return level


def _path_ids(items: Sequence[tuple[str, ...]]) -> list[str]:
    ids = ["|".join(p) for p in items]
    if len(set(ids)) != len(ids):
        ids = [f"p{k}" for k in range(len(items))]
    return ids


@dataclass(frozen=True)
class HigherGraph:
    """``G^[N]`` plus the index between its ids and the underlying paths of ``G``.

    For ``N = 1`` vertex paths are the one-tuples ``(v,)`` of the vertices.
    """

    graph: DirectedMultigraph
    order: int
    vertex_paths: Mapping[str, tuple[str, ...]] = field(repr=False)
    edge_paths: Mapping[str, tuple[str, ...]] = field(repr=False)

    @cached_property
    def vertex_of_path(self) -> dict[tuple[str, ...], str]:
        return {p: v for v, p in self.vertex_paths.items()}

    @cached_property
    def edge_of_path(self) -> dict[tuple[str, ...], str]:
        return {p: e for e, p in self.edge_paths.items()}


@lru_cache(maxsize=256)
def higher_graph(g: DirectedMultigraph, n: int) -> HigherGraph:
    """N-th higher graph: vertices are paths of length N-1, edges paths of length N."""
    if n < 1:
        raise ValueError("N must be at least 1")
    if n == 1:
        return HigherGraph(g, 1, {v: (v,) for v in g.vertices}, {e.id: (e.id,) for e in g.edges})
    vpaths = paths(g, n - 1)
    epaths = paths(g, n)
    vids = _path_ids(vpaths)
    eids = _path_ids(epaths)
    vof = dict(zip(vpaths, vids))
    edges = tuple(Edge(eid, vof[p[:-1]], vof[p[1:]]) for eid, p in zip(eids, epaths))
    graph = DirectedMultigraph(tuple(vids), edges)
    return HigherGraph(graph, n, dict(zip(vids, vpaths)), dict(zip(eids, epaths)))


# -- JSON --------------------------------------------------------------------------

def graph_to_dict(g: DirectedMultigraph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "src": e.src, "dst": e.dst} for e in g.edges],
    }


def graph_from_dict(doc: Mapping) -> DirectedMultigraph:
    try:
        vertices = doc["vertices"]
        edges = [(e["id"], e["src"], e["dst"]) for e in doc["edges"]]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed graph document: {exc}") from exc
    if not isinstance(vertices, list):
        raise FormatError("graph 'vertices' must be a list")
    return build_graph(vertices, edges)


def matrix_to_dict(m, order: Sequence[str]) -> dict:
    return {"order": list(order), "rows": np.asarray(m, dtype=np.int64).tolist()}


def matrix_from_dict(doc: Mapping) -> tuple[np.ndarray, list[str]]:
    try:
        order = [str(v) for v in doc["order"]]
        rows = np.asarray(doc["rows"], dtype=np.int64).reshape(len(order), -1) if order \
            else np.zeros((0, 0), dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed matrix document: {exc}") from exc
    if rows.ndim != 2 or rows.shape != (len(order), len(order)):
        raise FormatError("matrix rows do not match its order")
    return rows, order
