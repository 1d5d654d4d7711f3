"""Deciding and constructing bi-covering and bi-resolving homomorphisms.

Existence is decided by an exhaustive search over subamalgamation matrices;
construction splits each fiber block into permutation matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels
from .errors import PreconditionError, SearchTimeout
from .graph import DirectedMultigraph, Edge, adjacency_matrix
from .homomorphism import (
    GraphHomomorphism,
    SubamalgamationMatrix,
    restrict,
    subamalgamation_from_map,
    vertex_map_from_matrix,
)

Mode = Literal["eq", "le"]


def _mode(mode: str) -> bool:
    """True for the inequality mode."""
    if mode in ("eq", "equality"):
        return False
    if mode in ("le", "inequality"):
        return True
    raise ValueError(f"unknown mode {mode!r}; expected 'eq' or 'le'")


def find_subamalgamation(g: DirectedMultigraph, h: DirectedMultigraph, mode: Mode = "eq",
                         timeout: float | None = None) -> SubamalgamationMatrix | None:
    """First subamalgamation matrix (in canonical search order) satisfying the relations.

    ``None`` is a proof of nonexistence. Raises :class:`SearchTimeout` when the
    time budget (seconds) runs out first.
    """
    le = _mode(mode)
    status, phi = kernels.search_subamalgamation(adjacency_matrix(g), adjacency_matrix(h),
                                                 le, timeout)
    if status == kernels.TIMEOUT:
        raise SearchTimeout(f"subamalgamation search exceeded {timeout}s")
    if status == kernels.NONE:
        return None
    return subamalgamation_from_map(g, h, {v: h.vertices[k] for v, k in zip(g.vertices, phi)})


def _check_square_nonneg(a: np.ndarray):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if (a < 0).any():
        raise ValueError("matrix must be nonnegative")


def decompose_into_permutations(a, r: int) -> list[np.ndarray]:
    """Write a matrix with all line sums ``r`` as a sum of ``r`` permutation matrices.

    Each round removes the lexicographically least perfect matching of the
    current support.
    """
    a = np.asarray(a, dtype=np.int64)
    _check_square_nonneg(a)
    if r < 1:
        raise ValueError("R must be positive")
    if not ((a.sum(axis=1) == r).all() and (a.sum(axis=0) == r).all()):
        raise ValueError(f"matrix is not balanced with line sum {r}")
    n = a.shape[0]
    cols = kernels.decompose_permutations(a.tolist(), r)
    perms = []
    for k in range(r):
        p = np.zeros((n, n), dtype=np.int64)
        p[np.arange(n), cols[k]] = 1
        perms.append(p)
    return perms


def pad_to_balanced(a, b: int) -> np.ndarray:
    """Add ``b*d - t`` unit entries so that every line sum becomes ``b``."""
    a = np.asarray(a, dtype=np.int64)
    _check_square_nonneg(a)
    if (a.sum(axis=1) > b).any() or (a.sum(axis=0) > b).any():
        raise ValueError(f"some line sum already exceeds {b}")
    padded, _ = kernels.pad_to_balanced(a.tolist(), b)
    return np.asarray(padded, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class BalancedBlockDecomposition:
    source: str                      # codomain vertex I
    target: str                      # codomain vertex J
    rows: tuple[str, ...]            # fiber over I
    cols: tuple[str, ...]            # fiber over J
    block: np.ndarray
    permutations: tuple[np.ndarray, ...]


def _fibers(g: DirectedMultigraph, h: DirectedMultigraph, vmap) -> dict[str, list[str]]:
    fibers: dict[str, list[str]] = {v: [] for v in h.vertices}
    for v in g.vertices:
        fibers[vmap[v]].append(v)
    return fibers


def _relations_hold(g: DirectedMultigraph, h: DirectedMultigraph, vmap, le: bool) -> bool:
    """Entrywise check of the two matrix relations via fiber sums.

    ``(A_G S)_{i,J}`` is the number of edges from ``i`` into the fiber over ``J``,
    ``(S^T A_G)_{I,j}`` the number of edges into ``j`` from the fiber over ``I``.
    """
    hcount: dict[tuple[str, str], int] = {}
    for b in h.edges:
        hcount[(b.src, b.dst)] = hcount.get((b.src, b.dst), 0) + 1
    out_c: dict[tuple[str, str], int] = {}
    in_c: dict[tuple[str, str], int] = {}
    for e in g.edges:
        k = (e.src, vmap[e.dst])
        out_c[k] = out_c.get(k, 0) + 1
        k = (vmap[e.src], e.dst)
        in_c[k] = in_c.get(k, 0) + 1
    for (i, big_j), c in out_c.items():
        if c > hcount.get((vmap[i], big_j), 0):
            return False
    for (big_i, j), c in in_c.items():
        if c > hcount.get((big_i, vmap[j]), 0):
            return False
    if le:
        return True
    # equality: every positive codomain count must be met exactly
    for v in g.vertices:
        for b in h.out_edges[vmap[v]]:
            if out_c.get((v, b.dst), 0) != hcount[(b.src, b.dst)]:
                return False
        for b in h.in_edges[vmap[v]]:
            if in_c.get((b.src, v), 0) != hcount[(b.src, b.dst)]:
                return False
    return True


def _bicover_edges(g: DirectedMultigraph, h: DirectedMultigraph, vmap, keep_blocks=False):
    """Edge map (and optionally block splits) for a vertex map meeting the equalities."""
    fibers = _fibers(g, h, vmap)
    # unassigned domain edges per (src, dst), in declaration order
    pending: dict[tuple[str, str], list[str]] = {}
    for e in g.edges:
        pending.setdefault((e.src, e.dst), []).append(e.id)
    edge_map: dict[str, str] = {}
    blocks = []
    for big_i in h.vertices:
        rows = fibers[big_i]
        if not rows:
            continue
        by_target: dict[str, list[str]] = {}
        for b in h.out_edges[big_i]:
            by_target.setdefault(b.dst, []).append(b.id)
        for big_j, hedges in by_target.items():
            cols = fibers[big_j]
            block = [[len(pending.get((u, w), ())) for w in cols] for u in rows]
            perms = kernels.decompose_permutations(block, len(hedges))
            for perm, b in zip(perms, hedges):
                for r_i, c_i in enumerate(perm):
                    edge_map[pending[(rows[r_i], cols[c_i])].pop(0)] = b
            if keep_blocks:
                n = len(rows)
                mats = []
                for perm in perms:
                    p = np.zeros((n, n), dtype=np.int64)
                    p[np.arange(n), perm] = 1
                    mats.append(p)
                blocks.append(BalancedBlockDecomposition(
                    big_i, big_j, tuple(rows), tuple(cols),
                    np.asarray(block, dtype=np.int64), tuple(mats)))
    return edge_map, blocks


def build_bicovering(g: DirectedMultigraph, h: DirectedMultigraph,
                     s: SubamalgamationMatrix) -> GraphHomomorphism:
    """Bi-covering homomorphism whose vertex map is the one encoded by ``s``."""
    return bicovering_with_blocks(g, h, s, keep_blocks=False)[0]


def bicovering_with_blocks(g: DirectedMultigraph, h: DirectedMultigraph,
                           s: SubamalgamationMatrix, keep_blocks: bool = True):
    """As :func:`build_bicovering`, also returning the per-block permutation splits."""
    _check_indexing(g, h, s)
    vmap = vertex_map_from_matrix(s)
    if not _relations_hold(g, h, vmap, le=False):
        raise PreconditionError("matrix equality",
                                "A_G S = S A_H and S^T A_G = A_H S^T do not both hold")
    edge_map, blocks = _bicover_edges(g, h, vmap, keep_blocks)
    return GraphHomomorphism(g, h, vmap, edge_map), blocks


def _check_indexing(g, h, s: SubamalgamationMatrix):
    if s.rows != g.vertices or s.cols != h.vertices:
        raise ValueError("subamalgamation matrix is not indexed by V(G) x V(H)")


def _fresh(name: str, taken: set) -> str:
    while name in taken:
        name += "'"
    taken.add(name)
    return name


@dataclass(frozen=True, eq=False)
class BiresolvingConstruction:
    homomorphism: GraphHomomorphism       # bi-resolving, on G
    cover: GraphHomomorphism              # bi-covering, on the padded graph
    padded_graph: DirectedMultigraph
    new_vertices: tuple[str, ...]
    new_edges: tuple[str, ...]


def build_biresolving(g: DirectedMultigraph, h: DirectedMultigraph,
                      s: SubamalgamationMatrix) -> BiresolvingConstruction:
    """Pad fibers to a common size, pad fiber blocks to balanced, cover, restrict."""
    _check_indexing(g, h, s)
    vmap = vertex_map_from_matrix(s)
    if not _relations_hold(g, h, vmap, le=True):
        raise PreconditionError("matrix inequality",
                                "A_G S <= S A_H and S^T A_G <= A_H S^T do not both hold")
    fibers = _fibers(g, h, vmap)
    d = max((len(f) for f in fibers.values()), default=0)
    vtaken = set(g.vertices)
    etaken = set(g.edge_by_id)
    new_vertices = []
    pvmap = dict(vmap)
    for big_i in h.vertices:
        for k in range(d - len(fibers[big_i])):
            v = _fresh(f"pad:{big_i}#{k}", vtaken)
            new_vertices.append(v)
            fibers[big_i].append(v)
            pvmap[v] = big_i
    counts: dict[tuple[str, str], int] = {}
    for e in g.edges:
        counts[(e.src, e.dst)] = counts.get((e.src, e.dst), 0) + 1
    new_edges = []
    for big_i in h.vertices:
        mult: dict[str, int] = {}
        for x in h.out_edges[big_i]:
            mult[x.dst] = mult.get(x.dst, 0) + 1
        for big_j, b in mult.items():
            rows, cols = fibers[big_i], fibers[big_j]
            block = [[counts.get((u, w), 0) for w in cols] for u in rows]
            if sum(map(sum, block)) == b * d:
                continue
            _, adds = kernels.pad_to_balanced(block, b)
            for k, (r_i, c_i) in enumerate(adds):
                eid = _fresh(f"pad:{big_i}>{big_j}#{k}", etaken)
                new_edges.append(Edge(eid, rows[r_i], cols[c_i]))
    padded = DirectedMultigraph(g.vertices + tuple(new_vertices), g.edges + tuple(new_edges))
    if not _relations_hold(padded, h, pvmap, le=False):
        raise AssertionError("padded graph does not meet the matrix equalities")
    edge_map, _ = _bicover_edges(padded, h, pvmap)
    cover = GraphHomomorphism(padded, h, pvmap, edge_map)
    return BiresolvingConstruction(
        homomorphism=restrict(cover, g),
        cover=cover,
        padded_graph=padded,
        new_vertices=tuple(new_vertices),
        new_edges=tuple(e.id for e in new_edges),
    )
