"""Fixtures and random generators shared by the test modules."""

from __future__ import annotations

import itertools
import random

import numpy as np

from biresolve.graph import (
    DirectedMultigraph,
    Edge,
    build_graph,
    graph_from_matrix,
    is_irreducible,
)
from biresolve.homomorphism import GraphHomomorphism
from biresolve.shift import forbidden_shift, sofic_shift


def one_loop() -> DirectedMultigraph:
    return build_graph(["v"], [("a", "v", "v")])


def two_cycle() -> DirectedMultigraph:
    return build_graph(["1", "2"], [("e", "1", "2"), ("f", "2", "1")])


def two_loops_one_vertex() -> DirectedMultigraph:
    return build_graph(["v"], [("e", "v", "v"), ("f", "v", "v")])


def two_loop_codomain() -> DirectedMultigraph:
    """One vertex ``I`` with loops ``a`` and ``b``."""
    return build_graph(["I"], [("a", "I", "I"), ("b", "I", "I")])


def ab_path_cover() -> GraphHomomorphism:
    g = build_graph(["1", "2"], [("p", "1", "2"), ("q", "2", "1")])
    return GraphHomomorphism(g, two_loop_codomain(), {"1": "I", "2": "I"}, {"p": "a", "q": "b"})


def single_a_loop() -> GraphHomomorphism:
    g = build_graph(["0"], [("x", "0", "0")])
    return GraphHomomorphism(g, two_loop_codomain(), {"0": "I"}, {"x": "a"})


def disjoint_loops_over_loop() -> GraphHomomorphism:
    g = build_graph(["1", "2"], [("x", "1", "1"), ("y", "2", "2")])
    return GraphHomomorphism(g, one_loop(), {"1": "v", "2": "v"}, {"x": "a", "y": "a"})


def full_two_shift():
    return sofic_shift(build_graph(["v"], [("p", "v", "v"), ("q", "v", "v")]),
                       {"p": "0", "q": "1"}, ["0", "1"])


def even_shift():
    """Between two 1s there is an even number of 0s."""
    g = build_graph(["A", "B"], [("one", "A", "A"), ("z1", "A", "B"), ("z2", "B", "A")])
    return sofic_shift(g, {"one": "1", "z1": "0", "z2": "0"}, ["0", "1"])


def golden_mean():
    return forbidden_shift(["0", "1"], ["11"])


# -- random generators -------------------------------------------------------------

def random_matrix(rng: random.Random, n: int, max_entry: int = 2) -> np.ndarray:
    return np.array([[rng.randint(0, max_entry) for _ in range(n)] for _ in range(n)],
                    dtype=np.int64)


def random_irreducible(rng: random.Random, max_vertices: int = 4, max_entry: int = 2,
                       prefix: str = "") -> DirectedMultigraph:
    while True:
        n = rng.randint(1, max_vertices)
        g = graph_from_matrix(random_matrix(rng, n, max_entry),
                              [f"{prefix}{i}" for i in range(n)])
        if is_irreducible(g):
            return g


def random_biresolving(rng: random.Random, h: DirectedMultigraph, max_vertices: int = 4,
                       density: float = 0.6) -> GraphHomomorphism:
    """Random bi-resolving map into ``h``: each codomain edge gets a random partial
    matching between the fibers of its endpoints."""
    n = rng.randint(1, max_vertices)
    verts = [f"g{i}" for i in range(n)]
    vmap = {v: rng.choice(h.vertices) for v in verts}
    fibers = {w: [v for v in verts if vmap[v] == w] for w in h.vertices}
    edges, emap = [], {}
    for b in h.edges:
        srcs = fibers[b.src][:]
        dsts = fibers[b.dst][:]
        rng.shuffle(srcs)
        rng.shuffle(dsts)
        for k, (u, w) in enumerate(zip(srcs, dsts)):
            if rng.random() < density:
                eid = f"{b.id}~{k}"
                edges.append(Edge(eid, u, w))
                emap[eid] = b.id
    return GraphHomomorphism(DirectedMultigraph(tuple(verts), tuple(edges)), h, vmap, emap)


def canonical_family(max_vertices: int = 3, max_entry: int = 2) -> list[np.ndarray]:
    """Adjacency matrices with 1..max_vertices vertices, one per isomorphism class.

    The representative is the lexicographically least relabeling.
    """
    out = []
    for n in range(1, max_vertices + 1):
        perms = list(itertools.permutations(range(n)))
        seen = set()
        for vals in itertools.product(range(max_entry + 1), repeat=n * n):
            m = [vals[i * n:(i + 1) * n] for i in range(n)]
            canon = min(tuple(m[p[i]][p[j]] for i in range(n) for j in range(n)) for p in perms)
            if canon not in seen:
                seen.add(canon)
                out.append(np.array(canon, dtype=np.int64).reshape(n, n))
    return out
