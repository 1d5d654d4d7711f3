"""Brute-force cross-checks, deliberately written without the fast machinery."""

from __future__ import annotations

from typing import Mapping, Sequence

from .graph import DirectedMultigraph
from .homomorphism import GraphHomomorphism
from .shift import SlidingBlockCode, periodic_points


def lift_count(phi: GraphHomomorphism, y: Sequence[str], repeats: int | None = None) -> int:
    """Number of domain paths whose image is ``y`` repeated ``repeats`` times.

    For a bi-resolving ``phi`` and ``repeats`` above the number of domain
    vertices this equals the number of points over the periodic point ``y``.
    """
    g = phi.domain
    reps = len(g.vertices) + 1 if repeats is None else repeats
    target = list(y) * reps
    count = 0

    def walk(v, i):
        nonlocal count
        if i == len(target):
            count += 1
            return
        for e in g.out_edges[v]:
            if phi.edge_map[e.id] == target[i]:
                walk(e.dst, i + 1)

    for v in g.vertices:
        walk(v, 0)
    return count


def periodic_preimages(code: SlidingBlockCode, y: Sequence[str], multiple: int) -> int:
    """Count points of period ``len(y) * multiple`` in the domain that map onto ``...yyy...``."""
    q = len(y) * multiple
    target = tuple(y) * multiple
    return sum(1 for x in periodic_points(code.domain, q) if code.apply_periodic(x) == target)


def _has_past(g: DirectedMultigraph, v: str, depth: int) -> bool:
    frontier = {v}
    for _ in range(depth):
        frontier = {e.src for u in frontier for e in g.in_edges[u]}
        if not frontier:
            return False
    return True


def _one_side(g: DirectedMultigraph, psi: Mapping[str, str], forward: bool) -> bool:
    """True when no two distinct paths from a common vertex (with a long past) share a
    long image. Depth ``|V|^2 + 1`` forces a repeated pair of vertices."""
    out = g.out_edges if forward else g.in_edges
    end = (lambda e: e.dst) if forward else (lambda e: e.src)
    has_tail = _has_past if forward else _has_future
    depth = len(g.vertices) ** 2 + 1
    for u in g.vertices:
        if not has_tail(g, u, len(g.vertices)):
            continue
        edges = out[u]
        for i, e in enumerate(edges):
            for f in edges[i + 1:]:
                if psi[e.id] != psi[f.id]:
                    continue
                level = {(end(e), end(f))}
                for _ in range(depth):
                    level = {(end(a), end(b)) for p, q in level
                             for a in out[p] for b in out[q] if psi[a.id] == psi[b.id]}
                    if not level:
                        break
                if level:
                    return False
    return True


def _has_future(g: DirectedMultigraph, v: str, depth: int) -> bool:
    frontier = {v}
    for _ in range(depth):
        frontier = {e.dst for u in frontier for e in g.out_edges[u]}
        if not frontier:
            return False
    return True


def closing_flags(g: DirectedMultigraph, psi: Mapping[str, str]) -> tuple[bool, bool]:
    """(right closing, left closing) of the 1-block code ``psi`` on the edge shift of ``g``."""
    return _one_side(g, psi, True), _one_side(g, psi, False)
