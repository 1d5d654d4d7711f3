"""Bi-covering extensions of bi-resolving homomorphisms.

Three constructions: plain completion to a bi-covering map, the same-degree
irreducible extension for weakly connected domains, and the degree-``n``
irreducible extension that folds every component into a fresh copy of the
codomain by swapping terminal vertices of new edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from .errors import PreconditionError
from .graph import (
    DirectedMultigraph,
    Edge,
    connectivity,
    graph_spectral_radius,
    irreducible_components,
    is_irreducible,
    is_weakly_connected,
    spectral_close,
    spectral_less,
    weak_components,
)
from .homomorphism import GraphHomomorphism, resolving_profile, vertex_degree

Connectivity = Literal["irreducible", "weak"]


@dataclass(frozen=True)
class MergeStep:
    component: tuple[str, ...]
    edge: str              # new edge of the component whose terminal vertex moved
    partner: str           # new edge of the running graph it swapped with
    image: str             # common codomain edge of the two
    connected: bool        # running graph irreducible (or weakly connected) afterwards
    covers_all: bool       # running graph still has a new edge over every codomain edge


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    original: GraphHomomorphism
    extended_graph: DirectedMultigraph
    extension: GraphHomomorphism
    new_edges: tuple[str, ...]
    new_vertices: tuple[str, ...]
    degree: int
    steps: tuple[MergeStep, ...] = field(default=())

    def restriction_matches(self) -> bool:
        phi, ext = self.original, self.extension
        return (all(ext.vertex_map[v] == w for v, w in phi.vertex_map.items())
                and all(ext.edge_map[e] == b for e, b in phi.edge_map.items())
                and all(self.extended_graph.edge_by_id[e.id] == e for e in phi.domain.edges))


@dataclass(frozen=True)
class PerronDiagnosis:
    holds: bool
    codomain_irreducible: bool
    domain_irreducible: bool
    lambda_domain: float
    lambda_codomain: float

    @property
    def message(self) -> str:
        if not self.holds:
            return "no Perron obstruction"
        return ("Perron obstruction: H is irreducible, G is not, and lambda_G = lambda_H "
                f"= {self.lambda_codomain:.10g}; no bi-covering extension has an "
                "irreducible domain")

    def as_dict(self) -> dict:
        return {"holds": self.holds, "codomain_irreducible": self.codomain_irreducible,
                "domain_irreducible": self.domain_irreducible,
                "lambda_G": self.lambda_domain, "lambda_H": self.lambda_codomain,
                "message": self.message}


def perron_obstruction_check(phi: GraphHomomorphism) -> PerronDiagnosis:
    lg = graph_spectral_radius(phi.domain)
    lh = graph_spectral_radius(phi.codomain)
    h_irr = is_irreducible(phi.codomain)
    g_irr = is_irreducible(phi.domain)
    return PerronDiagnosis(h_irr and not g_irr and spectral_close(lg, lh), h_irr, g_irr, lg, lh)


def _fresh(name: str, taken: set) -> str:
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def _require_biresolving(phi: GraphHomomorphism):
    if not resolving_profile(phi).bi_resolving:
        raise PreconditionError("bi-resolving", "the homomorphism is not bi-resolving")


def bicovering_completion(phi: GraphHomomorphism,
                          target_fiber_size: int | None = None) -> ExtensionResult:
    """Pad every vertex fiber to ``target_fiber_size`` and add vertex-separated new edges
    until each codomain edge has exactly that many preimages."""
    _require_biresolving(phi)
    g, h = phi.domain, phi.codomain
    d = vertex_degree(phi)
    size = d if target_fiber_size is None else target_fiber_size
    if size < d:
        raise PreconditionError("fiber size", f"target fiber size {size} is below deg = {d}")
    if not h.edges:
        raise PreconditionError("codomain has edges", "the codomain graph has no edges")
    vtaken = set(g.vertices)
    etaken = set(g.edge_by_id)
    fibers: dict[str, list[str]] = {v: [] for v in h.vertices}
    for v in g.vertices:
        fibers[phi.vertex_map[v]].append(v)
    vmap = dict(phi.vertex_map)
    new_vertices = []
    for big_i in h.vertices:
        for k in range(size - len(fibers[big_i])):
            v = _fresh(f"pad:{big_i}#{k}", vtaken)
            fibers[big_i].append(v)
            vmap[v] = big_i
            new_vertices.append(v)
    old_by_image: dict[str, list[Edge]] = {b.id: [] for b in h.edges}
    for e in g.edges:
        old_by_image[phi.edge_map[e.id]].append(e)
    emap = dict(phi.edge_map)
    new_edges = []
    for b in h.edges:
        used_src = {e.src for e in old_by_image[b.id]}
        used_dst = {e.dst for e in old_by_image[b.id]}
        free_src = [v for v in fibers[b.src] if v not in used_src]
        free_dst = [v for v in fibers[b.dst] if v not in used_dst]
        for k, (u, w) in enumerate(zip(free_src, free_dst)):
            eid = _fresh(f"new:{b.id}#{k}", etaken)
            new_edges.append(Edge(eid, u, w))
            emap[eid] = b.id
    graph = DirectedMultigraph(g.vertices + tuple(new_vertices), g.edges + tuple(new_edges))
    ext = GraphHomomorphism(graph, h, vmap, emap)
    return ExtensionResult(phi, graph, ext, tuple(e.id for e in new_edges),
                           tuple(new_vertices), size)


def _connected(g: DirectedMultigraph, mode: Connectivity) -> bool:
    return is_irreducible(g) if mode == "irreducible" else is_weakly_connected(g)


def _check_codomain(h: DirectedMultigraph, mode: Connectivity):
    if mode not in ("irreducible", "weak"):
        raise ValueError(f"unknown connectivity mode {mode!r}")
    if not _connected(h, mode):
        name = "H irreducible" if mode == "irreducible" else "H weakly connected"
        raise PreconditionError(name, f"{name} hypothesis fails")


def _refuse_if_obstructed(phi: GraphHomomorphism, mode: Connectivity):
    if mode != "irreducible":
        return
    diag = perron_obstruction_check(phi)
    if diag.holds:
        err = PreconditionError("Perron", diag.message)
        err.diagnosis = diag
        raise err


def irreducible_extension_same_degree(phi: GraphHomomorphism,
                                      mode: Connectivity = "irreducible") -> ExtensionResult:
    """Bi-covering extension of the same degree with an irreducible domain.

    Requires a weakly connected domain; the completion itself is the answer.
    """
    _check_codomain(phi.codomain, mode)
    _require_biresolving(phi)
    if not is_weakly_connected(phi.domain):
        err = PreconditionError("weakly connected")
        diag = perron_obstruction_check(phi)
        if diag.holds:
            err.diagnosis = diag
        raise err
    _refuse_if_obstructed(phi, mode)
    result = bicovering_completion(phi, vertex_degree(phi))
    if not _connected(result.extended_graph, mode):
        raise AssertionError("completion of a weakly connected domain is not connected")
    return result


def _component_order(g: DirectedMultigraph, mode: Connectivity) -> list[tuple[str, ...]]:
    if mode == "irreducible":
        comps = irreducible_components(g)
        covered = {v for c in comps for v in c}
        if covered != set(g.vertices):
            raise AssertionError("completed graph has vertices off every cycle")
        return comps
    return weak_components(g)


def irreducible_extension_degree_n(phi: GraphHomomorphism, n: int,
                                   mode: Connectivity = "irreducible") -> ExtensionResult:
    """Degree-``n`` bi-covering extension with an irreducible domain (``n > deg``)."""
    _check_codomain(phi.codomain, mode)
    _require_biresolving(phi)
    d = vertex_degree(phi)
    if n <= d:
        raise PreconditionError("n > d", f"n = {n} must exceed deg = {d}")
    lg = graph_spectral_radius(phi.domain)
    lh = graph_spectral_radius(phi.codomain)
    if not spectral_less(lg, lh):
        _refuse_if_obstructed(phi, mode)
        raise PreconditionError(
            "Perron", f"lambda_H > lambda_G hypothesis fails (lambda_G = {lg:.10g}, "
                      f"lambda_H = {lh:.10g})")
    h = phi.codomain
    completion = bicovering_completion(phi, n - 1)
    ghat = completion.extended_graph
    new_set = set(completion.new_edges)
    emap = dict(completion.extension.edge_map)
    vmap = dict(completion.extension.vertex_map)

    vtaken = set(ghat.vertices)
    etaken = set(ghat.edge_by_id)
    copy_v = {big_i: _fresh(f"copy:{big_i}", vtaken) for big_i in h.vertices}
    copy_edges = []
    for b in h.edges:
        eid = _fresh(f"copy:{b.id}", etaken)
        copy_edges.append(Edge(eid, copy_v[b.src], copy_v[b.dst]))
        emap[eid] = b.id
        new_set.add(eid)
    for big_i, v in copy_v.items():
        vmap[v] = big_i

    # mutable endpoints; the running graph starts as the copy of H
    ends = {e.id: [e.src, e.dst] for e in ghat.edges}
    ends.update({e.id: [e.src, e.dst] for e in copy_edges})
    running_vertices = list(copy_v.values())
    running_edges = [e.id for e in copy_edges]
    running_new: dict[str, list[str]] = {b.id: [] for b in h.edges}
    for e in copy_edges:
        running_new[emap[e.id]].append(e.id)

    def running_graph():
        return DirectedMultigraph(tuple(running_vertices),
                                  tuple(Edge(e, *ends[e]) for e in running_edges))

    steps = []
    for comp in _component_order(ghat, mode):
        members = set(comp)
        comp_edges = [e.id for e in ghat.edges if e.src in members]
        candidates = [e for e in comp_edges if e in new_set]
        if not candidates:
            raise AssertionError(f"component {comp} has no new edge")
        e_k = next(e for e in candidates if running_new[emap[e]])
        b_k = emap[e_k]
        partner = running_new[b_k][0]
        ends[e_k][1], ends[partner][1] = ends[partner][1], ends[e_k][1]
        running_vertices.extend(comp)
        running_edges.extend(comp_edges)
        for e in candidates:
            running_new[emap[e]].append(e)
        rg = running_graph()
        step = MergeStep(tuple(comp), e_k, partner, b_k, _connected(rg, mode),
                         all(running_new[b.id] for b in h.edges))
        steps.append(step)
        if not (step.connected and step.covers_all):
            raise AssertionError(f"merge invariant broken after folding {comp}")

    edges = tuple(Edge(e.id, *ends[e.id]) for e in ghat.edges) + \
        tuple(Edge(e.id, *ends[e.id]) for e in copy_edges)
    graph = DirectedMultigraph(ghat.vertices + tuple(copy_v.values()), edges)
    ext = GraphHomomorphism(graph, h, vmap, emap)
    new_edges = completion.new_edges + tuple(e.id for e in copy_edges)
    return ExtensionResult(phi, graph, ext, new_edges,
                           completion.new_vertices + tuple(copy_v.values()), n, tuple(steps))


def connectivity_mode_check(result: ExtensionResult, mode: Connectivity = "irreducible") -> bool:
    rep = connectivity(result.extended_graph)
    return rep.irreducible if mode == "irreducible" else rep.weakly_connected


__all__ = [
    "ExtensionResult",
    "MergeStep",
    "PerronDiagnosis",
    "bicovering_completion",
    "connectivity_mode_check",
    "irreducible_extension_degree_n",
    "irreducible_extension_same_degree",
    "perron_obstruction_check",
]
