import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biresolve.errors import PreconditionError
from biresolve.extension import (
    bicovering_completion,
    irreducible_extension_degree_n,
    irreducible_extension_same_degree,
    perron_obstruction_check,
)
from biresolve.graph import (
    build_graph,
    connectivity,
    graph_spectral_radius,
    is_weakly_connected,
    spectral_less,
)
from biresolve.homomorphism import (
    GraphHomomorphism,
    identity_homomorphism,
    resolving_profile,
    vertex_degree,
)

from helpers import (
    ab_path_cover,
    disjoint_loops_over_loop,
    one_loop,
    random_biresolving,
    random_irreducible,
    single_a_loop,
    two_loop_codomain,
    two_loops_one_vertex,
)


def edgeless_over_two_loops():
    return GraphHomomorphism(build_graph(["x"], []), two_loop_codomain(), {"x": "I"}, {})


def shape(result):
    g = result.extended_graph
    return sorted((e.src, e.dst, result.extension.edge_map[e.id]) for e in g.edges)


def check_result(result, irreducible=True):
    assert result.restriction_matches()
    assert resolving_profile(result.extension).bi_covering
    assert vertex_degree(result.extension) == result.degree
    assert set(result.new_edges) == set(result.extended_graph.edge_by_id) - set(
        result.original.domain.edge_by_id)
    if irreducible:
        assert connectivity(result.extended_graph).irreducible


def test_completion_examples():
    ident = identity_homomorphism(one_loop())
    res = bicovering_completion(ident, 1)
    assert res.new_edges == () and res.extended_graph == one_loop()

    res = bicovering_completion(single_a_loop(), 1)
    assert res.new_edges == ("new:b#0",)
    assert shape(res) == [("0", "0", "a"), ("0", "0", "b")]

    lone = GraphHomomorphism(build_graph(["x"], []), one_loop(), {"x": "v"}, {})
    res = bicovering_completion(lone, 1)
    assert shape(res) == [("x", "x", "a")]


def test_completion_errors():
    phi = GraphHomomorphism(two_loops_one_vertex(), one_loop(), {"v": "v"}, {"e": "a", "f": "a"})
    with pytest.raises(PreconditionError, match="bi-resolving"):
        bicovering_completion(phi)
    with pytest.raises(PreconditionError):
        bicovering_completion(ab_path_cover(), 1)
    edgeless = build_graph(["w"], [])
    with pytest.raises(PreconditionError):
        bicovering_completion(identity_homomorphism(edgeless))


def test_same_degree_examples():
    ident = identity_homomorphism(one_loop())
    res = irreducible_extension_same_degree(ident)
    assert res.degree == 1 and res.new_edges == ()

    res = irreducible_extension_same_degree(single_a_loop())
    assert res.degree == 1
    assert shape(res) == [("0", "0", "a"), ("0", "0", "b")]
    check_result(res)

    res = irreducible_extension_same_degree(ab_path_cover())
    assert res.degree == 2
    check_result(res)


def test_same_degree_errors():
    with pytest.raises(PreconditionError, match="weakly connected"):
        irreducible_extension_same_degree(disjoint_loops_over_loop())
    h = build_graph(["A", "B"], [("a", "A", "A"), ("b", "B", "B")])
    phi = identity_homomorphism(h)
    with pytest.raises(PreconditionError, match="H irreducible"):
        irreducible_extension_same_degree(phi)


def test_degree_n_examples():
    res = irreducible_extension_degree_n(single_a_loop(), 2)
    check_result(res)
    assert res.degree == 2
    names = {e.id: (e.src, e.dst, res.extension.edge_map[e.id]) for e in res.extended_graph.edges}
    assert names == {
        "x": ("0", "0", "a"),
        "new:b#0": ("0", "copy:I", "b"),
        "copy:a": ("copy:I", "copy:I", "a"),
        "copy:b": ("copy:I", "0", "b"),
    }

    res = irreducible_extension_degree_n(edgeless_over_two_loops(), 2)
    check_result(res)
    assert sorted((a, b) for a, b, _ in shape(res)) == sorted(
        [("x", "x"), ("x", "copy:I"), ("copy:I", "copy:I"), ("copy:I", "x")])


def test_degree_n_larger_jump():
    res = irreducible_extension_degree_n(single_a_loop(), 4)
    check_result(res)
    assert res.degree == 4
    for step in res.steps:
        assert step.connected and step.covers_all


def test_degree_n_errors():
    with pytest.raises(PreconditionError) as info:
        irreducible_extension_degree_n(single_a_loop(), 1)
    assert info.value.hypothesis == "n > d"
    ident = identity_homomorphism(one_loop())
    with pytest.raises(PreconditionError, match="lambda"):
        irreducible_extension_degree_n(ident, 2)


def test_perron_examples():
    diag = perron_obstruction_check(disjoint_loops_over_loop())
    assert diag.holds and diag.lambda_domain == pytest.approx(1.0)
    assert not perron_obstruction_check(identity_homomorphism(one_loop())).holds
    assert not perron_obstruction_check(single_a_loop()).holds


def test_obstruction_refuses_with_diagnosis():
    with pytest.raises(PreconditionError) as info:
        irreducible_extension_degree_n(disjoint_loops_over_loop(), 3)
    assert info.value.diagnosis.holds
    assert "Perron obstruction" in str(info.value)
    with pytest.raises(PreconditionError) as info:
        irreducible_extension_same_degree(disjoint_loops_over_loop())
    assert info.value.diagnosis.holds


def test_weak_mode_relaxes_postcondition():
    g = build_graph(["1", "2"], [("x", "1", "1"), ("e", "1", "2")])
    h = build_graph(["A", "B"], [("a", "A", "A"), ("b", "A", "B")])
    phi = GraphHomomorphism(g, h, {"1": "A", "2": "B"}, {"x": "a", "e": "b"})
    res = irreducible_extension_same_degree(phi, mode="weak")
    assert is_weakly_connected(res.extended_graph)
    assert resolving_profile(res.extension).bi_covering
    with pytest.raises(PreconditionError):
        irreducible_extension_same_degree(phi)


def random_case(seed):
    rng = random.Random(seed)
    h = random_irreducible(rng, 3, 2, prefix="h")
    while not h.edges:
        h = random_irreducible(rng, 3, 2, prefix="h")
    return h, random_biresolving(rng, h, 4, density=rng.choice([0.3, 0.6, 0.9]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_completion_properties(seed):
    h, phi = random_case(seed)
    res = bicovering_completion(phi)
    check_result(res, irreducible=False)
    rep = connectivity(res.extended_graph)
    assert {v for c in rep.irreducible_components for v in c} == set(res.extended_graph.vertices)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_same_degree_properties(seed):
    h, phi = random_case(seed)
    if not is_weakly_connected(phi.domain):
        return
    if perron_obstruction_check(phi).holds:
        with pytest.raises(PreconditionError):
            irreducible_extension_same_degree(phi)
        return
    res = irreducible_extension_same_degree(phi)
    check_result(res)
    assert res.degree == vertex_degree(phi)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 2))
def test_degree_n_properties(seed, extra):
    h, phi = random_case(seed)
    d = vertex_degree(phi)
    if not spectral_less(graph_spectral_radius(phi.domain), graph_spectral_radius(h)):
        with pytest.raises(PreconditionError):
            irreducible_extension_degree_n(phi, d + extra)
        return
    res = irreducible_extension_degree_n(phi, d + extra)
    check_result(res)
    assert res.degree == d + extra
    assert all(s.connected and s.covers_all for s in res.steps)
