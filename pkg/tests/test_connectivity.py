import math

import numpy as np
import pytest
from hypothesis import given

from oracles import brute_automorphisms
from strategies import adjacency_matrices, configurations
from swarmsym.connectivity import (
    AutomorphismCapExceeded,
    ConnectivityGraph,
    GainClass,
    automorphisms,
    build_graph,
    classify_gain,
    cyclic_shift,
    in_gamma_G,
    preserves_adjacency,
    rotational_automorphisms,
)
from swarmsym.fixtures import regular_polygon
from swarmsym.symmetry import OrthogonalElement, SymmetryElement, apply, detect_symmetries


def test_cycle_and_complete():
    C = ConnectivityGraph.cycle(5)
    assert C.edges == frozenset({(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)})
    assert C.neighbors(0) == [1, 4]
    assert list(C.degrees()) == [2] * 5
    assert len(ConnectivityGraph.complete(4).edges) == 6


def test_graph_validation():
    with pytest.raises(ValueError):
        ConnectivityGraph(3, frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        ConnectivityGraph(3, frozenset({(0, 5)}))


def test_edge_list_round_trip():
    G = ConnectivityGraph.cycle(6)
    text = G.to_edge_list()
    assert text.splitlines()[0] == "1 2"
    assert ConnectivityGraph.from_edge_list(6, text) == G
    with pytest.raises(ValueError):
        ConnectivityGraph.from_edge_list(3, "1 x\n")


def test_build_graph_threshold_is_inclusive():
    z = regular_polygon(4)
    side = math.sqrt(2)
    assert build_graph(z, side + 1e-12).edges == ConnectivityGraph.cycle(4).edges
    assert len(build_graph(z, 2.0 + 1e-12).edges) == 6
    assert len(build_graph(z, 0.5).edges) == 0
    with pytest.raises(ValueError):
        build_graph(z, 0.0)


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_cycle_automorphisms_dihedral(n):
    aut = automorphisms(ConnectivityGraph.cycle(n))
    assert len(aut) == 2 * n
    assert len(rotational_automorphisms(aut)) == n
    assert cyclic_shift(n) in aut


def test_automorphism_generators_span_group():
    aut = automorphisms(ConnectivityGraph.cycle(6))
    span = {tuple(range(6))}
    frontier = list(span)
    while frontier:
        nxt = []
        for a in frontier:
            for g in aut.generators:
                c = tuple(g[a[i]] for i in range(6))
                if c not in span:
                    span.add(c)
                    nxt.append(c)
        frontier = nxt
    assert span == set(aut.elements)


def test_automorphism_cap():
    with pytest.raises(AutomorphismCapExceeded):
        automorphisms(ConnectivityGraph.complete(6), cap=100)


@given(adjacency_matrices())
def test_automorphisms_match_brute_force(adj):
    G = ConnectivityGraph.from_adjacency(adj)
    assert automorphisms(G).elements == brute_automorphisms(adj)


@given(configurations(grid=True))
def test_symmetry_permutations_are_automorphisms(z):
    # every symmetry of z preserves every visibility graph built from z
    G = build_graph(z, 2.5)
    group = detect_symmetries(z)
    if group.is_full_gamma:
        return
    for g in group:
        assert preserves_adjacency(g.kappa, G)


def test_in_gamma_g_depends_on_kappa_only():
    G = ConnectivityGraph.cycle(4)
    shift = SymmetryElement(OrthogonalElement.rotation(1.234), cyclic_shift(4))
    swap = SymmetryElement(OrthogonalElement.rotation(0.0), (1, 0, 2, 3))
    assert in_gamma_G(shift, G)
    assert not in_gamma_G(swap, G)
    with pytest.raises(ValueError):
        in_gamma_G(shift, ConnectivityGraph.cycle(5))


def test_classify_gain():
    G = ConnectivityGraph.cycle(4)
    inside = SymmetryElement(OrthogonalElement.rotation(math.pi / 2), cyclic_shift(4))
    outside = SymmetryElement(OrthogonalElement.rotation(0.0), (1, 0, 2, 3))
    assert classify_gain(outside, G, True) is GainClass.OUTSIDE_GAMMA_G
    assert classify_gain(inside, G, False) is GainClass.INSIDE_GAMMA_G_NONINVERTIBLE
    assert classify_gain(inside, G, True) is GainClass.VIOLATION


def test_rotation_commutes_with_graph_building():
    z = regular_polygon(7, phase=0.3)
    g = SymmetryElement(OrthogonalElement.rotation(0.9), tuple(np.roll(np.arange(7), 2)))
    G = build_graph(z, 1.0)
    Gg = build_graph(apply(g, z), 1.0)
    # relabelled graph: i ~ j in Gg iff kappa(i) ~ kappa(j) in G
    a, b = G.adjacency(), Gg.adjacency()
    k = np.array(g.kappa)
    np.testing.assert_array_equal(b, a[np.ix_(k, k)])
