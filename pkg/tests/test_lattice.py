import json
import math

import numpy as np
import pytest

from swarmsym.configuration import Configuration
from swarmsym.fixtures import generic4, regular_polygon, triangle, two_triangles
from swarmsym.lattice import (
    IsotropyLattice,
    LatticeCapExceeded,
    are_conjugate,
    candidate_elements,
    conjugate,
    dihedral_maps,
    isotropy_closure,
    join,
    meet,
    shell_normalizer,
    upward_lattice,
    verify_lattice,
)
from swarmsym.symmetry import (
    OrthogonalElement,
    SymmetryElement,
    SymmetryGroup,
    close_group,
    detect_symmetries,
    fixed_subspace,
    subset_check,
)


@pytest.fixture(scope="module")
def n6_lattice():
    return upward_lattice(two_triangles(), max_rot_order=6, conjugacy=True)


def c3():
    return detect_symmetries(two_triangles())


def test_join_and_meet():
    G = detect_symmetries(regular_polygon(4))
    rots = SymmetryGroup(G.rotations(), 4)
    refl = close_group([G.reflections()[0]])
    assert len(join(rots, refl)) == 8
    assert len(meet(rots, refl)) == 1
    assert join(rots, SymmetryGroup.full(4)).is_full_gamma
    assert meet(SymmetryGroup.full(4), rots) == rots


def test_conjugate_by_relabelling():
    H = close_group([SymmetryElement(OrthogonalElement.reflection(0.0), (1, 0, 2))])
    swap = SymmetryElement(OrthogonalElement.rotation(0.0), (0, 2, 1))
    K = conjugate(H, swap)
    assert K != H
    assert are_conjugate(H, K)
    assert not are_conjugate(H, SymmetryGroup.trivial(3))


def test_dihedral_maps():
    maps = dihedral_maps(4)
    assert len(maps) == 8
    assert sum(m.kind == "refl" for m in maps) == 4
    assert len(list(candidate_elements(3, 2))) == 4 * 6
    with pytest.raises(ValueError):
        dihedral_maps(0)


def test_isotropy_closure_of_detected_group_is_itself():
    H = detect_symmetries(triangle())
    assert isotropy_closure(H, 6) == H
    assert isotropy_closure(H, list(candidate_elements(3, 6))) == H


def test_isotropy_closure_adds_hidden_symmetries():
    # the half turn pins robots 3 and 4 to the origin, so swapping them is free
    g = SymmetryElement(OrthogonalElement.rotation(math.pi), (1, 0, 2, 3))
    H = close_group([g])
    big = isotropy_closure(H, 4)
    assert subset_check(H, big)
    assert len(big) == 4
    assert SymmetryElement(OrthogonalElement.rotation(0.0), (0, 1, 3, 2)) in big
    np.testing.assert_allclose(
        fixed_subspace(big) @ fixed_subspace(big).T, fixed_subspace(H) @ fixed_subspace(H).T, atol=1e-9
    )


def test_triangle_lattice_has_two_nodes():
    # Fix(Gamma_z) is the line through the triangle: any larger group fixes only 0
    assert fixed_subspace(detect_symmetries(triangle())).shape[1] == 1
    lat = upward_lattice(triangle())
    assert len(lat.nodes) == 2
    assert lat.edges == [(0, 1)]
    assert lat.nodes[1].group.is_full_gamma


def test_generic_lattice_is_bottom_and_top():
    lat = upward_lattice(generic4())
    assert len(lat.nodes) == 2
    assert len(lat.nodes[0].group) == 1
    assert lat.nodes[lat.top].group.is_full_gamma


def test_collapsed_swarm_lattice():
    lat = upward_lattice(Configuration(np.zeros((3, 2))))
    assert len(lat.nodes) == 1 and lat.top == lat.bottom == 0


def test_node_cap_returns_partial_lattice():
    with pytest.raises(LatticeCapExceeded) as info:
        upward_lattice(two_triangles(), max_rot_order=6, node_cap=4)
    partial = info.value.lattice
    assert isinstance(partial, IsotropyLattice)
    assert not partial.complete
    assert len(partial.nodes) <= 4


def test_depth_limit(n6_lattice):
    lat = upward_lattice(two_triangles(), max_rot_order=6, conjugacy=True, max_depth=1)
    assert not lat.complete
    assert len(lat.nodes) < len(n6_lattice.nodes)
    assert all(node.depth <= 1 for node in lat.nodes)


def test_n6_witnesses_realise_their_nodes(n6_lattice):
    assert verify_lattice(n6_lattice) == []
    for node in n6_lattice.nodes[:-1]:
        v = node.witness.vector
        np.testing.assert_allclose(node.projector @ v, v, atol=1e-9 * np.abs(v).max())
        assert detect_symmetries(node.witness) == node.group


def test_n6_every_node_contains_bottom(n6_lattice):
    g0 = n6_lattice.nodes[0].group
    for node in n6_lattice.nodes[1:-1]:
        assert subset_check(g0, node.group)


def test_n6_fix_dims_decrease_along_edges(n6_lattice):
    for a, b in n6_lattice.edges:
        assert n6_lattice.nodes[b].fix_dim < n6_lattice.nodes[a].fix_dim


def test_n6_nodes_are_pairwise_non_conjugate(n6_lattice):
    z = two_triangles()
    conj = shell_normalizer(z, c3(), 6)
    mids = [n6_lattice.nodes[i] for i in n6_lattice.intermediate()]
    for i, a in enumerate(mids):
        for b in mids[i + 1 :]:
            assert not (a.fix_dim == b.fix_dim and any(conjugate(a.group, c) == b.group for c in conj))


def test_lattice_is_deterministic():
    a = upward_lattice(two_triangles(), max_rot_order=6, conjugacy=True, seed=3)
    b = upward_lattice(two_triangles(), max_rot_order=6, conjugacy=True, seed=3)
    assert a.to_json() == b.to_json()


def test_exports(n6_lattice):
    dot = n6_lattice.to_dot()
    assert dot.startswith("digraph isotropy_lattice {")
    assert "rankdir=BT" in dot
    assert dot.count(" -> ") == len(n6_lattice.edges)
    assert 'label="order=3, fixdim=4, gens=[' in dot
    assert 'label="order=inf, fixdim=0, gens=[]"' in dot
    data = json.loads(n6_lattice.to_json())
    assert len(data["nodes"]) == len(n6_lattice.nodes)
    assert data["nodes"][-1]["full_gamma"] is True
    assert data["edges"] == [list(e) for e in n6_lattice.edges]
