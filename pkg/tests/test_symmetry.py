import math

import numpy as np
import pytest
from hypothesis import assume, given

from oracles import angle_close, brute_symmetries, null_space_projector
from strategies import configurations, symmetric_configurations
from swarmsym.configuration import Configuration, diameter, pairwise_distances
from swarmsym.fixtures import generic4, regular_polygon, star16, triangle, two_triangles
from swarmsym.symmetry import (
    GroupClosureError,
    OrthogonalElement,
    SymmetryElement,
    SymmetryGroup,
    apply,
    apply_vector,
    close_group,
    compose,
    detect_symmetries,
    equivariance_residual,
    fixed_subspace,
    generating_set,
    group_average_projector,
    inverse,
    perm_compose,
    perm_from_cycles,
    perm_from_one_based,
    perm_inverse,
    permutation_matrix,
    subset_check,
    symmetricity,
)

rot = OrthogonalElement.rotation
refl = OrthogonalElement.reflection


def matches_oracle(z, tol=1e-9):
    got = list(detect_symmetries(z, tol=tol))
    want = brute_symmetries(z.positions, tol=tol)
    if len(got) != len(want):
        return False
    for kind, angle, kappa in want:
        period = 2 * math.pi if kind == "rot" else math.pi
        if not any(g.kappa == kappa and g.rho.kind == kind and angle_close(g.rho.angle, angle, period) for g in got):
            return False
    return True


# --- orthogonal maps and permutations -------------------------------------


def test_angles_are_normalised():
    assert rot(-math.pi / 2).angle == pytest.approx(3 * math.pi / 2)
    assert rot(2 * math.pi - 1e-12).angle == 0.0
    assert refl(math.pi + 0.25).angle == pytest.approx(0.25)
    with pytest.raises(ValueError):
        OrthogonalElement("shear", 0.0)


@pytest.mark.parametrize(
    "a,b",
    [(rot(0.3), rot(1.1)), (rot(0.3), refl(0.7)), (refl(0.2), rot(2.0)), (refl(0.2), refl(1.4))],
)
def test_orthogonal_compose_matches_matrices(a, b):
    np.testing.assert_allclose(a.compose(b).matrix, a.matrix @ b.matrix, atol=1e-12)
    np.testing.assert_allclose(a.inverse().matrix, np.linalg.inv(a.matrix), atol=1e-12)
    assert a.det * b.det == a.compose(b).det


def test_reflection_matrix_fixes_axis():
    r = refl(math.pi / 3)
    axis = np.array([math.cos(math.pi / 3), math.sin(math.pi / 3)])
    np.testing.assert_allclose(r.matrix @ axis, axis, atol=1e-15)
    np.testing.assert_allclose(r.matrix @ r.matrix, np.eye(2), atol=1e-15)


def test_permutation_helpers():
    p = perm_from_one_based([2, 3, 1])
    assert p == (1, 2, 0)
    assert perm_compose(p, perm_inverse(p)) == (0, 1, 2)
    assert perm_from_cycles(4, (1, 3)) == (2, 1, 0, 3)
    with pytest.raises(ValueError):
        perm_from_one_based([1, 1, 2])
    with pytest.raises(ValueError):
        SymmetryElement(rot(0), (0, 0, 1))


def test_permutation_matrix_blocks():
    P = permutation_matrix((1, 2, 0))
    v = np.arange(6.0)
    np.testing.assert_array_equal(P @ v, [2, 3, 4, 5, 0, 1])


def test_apply_uses_block_convention():
    z = Configuration([[1, 0], [0, 1], [-1, 0]])
    g = SymmetryElement(rot(math.pi / 2), (1, 2, 0))
    out = apply(g, z)
    # (g z)_i = rho z_kappa(i)
    np.testing.assert_allclose(out.positions[0], rot(math.pi / 2).matrix @ z.positions[1], atol=1e-15)
    np.testing.assert_allclose(g.matrix() @ z.vector, out.vector, atol=1e-15)
    np.testing.assert_allclose(apply_vector(g, z.vector), out.vector, atol=1e-15)


def test_compose_is_matrix_product():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = 5
        a = SymmetryElement(rot(rng.uniform(0, 7)) if rng.random() < 0.5 else refl(rng.uniform(0, 4)), tuple(rng.permutation(n)))
        b = SymmetryElement(rot(rng.uniform(0, 7)) if rng.random() < 0.5 else refl(rng.uniform(0, 4)), tuple(rng.permutation(n)))
        np.testing.assert_allclose(compose(a, b).matrix(), a.matrix() @ b.matrix(), atol=1e-12)
        assert compose(a, inverse(a)).is_identity


def test_element_text_is_one_based():
    g = SymmetryElement(rot(2 * math.pi / 3), (1, 2, 0))
    assert str(g).endswith("∘perm[2,3,1]")
    assert str(g).startswith("rot(")


# --- groups ------------------------------------------------------------------


def test_close_group_dihedral():
    n = 5
    g = SymmetryElement(rot(2 * math.pi / n), tuple((i + 1) % n for i in range(n)))
    r = SymmetryElement(refl(0.0), tuple((-i) % n for i in range(n)))
    G = close_group([g, r])
    assert len(G) == 2 * n
    assert len(G.rotations()) == n and len(G.reflections()) == n
    assert len(close_group(generating_set(G))) == 2 * n


def test_close_group_cap():
    g = SymmetryElement(rot(1.0), (0, 1, 2))  # irrational rotation: infinite order
    with pytest.raises(GroupClosureError):
        close_group([g], cap=50)


def test_full_group_and_subset():
    F = SymmetryGroup.full(3)
    T = SymmetryGroup.trivial(3)
    assert F.is_full_gamma and math.isinf(F.order)
    assert subset_check(T, F) and not subset_check(F, T)
    with pytest.raises(ValueError):
        subset_check(T, SymmetryGroup.trivial(4))


# --- detection -----------------------------------------------------------------


def test_triangle_group():
    G = detect_symmetries(triangle())
    assert len(G) == 6
    assert symmetricity(triangle()) == 3
    assert SymmetryElement(refl(math.pi / 2), (0, 2, 1)) in G
    assert SymmetryElement(rot(2 * math.pi / 3), (1, 2, 0)) in G


@pytest.mark.parametrize("n", [3, 4, 5, 6, 8, 16])
def test_regular_polygon_is_dihedral(n):
    z = regular_polygon(n, radius=1.7, phase=0.4)
    G = detect_symmetries(z)
    assert len(G) == 2 * n
    assert symmetricity(z) == n
    assert len(detect_symmetries(z, chirality_only=True)) == n


def test_fixture_groups():
    assert len(detect_symmetries(star16())) == 16
    assert symmetricity(star16()) == 8
    assert len(detect_symmetries(two_triangles())) == 3
    assert symmetricity(two_triangles()) == 3
    assert len(detect_symmetries(generic4())) == 1


def test_collisions_give_relabellings():
    z = Configuration([[1, 0], [1, 0], [-1, 0], [-1, 0]])
    G = detect_symmetries(z)
    # C2 x reflection about the x axis, times 2! x 2! inside the pairs, plus the swap of pairs
    assert len(G) == len(brute_symmetries(z.positions)) == 16


def test_collapsed_swarm_is_full():
    G = detect_symmetries(Configuration([[2, 2], [2, 2], [2, 2]]))
    assert G.is_full_gamma
    assert symmetricity(Configuration([[2, 2], [2, 2], [2, 2]])) == 3


def test_single_robot_is_full():
    assert detect_symmetries(Configuration([[0.3, 0.1]])).is_full_gamma


def test_detection_is_translation_invariant():
    z = two_triangles().translated([10.0, -3.0])
    assert detect_symmetries(z) == detect_symmetries(two_triangles())


def test_rejects_non_positive_tol():
    with pytest.raises(ValueError):
        detect_symmetries(triangle(), tol=0)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_regular_polygon_matches_oracle(n):
    assert matches_oracle(regular_polygon(n, phase=0.1))


def test_two_triangles_matches_oracle():
    assert matches_oracle(two_triangles())


@given(configurations(max_n=6, grid=True))
def test_detect_matches_oracle_on_grid(z):
    assume(diameter(z) > 0)
    assert matches_oracle(z)


@given(symmetric_configurations(max_n=6))
def test_detect_matches_oracle_on_symmetric(z):
    d = pairwise_distances(z)
    off = d[np.triu_indices(z.n, 1)]
    # avoid configurations whose points are nearly but not exactly coincident
    assume(np.all((off > 1e-6 * d.max()) | (off <= 1e-12 * d.max())))
    assert matches_oracle(z)


# --- fixed subspaces -------------------------------------------------------------


def test_triangle_fix_is_one_dimensional():
    B = fixed_subspace(detect_symmetries(triangle()))
    assert B.shape == (6, 1)
    # spanned by the triangle itself
    v = triangle().vector
    np.testing.assert_allclose(abs(B[:, 0] @ v) / np.linalg.norm(v), 1.0, atol=1e-12)


def test_fix_of_trivial_and_full():
    assert fixed_subspace(SymmetryGroup.trivial(3)).shape == (6, 6)
    assert fixed_subspace(SymmetryGroup.full(3)).shape == (6, 0)


@given(symmetric_configurations())
def test_fix_basis_matches_projector_oracle(z):
    H = detect_symmetries(z)
    B = fixed_subspace(H)
    np.testing.assert_allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10)
    P = group_average_projector(H)
    np.testing.assert_allclose(B @ B.T, P, atol=1e-9)
    np.testing.assert_allclose(P, null_space_projector([g.matrix() for g in H]), atol=1e-9)


def test_equivariance_residual_of_linear_map():
    z = regular_polygon(4)
    g = SymmetryElement(rot(0.7), (3, 0, 1, 2))
    assert equivariance_residual(lambda c: Configuration(2 * c.positions), z, g) <= 1e-14
    assert equivariance_residual(lambda c: c.translated([1.0, 0.0]), z, g) > 0.1
