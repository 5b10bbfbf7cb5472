"""Upward lattice of isotropy subgroups above a configuration's symmetry group.

Isotropy groups are handled through their fixed subspaces: a group H is an
isotropy group exactly when it is the full stabiliser of Fix(H), so a node
is identified by the projector onto Fix(H) and realised by a generic witness
configuration in that subspace.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .configuration import DEFAULT_TOL, Configuration, as_configuration, center, comparison_scale
from .symmetry import (
    DEFAULT_CAP,
    OrthogonalElement,
    SymmetryElement,
    SymmetryGroup,
    apply_vector,
    close_group,
    compose,
    detect_symmetries,
    fixed_subspace,
    generating_set,
    inverse,
    subset_check,
)

FIX_TOL = 1e-9
WITNESS_RETRIES = 100
DEFAULT_NODE_CAP = 500
_PERM_CHUNK = 8192


class LatticeCapExceeded(RuntimeError):
    """More nodes than ``node_cap``; ``lattice`` holds what was built so far."""

    def __init__(self, message: str, lattice: "IsotropyLattice"):
        super().__init__(message)
        self.lattice = lattice


def join(A: SymmetryGroup, B: SymmetryGroup, cap: int = DEFAULT_CAP) -> SymmetryGroup:
    """Smallest group containing both."""
    if A.n != B.n:
        raise ValueError("groups act on different swarm sizes")
    if A.is_full_gamma or B.is_full_gamma:
        return SymmetryGroup.full(A.n)
    return close_group(list(A) + list(B), cap=cap, n=A.n)


def meet(A: SymmetryGroup, B: SymmetryGroup) -> SymmetryGroup:
    """Elementwise intersection."""
    if A.n != B.n:
        raise ValueError("groups act on different swarm sizes")
    if A.is_full_gamma:
        return B
    if B.is_full_gamma:
        return A
    return SymmetryGroup([g for g in A if g in B], A.n)


def conjugate(H: SymmetryGroup, gamma: SymmetryElement) -> SymmetryGroup:
    """gamma^-1 H gamma."""
    if H.is_full_gamma:
        return H
    gi = inverse(gamma)
    return SymmetryGroup([compose(gi, compose(h, gamma)) for h in H], H.n)


def are_conjugate(H: SymmetryGroup, H2: SymmetryGroup, candidates: Iterable[SymmetryElement] | None = None) -> bool:
    """Search ``candidates`` (default: dihedral order 4n times S_n) for gamma with gamma^-1 H gamma = H2."""
    if H.n != H2.n:
        return False
    if H.is_full_gamma or H2.is_full_gamma:
        return H.is_full_gamma == H2.is_full_gamma
    if len(H) != len(H2) or len(H.rotations()) != len(H2.rotations()):
        return False
    if candidates is None:
        candidates = candidate_elements(H.n, 2 * H.n)
    return any(conjugate(H, g) == H2 for g in candidates)


def dihedral_maps(m: int) -> list[OrthogonalElement]:
    """Rotations by 2 pi k / m and reflections through axes at pi k / m."""
    if m < 1:
        raise ValueError("max_rot_order must be positive")
    rots = [OrthogonalElement.rotation(2 * math.pi * k / m) for k in range(m)]
    refls = [OrthogonalElement.reflection(math.pi * k / m) for k in range(m)]
    return rots + refls


def candidate_elements(n: int, m: int) -> Iterable[SymmetryElement]:
    for rho in dihedral_maps(m):
        for kappa in itertools.permutations(range(n)):
            yield SymmetryElement(rho, kappa)


def _projector(B: np.ndarray) -> np.ndarray:
    return B @ B.T


def _fixes(B: np.ndarray, g: SymmetryElement, tol: float = FIX_TOL) -> bool:
    if B.shape[1] == 0:
        return True
    return bool(np.abs(apply_vector(g, B) - B).max() <= tol)


def _fixing_permutations(B: np.ndarray, rho: OrthogonalElement, tol: float) -> list[tuple[int, ...]]:
    """All kappa with (rho, kappa) fixing every column of B."""
    n = B.shape[0] // 2
    blocks = B.reshape(n, 2, -1)
    C = np.einsum("ab,ibk->iak", rho.matrix, blocks)
    # allowed[i, k]: robot k, mapped by rho, lands on robot i for every basis vector
    diff = np.abs(C[None, :, :, :] - blocks[:, None, :, :]).reshape(n, n, -1)
    allowed = diff.max(axis=2) <= tol if diff.shape[2] else np.ones((n, n), dtype=bool)
    out: list[tuple[int, ...]] = []
    image = [-1] * n
    used = [False] * n

    def extend(i):
        if i == n:
            out.append(tuple(image))
            return
        for k in np.nonzero(allowed[i])[0]:
            if not used[k]:
                used[k] = True
                image[i] = int(k)
                extend(i + 1)
                used[k] = False

    extend(0)
    return out


def isotropy_closure(H: SymmetryGroup, candidate_set: int | Iterable[SymmetryElement], tol: float = FIX_TOL) -> SymmetryGroup:
    """Every candidate that fixes Fix(H) pointwise, together with H itself.

    ``candidate_set`` is either an explicit collection of elements or an
    integer m, standing for the dihedral group of order 2m times S_n.
    """
    if H.is_full_gamma:
        return H
    B = fixed_subspace(H)
    found = list(H)
    if isinstance(candidate_set, (int, np.integer)):
        for rho in dihedral_maps(int(candidate_set)):
            found.extend(SymmetryElement(rho, k) for k in _fixing_permutations(B, rho, tol))
    else:
        found.extend(g for g in candidate_set if _fixes(B, g, tol))
    return close_group(found, n=H.n, cap=max(DEFAULT_CAP, 10 * len(found)))


@dataclass
class IsotropyNode:
    group: SymmetryGroup
    fix_basis: np.ndarray
    witness: Configuration | None
    depth: int = 0

    @property
    def fix_dim(self) -> int:
        return self.fix_basis.shape[1]

    @property
    def order(self) -> float:
        return self.group.order

    @property
    def projector(self) -> np.ndarray:
        return _projector(self.fix_basis)

    def label(self) -> str:
        order = "inf" if self.group.is_full_gamma else str(len(self.group))
        gens = [] if self.group.is_full_gamma else generating_set(self.group)
        return f"order={order}, fixdim={self.fix_dim}, gens=[{', '.join(str(g) for g in gens)}]"


@dataclass
class IsotropyLattice:
    """Nodes sorted by decreasing fix_dim; edges (i, j) mean node i lies below node j."""

    nodes: list[IsotropyNode]
    edges: list[tuple[int, int]]
    bottom: int = 0
    top: int | None = None
    conjugacy: bool = False
    complete: bool = True
    notes: list[str] = field(default_factory=list)

    def intermediate(self) -> list[int]:
        return [i for i in range(len(self.nodes)) if i not in (self.bottom, self.top)]

    def to_dot(self) -> str:
        lines = ["digraph isotropy_lattice {", "  rankdir=BT;"]
        for i, node in enumerate(self.nodes):
            lines.append(f'  n{i} [label="{node.label()}"];')
        for a, b in self.edges:
            lines.append(f"  n{a} -> n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "id": i,
                    "order": None if node.group.is_full_gamma else len(node.group),
                    "full_gamma": node.group.is_full_gamma,
                    "fix_dim": node.fix_dim,
                    "generators": [] if node.group.is_full_gamma else [str(g) for g in generating_set(node.group)],
                    "witness": None if node.witness is None else [[float(x), float(y)] for x, y in node.witness.positions],
                    "depth": node.depth,
                }
                for i, node in enumerate(self.nodes)
            ],
            "edges": [[a, b] for a, b in self.edges],
            "bottom": self.bottom,
            "top": self.top,
            "conjugacy": self.conjugacy,
            "complete": self.complete,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def _radius_shells(z: Configuration, tol: float) -> list[list[int]]:
    eps = comparison_scale(z, tol)
    r = np.hypot(*z.positions.T)
    shells: list[list[int]] = []
    for i in np.argsort(r, kind="stable"):
        if shells and abs(r[i] - r[shells[-1][0]]) <= eps:
            shells[-1].append(int(i))
        else:
            shells.append([int(i)])
    return shells


def shell_normalizer(z, group: SymmetryGroup, m: int, tol: float = DEFAULT_TOL) -> list[SymmetryElement]:
    """Elements normalising ``group`` that keep every robot in its radius shell.

    The orthogonal parts range over the dihedral group of order 4m, which is
    the normaliser in O(2) of the order-2m candidate set. Conjugating by
    these maps the part of the lattice above ``group`` onto itself without
    exchanging robots of different shells, so groups related by them describe
    the same kind of symmetry increase.
    """
    z = center(z)
    n = z.n
    shells = _radius_shells(z, tol)
    gens = generating_set(group) if not group.is_full_gamma else []
    out = []
    for choice in itertools.product(*(itertools.permutations(s) for s in shells)):
        kappa = [0] * n
        for src, img in zip(shells, choice):
            for i, k in zip(src, img):
                kappa[i] = k
        for rho in dihedral_maps(2 * m):
            c = SymmetryElement(rho, tuple(kappa))
            ci = inverse(c)
            if all(compose(c, compose(g, ci)) in group for g in gens):
                out.append(c)
    return out


def _null_spaces(stack: np.ndarray, tol: float = 1e-10) -> list[np.ndarray]:
    """Null space basis of each matrix in a (P, r, d) stack."""
    d = stack.shape[2]
    _, s, vt = np.linalg.svd(stack, full_matrices=True)
    out = []
    # absolute cutoff: B is orthonormal and gamma orthogonal, so entries are O(1)
    ranks = (s > tol * max(1.0, d)).sum(axis=1)
    for k in range(stack.shape[0]):
        out.append(vt[k, ranks[k] :].T)
    return out


def _extensions(B: np.ndarray, maps: Sequence[OrthogonalElement], perms: np.ndarray) -> list[np.ndarray]:
    """Distinct proper subspaces Fix(B) ∩ Fix(gamma) over all candidate gamma."""
    n2, d = B.shape
    n = n2 // 2
    blocks = B.reshape(n, 2, d)
    seen: dict[bytes, np.ndarray] = {}
    for rho in maps:
        C = np.einsum("ab,ibk->iak", rho.matrix, blocks)
        for start in range(0, len(perms), _PERM_CHUNK):
            chunk = perms[start : start + _PERM_CHUNK]
            stack = (C[chunk] - blocks[None]).reshape(len(chunk), n2, d)
            # skip candidates that already fix the whole subspace
            moving = np.abs(stack).reshape(len(chunk), -1).max(axis=1) > FIX_TOL
            if not moving.any():
                continue
            for null in _null_spaces(stack[moving]):
                S = B @ null
                key = np.round(_projector(S), 6).tobytes() + bytes([S.shape[1]])
                if key not in seen:
                    seen[key] = S
    return list(seen.values())


def _realize(S: np.ndarray, rng: np.random.Generator, tol: float) -> tuple[SymmetryGroup, Configuration, bool]:
    """Isotropy group and witness of a generic point of span(S).

    The flag tells whether the group's fixed subspace is exactly span(S).
    When every point of the span carries extra symmetry (for instance an
    equilateral triangle of collided pairs, whose reflection axes turn with
    the triangle) no draw can succeed; three consecutive failures with the
    same (order, fix_dim) signature end the retries early and the last
    witness is returned with the flag unset, so the caller can prune.
    """
    n = S.shape[0] // 2
    if S.shape[1] == 0:
        return SymmetryGroup.full(n), Configuration(np.zeros((n, 2))), True
    last = None
    streak = 0
    for _ in range(WITNESS_RETRIES):
        w = Configuration.from_vector(S @ rng.standard_normal(S.shape[1]))
        group = detect_symmetries(w, tol=tol)
        if group.is_full_gamma:
            continue
        F = fixed_subspace(group)
        if F.shape[1] == S.shape[1] and _contains(F, S):
            return group, w, True
        sig = (len(group), F.shape[1])
        streak = streak + 1 if last is not None and last[0] == sig else 1
        last = (sig, group, w)
        if streak >= 3:
            break
    if last is None:
        raise RuntimeError("no usable witness: every draw collapsed to a point")
    return last[1], last[2], False


def _contains(big: np.ndarray, small: np.ndarray) -> bool:
    """span(small) ⊆ span(big), by projection residual."""
    if small.shape[1] == 0:
        return True
    if big.shape[1] == 0:
        return False
    return bool(np.abs(big @ (big.T @ small) - small).max() <= FIX_TOL)


def upward_lattice(
    z,
    max_rot_order: int | None = None,
    conjugacy: bool = False,
    max_depth: int | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> IsotropyLattice:
    """Isotropy groups between Gamma_z and the full group, with Hasse edges.

    Each node is extended by every candidate element (dihedral of order
    2 * max_rot_order times S_n) whose fixed subspace cuts its own; each cut is
    realised by a generic witness whose detected group becomes the new node.
    ``max_depth`` bounds the number of extension rounds (the full-group top
    node is always present); when left unset it is 0 for a configuration
    without symmetry, whose lattice is every subgroup pattern of Gamma.
    With ``conjugacy`` set, nodes related by a shell-preserving normaliser
    element of Gamma_z (:func:`shell_normalizer`) are merged.
    """
    z = center(as_configuration(z))
    n = z.n
    m = 2 * n if max_rot_order is None else int(max_rot_order)
    rng = np.random.default_rng(seed)
    g0 = detect_symmetries(z, tol=tol)
    if max_depth is None and len(g0) == 1 and not g0.is_full_gamma:
        max_depth = 0
    bottom = IsotropyNode(g0, fixed_subspace(g0), z, 0)
    top = IsotropyNode(SymmetryGroup.full(n), np.zeros((2 * n, 0)), Configuration(np.zeros((n, 2))), 0)
    notes: list[str] = []
    if g0.is_full_gamma:
        lat = IsotropyLattice([bottom], [], 0, 0, conjugacy)
        return lat

    conj = shell_normalizer(z, g0, m, tol) if conjugacy else []
    conj_mats = [c.matrix() for c in conj]
    maps = dihedral_maps(m)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)

    nodes = [bottom]

    def same_class(P: np.ndarray, node: IsotropyNode) -> bool:
        Q = node.projector
        if np.abs(P - Q).max() <= 1e-8:
            return True
        return any(np.abs(M @ P @ M.T - Q).max() <= 1e-8 for M in conj_mats)

    def lookup(S: np.ndarray) -> bool:
        P = _projector(S)
        return any(node.fix_dim == S.shape[1] and same_class(P, node) for node in nodes)

    complete = True
    pruned = 0
    frontier = [bottom]
    depth = 0
    while frontier and (max_depth is None or depth < max_depth):
        depth += 1
        nxt = []
        for node in frontier:
            for S in _extensions(node.fix_basis, maps, perms):
                if S.shape[1] == 0 or lookup(S):
                    continue
                group, w, exact = _realize(S, rng, tol)
                if not exact:
                    pruned += 1
                    continue
                if len(nodes) + 2 > node_cap:
                    partial = _assemble(nodes + [top], conj_mats, conjugacy, notes, complete=False)
                    raise LatticeCapExceeded(f"isotropy lattice exceeds {node_cap} nodes", partial)
                new = IsotropyNode(group, fixed_subspace(group), w, depth)
                nodes.append(new)
                nxt.append(new)
        frontier = nxt
    if pruned:
        notes.append(f"pruned {pruned} candidate subspaces without a generic witness")
    if frontier:
        complete = False
        notes.append(f"expansion stopped at depth {max_depth}")
    return _assemble(nodes + [top], conj_mats, conjugacy, notes, complete)


def _assemble(
    nodes: list[IsotropyNode], conj_mats: list[np.ndarray], conjugacy: bool, notes: list[str], complete: bool
) -> IsotropyLattice:
    bottom, top = nodes[0], nodes[-1]
    middle = sorted(
        nodes[1:-1],
        key=lambda v: (-v.fix_dim, len(v.group), tuple(np.round(v.fix_basis @ v.fix_basis.T, 6).ravel())),
    )
    ordered = [bottom] + middle + [top]
    k = len(ordered)
    identity = [np.eye(bottom.fix_basis.shape[0])]

    def below(a: IsotropyNode, b: IsotropyNode) -> bool:
        if b.fix_dim >= a.fix_dim:
            return False
        return any(_contains(a.fix_basis, M @ b.fix_basis) for M in identity + conj_mats)

    less = np.zeros((k, k), dtype=bool)
    for i in range(k):
        for j in range(k):
            if i != j:
                less[i, j] = below(ordered[i], ordered[j])
    edges = []
    for i in range(k):
        for j in range(k):
            if less[i, j] and not any(less[i, c] and less[c, j] for c in range(k)):
                edges.append((i, j))
    return IsotropyLattice(ordered, edges, 0, k - 1, conjugacy, complete, notes)


def verify_lattice(lat: IsotropyLattice, tol: float = DEFAULT_TOL) -> list[str]:
    """Problems found in a lattice: witnesses, inclusions and covering edges."""
    problems = []
    for i, node in enumerate(lat.nodes):
        if node.witness is not None and detect_symmetries(node.witness, tol=tol) != node.group:
            problems.append(f"node {i}: witness symmetry differs from the node group")
    for a, b in lat.edges:
        A, B = lat.nodes[a], lat.nodes[b]
        if not lat.conjugacy and not subset_check(A.group, B.group):
            problems.append(f"edge {a}->{b}: group inclusion fails")
        if not lat.conjugacy and not _contains(A.fix_basis, B.fix_basis):
            problems.append(f"edge {a}->{b}: fixed subspace inclusion fails")
    return problems
