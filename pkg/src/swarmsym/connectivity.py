"""Visibility graphs, their automorphisms, and the reduced symmetry group."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .configuration import as_configuration, pairwise_distances
from .symmetry import SymmetryElement, perm_compose


class AutomorphismCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ConnectivityGraph:
    """Undirected simple graph on vertices 0..n-1; edges stored as (i, j), i < j."""

    n: int
    edges: frozenset

    def __post_init__(self):
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError("self-loops are not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_adjacency(cls, adj) -> "ConnectivityGraph":
        adj = np.asarray(adj, dtype=bool)
        iu = zip(*np.nonzero(np.triu(adj, k=1)))
        return cls(adj.shape[0], frozenset((int(i), int(j)) for i, j in iu))

    @classmethod
    def cycle(cls, n: int) -> "ConnectivityGraph":
        if n < 3:
            raise ValueError("cycle graphs need n >= 3")
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def complete(cls, n: int) -> "ConnectivityGraph":
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        return a

    def neighbors(self, i: int) -> list[int]:
        return sorted({j for e in self.edges if i in e for j in e if j != i})

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def to_edge_list(self) -> str:
        """One "i j" line per edge, 1-indexed, lexicographically sorted."""
        return "".join(f"{i + 1} {j + 1}\n" for i, j in sorted(self.edges))

    @classmethod
    def from_edge_list(cls, n: int, text: str) -> "ConnectivityGraph":
        edges = []
        for line in text.splitlines():
            if line.strip():
                i, j = (int(t) - 1 for t in line.split())
                edges.append((i, j))
        return cls(n, frozenset(edges))


def build_graph(z, viewing_range: float) -> ConnectivityGraph:
    """Edge {i, j} iff ||z_i - z_j|| <= viewing_range (exact comparison)."""
    if viewing_range <= 0:
        raise ValueError("viewing_range must be positive")
    z = as_configuration(z)
    dist = pairwise_distances(z)
    return ConnectivityGraph.from_adjacency(dist <= viewing_range)


@dataclass
class AutomorphismGroup:
    elements: list[tuple[int, ...]]
    generators: list[tuple[int, ...]]

    def __len__(self):
        return len(self.elements)

    def __contains__(self, p) -> bool:
        return tuple(p) in self._set

    def __post_init__(self):
        self._set = set(self.elements)


def preserves_adjacency(kappa: Iterable[int], G: ConnectivityGraph) -> bool:
    kappa = tuple(kappa)
    if len(kappa) != G.n:
        raise ValueError("permutation size does not match the graph")
    a = G.adjacency()
    idx = np.array(kappa)
    return bool(np.array_equal(a[np.ix_(idx, idx)], a))


def _vertex_invariants(adj: np.ndarray) -> list[tuple]:
    deg = adj.sum(axis=1)
    return [(int(deg[v]), tuple(sorted(int(deg[u]) for u in np.nonzero(adj[v])[0]))) for v in range(len(adj))]


def _perm_generators(elements: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    if not elements:
        return []
    n = len(elements[0])
    ident = tuple(range(n))
    span = {ident}
    gens: list[tuple[int, ...]] = []
    for p in elements:
        if p in span:
            continue
        gens.append(p)
        frontier = list(span)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    c = perm_compose(g, a)
                    if c not in span:
                        span.add(c)
                        nxt.append(c)
            frontier = nxt
        if len(span) == len(elements):
            break
    return gens


def automorphisms(G: ConnectivityGraph, cap: int = 10**6) -> AutomorphismGroup:
    """All adjacency-preserving permutations of G.

    Backtracking over vertices ordered by (degree, neighbour-degree multiset),
    mapping each only to vertices with the same invariant and consistent
    adjacency to the vertices already placed.
    """
    n = G.n
    adj = G.adjacency()
    inv = _vertex_invariants(adj)
    order = sorted(range(n), key=lambda v: (-inv[v][0], inv[v], v))
    image = [-1] * n
    used = [False] * n
    found: list[tuple[int, ...]] = []

    def extend(pos: int):
        if pos == n:
            found.append(tuple(image))
            if len(found) > cap:
                raise AutomorphismCapExceeded(f"more than {cap} automorphisms")
            return
        v = order[pos]
        for u in range(n):
            if used[u] or inv[u] != inv[v]:
                continue
            if any(adj[v, w] != adj[u, image[w]] for w in order[:pos]):
                continue
            image[v] = u
            used[u] = True
            extend(pos + 1)
            used[u] = False
            image[v] = -1

    extend(0)
    found.sort()
    return AutomorphismGroup(found, _perm_generators(found))


def cyclic_shift(n: int, k: int = 1) -> tuple[int, ...]:
    """kappa(i) = i + k mod n."""
    return tuple((i + k) % n for i in range(n))


def rotational_automorphisms(aut: AutomorphismGroup) -> AutomorphismGroup:
    """Elements of ``aut`` that are powers of the index shift i -> i + 1."""
    if not aut.elements:
        return AutomorphismGroup([], [])
    n = len(aut.elements[0])
    shifts = {cyclic_shift(n, k) for k in range(n)}
    keep = [p for p in aut.elements if p in shifts]
    return AutomorphismGroup(keep, _perm_generators(keep))


def in_gamma_G(gamma: SymmetryElement, G: ConnectivityGraph) -> bool:
    """Membership in O(2) x Aut(G): only the permutation part is constrained."""
    if gamma.n != G.n:
        raise ValueError("size mismatch between element and graph")
    return preserves_adjacency(gamma.kappa, G)


class GainClass(enum.Enum):
    OUTSIDE_GAMMA_G = "outside_gamma_G"
    INSIDE_GAMMA_G_NONINVERTIBLE = "inside_gamma_G_noninvertible"
    VIOLATION = "violation"


def classify_gain(gamma_new: SymmetryElement, G: ConnectivityGraph, reduced_invertible: bool) -> GainClass:
    """Which kind of symmetry gain ``gamma_new`` is for the frozen-graph system.

    A new symmetry in O(2) x Aut(G) is only possible when the reduced map is
    singular; finding one while it is invertible is reported as a violation.
    """
    if not in_gamma_G(gamma_new, G):
        return GainClass.OUTSIDE_GAMMA_G
    if reduced_invertible:
        return GainClass.VIOLATION
    return GainClass.INSIDE_GAMMA_G_NONINVERTIBLE

