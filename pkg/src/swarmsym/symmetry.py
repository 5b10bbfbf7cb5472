"""Elements and subgroups of O(2) x S_n acting on configuration space.

An element ``gamma = (rho, kappa)`` acts as ``M_kappa M_rho``::

    (gamma z)_i = rho z_{kappa(i)}

so ``gamma`` is a symmetry of ``z`` when ``rho`` carries robot ``kappa(i)``
onto robot ``i`` for every ``i``. Permutations are stored 0-based as image
tuples; the text forms are 1-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .configuration import ABS_TOL, DEFAULT_TOL, Configuration, as_configuration, center, collision_classes, diameter

TWO_PI = 2 * math.pi
ANGLE_TOL = 1e-9
DEFAULT_CAP = 10_000


class GroupClosureError(RuntimeError):
    """Closure grew past its cap; the generators likely span a continuous group."""


def _norm_angle(a: float, period: float) -> float:
    a = math.fmod(a, period)
    if a < 0:
        a += period
    # snap rounding residue at either end of the period onto 0
    if a <= 1e-14 or period - a <= ANGLE_TOL:
        a = 0.0
    return a


def _angle_close(a: float, b: float, period: float, tol: float = ANGLE_TOL) -> bool:
    d = abs(a - b) % period
    return min(d, period - d) <= tol


@dataclass(frozen=True)
class OrthogonalElement:
    """Rotation by ``angle`` or reflection through the axis at ``angle``.

    Rotation angles live in [0, 2pi); axis angles in [0, pi) since the axes at
    ``a`` and ``a + pi`` are the same line.
    """

    kind: str
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in ("rot", "refl"):
            raise ValueError(f"unknown orthogonal kind {self.kind!r}")
        period = TWO_PI if self.kind == "rot" else math.pi
        object.__setattr__(self, "angle", _norm_angle(float(self.angle), period))

    @classmethod
    def rotation(cls, angle: float) -> "OrthogonalElement":
        return cls("rot", angle)

    @classmethod
    def reflection(cls, axis: float) -> "OrthogonalElement":
        return cls("refl", axis)

    @property
    def det(self) -> int:
        return 1 if self.kind == "rot" else -1

    @property
    def matrix(self) -> np.ndarray:
        if self.kind == "rot":
            c, s = math.cos(self.angle), math.sin(self.angle)
            return np.array([[c, -s], [s, c]])
        c, s = math.cos(2 * self.angle), math.sin(2 * self.angle)
        return np.array([[c, s], [s, -c]])

    def compose(self, other: "OrthogonalElement") -> "OrthogonalElement":
        """``self`` after ``other``."""
        a, b = self.angle, other.angle
        if self.kind == "rot" and other.kind == "rot":
            return OrthogonalElement("rot", a + b)
        if self.kind == "rot":
            return OrthogonalElement("refl", b + a / 2)
        if other.kind == "rot":
            return OrthogonalElement("refl", a - b / 2)
        return OrthogonalElement("rot", 2 * (a - b))

    def inverse(self) -> "OrthogonalElement":
        if self.kind == "rot":
            return OrthogonalElement("rot", -self.angle)
        return self

    def close_to(self, other: "OrthogonalElement", tol: float = ANGLE_TOL) -> bool:
        if self.kind != other.kind:
            return False
        period = TWO_PI if self.kind == "rot" else math.pi
        return _angle_close(self.angle, other.angle, period, tol)

    def __str__(self):
        return f"{self.kind}({self.angle:.12g})"


IDENTITY_ROTATION = OrthogonalElement("rot", 0.0)


def perm_compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """Image tuple of ``p`` after ``q``: i -> p[q[i]]."""
    return tuple(p[i] for i in q)


def perm_inverse(p: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, pi in enumerate(p):
        inv[pi] = i
    return tuple(inv)


def perm_from_one_based(images: Iterable[int]) -> tuple[int, ...]:
    p = tuple(int(i) - 1 for i in images)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation of 1..{len(p)}: {list(images)}")
    return p


def perm_from_cycles(n: int, *cycles: Iterable[int]) -> tuple[int, ...]:
    """Permutation of 0..n-1 from 1-based cycles, e.g. ``perm_from_cycles(3, (2, 3))``."""
    p = list(range(n))
    for cyc in cycles:
        cyc = [c - 1 for c in cyc]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            p[a] = b
    return tuple(p)


def permutation_matrix(kappa: tuple[int, ...]) -> np.ndarray:
    """2n x 2n block matrix with identity block at (i, kappa(i))."""
    n = len(kappa)
    m = np.zeros((2 * n, 2 * n))
    for i, k in enumerate(kappa):
        m[2 * i, 2 * k] = 1.0
        m[2 * i + 1, 2 * k + 1] = 1.0
    return m


@dataclass(frozen=True)
class SymmetryElement:
    rho: OrthogonalElement
    kappa: tuple[int, ...]

    def __post_init__(self):
        kappa = tuple(int(k) for k in self.kappa)
        if sorted(kappa) != list(range(len(kappa))):
            raise ValueError(f"kappa is not a permutation: {kappa}")
        object.__setattr__(self, "kappa", kappa)

    @classmethod
    def identity(cls, n: int) -> "SymmetryElement":
        return cls(IDENTITY_ROTATION, tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.kappa)

    @property
    def is_identity(self) -> bool:
        return self.kappa == tuple(range(self.n)) and self.rho.close_to(IDENTITY_ROTATION)

    def matrix(self) -> np.ndarray:
        """The 2n x 2n matrix ``M_kappa M_rho``: block (i, kappa(i)) is rho."""
        n = self.n
        m = np.zeros((n, 2, n, 2))
        m[np.arange(n), :, list(self.kappa), :] = self.rho.matrix
        return m.reshape(2 * n, 2 * n)

    def close_to(self, other: "SymmetryElement", tol: float = ANGLE_TOL) -> bool:
        return self.kappa == other.kappa and self.rho.close_to(other.rho, tol)

    def __str__(self):
        return f"{self.rho}∘perm[{','.join(str(k + 1) for k in self.kappa)}]"


def _check_size(a: SymmetryElement, n: int) -> None:
    if a.n != n:
        raise ValueError(f"size mismatch: element acts on {a.n} robots, got {n}")


def apply(gamma: SymmetryElement, z) -> Configuration:
    z = as_configuration(z)
    _check_size(gamma, z.n)
    moved = z.positions[list(gamma.kappa)] @ gamma.rho.matrix.T
    return Configuration(moved)


def apply_vector(gamma: SymmetryElement, v: np.ndarray) -> np.ndarray:
    """Act on a vector (or the columns of a 2n x k array) of configuration space."""
    v = np.asarray(v, dtype=float)
    n = gamma.n
    blocks = v.reshape(n, 2, -1)
    out = np.einsum("ab,ibk->iak", gamma.rho.matrix, blocks[list(gamma.kappa)])
    return out.reshape(v.shape)


def compose(a: SymmetryElement, b: SymmetryElement) -> SymmetryElement:
    """``a`` after ``b``, so that apply(compose(a, b), z) == apply(a, apply(b, z))."""
    _check_size(b, a.n)
    return SymmetryElement(a.rho.compose(b.rho), perm_compose(b.kappa, a.kappa))


def inverse(a: SymmetryElement) -> SymmetryElement:
    return SymmetryElement(a.rho.inverse(), perm_inverse(a.kappa))


class SymmetryGroup:
    """Finite subgroup of O(2) x S_n, or the whole of it (``is_full_gamma``).

    The full group only arises for a swarm collapsed to one point; it keeps a
    small generating witness set and answers every membership query with True.
    """

    def __init__(self, elements: Iterable[SymmetryElement], n: int, is_full_gamma: bool = False):
        self.n = n
        self.is_full_gamma = is_full_gamma
        self._elements: list[SymmetryElement] = []
        self._index: dict[tuple[str, tuple[int, ...]], list[SymmetryElement]] = {}
        for g in elements:
            _check_size(g, n)
            self._add(g)

    def _add(self, g: SymmetryElement) -> bool:
        bucket = self._index.setdefault((g.rho.kind, g.kappa), [])
        if any(h.rho.close_to(g.rho) for h in bucket):
            return False
        bucket.append(g)
        self._elements.append(g)
        return True

    @classmethod
    def trivial(cls, n: int) -> "SymmetryGroup":
        return cls([SymmetryElement.identity(n)], n)

    @classmethod
    def full(cls, n: int) -> "SymmetryGroup":
        witness = [SymmetryElement.identity(n)]
        if n >= 2:
            witness.append(SymmetryElement(IDENTITY_ROTATION, (1, 0) + tuple(range(2, n))))
        if n >= 3:
            witness.append(SymmetryElement(IDENTITY_ROTATION, tuple(range(1, n)) + (0,)))
        witness.append(SymmetryElement(OrthogonalElement.reflection(0.0), tuple(range(n))))
        return cls(witness, n, is_full_gamma=True)

    @property
    def elements(self) -> list[SymmetryElement]:
        return list(self._elements)

    def __iter__(self) -> Iterator[SymmetryElement]:
        return iter(self._elements)

    def __len__(self) -> int:
        return len(self._elements)

    @property
    def order(self) -> float:
        return math.inf if self.is_full_gamma else len(self._elements)

    def __contains__(self, g: SymmetryElement) -> bool:
        if self.is_full_gamma:
            return g.n == self.n
        return any(h.rho.close_to(g.rho) for h in self._index.get((g.rho.kind, g.kappa), ()))

    def rotations(self) -> list[SymmetryElement]:
        return [g for g in self._elements if g.rho.kind == "rot"]

    def reflections(self) -> list[SymmetryElement]:
        return [g for g in self._elements if g.rho.kind == "refl"]

    def matrices(self) -> np.ndarray:
        return np.array([g.matrix() for g in self._elements])

    def __eq__(self, other):
        if not isinstance(other, SymmetryGroup):
            return NotImplemented
        if self.n != other.n or self.is_full_gamma != other.is_full_gamma:
            return False
        if self.is_full_gamma:
            return True
        return len(self) == len(other) and all(g in other for g in self)

    def __hash__(self):
        return hash((self.n, self.is_full_gamma, len(self)))

    def __repr__(self):
        if self.is_full_gamma:
            return f"SymmetryGroup(full, n={self.n})"
        return f"SymmetryGroup(order={len(self)}, n={self.n})"


def close_group(generators: Iterable[SymmetryElement], cap: int = DEFAULT_CAP, n: int | None = None) -> SymmetryGroup:
    """Smallest subgroup containing ``generators``.

    Finite-order generators make inverses automatic, so only products are
    enumerated. Raises :class:`GroupClosureError` past ``cap`` elements.
    """
    gens = list(generators)
    if n is None:
        if not gens:
            raise ValueError("need n or at least one generator")
        n = gens[0].n
    group = SymmetryGroup([SymmetryElement.identity(n)], n)
    frontier = [SymmetryElement.identity(n)]
    for g in gens:
        _check_size(g, n)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = compose(g, a)
                if group._add(c):
                    if len(group) > cap:
                        raise GroupClosureError(f"closure exceeded {cap} elements")
                    nxt.append(c)
        frontier = nxt
    return group


def generating_set(group: SymmetryGroup, cap: int = DEFAULT_CAP) -> list[SymmetryElement]:
    """A small generating set picked greedily in element order."""
    if group.is_full_gamma:
        return [g for g in group if not g.is_identity]
    gens: list[SymmetryElement] = []
    span = SymmetryGroup.trivial(group.n)
    for g in group:
        if g not in span:
            gens.append(g)
            span = close_group(gens, cap=cap, n=group.n)
            if len(span) == len(group):
                break
    return gens


def _candidate_maps(pos: np.ndarray, eps: float, chirality_only: bool) -> list[OrthogonalElement]:
    r = np.hypot(pos[:, 0], pos[:, 1])
    off_origin = np.nonzero(r > eps)[0]
    if len(off_origin) == 0:
        return []
    ref = int(off_origin[np.argmin(r[off_origin])])
    theta = np.arctan2(pos[:, 1], pos[:, 0])
    out: list[OrthogonalElement] = []

    def push(e):
        if not any(e.close_to(f) for f in out):
            out.append(e)

    for j in np.nonzero(np.abs(r - r[ref]) <= eps)[0]:
        push(OrthogonalElement.rotation(theta[j] - theta[ref]))
        if not chirality_only:
            push(OrthogonalElement.reflection((theta[j] + theta[ref]) / 2))
    return out


def detect_symmetries(
    z,
    tol: float = DEFAULT_TOL,
    chirality_only: bool = False,
    cap: int = 10**6,
) -> SymmetryGroup:
    """Isotropy subgroup of the centred configuration ``z``.

    Candidate orthogonal maps send a minimal-radius reference robot onto each
    robot of the same radius (rotations) or reflect it there (bisector axes).
    For each candidate the induced map on collision classes is recovered by
    nearest-point matching; every bijection consistent with it (arbitrary
    relabelling inside a class) is a symmetry. With ``chirality_only`` only
    rotations are tried.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = center(z)
    n = z.n
    d = diameter(z)
    if d <= ABS_TOL:
        return SymmetryGroup.full(n)
    eps = tol * d
    pos = z.positions
    classes = collision_classes(z, tol)
    class_of = np.empty(n, dtype=int)
    for ci, c in enumerate(classes):
        class_of[list(c)] = ci

    elements: list[SymmetryElement] = []
    for rho in _candidate_maps(pos, eps, chirality_only):
        img = pos @ rho.matrix.T
        # kappa maps robots of class target[c] onto robots of class c
        target: list[int] = []
        ok = True
        for c in classes:
            hits = np.nonzero(np.hypot(*(img[c[0]] - pos).T) <= eps)[0]
            if len(hits) == 0:
                ok = False
                break
            d_cls = class_of[hits[0]]
            if len(classes[d_cls]) != len(c) or not np.all(class_of[hits] == d_cls):
                ok = False
                break
            target.append(int(d_cls))
        if not ok or len(set(target)) != len(classes):
            continue
        # preimage class for each image class d
        source = {d_cls: ci for ci, d_cls in enumerate(target)}
        base = [0] * n
        for d_cls, c_src in source.items():
            for i, k in zip(classes[d_cls], classes[c_src]):
                base[i] = k
        residual = np.abs(img[base] - pos).max()
        if residual > eps:
            continue
        movable = [(classes[d_cls], classes[source[d_cls]]) for d_cls in range(len(classes)) if len(classes[d_cls]) > 1]
        count = math.prod(math.factorial(len(a)) for a, _ in movable)
        if len(elements) + count > cap:
            raise GroupClosureError(f"isotropy group exceeds {cap} elements")
        for choice in itertools.product(*(itertools.permutations(src) for _, src in movable)):
            kappa = list(base)
            for (dst, _), src_perm in zip(movable, choice):
                for i, k in zip(dst, src_perm):
                    kappa[i] = k
            elements.append(SymmetryElement(rho, tuple(kappa)))
    return SymmetryGroup(elements, n)


def symmetricity(z, tol: float = DEFAULT_TOL, group: SymmetryGroup | None = None) -> int:
    """Number of distinct rotations in the isotropy group.

    A collapsed swarm has every rotation as a symmetry; by convention ``n`` is
    reported there.
    """
    z = as_configuration(z)
    if group is None:
        group = detect_symmetries(z, tol=tol, chirality_only=True)
    if group.is_full_gamma:
        return z.n
    angles: list[OrthogonalElement] = []
    for g in group.rotations():
        if not any(g.rho.close_to(a) for a in angles):
            angles.append(g.rho)
    return len(angles)


def _null_space(stack: np.ndarray, dim: int, rel_cutoff: float = 1e-10) -> np.ndarray:
    if stack.size == 0:
        return np.eye(dim)
    _, s, vt = np.linalg.svd(stack, full_matrices=stack.shape[0] < dim)
    if s.size == 0 or s[0] == 0:
        return np.eye(dim)
    rank = int(np.sum(s > rel_cutoff * s[0]))
    return vt[rank:].T.copy()


def fixed_subspace(H: SymmetryGroup, n: int | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of Fix(H) in R^{2n}."""
    n = H.n if n is None else n
    if H.is_full_gamma:
        return np.zeros((2 * n, 0))
    eye = np.eye(2 * n)
    mats = [g.matrix() - eye for g in H if not g.is_identity]
    if not mats:
        return eye
    return _null_space(np.vstack(mats), 2 * n)


def group_average_projector(H: SymmetryGroup) -> np.ndarray:
    """(1/|H|) sum of the group's matrices: the orthogonal projector onto Fix(H)."""
    if H.is_full_gamma:
        return np.zeros((2 * H.n, 2 * H.n))
    return H.matrices().mean(axis=0)


def subset_check(A: SymmetryGroup, B: SymmetryGroup, tol: float = ANGLE_TOL) -> bool:
    """True iff every element of A is (up to angle tolerance) an element of B."""
    if A.n != B.n:
        raise ValueError("groups act on different swarm sizes")
    if B.is_full_gamma:
        return True
    if A.is_full_gamma:
        return False
    return all(any(g.close_to(h, tol) for h in B._index.get((g.rho.kind, g.kappa), ())) for g in A)


def equivariance_residual(F: Callable[[Configuration], Configuration], z, gamma: SymmetryElement) -> float:
    """Euclidean norm of F(gamma z) - gamma F(z)."""
    z = as_configuration(z)
    lhs = as_configuration(F(apply(gamma, z))).positions
    rhs = apply(gamma, as_configuration(F(z))).positions
    return float(np.linalg.norm(lhs - rhs))
