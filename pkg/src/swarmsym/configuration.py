"""Swarm configurations in global coordinates and their geometric structure."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_TOL = 1e-9
# absolute fallback when the swarm has collapsed to a point
ABS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Configuration:
    """Ordered tuple of ``n`` planar robot positions.

    Robot ``i`` (0-based here, 1-based in every text format) is the ``i``-th row
    of ``positions``. The flattened vector ``(x1, y1, x2, y2, ...)`` is the
    point in configuration space R^{2n}.
    """

    positions: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 2)
        if pos.shape[0] < 1:
            raise ValueError("a configuration needs at least one robot")
        if not np.all(np.isfinite(pos)):
            raise ValueError("robot coordinates must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def vector(self) -> np.ndarray:
        return self.positions.reshape(-1).copy()

    @classmethod
    def from_vector(cls, v) -> "Configuration":
        return cls(np.asarray(v, dtype=float).reshape(-1, 2))

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.positions.shape == other.positions.shape and bool(
            np.array_equal(self.positions, other.positions)
        )

    def __len__(self):
        return self.n

    def allclose(self, other: "Configuration", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(np.allclose(self.positions, other.positions, rtol=0, atol=atol))

    def translated(self, xi) -> "Configuration":
        return Configuration(self.positions + np.asarray(xi, dtype=float))

    def to_json(self) -> str:
        return json.dumps({"positions": [[float(x), float(y)] for x, y in self.positions]})

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        data = json.loads(text)
        if not isinstance(data, dict) or "positions" not in data:
            raise ValueError('expected an object with a "positions" key')
        pts = data["positions"]
        if not isinstance(pts, list) or not pts:
            raise ValueError('"positions" must be a non-empty list of [x, y] pairs')
        for p in pts:
            if (
                not isinstance(p, list)
                or len(p) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p)
            ):
                raise ValueError(f"malformed position entry: {p!r}")
        return cls(np.array(pts, dtype=float))


def as_configuration(z) -> Configuration:
    if isinstance(z, Configuration):
        return z
    return Configuration(np.asarray(z, dtype=float).reshape(-1, 2))


def load_configuration(path) -> Configuration:
    return Configuration.from_json(Path(path).read_text())


def save_configuration(z: Configuration, path) -> None:
    Path(path).write_text(z.to_json() + "\n")


def centroid(z) -> np.ndarray:
    return as_configuration(z).positions.mean(axis=0)


def center(z) -> Configuration:
    """Translate the swarm so its centroid is the origin. Robot order is kept."""
    z = as_configuration(z)
    pos = z.positions - z.positions.mean(axis=0)
    # second pass removes the rounding residue of the first, making center idempotent
    pos = pos - pos.mean(axis=0)
    return Configuration(pos)


def diameter(z) -> float:
    """Largest pairwise Euclidean distance."""
    pos = as_configuration(z).positions
    if len(pos) < 2:
        return 0.0
    diff = pos[:, None, :] - pos[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def pairwise_distances(z) -> np.ndarray:
    pos = as_configuration(z).positions
    diff = pos[:, None, :] - pos[None, :, :]
    return np.sqrt((diff**2).sum(-1))


def comparison_scale(z, tol: float = DEFAULT_TOL) -> float:
    """Absolute distance below which two points count as equal."""
    d = diameter(z)
    return tol * d if d > 0 else ABS_TOL


def collision_classes(z, tol: float = DEFAULT_TOL) -> list[tuple[int, ...]]:
    """Partition of robot indices into co-located groups.

    Points closer than ``tol * diameter`` are linked and classes are the
    connected components, listed by smallest member.
    """
    z = as_configuration(z)
    eps = comparison_scale(z, tol)
    dist = pairwise_distances(z)
    parent = list(range(z.n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(np.triu(dist <= eps, k=1))):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    classes: dict[int, list[int]] = {}
    for i in range(z.n):
        classes.setdefault(find(i), []).append(i)
    return [tuple(c) for _, c in sorted(classes.items())]


@dataclass(frozen=True)
class Ring:
    """A regular m-gon of robots centred at the origin."""

    radius: float
    m: int
    labels: tuple[int, ...]
    start_angle: float


@dataclass
class StructureReport:
    collision_classes: list[tuple[int, ...]]
    collinear: bool
    collinear_axis: float | None
    polygon_partition: list[Ring] | None
    reflection_axes: list[float]
    rotational_order: int
    symmetry_order: int | None
    full_symmetry: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "collision_classes": [[i + 1 for i in c] for c in self.collision_classes],
            "collinear": self.collinear,
            "collinear_axis": self.collinear_axis,
            "polygon_partition": None
            if self.polygon_partition is None
            else [
                {
                    "radius": r.radius,
                    "m": r.m,
                    "labels": [i + 1 for i in r.labels],
                    "start_angle": r.start_angle,
                }
                for r in self.polygon_partition
            ],
            "reflection_axes": self.reflection_axes,
            "rotational_order": self.rotational_order,
            "symmetry_order": self.symmetry_order,
            "full_symmetry": self.full_symmetry,
        }


def _angle_diff(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def _best_fit_line(pos: np.ndarray) -> tuple[float, float]:
    """Axis angle in [0, pi) and max orthogonal residual of the total least squares line."""
    c = pos - pos.mean(axis=0)
    _, _, vt = np.linalg.svd(c, full_matrices=False)
    direction = vt[0]
    normal = np.array([-direction[1], direction[0]])
    residual = float(np.abs(c @ normal).max()) if len(c) else 0.0
    angle = math.atan2(direction[1], direction[0]) % math.pi
    if math.isclose(angle, math.pi, abs_tol=1e-12):
        angle = 0.0
    return angle, residual


def _split_shell(points: list[tuple[float, tuple[int, ...]]], eps: float, radius: float):
    """Greedily cover one radius shell by regular polygons, largest m first.

    ``points`` holds (angle, labels) for each distinct position in the shell.
    """
    k = len(points)
    points = sorted(points, key=lambda p: p[0])
    ang_tol = eps / max(radius, eps)
    for m in range(k, 0, -1):
        if k % m:
            continue
        free = list(range(k))
        rings = []
        ok = True
        while free:
            first = free[0]
            members = [first]
            for step in range(1, m):
                target = points[first][0] + 2 * math.pi * step / m
                hit = next((q for q in free if q not in members and _angle_diff(points[q][0], target) <= ang_tol), None)
                if hit is None:
                    ok = False
                    break
                members.append(hit)
            if not ok:
                break
            for q in members:
                free.remove(q)
            labels = tuple(sorted(i for q in members for i in points[q][1]))
            rings.append(Ring(radius, m, labels, points[first][0]))
        if ok:
            return rings
    raise AssertionError("m = 1 always succeeds")


def polygon_partition(z, tol: float = DEFAULT_TOL) -> list[Ring] | None:
    """Concentric regular-polygon decomposition of a centred swarm.

    Distinct positions are grouped by radius (ascending) and each shell is
    split into regular m-gons with the largest m that works. Returns ``None``
    when some off-centre position cannot be placed on a polygon with m >= 2.
    """
    z = center(z)
    eps = comparison_scale(z, tol)
    classes = collision_classes(z, tol)
    reps = [(z.positions[c[0]], c) for c in classes]
    radii = [float(np.hypot(*p)) for p, _ in reps]
    order = sorted(range(len(reps)), key=lambda i: radii[i])
    shells: list[list[int]] = []
    for i in order:
        if shells and abs(radii[i] - radii[shells[-1][0]]) <= eps:
            shells[-1].append(i)
        else:
            shells.append([i])
    rings: list[Ring] = []
    for shell in shells:
        r = float(np.mean([radii[i] for i in shell]))
        if r <= eps:
            labels = tuple(sorted(l for i in shell for l in reps[i][1]))
            rings.append(Ring(0.0, 1, labels, 0.0))
            continue
        pts = [(math.atan2(reps[i][0][1], reps[i][0][0]) % (2 * math.pi), reps[i][1]) for i in shell]
        rings.extend(_split_shell(pts, eps, r))
    if any(ring.m == 1 and ring.radius > 0 for ring in rings):
        return None
    return rings


def classify_structure(z, tol: float = DEFAULT_TOL) -> StructureReport:
    """Collisions, collinearity, concentric polygons and symmetry summary of ``z``."""
    from .symmetry import detect_symmetries, symmetricity

    z = center(z)
    d = diameter(z)
    classes = collision_classes(z, tol)
    if d <= ABS_TOL:
        return StructureReport(
            collision_classes=classes,
            collinear=True,
            collinear_axis=None,
            polygon_partition=None,
            reflection_axes=[],
            rotational_order=z.n,
            symmetry_order=None,
            full_symmetry=True,
            notes=["all robots coincide: every orthogonal map is a symmetry"],
        )
    axis, residual = _best_fit_line(z.positions)
    collinear = residual <= tol * d
    group = detect_symmetries(z, tol=tol)
    axes = sorted({round(g.rho.angle, 12) for g in group if g.rho.kind == "refl"})
    return StructureReport(
        collision_classes=classes,
        collinear=bool(collinear),
        collinear_axis=axis if collinear else None,
        polygon_partition=polygon_partition(z, tol),
        reflection_axes=[float(a) for a in axes],
        rotational_order=symmetricity(z, tol=tol, group=group),
        symmetry_order=len(group),
    )
