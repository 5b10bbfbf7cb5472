"""Evolution maps F (Look-Compute-Move rounds) and their frozen-graph reductions F_G."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .configuration import DEFAULT_TOL, Configuration, StructureReport, as_configuration, classify_structure
from .connectivity import ConnectivityGraph, GainClass, build_graph, classify_gain
from .spectral import SINGULAR_TOL, is_invertible
from .symmetry import SymmetryElement, SymmetryGroup, detect_symmetries, subset_check, symmetricity

Rule = Callable[[np.ndarray, np.ndarray], np.ndarray]
WeightRule = Callable[[Configuration, ConnectivityGraph], np.ndarray]


class ProtocolError(RuntimeError):
    """A robot's rule could not produce a target."""


class SymmetryViolation(RuntimeError):
    """A monitored run lost a symmetry or gained one that the reduced map forbids."""


@dataclass(frozen=True)
class Protocol:
    """A deterministic OBLOT protocol.

    ``rule(own, neighbors)`` returns the target of one robot from its own
    position and the positions of the robots it sees (never including
    itself). Neighbours are handed over sorted lexicographically, so a rule
    can only ever see them as a multiset. The robot then moves
    ``step_size`` of the way to its target.

    A rule that needs the whole swarm is expressed with
    ``viewing_range=math.inf``. ``weight_rule`` is set for Laplacian-type
    protocols and returns the W of ``z_i + h (sum_j w_ij z_j - z_i)``.
    """

    name: str
    viewing_range: float
    step_size: float
    rule: Rule
    weight_rule: WeightRule | None = None

    def __post_init__(self):
        if not self.viewing_range > 0:
            raise ValueError("viewing_range must be positive")
        if not 0.0 <= self.step_size <= 1.0:
            raise ValueError("step_size must lie in [0, 1]")


def _sorted_rows(pts: np.ndarray) -> np.ndarray:
    if len(pts) < 2:
        return pts
    return pts[np.lexsort((pts[:, 1], pts[:, 0]))]


def reduced_step(p: Protocol, z, G: ConnectivityGraph) -> Configuration:
    """One Compute+Move phase with the frozen graph ``G`` in place of Look."""
    z = as_configuration(z)
    if G.n != z.n:
        raise ValueError(f"graph has {G.n} vertices but the swarm has {z.n} robots")
    pos = z.positions
    adj = G.adjacency()
    h = p.step_size
    out = np.empty_like(pos)
    for i in range(z.n):
        nbrs = _sorted_rows(pos[adj[i]])
        try:
            target = np.asarray(p.rule(pos[i].copy(), nbrs), dtype=float)
        except Exception as exc:
            raise ProtocolError(f"robot {i + 1}: {exc}") from exc
        if target.shape != (2,) or not np.all(np.isfinite(target)):
            raise ProtocolError(f"robot {i + 1}: rule returned invalid target {target!r}")
        out[i] = pos[i] + h * (target - pos[i])
    return Configuration(out)


def step(p: Protocol, z) -> Configuration:
    """One full synchronous round: Look with ``p.viewing_range``, then Compute and Move."""
    z = as_configuration(z)
    return reduced_step(p, z, build_graph(z, p.viewing_range))


def laplacian_step(W, h: float, z) -> Configuration:
    """z+ = [((1-h) I + h W) (x) I_2] z, applied to the x and y columns separately."""
    z = as_configuration(z)
    W = np.asarray(W, dtype=float)
    if W.shape != (z.n, z.n):
        raise ValueError(f"weight matrix of shape {W.shape} does not match {z.n} robots")
    pos = z.positions
    return Configuration((1.0 - h) * pos + h * (W @ pos))


def gtm_weights(n: int) -> np.ndarray:
    """circulant(0, 1/2, 0, ..., 0, 1/2): average of the two cycle neighbours."""
    if n < 3:
        raise ValueError("Go-To-The-Middle weights need n >= 3")
    W = np.zeros((n, n))
    idx = np.arange(n)
    W[idx, (idx + 1) % n] += 0.5
    W[idx, (idx - 1) % n] += 0.5
    return W


def neighbour_average_weights(z, G: ConnectivityGraph) -> np.ndarray:
    """D^-1 A for the graph; an isolated robot keeps weight 1 on itself."""
    A = G.adjacency().astype(float)
    deg = A.sum(axis=1)
    W = np.zeros_like(A)
    has = deg > 0
    W[has] = A[has] / deg[has, None]
    W[~has, ~has] = 1.0
    return W


def closed_average_weights(z, G: ConnectivityGraph) -> np.ndarray:
    """(I + A) with rows normalised: each robot averages itself and what it sees."""
    A = G.adjacency().astype(float) + np.eye(G.n)
    return A / A.sum(axis=1, keepdims=True)


def _identity_weights(z, G: ConnectivityGraph) -> np.ndarray:
    return np.eye(G.n)


def _midpoint_rule(own: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    if len(neighbors) == 0:
        return own
    return neighbors.mean(axis=0)


def _stay_rule(own: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    return own


def _closed_mean_rule(own: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    return (own + neighbors.sum(axis=0)) / (len(neighbors) + 1)


def gtm(step_size: float, viewing_range: float = math.inf) -> Protocol:
    """Go-To-The-Middle: move toward the centroid of the visible robots.

    On a cycle graph this is the midpoint of the two neighbours and the
    weight matrix is :func:`gtm_weights`.
    """
    return Protocol("gtm", viewing_range, step_size, _midpoint_rule, neighbour_average_weights)


def stationary(viewing_range: float = math.inf) -> Protocol:
    return Protocol("stationary", viewing_range, 0.0, _stay_rule, _identity_weights)


def uniform_average(step_size: float = 1.0, viewing_range: float = math.inf) -> Protocol:
    """Move toward the mean of the robot's own position and its visible neighbours."""
    return Protocol("uniform_average", viewing_range, step_size, _closed_mean_rule, closed_average_weights)


BUILTIN = {"gtm": gtm, "stationary": stationary, "uniform_average": uniform_average}


def make_protocol(name: str, step_size: float = 0.5, viewing_range: float = math.inf) -> Protocol:
    if name not in BUILTIN:
        raise ValueError(f"unknown protocol {name!r}; choose from {sorted(BUILTIN)}")
    if name == "stationary":
        return stationary(viewing_range)
    return BUILTIN[name](step_size, viewing_range)


class Monitor(enum.IntFlag):
    NONE = 0
    SYMMETRY = 1
    STRUCTURE = 2
    GAIN = 4
    ALL = 7


@dataclass
class RoundRecord:
    round: int
    group_order: float
    symmetricity: int
    gained: list[SymmetryElement] = field(default_factory=list)
    gain_classes: list[GainClass] = field(default_factory=list)
    structure: StructureReport | None = None


@dataclass
class Trace:
    configurations: list[Configuration]
    records: list[RoundRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.configurations)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "robot", "x", "y"])
        for k, z in enumerate(self.configurations):
            for i, (x, y) in enumerate(z.positions):
                w.writerow([k, i + 1, f"{x:.17g}", f"{y:.17g}"])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "Trace":
        rows = list(csv.DictReader(io.StringIO(text)))
        by_round: dict[int, dict[int, tuple[float, float]]] = {}
        for r in rows:
            by_round.setdefault(int(r["round"]), {})[int(r["robot"])] = (float(r["x"]), float(r["y"]))
        configs = []
        for k in sorted(by_round):
            pts = by_round[k]
            configs.append(Configuration(np.array([pts[i] for i in sorted(pts)])))
        return cls(configs)

    def symmetry_log(self) -> str:
        """"round,order,symmetricity,gained_elements" per monitored round."""
        lines = ["round,order,symmetricity,gained_elements"]
        for r in self.records:
            order = "inf" if math.isinf(r.group_order) else str(int(r.group_order))
            gained = ";".join(str(g) for g in r.gained)
            lines.append(f'{r.round},{order},{r.symmetricity},"{gained}"')
        return "\n".join(lines) + "\n"


def _record(k: int, z: Configuration, monitor: Monitor, tol: float) -> tuple[RoundRecord, SymmetryGroup]:
    group = detect_symmetries(z, tol=tol)
    rec = RoundRecord(k, group.order, symmetricity(z, tol=tol, group=group))
    if monitor & Monitor.STRUCTURE:
        rec.structure = classify_structure(z, tol=tol)
    return rec, group


def run(
    p: Protocol,
    z0,
    rounds: int,
    monitor: Monitor = Monitor.NONE,
    graph: ConnectivityGraph | None = None,
    tol: float = DEFAULT_TOL,
) -> Trace:
    """Iterate ``p`` for ``rounds`` rounds.

    With ``graph`` every round is a reduced step on that frozen graph,
    otherwise each round starts with a fresh Look. Any monitor flag records
    the isotropy group and symmetricity of every configuration and checks
    that no symmetry is lost. ``Monitor.GAIN`` additionally classifies each
    new element; a gain inside O(2) x Aut(G) while the reduced map is
    invertible aborts with :class:`SymmetryViolation`. Invertibility is
    judged at the larger of ``tol`` and the spectral singular tolerance,
    since a gain observed at tolerance ``tol`` only shows singularity to
    that accuracy.
    """
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    z = as_configuration(z0)
    trace = Trace([z])
    group = None
    if monitor:
        rec, group = _record(0, z, monitor, tol)
        trace.records.append(rec)
    for k in range(1, rounds + 1):
        G = graph if graph is not None else build_graph(z, p.viewing_range)
        z_next = reduced_step(p, z, G)
        if monitor:
            rec, new_group = _record(k, z_next, monitor, tol)
            if not subset_check(group, new_group):
                raise SymmetryViolation(f"round {k}: a symmetry of the previous configuration was lost")
            if not group.is_full_gamma and not new_group.is_full_gamma:
                rec.gained = [g for g in new_group if g not in group]
            if monitor & Monitor.GAIN and rec.gained:
                # a gain seen at comparison tolerance tol only proves singularity up to that scale
                W = p.weight_rule(z, G) if p.weight_rule is not None else None
                invertible = W is not None and is_invertible(W, p.step_size, tol=max(SINGULAR_TOL, tol))
                for g in rec.gained:
                    cls = classify_gain(g, G, invertible)
                    rec.gain_classes.append(cls)
                    if cls is GainClass.VIOLATION:
                        raise SymmetryViolation(
                            f"round {k}: gained {g} inside O(2) x Aut(G) although the reduced map is invertible"
                        )
            trace.records.append(rec)
            group = new_group
        trace.configurations.append(z_next)
        z = z_next
    return trace
