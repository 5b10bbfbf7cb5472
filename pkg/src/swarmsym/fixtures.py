"""Reference configurations used by the tests, scripts and CLI."""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from .configuration import Configuration
from .protocols import gtm_weights
from .spectral import kernel_basis

FIXTURE_NAMES = ("triangle", "star16", "two_triangles", "hexagon16", "generic4")


def regular_polygon(n: int, radius: float = 1.0, phase: float = 0.0) -> Configuration:
    """Robot i at angle phase + 2 pi i / n (counter-clockwise labels)."""
    t = phase + 2 * math.pi * np.arange(n) / n
    return Configuration(radius * np.c_[np.cos(t), np.sin(t)])


def triangle() -> Configuration:
    """Unit equilateral triangle, robot 1 on top and labels running clockwise.

    With this labelling the transposition (2 3) pairs with the reflection
    x -> -x, and the shift kappa(1) = 2 pairs with the counter-clockwise
    rotation by 2 pi / 3.
    """
    s = math.sqrt(3) / 2
    return Configuration([[0.0, 1.0], [s, -0.5], [-s, -0.5]])


def gtm_critical_step(n: int = 16, j: int | None = None) -> float:
    """h = 1 / (1 - cos(2 pi j / n)); by default the smallest h above 1/2."""
    if j is None:
        j = n // 2 - 1
    return 1.0 / (1.0 - math.cos(2 * math.pi * j / n))


def star16(amplitude: float = 0.3, h: float | None = None) -> Configuration:
    """Regular 16-gon plus a kernel mode of the critical GTM step.

    The perturbation is the alternating radial mode (-1)^i v_i, projected
    onto the numerically computed kernel of ((1-h) I + h W) (x) I_2, so the
    result is v + v0 with v0 in the kernel. One reduced GTM step at ``h``
    on the 16-cycle removes v0 and leaves a regular 16-gon.
    """
    n = 16
    h = gtm_critical_step(n) if h is None else h
    v = regular_polygon(n).vector
    mode = amplitude * (np.repeat((-1.0) ** np.arange(n), 2) * v)
    K = kernel_basis(gtm_weights(n), h)
    v0 = K @ (K.T @ mode)
    return Configuration.from_vector(v + v0)


def two_triangles(outer: float = 1.0, inner: float = 0.5) -> Configuration:
    """Two concentric equilateral triangles, six robots labelled counter-clockwise.

    Odd robots 1, 3, 5 form the outer triangle at 90, 210, 330 degrees; even
    robots 2, 4, 6 the inner one at 120, 240, 0 degrees.
    """
    deg = [90, 120, 210, 240, 330, 0]
    r = [outer, inner] * 3
    return Configuration([[ri * math.cos(math.radians(a)), ri * math.sin(math.radians(a))] for ri, a in zip(r, deg)])


def generic4() -> Configuration:
    """Four robots without any symmetry."""
    return Configuration([[0.0, 0.0], [1.0, 0.1], [0.3, 1.7], [-0.9, 0.6]])


_BUILDERS = {
    "triangle": triangle,
    "star16": star16,
    "two_triangles": two_triangles,
    "hexagon16": lambda: regular_polygon(16),
    "generic4": generic4,
}


def build(name: str) -> Configuration:
    if name not in _BUILDERS:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")
    return _BUILDERS[name]()


def load(name: str) -> Configuration:
    """Read a shipped fixture file from the package data."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")
    text = resources.files("swarmsym").joinpath("data", f"{name}.json").read_text()
    return Configuration.from_json(text)


def dump(name: str) -> str:
    """JSON text of a fixture, as shipped."""
    z = build(name)
    rows = ",\n".join(f"    {json.dumps([float(x), float(y)])}" for x, y in z.positions)
    return '{\n  "positions": [\n' + rows + "\n  ]\n}\n"
