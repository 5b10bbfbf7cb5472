"""Command-line front end: ``swarmsym <command> ...``.

Exit codes: 0 success, 2 bad input, 3 protocol error, 4 invariant violation,
5 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fixtures
from .configuration import DEFAULT_TOL, Configuration, classify_structure, load_configuration
from .connectivity import AutomorphismCapExceeded, ConnectivityGraph, automorphisms, build_graph, rotational_automorphisms
from .lattice import DEFAULT_NODE_CAP, LatticeCapExceeded, upward_lattice
from .protocols import BUILTIN, Monitor, ProtocolError, SymmetryViolation, make_protocol, run
from .spectral import circulant_eigs, sigma_plot_svg, spectral_report
from .symmetry import GroupClosureError, detect_symmetries, symmetricity

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROTOCOL = 3
EXIT_VIOLATION = 4
EXIT_CAP = 5


class InputError(Exception):
    pass


def _load(spec: str) -> Configuration:
    """A JSON path, or ``fixture:<name>`` for a shipped configuration."""
    if spec.startswith("fixture:"):
        try:
            return fixtures.load(spec.split(":", 1)[1])
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from exc
    try:
        return load_configuration(spec)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {spec}") from exc
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"{spec}: {exc}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def cmd_symmetries(args) -> int:
    z = _load(args.config)
    group = detect_symmetries(z, tol=args.tol, chirality_only=args.chirality_only)
    report = {
        "n": z.n,
        "full_gamma": group.is_full_gamma,
        "order": None if group.is_full_gamma else len(group),
        "symmetricity": symmetricity(z, tol=args.tol),
        "elements": [str(g) for g in group],
        "structure": classify_structure(z, tol=args.tol).to_dict(),
    }
    text = _dump(report)
    sys.stdout.write(text)
    if args.output_dir:
        _write(Path(args.output_dir), "symmetries.json", text)
    return EXIT_OK


@dataclass
class RunSpec:
    input: str
    protocol: str
    step_size: float
    viewing_range: float
    rounds: int
    monitor: bool
    graph: str
    trace_path: Path
    log_path: Path

    def validate(self) -> None:
        if self.protocol not in BUILTIN:
            raise InputError(f"unknown protocol {self.protocol!r}")
        if not 0.0 <= self.step_size <= 1.0:
            raise InputError("--h must lie in [0, 1]")
        if not self.viewing_range > 0:
            raise InputError("--range must be positive")
        if self.rounds < 0:
            raise InputError("--rounds must be non-negative")
        if self.trace_path.resolve() == self.log_path.resolve():
            raise InputError("trace and symmetry log paths must differ")


def cmd_simulate(args) -> int:
    out = Path(args.output_dir or ".")
    spec = RunSpec(
        args.config,
        args.protocol,
        args.h,
        args.range,
        args.rounds,
        not args.no_monitor,
        args.graph,
        out / args.trace,
        out / args.log,
    )
    spec.validate()
    z0 = _load(spec.input)
    graph = None
    if spec.graph == "cycle":
        graph = ConnectivityGraph.cycle(z0.n)
    p = make_protocol(spec.protocol, spec.step_size, spec.viewing_range)
    monitor = Monitor.ALL if spec.monitor else Monitor.NONE
    trace = run(p, z0, spec.rounds, monitor=monitor, graph=graph, tol=args.tol)
    out.mkdir(parents=True, exist_ok=True)
    trace.save_csv(spec.trace_path)
    if spec.monitor:
        spec.log_path.write_text(trace.symmetry_log())
        sys.stdout.write(trace.symmetry_log())
    print(f"wrote {len(trace)} configurations to {spec.trace_path}")
    return EXIT_OK


def _parse_generator(text: str | None, n: int) -> np.ndarray:
    if text is None:
        if n < 3:
            raise InputError("the GTM generator needs n >= 3")
        w = np.zeros(n)
        w[1] = w[-1] = 0.5
        return w
    try:
        w = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise InputError(f"bad generator {text!r}") from exc
    if len(w) != n:
        raise InputError(f"generator has {len(w)} entries, expected {n}")
    return w


def cmd_spectrum(args) -> int:
    w = _parse_generator(args.generator, args.n)
    try:
        lam = circulant_eigs(w)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    hs = args.h or [0.5]
    reports = [spectral_report(generator=w, h=h) for h in hs]
    data = {
        "n": args.n,
        "generator": [float(x) for x in w],
        "lambdas": [float(x) for x in lam],
        "critical_h": reports[0].to_dict()["critical_h"],
        "spectra": [r.to_dict() for r in reports],
    }
    text = _dump(data)
    sys.stdout.write(text)
    out = Path(args.output_dir or ".")
    _write(out, "spectrum.json", text)
    _write(out, "spectrum.svg", sigma_plot_svg(lam, hs))
    return EXIT_OK


def cmd_lattice(args) -> int:
    z = _load(args.config)
    out = Path(args.output_dir or ".")
    try:
        lat = upward_lattice(
            z,
            max_rot_order=args.max_rot_order,
            conjugacy=args.conjugacy,
            max_depth=args.max_depth,
            node_cap=args.node_cap,
            seed=args.seed,
            tol=args.tol,
        )
        code = EXIT_OK
    except LatticeCapExceeded as exc:
        lat = exc.lattice
        code = EXIT_CAP
        print(f"error: {exc}; writing the partial lattice", file=sys.stderr)
    data = lat.to_dict()
    data["partial"] = code != EXIT_OK
    _write(out, "lattice.dot", lat.to_dot())
    _write(out, "lattice.json", _dump(data))
    print(f"nodes: {len(lat.nodes)}")
    print(f"edges: {len(lat.edges)}")
    return code


def _read_graph(args) -> ConnectivityGraph:
    if args.edges:
        try:
            text = Path(args.edges).read_text()
        except FileNotFoundError as exc:
            raise InputError(f"no such file: {args.edges}") from exc
        if args.n is None:
            raise InputError("--n is required with --edges")
        try:
            return ConnectivityGraph.from_edge_list(args.n, text)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if args.config is None:
        raise InputError("give a configuration or --edges")
    if args.range is None:
        raise InputError("--range is required with a configuration")
    return build_graph(_load(args.config), args.range)


def _one_based(p) -> list[int]:
    return [k + 1 for k in p]


def cmd_automorphisms(args) -> int:
    G = _read_graph(args)
    aut = automorphisms(G, cap=args.cap)
    rot = rotational_automorphisms(aut)
    data = {
        "n": G.n,
        "edges": [[i + 1, j + 1] for i, j in sorted(G.edges)],
        "order": len(aut),
        "generators": [_one_based(p) for p in aut.generators],
        "rotational_order": len(rot),
    }
    if args.list:
        data["elements"] = [_one_based(p) for p in aut.elements]
    sys.stdout.write(_dump(data))
    if args.output_dir:
        _write(Path(args.output_dir), "graph.txt", G.to_edge_list())
    return EXIT_OK


def cmd_classify(args) -> int:
    z = _load(args.config)
    sys.stdout.write(_dump(classify_structure(z, tol=args.tol).to_dict()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="swarmsym", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative comparison tolerance")
    ap.add_argument("--seed", type=int, default=0, help="seed for witness sampling in lattice builds")
    ap.add_argument("--output-dir", default=None, help="directory for emitted files")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("symmetries", help="isotropy group of a configuration")
    s.add_argument("config", help="JSON file or fixture:<name>")
    s.add_argument("--chirality-only", action="store_true", help="rotations only")
    s.set_defaults(func=cmd_symmetries)

    s = sub.add_parser("simulate", help="run a protocol and log symmetry per round")
    s.add_argument("config")
    s.add_argument("--protocol", default="gtm", choices=sorted(BUILTIN))
    s.add_argument("--h", type=float, default=0.25, help="step size")
    s.add_argument("--range", type=float, default=math.inf, help="viewing range C")
    s.add_argument("--rounds", type=int, default=1)
    s.add_argument("--graph", choices=["visibility", "cycle"], default="visibility", help="fresh Look each round, or a frozen cycle graph")
    s.add_argument("--no-monitor", action="store_true")
    s.add_argument("--trace", default="trace.csv")
    s.add_argument("--log", default="symmetry_log.csv")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("spectrum", help="circulant spectrum and critical step sizes")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--generator", default=None, help="comma separated first row; default Go-To-The-Middle")
    s.add_argument("--h", type=float, nargs="*", default=None)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("lattice", help="upward isotropy lattice")
    s.add_argument("config")
    s.add_argument("--max-rot-order", type=int, default=None)
    s.add_argument("--conjugacy", action="store_true", help="merge conjugate nodes")
    s.add_argument("--max-depth", type=int, default=None)
    s.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    s.set_defaults(func=cmd_lattice)

    s = sub.add_parser("automorphisms", help="automorphism group of a visibility graph")
    s.add_argument("config", nargs="?", default=None)
    s.add_argument("--range", type=float, default=None)
    s.add_argument("--edges", default=None, help="edge list file, 1-indexed 'i j' lines")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--cap", type=int, default=10**6)
    s.add_argument("--list", action="store_true", help="print every element")
    s.set_defaults(func=cmd_automorphisms)

    s = sub.add_parser("classify", help="structural classification of a configuration")
    s.add_argument("config")
    s.set_defaults(func=cmd_classify)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except SymmetryViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (AutomorphismCapExceeded, GroupClosureError) as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
