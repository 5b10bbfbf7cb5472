"""Run GTM on the 16-robot star at a critical step size and print the symmetry log."""

import argparse

from swarmsym.connectivity import ConnectivityGraph
from swarmsym.fixtures import gtm_critical_step, load
from swarmsym.protocols import Monitor, gtm, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=None, help="step size (default: exact critical value)")
    ap.add_argument("--rounds", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()
    h = gtm_critical_step(16) if args.h is None else args.h
    trace = run(gtm(h), load("star16"), args.rounds, monitor=Monitor.ALL, graph=ConnectivityGraph.cycle(16), tol=args.tol)
    print(f"h = {h:.12g}")
    for rec in trace.records:
        classes = ",".join(sorted({c.name for c in rec.gain_classes})) or "-"
        print(f"round {rec.round}: order={rec.group_order:g} symmetricity={rec.symmetricity} gained={len(rec.gained)} ({classes})")


if __name__ == "__main__":
    main()
