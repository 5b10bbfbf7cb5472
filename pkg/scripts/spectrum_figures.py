"""Shifted GTM spectra for n = 15 and 16 as SVG plots, plus their critical step sizes."""

import argparse
import pathlib

from swarmsym.protocols import gtm_weights
from swarmsym.spectral import circulant_eigs, critical_step_sizes, sigma_plot_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("."))
    ap.add_argument("--h", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for n in (15, 16):
        lam = circulant_eigs(gtm_weights(n)[0])
        crit = critical_step_sizes(lam)
        hs = sorted(set(args.h) | {crit[0][1]})
        path = args.out / f"spectrum_n{n}.svg"
        path.write_text(sigma_plot_svg(lam, hs))
        print(f"n={n}: wrote {path}")
        for j, h in crit[:6]:
            print(f"  j={j:2d} h={h:.10f}")


if __name__ == "__main__":
    main()
