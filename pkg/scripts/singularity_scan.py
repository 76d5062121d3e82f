"""Locate poles of the closed-form profiles over a parameter sweep.

    python scripts/singularity_scan.py --family spin7_f --from -1.5 --to 0.5 --steps 21
"""

import argparse

import numpy as np

from holonomy_instantons import profiles


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--family", choices=profiles.FAMILIES, default="g2")
    p.add_argument("--from", dest="lo", type=float, default=-5.0)
    p.add_argument("--to", dest="hi", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--r-max", type=float, default=1e6)
    args = p.parse_args()

    params = [round(float(x), 10) for x in np.linspace(args.lo, args.hi, args.steps)]
    hits = {h.parameter: h for h in profiles.singularity_scan(args.family, params, (0.0, args.r_max))}
    print(f"{'param':>10} {'pole r':>20} {'predicted':>20}")
    for c in params:
        predicted = profiles.singular_radius(args.family, c)
        hit = hits.get(c)
        found = f"{hit.radius:20.12g}" if hit else f"{'-':>20}"
        pred = f"{predicted:20.12g}" if predicted is not None and predicted <= args.r_max else f"{'-':>20}"
        print(f"{c:10.4g} {found} {pred}")


if __name__ == "__main__":
    main()
