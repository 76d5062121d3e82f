"""Fit the decay exponents of the metric and of the connection towards the cone.

    python scripts/asymptotics_fit.py --rho-max 1000 --points 16 --c 1 10
"""

import argparse

import numpy as np

from holonomy_instantons import gauge
from holonomy_instantons.models.cone import decay_fit, metric_deviation


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rho-min", type=float, default=10.0)
    p.add_argument("--rho-max", type=float, default=1000.0)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--c", type=float, nargs="+", default=[1.0, 10.0])
    args = p.parse_args()

    rhos = np.geomspace(args.rho_min, args.rho_max, args.points)
    metric = [metric_deviation(float(rho)) for rho in rhos]
    conn = {C: [gauge.limit_connection(C, float(rho))[2] for rho in rhos] for C in args.c}

    header = f"{'rho':>10} {'|g - g_con|':>14}" + "".join(f" {'|A - A~| C=' + format(C, 'g'):>16}" for C in args.c)
    print(header)
    for k, rho in enumerate(rhos):
        print(f"{rho:10.3f} {metric[k]:14.6e}" + "".join(f" {conn[C][k]:16.6e}" for C in args.c))
    print()
    print(f"metric exponent      {decay_fit(list(zip(rhos, metric))):.5f}")
    for C in args.c:
        print(f"connection C={C:<7g} {gauge.convergence_fit(list(zip(rhos, conn[C]))):.5f}")


if __name__ == "__main__":
    main()
