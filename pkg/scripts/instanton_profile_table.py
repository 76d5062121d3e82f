"""Tabulate |F| and the instanton residuals along a radial grid.

    python scripts/instanton_profile_table.py --model g2 --param 1
    python scripts/instanton_profile_table.py --model spin7 --param 0
"""

import argparse
import math

import numpy as np

from holonomy_instantons import gauge
from holonomy_instantons.exterior import Quaternion
from holonomy_instantons.models.structure import G2_SPINOR, SPIN7_SPINOR, FiberPoint, build_model


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model", choices=("g2", "spin7"), default="g2")
    p.add_argument("--param", type=float, default=1.0, help="C for g2, D for spin7")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--r-min", type=float, default=1e-2)
    p.add_argument("--r-max", type=float, default=1e2)
    p.add_argument("--points", type=int, default=9)
    args = p.parse_args()

    if args.model == "g2":
        model = build_model(G2_SPINOR, args.kappa)
        conn = gauge.GaugeConnection(model, "zero", gauge.g2_solution(args.param, args.kappa))
        residual = lambda pt: gauge.g2_instanton_residual(conn, pt).worst(  # noqa: E731
            ("psi_wedge_F", "star_gamma_wedge_F_minus_F"))
    else:
        model = build_model(SPIN7_SPINOR, args.kappa)
        conn = gauge.GaugeConnection(model, "levi_civita_phi", gauge.spin7_f(args.param))
        residual = lambda pt: gauge.spin7_instanton_residual(conn, pt).residuals["numeric"]  # noqa: E731
    F = gauge.curvature(conn)

    print(f"{'r':>10} {'f(r)':>14} {'|F|':>12} {'residual':>12}")
    for r in np.geomspace(args.r_min, args.r_max, args.points):
        pt = FiberPoint(a=Quaternion(math.sqrt(r)))
        print(f"{r:10.4g} {conn.f.value(float(r)):14.6e} {F(pt).norm():12.4e} {residual(pt):12.3e}")


if __name__ == "__main__":
    main()
