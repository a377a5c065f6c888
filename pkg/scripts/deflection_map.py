"""Tabulate the deflection map eta_in -> Theta and probe the scattering onset.

Evidence gathering for the open uniqueness question: the map looks strictly
monotone on every grid we have tried, but nothing here proves it.

Usage:
    python scripts/deflection_map.py --eta-min 1.31 --eta-max 64 --n 25 \
        --out deflection_map.csv
"""

import argparse
import csv
import math
import sys

import numpy as np

from curvscat import (AsymptoticData, NotConvergedError, SolverConfig,
                      deflection, integrate, theta_identities)


def classify(eta_in: float, cfg: SolverConfig):
    traj = integrate(AsymptoticData(0.0, eta_in), cfg)
    if traj.events.blowup is not None:
        return "blowup", None
    try:
        return "scatter", deflection(traj)
    except NotConvergedError:
        return "no-escape", None


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eta-min", type=float, default=1.31)
    ap.add_argument("--eta-max", type=float, default=64.0)
    ap.add_argument("--n", type=int, default=25)
    ap.add_argument("--out", default="deflection_map.csv")
    ap.add_argument("--onset-bisections", type=int, default=30,
                    help="bisection steps locating the empirical onset")
    args = ap.parse_args(argv)

    cfg = SolverConfig()
    rows = []
    for eta in np.geomspace(args.eta_min, args.eta_max, args.n):
        kind, theta = classify(float(eta), cfg)
        if theta is None:
            print(f"eta_in = {eta:12.6f}  {kind}")
            rows.append((eta, kind, "", "", ""))
        else:
            kap, al = theta_identities(theta)
            print(f"eta_in = {eta:12.6f}  theta = {theta / math.pi:+.9f} pi"
                  f"  kappa = {kap:.6f}  alpha = {al:.6f}")
            rows.append((eta, kind, theta, kap, al))

    # empirical onset: largest non-scattering eta below the smallest
    # scattering one (xi_in = 0); upper estimates from theory sit higher
    lo, hi = 0.5, args.eta_min
    for _ in range(args.onset_bisections):
        mid = 0.5 * (lo + hi)
        kind, _ = classify(mid, cfg)
        if kind == "scatter":
            hi = mid
        else:
            lo = mid
    print(f"empirical scattering onset in ({lo:.8f}, {hi:.8f})")

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eta_in", "outcome", "theta", "kappa", "alpha"])
        for r in rows:
            w.writerow([format(r[0], ".12g"), r[1]]
                       + [format(v, ".12g") if v != "" else "" for v in r[2:]])
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
