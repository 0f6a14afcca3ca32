"""Closed-loop trajectory from (1, 1) with k = 1, a = 1/sqrt(2).

Writes t, x, z, u and the distance to the reference orbit, and reports when
the distance last drops below 1e-2.
"""
import argparse
import math

import numpy as np

from activesense import csvio
from activesense.dynamics import SystemParams, closed_loop_rhs, control_law, orbit_distance
from activesense.integrate import StepperConfig, integrate_state


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=1 / math.sqrt(2))
    ap.add_argument("--x0", type=float, default=1.0)
    ap.add_argument("--z0", type=float, default=1.0)
    ap.add_argument("--t-end", type=float, default=60.0)
    ap.add_argument("--h", type=float, default=1e-3)
    ap.add_argument("--out", default="convergence.csv")
    args = ap.parse_args()

    p = SystemParams(args.k, args.a)
    traj = integrate_state(closed_loop_rhs(p), (args.x0, args.z0), 0.0, args.t_end, StepperConfig(h=args.h), p)
    dist = orbit_distance(traj.t, traj.states, p.a)
    rows = (
        (t, x, z, control_law((x, z), t, p), d)
        for t, (x, z), d in zip(traj.t, traj.states, dist)
    )
    csvio.write_csv(args.out, ("t", "x", "z", "u", "distance"), rows)

    above = np.nonzero(dist >= 1e-2)[0]
    if above.size == len(dist):
        print("never within 1e-2 of the orbit")
    else:
        settle = traj.t[above[-1] + 1] if above.size else traj.t[0]
        print(f"distance < 1e-2 from t = {settle:.3f}; final distance {dist[-1]:.3e} -> {args.out}")


if __name__ == "__main__":
    main()
