"""Step-size study for the critical gain delta*.

Bisects the spectral-radius crossing with successively finer RK4 steps to
show the reported digits are converged.
"""
import argparse
import math

from activesense.floquet import find_critical_delta
from activesense.integrate import StepperConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-7)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()

    prev = None
    for i in range(args.levels):
        n = 500 * 2**i
        d = find_critical_delta(3.0, 3.5, args.tol, StepperConfig(h=math.pi / n))
        change = "" if prev is None else f"  change {d - prev:+.2e}"
        print(f"h = pi/{n:<6d} delta* = {d:.8f}{change}")
        prev = d
    print(f"delta* to 4 significant digits: {prev:.3f}")


if __name__ == "__main__":
    main()
