"""Floquet multipliers of the linearization over a delta range.

Prints the stability boundary and the real/complex switch points, then
writes the per-delta multipliers to CSV.
"""
import argparse

from activesense import csvio
from activesense.floquet import discriminant_crossings, find_critical_delta, sweep_delta


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta-min", type=float, default=0.0)
    ap.add_argument("--delta-max", type=float, default=4.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="floquet_sweep.csv")
    args = ap.parse_args()

    res = sweep_delta(args.delta_min, args.delta_max, args.step, workers=args.workers)
    csvio.write_csv(args.out, csvio.FLOQUET_HEADER, csvio.floquet_rows(res))

    for d in discriminant_crossings(res):
        print(f"real/complex switch at delta = {d:.5f}")
    for left, right in zip(res, res[1:]):
        if left.stable and not right.stable:
            print(f"stability lost at delta* = {find_critical_delta(left.delta, right.delta, 1e-6):.6f}")
    print(f"{len(res)} points -> {args.out}")


if __name__ == "__main__":
    main()
