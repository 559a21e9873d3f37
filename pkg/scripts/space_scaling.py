"""Live-state and randomness scaling from metered streaming runs.

    python3 scripts/space_scaling.py --ns 2^12,2^14,2^16,2^18 --ks 2,4,8

Streams one planted instance per (mode, n, k) without deciding, then fits
dyck-fp live bytes to a*sqrt(n log n) + b*k log n and prints the table.
"""

import argparse
import io
import math

import numpy as np

from dyckstream.cli import RunSpec, _int_list, bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=_int_list, default=[2**12, 2**14, 2**16, 2**18])
    ap.add_argument("--ks", type=_int_list, default=[2, 4, 8])
    ap.add_argument("--modes", default="dyck-fp,dyck-lite,ham-fp,ham-lite")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--csv", default=None, help="also write the raw rows here")
    args = ap.parse_args()
    buf = io.StringIO()
    rows = bench(args.modes.split(","), args.ns, args.ks, 1, args.seed, buf,
                 RunSpec("dyck-fp", None, 0), decide=False)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(buf.getvalue())
    print(f"{'mode':10} {'n':>8} {'k':>3} {'live_bytes':>11} {'rand_bits':>10} {'bits/log2n':>10}")
    for r in rows:
        ln = math.log2(r["n"])
        print(f"{r['mode']:10} {r['n']:8d} {r['k']:3d} {r['max_live_bytes']:11d} "
              f"{r['randomness_bits']:10d} {r['randomness_bits'] / ln:10.1f}")
    dyck = [r for r in rows if r["mode"] == "dyck-fp"]
    if len(dyck) >= 2:
        A = np.array([[math.sqrt(r["n"] * math.log2(r["n"])), r["k"] * math.log2(r["n"])] for r in dyck])
        y = np.array([r["max_live_bytes"] for r in dyck], dtype=float)
        (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
        fit = A @ np.array([a, b])
        print(f"\ndyck-fp fit: a={a:.4f} b={b:.4f} worst ratio {np.max(np.maximum(y / fit, fit / y)):.3f}")


if __name__ == "__main__":
    main()
