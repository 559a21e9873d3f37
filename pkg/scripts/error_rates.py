"""Empirical error rates of the Hamming testers per distance class.

    python3 scripts/error_rates.py --n 16384 --k 8 --trials 500

Prints one line per (mode, distance): accept rate, error rate and the
inner/outer split for ham-lite. Instances use x = 0 and plant the differences
in y, which sketches the same as any other x with that difference.
"""

import argparse
import random
import time

from dyckstream import BitSource, HamLite, split_seed
from dyckstream.ham_fingerprint import ham_fp_run
from dyckstream.support import SearchBudgetExceeded


def lite_trial(n, k, d, seed, gamma, epsilon):
    r = random.Random(seed)
    h = HamLite(n, k, BitSource.from_seed(seed, "lite"), gamma=gamma, epsilon=epsilon)
    h.feed_sparse([], n)
    h.feed_sparse([n - 1 - i for i in r.sample(range(n), d)], n)
    v = h.decide()
    return v.accepted, v.details.get("inner_accept"), v.details.get("outer_accept")


def fp_trial(n, k, d, seed, budget):
    """Returns None when the support search runs out of budget."""
    r = random.Random(seed)
    x = [r.getrandbits(1) for _ in range(n)]
    diff = set(r.sample(range(n), d))
    y = [b ^ (i in diff) for i, b in enumerate(x)]
    try:
        return ham_fp_run(n, k, x, y, BitSource.from_seed(seed, "fp"), budget=budget).accepted, None, None
    except SearchBudgetExceeded:
        return None, None, None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2**14)
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--gamma", type=float, default=1 / 8)
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--modes", default="ham-lite")
    ap.add_argument("--distances", default=None, help="comma list (default k-1,k,k+1,2k,2k+2)")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--budget", type=int, default=10**7, help="ham-fp support search budget")
    args = ap.parse_args()
    k = args.k
    ds = ([int(t) for t in args.distances.split(",")] if args.distances
          else [k - 1, k, k + 1, 2 * k, 2 * k + 2])
    print("mode      d    accept   error    inner_acc outer_acc  sec  over_budget", flush=True)
    for mode in args.modes.split(","):
        for d in ds:
            t0 = time.time()
            acc = inner = outer = over = 0
            for t in range(args.trials):
                s = split_seed(args.seed, f"{mode}/{d}/{t}")
                if mode == "ham-lite":
                    a, i, o = lite_trial(args.n, k, d, s, args.gamma, args.epsilon)
                else:
                    a, i, o = fp_trial(args.n, k, d, s, args.budget)
                    if a is None:
                        over += 1
                        continue
                acc += a
                inner += bool(i)
                outer += bool(o)
            done = args.trials - over
            rate = acc / done if done else float("nan")
            err = rate if d > k else 1 - rate
            split = (f"{inner / args.trials:9.4f} {outer / args.trials:9.4f}" if mode == "ham-lite"
                     else f"{'':9} {'':9}")
            print(f"{mode:9} {d:3d} {rate:8.4f} {err:8.4f} {split} {time.time() - t0:5.0f}  {over}", flush=True)


if __name__ == "__main__":
    main()
