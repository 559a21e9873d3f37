"""Command-line front end.

    python -m dyckstream --mode ham-fp --k 2 input.txt
    python -m dyckstream --mode dyck-lite --n 64 --k 4 --seed 7 --json < input.txt
    python -m dyckstream --bench --mode dyck-fp --n 16384,65536 --k 2 --trials 3
    python -m dyckstream --replay instances.tsv --mode ham-fp --seed 1

Exit status: 0 accept, 1 reject, 2 usage or input error (bench and replay exit 0
when they complete).
"""

from __future__ import annotations

import argparse
import csv
import json
import secrets
import sys
import time
from dataclasses import dataclass
from typing import List, Optional

from .dyck_codec import WrongSideSymbol, one_turn_stream
from .dyck_stream import DyckConfig, DyckLite, dyck_begin, dyck_decide, dyck_push
from .ham_fingerprint import FpConfig, fp_begin, fp_decide, fp_push
from .ham_lite import DEFAULT_EPSILON, DEFAULT_GAMMA, HamLite
from .meter import BitSource, Meter, Verdict, split_seed
from .support import SearchBudgetExceeded
from .testkit import (
    Instance, ShapeUnbalanced, exact_dyck_flip_distance, exact_ham, gen_flipped,
    random_dyck_member, read_instances,
)

SCHEMA = "dyckstream.verdict/1"
MODES = ("ham-fp", "ham-lite", "dyck-fp", "dyck-lite", "oracle")
BENCH_FIELDS = ["mode", "n", "k", "trial", "label", "true_distance", "verdict", "correct",
                "max_live_bytes", "randomness_bits", "items", "postprocess_steps", "us_per_item"]


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    mode: str
    n: Optional[int]
    k: int
    c: int = 2
    epsilon: float = DEFAULT_EPSILON
    gamma: float = DEFAULT_GAMMA
    seed: int = 0
    block_len: Optional[int] = None
    budget: Optional[int] = None

    def params(self) -> dict:
        out = {"mode": self.mode, "n": self.n, "k": self.k, "c": self.c}
        if self.mode in ("ham-lite", "dyck-lite"):
            out["epsilon"] = self.epsilon
            out["gamma"] = self.gamma
        if self.mode in ("dyck-fp", "dyck-lite") and self.block_len is not None:
            out["block_len"] = self.block_len
        return out


def source_for(seed: int, mode: str) -> BitSource:
    """Per-run random bits: the master seed expanded under the mode's label."""
    return BitSource.from_seed(seed, label=mode)


# -------------------------------------------------------------- input

def clean_input(text: str) -> str:
    return "".join(ch for ch in text if not ch.isspace())


def is_bracket_text(s: str) -> bool:
    return bool(s) and all(ch in "()[]" for ch in s)


def ham_bits(spec: RunSpec, s: str) -> List[int]:
    """Bits x_1..x_n, y_n..y_1 from either a 0/1 string or a one-turn bracket string."""
    if s and all(ch in "01" for ch in s):
        bits = [1 if ch == "1" else 0 for ch in s]
    elif is_bracket_text(s):
        bits = list(one_turn_stream(s, len(s)))  # WrongSideSymbol propagates
    elif not s:
        bits = []
    else:
        bad = next(ch for ch in s if ch not in "01()[]")
        raise UsageError(f"unexpected character {bad!r} in ham input")
    if len(bits) % 2:
        raise UsageError(f"ham input has odd length {len(bits)}")
    n = len(bits) // 2
    if spec.n is not None and spec.n != n:
        raise UsageError(f"--n {spec.n} does not match input (x has length {n})")
    return bits


def dyck_text(spec: RunSpec, s: str) -> str:
    if not all(ch in "()[]" for ch in s):
        bad = next(ch for ch in s if ch not in "()[]")
        raise UsageError(f"unexpected character {bad!r} in bracket input")
    if spec.n is not None and spec.n != len(s):
        raise UsageError(f"--n {spec.n} does not match input length {len(s)}")
    return s


# --------------------------------------------------------------- modes

def run_text(spec: RunSpec, s: str) -> Verdict:
    """Run one mode over a cleaned input string."""
    mode = spec.mode
    if mode == "oracle":
        return run_oracle(spec, s)
    if mode in ("ham-fp", "ham-lite"):
        try:
            bits = ham_bits(spec, s)
        except WrongSideSymbol as exc:
            return Verdict(False, None, Meter(items=exc.position), reason="wrong-side symbol",
                           details={"position": exc.position})
        n = len(bits) // 2
        if n == 0:
            raise UsageError("empty input")
        src = source_for(spec.seed, mode)
        if mode == "ham-fp":
            cfg = FpConfig(n, spec.k, spec.c)
            st = fp_begin(cfg, src)
            for b in bits:
                fp_push(st, b)
            return fp_decide(cfg, st, budget=spec.budget)
        h = HamLite(n, spec.k, src, gamma=spec.gamma, epsilon=spec.epsilon, c=spec.c)
        h.feed(bits)
        return h.decide(budget=spec.budget)
    if mode in ("dyck-fp", "dyck-lite"):
        w = dyck_text(spec, s)
        src = source_for(spec.seed, mode)
        if mode == "dyck-fp":
            cfg = DyckConfig(len(w), spec.k, spec.c, spec.block_len)
            st = dyck_begin(cfg, src)
            for ch in w:
                dyck_push(cfg, st, ch)
            v = dyck_decide(cfg, st, budget=spec.budget)
            v.details["block_len"] = cfg.block_len
            return v
        d = DyckLite(len(w), spec.k, src, gamma=spec.gamma, epsilon=spec.epsilon, c=spec.c,
                     block_len=spec.block_len)
        d.feed(w)
        v = d.decide()
        v.details["block_len"] = d.cfg.block_len
        return v
    raise UsageError(f"unknown mode {mode!r}")


def run_oracle(spec: RunSpec, s: str) -> Verdict:
    meter = Meter(items=len(s))
    if s and all(ch in "01" for ch in s):
        bits = ham_bits(spec, s)
        h = len(bits) // 2
        dist = exact_ham(bits[:h], bits[h:][::-1])
    else:
        w = dyck_text(spec, s)
        try:
            dist = exact_dyck_flip_distance(w)
        except ShapeUnbalanced as exc:
            return Verdict(False, None, meter, reason=f"unbalanced shape: {exc}",
                           details={"distance": None})
    return Verdict(dist <= spec.k, None, meter, details={"distance": dist})


def report(spec: RunSpec, v: Verdict) -> dict:
    out = {"schema": SCHEMA}
    out.update(v.to_dict())
    out["params"] = spec.params()
    out["seed"] = spec.seed
    return out


def render_human(spec: RunSpec, v: Verdict) -> str:
    parts = [("ACCEPT" if v.accepted else "REJECT"), f"mode={spec.mode}", f"n={spec.n}", f"k={spec.k}"]
    if v.support is not None:
        parts.append("support=" + ",".join(map(str, v.support)))
    if v.err_count is not None:
        parts.append(f"err={v.err_count}")
    if v.reason:
        parts.append(f"reason={v.reason!r}")
    for key, val in v.details.items():
        parts.append(f"{key}={val}")
    m = v.meter
    parts.append(f"live_bytes={m.max_live_bytes} random_bits={m.randomness_bits} "
                 f"items={m.items} post_steps={m.postprocess_steps} seed={spec.seed}")
    return " ".join(parts)


# ---------------------------------------------------------------- bench

def bench_instance(mode: str, n: int, k: int, trial: int, seed: int) -> Instance:
    """Alternating within-k / beyond-k planted instances (deterministic per seed)."""
    import random
    rng = random.Random(split_seed(seed, f"bench/{mode}/{n}/{k}/{trial}"))
    beyond = trial % 2 == 1
    if mode.startswith("ham") or mode == "oracle":
        d = (2 * k if mode == "ham-lite" else k + 1) if beyond else k
        # planted differences on a zero background keep ham-lite's per-item work small
        return gen_flipped("0" * n, min(d, n), rng, kind="ham", k=k)
    base = random_dyck_member(n, rng)
    d = (2 * k if mode == "dyck-lite" else k + 1) if beyond else k
    return gen_flipped(base, min(d, n // 2), rng, kind="dyck", k=k)


def bench(modes: List[str], ns: List[int], ks: List[int], trials: int, seed: int,
          out, spec_base: RunSpec, decide: bool = True) -> List[dict]:
    if trials < 1:
        raise UsageError("--trials must be at least 1")
    rows = []
    writer = csv.DictWriter(out, fieldnames=BENCH_FIELDS)
    writer.writeheader()
    for mode in modes:
        for n in ns:
            for k in ks:
                for t in range(trials):
                    inst = bench_instance(mode, n, k, t, seed)
                    spec = RunSpec(mode, n, k, spec_base.c, spec_base.epsilon, spec_base.gamma,
                                   split_seed(seed, f"trial/{mode}/{n}/{k}/{t}"), spec_base.block_len,
                                   spec_base.budget)
                    t0 = time.perf_counter()
                    v = run_stream_only(spec, inst.payload) if not decide else run_text(spec, inst.payload)
                    dt = time.perf_counter() - t0
                    truth = inst.true_distance <= k
                    row = {
                        "mode": mode, "n": n, "k": k, "trial": t, "label": inst.label,
                        "true_distance": inst.true_distance,
                        "verdict": "" if v.accepted is None else ("accept" if v.accepted else "reject"),
                        "correct": "" if v.accepted is None else int(v.accepted == truth),
                        "max_live_bytes": v.meter.max_live_bytes,
                        "randomness_bits": v.meter.randomness_bits,
                        "items": v.meter.items,
                        "postprocess_steps": v.meter.postprocess_steps,
                        "us_per_item": round(1e6 * dt / max(1, len(inst.payload)), 3),
                    }
                    writer.writerow(row)
                    rows.append(row)
    return rows


def run_stream_only(spec: RunSpec, s: str):
    """Stream the input and return the meters without the final decision."""
    mode = spec.mode
    src = source_for(spec.seed, mode)
    if mode == "ham-fp":
        bits = ham_bits(spec, s)
        cfg = FpConfig(len(bits) // 2, spec.k, spec.c)
        st = fp_begin(cfg, src)
        for b in bits:
            fp_push(st, b)
        return _Streamed(st.meter)
    if mode == "ham-lite":
        bits = ham_bits(spec, s)
        h = HamLite(len(bits) // 2, spec.k, src, gamma=spec.gamma, epsilon=spec.epsilon, c=spec.c)
        h.feed(bits)
        return _Streamed(h.meter())
    if mode == "dyck-fp":
        cfg = DyckConfig(len(s), spec.k, spec.c, spec.block_len)
        st = dyck_begin(cfg, src)
        for ch in s:
            dyck_push(cfg, st, ch)
        return _Streamed(st.meter)
    if mode == "dyck-lite":
        d = DyckLite(len(s), spec.k, src, gamma=spec.gamma, epsilon=spec.epsilon, c=spec.c,
                     block_len=spec.block_len)
        d.feed(s)
        return _Streamed(d.meter())
    raise UsageError(f"mode {mode} has no streaming part")


@dataclass
class _Streamed:
    meter: Meter
    accepted: Optional[bool] = None


# ------------------------------------------------------------------ main

def _int_list(text: str) -> List[int]:
    try:
        return [int(eval_pow(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def eval_pow(t: str) -> int:
    """Integers, optionally written as 2^e."""
    t = t.strip()
    if "^" in t:
        b, e = t.split("^", 1)
        return int(b) ** int(e)
    return int(t)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyckstream", description="Streaming Hamming and bracket-language tests.")
    p.add_argument("input", nargs="?", default="-", help="input file, or - for stdin")
    p.add_argument("--mode", default=None, help="one of " + ", ".join(MODES) + " (bench: comma list)")
    p.add_argument("--n", type=_int_list, default=None, help="input length (mandatory for stdin); comma list for bench")
    p.add_argument("--k", type=_int_list, default=None, help="error budget; comma list for bench")
    p.add_argument("--c", type=int, default=2, help="error exponent for fingerprint widths")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p.add_argument("--seed", type=int, default=None, help="64-bit master seed (random if omitted)")
    p.add_argument("--block-len", type=int, default=None, help="override the dyck block length")
    p.add_argument("--budget", type=int, default=None, help="cap on post-processing candidates")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--bench", action="store_true", help="run a benchmark sweep and write CSV")
    p.add_argument("--trials", type=int, default=None, help="bench trials per (mode, n, k)")
    p.add_argument("--meter-only", action="store_true", help="bench: stream without deciding")
    p.add_argument("--out", default=None, help="bench CSV output path (default stdout)")
    p.add_argument("--replay", default=None, help="run every instance of an instance file")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except SearchBudgetExceeded as exc:
        print(f"post-processing budget exceeded: {exc}", file=sys.stderr)
        return 2


def _single(values, name, default=None):
    if values is None:
        return default
    if len(values) != 1:
        raise UsageError(f"--{name} takes a single value outside bench mode")
    return values[0]


def _dispatch(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    if not 0 <= seed < 2**64:
        raise UsageError("--seed must fit in 64 bits")
    if args.bench:
        modes = (args.mode or "").split(",")
        for m in modes:
            if m not in MODES or m == "oracle":
                raise UsageError(f"bench mode must be one of {MODES[:-1]}, got {m!r}")
        if not args.n or not args.k:
            raise UsageError("bench needs --n and --k")
        if args.trials is None or args.trials < 1:
            raise UsageError("bench needs --trials >= 1")
        base = RunSpec(modes[0], None, 0, args.c, args.epsilon, args.gamma, seed, args.block_len, args.budget)
        out = open(args.out, "w", newline="") if args.out else sys.stdout
        try:
            bench(modes, args.n, args.k, args.trials, seed, out, base, decide=not args.meter_only)
        finally:
            if args.out:
                out.close()
        return 0
    if args.mode not in MODES:
        raise UsageError(f"--mode must be one of {', '.join(MODES)}")
    k = _single(args.k, "k")
    if k is None:
        raise UsageError("--k is required")
    if k < 0:
        raise UsageError("--k must be non-negative")
    if args.trials is not None:
        raise UsageError("--trials only applies to --bench")
    if args.replay:
        return _replay(args, seed, k)
    n = _single(args.n, "n")
    if args.input == "-":
        if n is None:
            raise UsageError("--n is mandatory when reading stdin")
        text = sys.stdin.read()
    else:
        with open(args.input) as fh:
            text = fh.read()
    spec = RunSpec(args.mode, n, k, args.c, args.epsilon, args.gamma, seed, args.block_len, args.budget)
    s = clean_input(text)
    v = run_text(spec, s)
    if spec.n is None:
        spec.n = len(s) // 2 if args.mode.startswith("ham") or (args.mode == "oracle" and set(s) <= set("01")) else len(s)
    if args.json:
        print(json.dumps(report(spec, v), separators=(",", ":")))
    else:
        print(render_human(spec, v))
    return 0 if v.accepted else 1


def _replay(args, seed: int, k: int) -> int:
    insts = read_instances(args.replay)
    for idx, inst in enumerate(insts):
        spec = RunSpec(args.mode, inst.n, inst.k if args.k is None else k, args.c, args.epsilon,
                       args.gamma, split_seed(seed, f"replay/{idx}"), args.block_len, args.budget)
        if args.mode.startswith("ham") and inst.kind == "dyck":
            raise UsageError(f"instance {idx} is a dyck string; ham modes take ham or one_turn")
        if args.mode.startswith("dyck") and inst.kind == "ham":
            raise UsageError(f"instance {idx} is a ham pair; dyck modes take bracket strings")
        v = run_text(spec, inst.payload)
        rep = report(spec, v)
        rep["instance"] = {"index": idx, "kind": inst.kind, "label": inst.label,
                           "true_distance": inst.true_distance}
        rep["correct"] = v.accepted == (0 <= inst.true_distance <= spec.k)
        print(json.dumps(rep, separators=(",", ":")) if args.json else
              f"[{idx}] {render_human(spec, v)} truth={inst.true_distance}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
