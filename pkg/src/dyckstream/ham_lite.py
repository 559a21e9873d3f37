"""Randomness-efficient Hamming-distance test built from two sub-tests.

inner: hash coordinates into K1 buckets (pairwise), then into K2 groups (u-wise),
    keep one fingerprint per group and decode each group's weight at the end.
outer: a few hundred sparse random parities of x XOR y, thresholded so that
    distance <= k and distance >= 2k land on opposite sides.

The combined test accepts only if both sub-tests accept. For k <= 3 the plain
fingerprint sketch is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .gf2e import FieldCtx, field_for
from .ham_fingerprint import FpConfig, fp_begin, fp_decide, fp_push
from .meter import Meter, Verdict, as_source, byte_len
from .prg import (
    DEFAULT_DELTA, HashFamilySeed, hash_eval, hash_eval_many,
    hash_family_new, next_pow2, yao_sample_bit, yao_seed_new, yao_t,
)
from .support import SupportSearch

FALLBACK_K = 3
DEFAULT_GAMMA = 1 / 8
DEFAULT_EPSILON = 0.5
DELTA_FRACTION = 0.9  # delta = 0.9 * epsilon unless given
C_REPS = 48
# randomness ceiling in bits per log2(n) for gamma = 1/8, k <= 16, n <= 2^20
RANDOMNESS_CONST = 4500


def _ceil(x: float) -> int:
    # guards against 20.000000000000004 style round-off
    return math.ceil(x - 1e-9)


@dataclass(frozen=True)
class XorUpdate:
    j: int
    u: int


# ------------------------------------------------------------------ inner

@dataclass(frozen=True)
class InnerConfig:
    n: int
    k: int
    gamma: float = DEFAULT_GAMMA
    epsilon: float = DEFAULT_EPSILON
    delta: Optional[float] = None
    c_u: float = 1.0
    K1: int = 0
    K2: int = 0
    u: int = 0
    ell2: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        delta = self.delta if self.delta is not None else DELTA_FRACTION * self.epsilon
        if not 0 < delta < self.epsilon:
            raise ValueError("need 0 < delta < epsilon")
        set_ = lambda name, v: object.__setattr__(self, name, v)
        set_("delta", delta)
        k, g = self.k, self.gamma
        if not self.K1:
            set_("K1", next_pow2(16 * k * k / g))
        if not self.K2:
            set_("K2", next_pow2(k ** (1 + delta)))
        if not self.u:
            logk = math.log(k) if k > 1 else math.log(2)
            set_("u", max(1, _ceil((2 / delta) * (2 + math.log(8 / g) / logk))))
        if not self.ell2:
            set_("ell2", field_for(max(1, _ceil(self.c_u * self.u * math.log2(max(k / g, 2))))).ell)
        for name in ("K1", "K2"):
            v = getattr(self, name)
            if v & (v - 1):
                raise ValueError(f"{name} must be a power of two")

    @property
    def ctx(self) -> FieldCtx:
        return field_for(self.ell2)


@dataclass
class InnerState:
    h1: HashFamilySeed
    h2: HashFamilySeed
    alpha: int
    bucket_acc: list
    count: int = 0
    meter: Meter = field(default_factory=Meter)

    def live_bytes(self, cfg: InnerConfig) -> int:
        fe = cfg.ctx.nbytes
        seeds = byte_len(self.h1.seed_bits) + byte_len(self.h2.seed_bits) + fe
        return cfg.K2 * fe + seeds + byte_len((2 * cfg.n).bit_length())


def inner_begin(cfg: InnerConfig, rng_bits, domain: Optional[int] = None) -> InnerState:
    """Draw h1 (pairwise, [domain] -> [K1]), h2 (u-wise, [K1] -> [K2]) and alpha."""
    src = as_source(rng_bits)
    meter = Meter()
    h1 = hash_family_new(2, domain or cfg.n, cfg.K1, src, meter)
    h2 = hash_family_new(cfg.u, cfg.K1, cfg.K2, src, meter)
    alpha = cfg.ctx.random_elem(src, meter)
    st = InnerState(h1, h2, alpha, [0] * cfg.K2, meter=meter)
    meter.observe(st.live_bytes(cfg))
    return st


def logical_index(n: int, i: int) -> int:
    """Coordinate carried by stream position i of x_1..x_n, y_n..y_1 (0-based)."""
    return i if i < n else 2 * n - 1 - i


def inner_bucketize(cfg: InnerConfig, state: InnerState, i: int, bit: int) -> XorUpdate:
    return XorUpdate(hash_eval(state.h1, logical_index(cfg.n, i)), 1 if bit else 0)


def inner_absorb(cfg: InnerConfig, state: InnerState, upd: XorUpdate) -> InnerState:
    if not 0 <= upd.j < cfg.K1:
        raise IndexError(f"bucket {upd.j} outside [0, {cfg.K1})")
    if upd.u:
        g = hash_eval(state.h2, upd.j)
        state.bucket_acc[g] ^= cfg.ctx.pow(state.alpha, upd.j)
    return state


def inner_push(cfg: InnerConfig, state: InnerState, i: int, bit: int) -> InnerState:
    state.count += 1
    if bit:
        inner_absorb(cfg, state, inner_bucketize(cfg, state, i, bit))
    return state


def inner_add_index(cfg: InnerConfig, state: InnerState, idx: int) -> InnerState:
    """Toggle coordinate ``idx`` directly (used when the caller already knows indices)."""
    return inner_absorb(cfg, state, XorUpdate(hash_eval(state.h1, idx), 1))


@dataclass
class InnerDecision:
    accepted: bool
    F: int
    exact: bool
    weights: dict
    steps: int = 0


def _bucket_values(ctx: FieldCtx, alpha: int, positions) -> list:
    out = []
    cache = {}
    prev, cur = 0, 1
    for p in positions:
        gap = p - prev
        step = cache.get(gap)
        if step is None:
            step = cache[gap] = ctx.pow(alpha, gap)
        cur = ctx.mul(cur, step)
        out.append(cur)
        prev = p
    return out


def inner_decide(cfg: InnerConfig, state: InnerState, budget: Optional[int] = None,
                 exact: bool = False) -> InnerDecision:
    """Sum of per-group minimum weights F, accepting iff F <= budget (default k).

    Groups are resolved level by level (weight 1 for all, then weight 2, ...). Unless
    ``exact`` is set, the search stops as soon as the weights already forced exceed
    the budget, and F is then a lower bound.
    """
    k = cfg.k if budget is None else budget
    pending = {b: v for b, v in enumerate(state.bucket_acc) if v}
    weights: dict = {}
    resolved = 0
    steps = 0
    if not pending:
        return InnerDecision(True, 0, True, weights, 1)
    if not exact and len(pending) > k:
        return InnerDecision(False, len(pending), False, weights, 1)
    import numpy as np
    groups = hash_eval_many(state.h2, np.arange(cfg.K1))
    order = np.argsort(groups, kind="stable")
    bounds = np.searchsorted(groups[order], np.arange(cfg.K2 + 1))
    searches = {}
    for b in pending:
        pos = order[bounds[b]:bounds[b + 1]].tolist()
        searches[b] = (pos, SupportSearch(_bucket_values(cfg.ctx, state.alpha, pos), cfg.ctx.ell))
    for s in range(1, cfg.u + 1):
        if not exact and resolved + s * len(pending) > k:
            return InnerDecision(False, resolved + s * len(pending), False, weights, steps)
        for b in list(pending):
            hit, st = searches[b][1].find(pending[b], s, min_size=s)
            steps += st
            if hit is not None:
                weights[b] = s
                resolved += s
                del pending[b]
        if not pending:
            break
    for b in pending:
        weights[b] = cfg.u
    F = resolved + cfg.u * len(pending)
    return InnerDecision(F <= k, F, True, weights, steps)


# ------------------------------------------------------------------ outer

def parity_probability(k_pow2: int, d: int) -> float:
    """Pr[<w, z> = 1] for |w| = d when each z_i is 1 with probability 1/(4 k_pow2)."""
    return (1 - (1 - 1 / (2 * k_pow2)) ** d) / 2


@dataclass(frozen=True)
class OuterConfig:
    n: int
    k: int
    gamma: float = DEFAULT_GAMMA
    c_r: float = C_REPS
    delta1: float = DEFAULT_DELTA
    delta2: float = DEFAULT_DELTA
    reps: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.reps:
            object.__setattr__(self, "reps", _ceil(self.c_r * math.log2(1 / self.gamma)))

    @property
    def t(self) -> int:
        return yao_t(self.k)

    @property
    def k_pow2(self) -> int:
        return 1 << (self.t - 2)

    @property
    def p1(self) -> float:
        return parity_probability(self.k_pow2, self.k)

    @property
    def p2(self) -> float:
        return parity_probability(self.k_pow2, 2 * self.k)

    @property
    def tau(self) -> float:
        return self.reps * (self.p1 + self.p2) / 2


@dataclass
class OuterState:
    seeds: list
    parity: int = 0
    count: int = 0
    meter: Meter = field(default_factory=Meter)

    def live_bytes(self, cfg: OuterConfig) -> int:
        seeds = sum(byte_len(s.seed_bits) for s in self.seeds)
        return seeds + byte_len(cfg.reps) + byte_len((2 * cfg.n).bit_length())


def outer_begin(cfg: OuterConfig, rng_bits, domain: Optional[int] = None) -> OuterState:
    src = as_source(rng_bits)
    meter = Meter()
    seeds = [yao_seed_new(domain or cfg.n, cfg.k, cfg.delta1, cfg.delta2, src, meter)
             for _ in range(cfg.reps)]
    st = OuterState(seeds, meter=meter)
    meter.observe(st.live_bytes(cfg))
    return st


def outer_add_index(cfg: OuterConfig, state: OuterState, idx: int) -> OuterState:
    flips = 0
    for r, seed in enumerate(state.seeds):
        if yao_sample_bit(seed, idx):
            flips |= 1 << r
    state.parity ^= flips
    return state


def outer_push(cfg: OuterConfig, state: OuterState, i: int, bit: int) -> OuterState:
    state.count += 1
    if bit:
        outer_add_index(cfg, state, logical_index(cfg.n, i))
    return state


@dataclass
class OuterDecision:
    accepted: bool
    ones: int
    tau: float


def outer_decide(cfg: OuterConfig, state: OuterState) -> OuterDecision:
    ones = bin(state.parity).count("1")
    return OuterDecision(ones < cfg.tau, ones, cfg.tau)


def ham_lite_decide(inner_accepts: bool, outer_accepts: bool) -> bool:
    return bool(inner_accepts) and bool(outer_accepts)


# ------------------------------------------------------------------ driver

class HamLite:
    """Streaming driver for the combined test over x_1..x_n, y_n..y_1."""

    def __init__(self, n: int, k: int, rng_bits, gamma: float = DEFAULT_GAMMA,
                 epsilon: float = DEFAULT_EPSILON, c: int = 2, **overrides):
        self.n, self.k = n, k
        src = as_source(rng_bits)
        self.pos = 0
        self.fallback = k <= FALLBACK_K
        if self.fallback:
            self.fp_cfg = FpConfig(n, k, c)
            self.fp = fp_begin(self.fp_cfg, src)
            return
        inner_keys = {"delta", "c_u", "K1", "K2", "u", "ell2"}
        self.inner_cfg = InnerConfig(n, k, gamma, epsilon,
                                     **{a: b for a, b in overrides.items() if a in inner_keys})
        self.outer_cfg = OuterConfig(n, k, gamma,
                                     **{a: b for a, b in overrides.items() if a not in inner_keys})
        self.inner = inner_begin(self.inner_cfg, src)
        self.outer = outer_begin(self.outer_cfg, src)

    def push(self, bit: int) -> None:
        if self.pos >= 2 * self.n:
            from .ham_fingerprint import StreamOverflow
            raise StreamOverflow(f"stream already holds {2 * self.n} items")
        if self.fallback:
            fp_push(self.fp, bit)
        else:
            inner_push(self.inner_cfg, self.inner, self.pos, bit)
            outer_push(self.outer_cfg, self.outer, self.pos, bit)
        self.pos += 1

    def feed(self, bits: Iterable[int]) -> "HamLite":
        for b in bits:
            self.push(b)
        return self

    def feed_sparse(self, ones: Iterable[int], length: Optional[int] = None) -> "HamLite":
        """Same end state as pushing a block of ``length`` items that are 1 exactly at
        the given offsets (relative to the current position) and 0 elsewhere."""
        ones = sorted(set(int(o) for o in ones))
        length = 2 * self.n - self.pos if length is None else length
        if ones and (ones[0] < 0 or ones[-1] >= length):
            raise ValueError("offset outside the block")
        if self.pos + length > 2 * self.n:
            from .ham_fingerprint import StreamOverflow
            raise StreamOverflow("block runs past the end of the stream")
        if self.fallback:
            # the fingerprint touches every item, so replay the block densely
            it = iter(ones)
            nxt = next(it, None)
            for off in range(length):
                if off == nxt:
                    fp_push(self.fp, 1)
                    nxt = next(it, None)
                else:
                    fp_push(self.fp, 0)
        else:
            for off in ones:
                p = self.pos + off
                inner_push(self.inner_cfg, self.inner, p, 1)
                outer_push(self.outer_cfg, self.outer, p, 1)
            self.inner.count += length - len(ones)
            self.outer.count += length - len(ones)
        self.pos += length
        return self

    def meter(self) -> Meter:
        if self.fallback:
            return self.fp.meter
        m = Meter()
        m.randomness_bits = self.inner.meter.randomness_bits + self.outer.meter.randomness_bits
        m.max_live_bytes = (self.inner.live_bytes(self.inner_cfg)
                            + self.outer.live_bytes(self.outer_cfg))
        m.items = self.pos
        return m

    def decide(self, budget: Optional[int] = None) -> Verdict:
        if self.pos != 2 * self.n:
            from .ham_fingerprint import StreamIncomplete
            raise StreamIncomplete(f"consumed {self.pos} of {2 * self.n} items")
        if self.fallback:
            v = fp_decide(self.fp_cfg, self.fp, budget=budget)
            v.details["fallback"] = "fingerprint"
            return v
        ind = inner_decide(self.inner_cfg, self.inner)
        outd = outer_decide(self.outer_cfg, self.outer)
        m = self.meter()
        m.postprocess_steps = ind.steps
        details = {
            "inner_accept": ind.accepted, "inner_F": ind.F, "inner_F_exact": ind.exact,
            "outer_accept": outd.accepted, "outer_ones": outd.ones, "outer_tau": round(outd.tau, 6),
        }
        return Verdict(ham_lite_decide(ind.accepted, outd.accepted), None, m, details=details)


def ham_lite_run(n: int, k: int, x, y, rng_bits, **kw) -> Verdict:
    h = HamLite(n, k, rng_bits, **kw)
    h.feed(x)
    h.feed(reversed(list(y)))
    return h.decide()
