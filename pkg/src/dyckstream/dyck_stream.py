"""One-pass test for "at most k type flips away from a balanced two-type string".

The stream is cut into blocks of ``block_len`` symbols. Each block is reduced
locally (matched pairs inside the block are checked on the spot); what survives
is a run of closers u followed by a run of openers v. Openers receive consecutive
indices 1, 2, ...; closers are matched against a stack of index intervals. Every
'[' and ']' adds alpha^index to a running sum, so a correctly typed pair cancels
and the sum ends as the sum over mismatched cross-block pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from .gf2e import FieldCtx, field_for
from .ham_fingerprint import fp_width
from .ham_lite import (
    DEFAULT_EPSILON, DEFAULT_GAMMA, FALLBACK_K, InnerConfig, OuterConfig, inner_add_index,
    inner_begin, inner_decide, outer_add_index, outer_begin, outer_decide,
)
from .meter import Meter, Verdict, as_source, bits_for, byte_len
from .support import SupportSearch

OPENERS = "(["
CLOSERS = ")]"
_PARTNER = {")": "(", "]": "["}


class TooManyErrors(RuntimeError):
    pass


class StackEmpty(RuntimeError):
    pass


class StreamOverflow(RuntimeError):
    pass


def default_block_len(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n * math.log2(n)))) if n > 1 else 1


@dataclass(frozen=True)
class DyckConfig:
    n: int
    k: int
    c: int = 2
    block_len: Optional[int] = None
    ctx: Optional[FieldCtx] = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.block_len is None:
            object.__setattr__(self, "block_len", default_block_len(self.n))
        if self.block_len < 1:
            raise ValueError("block_len must be at least 1")
        if self.ctx is None:
            object.__setattr__(self, "ctx", field_for(fp_width(max(self.n, 1), self.k, self.c)))

    @property
    def n_blocks(self) -> int:
        return -(-self.n // self.block_len) if self.n else 0


# ------------------------------------------------------------ block level

def _reduce(block):
    """Local matching. Returns (mismatches, closers, openers, peak stack depth);
    closers and openers are lists of (offset, symbol)."""
    stack: list = []
    closers: list = []
    err = 0
    peak = 0
    for off, ch in enumerate(block):
        if ch in OPENERS:
            stack.append((off, ch))
            if len(stack) > peak:
                peak = len(stack)
        elif ch in CLOSERS:
            if stack:
                _, top = stack.pop()
                if top != _PARTNER[ch]:
                    err += 1
            else:
                closers.append((off, ch))
        else:
            raise ValueError(f"unexpected symbol {ch!r}")
    return err, closers, stack, peak


def block_reduce(block, k_remaining: int):
    """(mismatches, u, v) for one block; TooManyErrors if mismatches > k_remaining."""
    err, closers, openers, _ = _reduce(block)
    if err > k_remaining:
        raise TooManyErrors(f"{err} mismatched pairs inside a block, budget {k_remaining}")
    return err, "".join(c for _, c in closers), "".join(c for _, c in openers)


# ----------------------------------------------------------------- state

@dataclass
class DyckState:
    alpha: int
    sum: int = 0
    c_open: int = 0
    err: int = 0
    stack: list = field(default_factory=list)  # [m, m'] intervals, top at the end
    pos: int = 0
    buffer: list = field(default_factory=list)
    open_pow: int = 1  # alpha^c_open
    pushes: int = 0
    max_depth: int = 0
    halted: Optional[str] = None
    meter: Meter = field(default_factory=Meter)
    trace: Optional[list] = None  # (stream position, symbol, index) when enabled
    listener: Optional[object] = None  # called with each index of a '[' or ']'


def _live_bytes(cfg: DyckConfig, st: DyckState, local_peak: int = 0) -> int:
    idx_bytes = byte_len(bits_for(cfg.n))
    fields = 4 * cfg.ctx.nbytes  # alpha, sum, alpha^c_open, scratch power
    counters = 3 * idx_bytes  # c_open, Err, position
    block = byte_len(2 * cfg.block_len) + byte_len(local_peak)
    stack = 2 * idx_bytes * len(st.stack)
    return fields + counters + block + stack


def dyck_begin(cfg: DyckConfig, rng_bits=None, alpha: Optional[int] = None,
               trace: bool = False) -> DyckState:
    meter = Meter()
    if alpha is None:
        alpha = cfg.ctx.random_elem(as_source(rng_bits), meter)
    st = DyckState(alpha, meter=meter, trace=[] if trace else None)
    meter.observe(_live_bytes(cfg, st))
    return st


def consume_closers(cfg: DyckConfig, st: DyckState, u, positions: Optional[List[int]] = None) -> DyckState:
    """Match a run of closers against the interval stack, most recent index first."""
    if not u:
        return st
    ctx = cfg.ctx
    cur = None
    for j, ch in enumerate(u):
        if cur is None:
            if not st.stack:
                raise StackEmpty("closing bracket with no open bracket left")
            cur = st.stack.pop()
        m, mp = cur
        if ch == "]":
            st.sum ^= ctx.pow(st.alpha, mp)
            if st.listener is not None:
                st.listener(mp)
        if st.trace is not None:
            st.trace.append((positions[j] if positions else None, ch, mp))
        mp -= 1
        cur = None if mp < m else [m, mp]
    if cur is not None:
        st.stack.append(cur)
    return st


def consume_openers(cfg: DyckConfig, st: DyckState, v, positions: Optional[List[int]] = None) -> DyckState:
    """Give a run of openers the next indices and push their interval."""
    if not v:
        return st
    ctx = cfg.ctx
    first = st.c_open + 1
    p = st.open_pow
    for j, ch in enumerate(v):
        p = ctx.mul(p, st.alpha)
        idx = first + j
        if ch == "[":
            st.sum ^= p
            if st.listener is not None:
                st.listener(idx)
        if st.trace is not None:
            st.trace.append((positions[j] if positions else None, ch, idx))
    st.open_pow = p
    st.c_open += len(v)
    st.stack.append([first, st.c_open])
    st.pushes += 1
    st.max_depth = max(st.max_depth, len(st.stack))
    return st


def _process_block(cfg: DyckConfig, st: DyckState) -> None:
    block = st.buffer
    base = st.pos - len(block)
    err, closers, openers, peak = _reduce(block)
    st.meter.observe(_live_bytes(cfg, st, peak))
    st.buffer = []
    if err > cfg.k - st.err:
        raise TooManyErrors(f"{st.err + err} mismatched pairs exceed k={cfg.k}")
    st.err += err
    consume_closers(cfg, st, [c for _, c in closers], [base + o for o, _ in closers])
    consume_openers(cfg, st, [c for _, c in openers], [base + o for o, _ in openers])
    st.meter.observe(_live_bytes(cfg, st))


def dyck_push(cfg: DyckConfig, st: DyckState, sym: str) -> DyckState:
    """Consume one symbol. Rejections halt the state instead of raising."""
    if st.pos >= cfg.n:
        raise StreamOverflow(f"stream already holds {cfg.n} symbols")
    if sym not in "()[]":
        raise ValueError(f"unexpected symbol {sym!r}")
    st.pos += 1
    st.meter.items = st.pos
    if st.halted:
        return st
    st.buffer.append(sym)
    if len(st.buffer) == cfg.block_len or st.pos == cfg.n:
        try:
            _process_block(cfg, st)
        except TooManyErrors:
            st.halted = "too many errors"
        except StackEmpty:
            st.halted = "mismatched parentheses"
    return st


def dyck_feed(cfg: DyckConfig, st: DyckState, symbols: Iterable[str]) -> DyckState:
    for s in symbols:
        dyck_push(cfg, st, s)
    return st


def dyck_decide(cfg: DyckConfig, st: DyckState, budget: Optional[int] = None) -> Verdict:
    """Accept iff the shape closed and sum is a sum of at most k - Err powers alpha^i, 1 <= i <= c_open.

    The support is reported as 1-based opener indices of the mismatched pairs.
    """
    meter = st.meter
    if st.pos != cfg.n:
        from .ham_fingerprint import StreamIncomplete
        raise StreamIncomplete(f"consumed {st.pos} of {cfg.n} symbols")
    if st.halted:
        return Verdict(False, None, meter, err_count=st.err, reason=st.halted)
    if st.stack:
        return Verdict(False, None, meter, err_count=st.err, reason="unmatched parentheses")
    if st.sum == 0:
        meter.postprocess_steps += 1
        return Verdict(True, (), meter, err_count=st.err)
    ctx = cfg.ctx
    vals = [0] * st.c_open
    p = 1
    for i in range(st.c_open):
        p = ctx.mul(p, st.alpha)
        vals[i] = p
    hit, steps = SupportSearch(vals, ctx.ell).find(st.sum, cfg.k - st.err, budget=budget)
    meter.postprocess_steps += steps
    if hit is None:
        return Verdict(False, None, meter, err_count=st.err, reason="fingerprint mismatch")
    return Verdict(True, tuple(i + 1 for i in hit), meter, err_count=st.err)


def dyck_run(w, k: int, rng_bits=None, c: int = 2, block_len: Optional[int] = None,
             alpha: Optional[int] = None, ctx: Optional[FieldCtx] = None,
             budget: Optional[int] = None) -> Verdict:
    cfg = DyckConfig(len(w), k, c, block_len, ctx)
    st = dyck_begin(cfg, rng_bits, alpha)
    dyck_feed(cfg, st, w)
    return dyck_decide(cfg, st, budget)


def opener_indices(w, block_len: int) -> dict:
    """Stream position -> index for every symbol that receives one (testing aid)."""
    cfg = DyckConfig(len(w), len(w), block_len=block_len, ctx=field_for(8))
    st = dyck_begin(cfg, alpha=1, trace=True)
    dyck_feed(cfg, st, w)
    if st.halted:
        raise StackEmpty(st.halted)
    return {p: idx for p, _, idx in st.trace}


# ------------------------------------------------- hashed-index variant

class DyckLite:
    """Index machinery as above, with index events fed to the inner/outer tests.

    Each '[' or ']' toggles its index in an XOR representation over [1..n]; the
    inner test checks that the toggled set has weight <= k - Err, the outer test
    checks the usual distance gap. For k <= 3 the fingerprint variant is used.
    """

    def __init__(self, n: int, k: int, rng_bits, gamma: float = DEFAULT_GAMMA,
                 epsilon: float = DEFAULT_EPSILON, c: int = 2, block_len: Optional[int] = None,
                 **overrides):
        src = as_source(rng_bits)
        self.cfg = DyckConfig(n, k, c, block_len)
        self.fallback = k <= FALLBACK_K
        if self.fallback:
            self.state = dyck_begin(self.cfg, src)
            return
        inner_keys = {"delta", "c_u", "K1", "K2", "u", "ell2"}
        domain = n + 1
        self.inner_cfg = InnerConfig(domain, k, gamma, epsilon,
                                     **{a: b for a, b in overrides.items() if a in inner_keys})
        self.outer_cfg = OuterConfig(domain, k, gamma,
                                     **{a: b for a, b in overrides.items() if a not in inner_keys})
        self.inner = inner_begin(self.inner_cfg, src, domain)
        self.outer = outer_begin(self.outer_cfg, src, domain)
        # alpha is unused here: only the index bookkeeping of DyckState runs
        self.state = DyckState(alpha=0)
        self.state.listener = self._on_index

    def _on_index(self, idx: int) -> None:
        inner_add_index(self.inner_cfg, self.inner, idx)
        outer_add_index(self.outer_cfg, self.outer, idx)

    def feed(self, symbols: Iterable[str]) -> "DyckLite":
        for s in symbols:
            dyck_push(self.cfg, self.state, s)
        return self

    def meter(self) -> Meter:
        if self.fallback:
            return self.state.meter
        m = Meter()
        m.randomness_bits = self.inner.meter.randomness_bits + self.outer.meter.randomness_bits
        m.max_live_bytes = (self.state.meter.max_live_bytes - 4 * self.cfg.ctx.nbytes
                            + self.inner.live_bytes(self.inner_cfg)
                            + self.outer.live_bytes(self.outer_cfg))
        m.items = self.state.pos
        return m

    def decide(self) -> Verdict:
        st = self.state
        if self.fallback:
            v = dyck_decide(self.cfg, st)
            v.details["fallback"] = "fingerprint"
            return v
        if st.pos != self.cfg.n:
            from .ham_fingerprint import StreamIncomplete
            raise StreamIncomplete(f"consumed {st.pos} of {self.cfg.n} symbols")
        m = self.meter()
        if st.halted or st.stack:
            reason = st.halted or "unmatched parentheses"
            return Verdict(False, None, m, err_count=st.err, reason=reason)
        ind = inner_decide(self.inner_cfg, self.inner, budget=self.cfg.k - st.err)
        outd = outer_decide(self.outer_cfg, self.outer)
        m.postprocess_steps = ind.steps
        details = {
            "inner_accept": ind.accepted, "inner_F": ind.F, "inner_F_exact": ind.exact,
            "outer_accept": outd.accepted, "outer_ones": outd.ones, "outer_tau": round(outd.tau, 6),
        }
        return Verdict(ind.accepted and outd.accepted, None, m, err_count=st.err, details=details)
