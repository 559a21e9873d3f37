"""Limited-independence hashing, small-bias bit generators and the AND-of-bits sampler.

Every object here is a small immutable seed plus pure evaluation functions; no
output string is ever stored. Seeds round-trip through ``seed_to_bytes`` and
``seed_from_bytes`` (layout in docs/seed_format.md).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .gf2e import FieldCtx, exact_field, field_for
from .meter import Meter, as_source, byte_len

SEED_FORMAT_VERSION = 1
DEFAULT_DELTA = 1 / 200
BLOCK2_SEED_CONST = 8  # block-2 seed bits <= this * log2(n) * log2(1/delta2)


class RangeNotPowerOfTwo(ValueError):
    pass


class IndexOutOfDomain(IndexError):
    pass


class IndexOutOfRange(IndexError):
    pass


def ceil_log2(x: int) -> int:
    x = int(x)
    return 0 if x <= 1 else (x - 1).bit_length()


def next_pow2(x: float) -> int:
    return 1 << ceil_log2(math.ceil(x))


def _field_of_width(s: int) -> FieldCtx:
    # exact widths are available up to 64 bits; beyond that round up
    return exact_field(s) if s <= 64 else field_for(s)


# ---------------------------------------------------------------- hashing

@dataclass(frozen=True)
class HashFamilySeed:
    """Polynomial of degree ell_wise-1 over GF(2^s), s = ceil(log2 max(n, m))."""

    ell_wise: int
    n_domain: int
    m_range: int
    coeffs: tuple

    @property
    def s(self) -> int:
        return max(1, ceil_log2(max(self.n_domain, self.m_range)))

    @property
    def ctx(self) -> FieldCtx:
        return _field_of_width(self.s)

    @property
    def seed_bits(self) -> int:
        return self.ctx.ell * self.ell_wise

    @property
    def out_bits(self) -> int:
        return ceil_log2(self.m_range)

    def __call__(self, i: int) -> int:
        return hash_eval(self, i)


def hash_family_new(ell_wise: int, n_domain: int, m_range: int, rng_bits,
                    meter: Optional[Meter] = None) -> HashFamilySeed:
    if m_range < 1 or m_range & (m_range - 1):
        raise RangeNotPowerOfTwo(f"range {m_range} is not a power of two")
    if ell_wise < 1:
        raise ValueError("ell_wise must be at least 1")
    if n_domain < 1:
        raise ValueError("domain must be non-empty")
    src = as_source(rng_bits)
    proto = HashFamilySeed(ell_wise, n_domain, m_range, ())
    w = proto.ctx.ell
    coeffs = tuple(src.take(w) for _ in range(ell_wise))
    if meter is not None:
        meter.randomness_bits += w * ell_wise
    return HashFamilySeed(ell_wise, n_domain, m_range, coeffs)


def hash_eval(seed: HashFamilySeed, i: int) -> int:
    if not 0 <= i < seed.n_domain:
        raise IndexOutOfDomain(f"index {i} outside [0, {seed.n_domain})")
    ctx = seed.ctx
    acc = 0
    for c in reversed(seed.coeffs):
        acc = ctx.mul(acc, i) ^ c
    return acc & (seed.m_range - 1)


def hash_eval_many(seed: HashFamilySeed, idx) -> np.ndarray:
    """Vectorized ``hash_eval`` over an array of indices."""
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= seed.n_domain):
        raise IndexOutOfDomain("index outside the domain")
    ctx = seed.ctx
    if ctx.has_tables:
        acc = np.zeros_like(idx)
        for c in reversed(seed.coeffs):
            acc = ctx.mul(acc, idx) ^ c
        return acc & (seed.m_range - 1)
    return np.array([hash_eval(seed, int(i)) for i in idx], dtype=np.int64)


# ------------------------------------------------------------- small bias

@dataclass(frozen=True)
class BiasedSeed:
    """Linear-feedback generator: bit i is the constant coefficient of start * taps^i.

    The register ``start * taps^i`` is clocked by one field multiplication per
    step. For any nonzero test vector w the parity sum_i w_i bit_i equals a
    uniformly random linear functional applied to p_w(taps), a polynomial of
    degree < m_len, so the bias is at most (m_len - 1) / 2^(s+1).
    """

    m_len: int
    delta: float
    s: int
    lfsr_start: int
    lfsr_taps: int

    @property
    def ctx(self) -> FieldCtx:
        return _field_of_width(self.s)

    @property
    def seed_bits(self) -> int:
        return 2 * self.ctx.ell

    def __call__(self, i: int) -> int:
        return biased_bit(self, i)


def biased_width(m_len: int, log2_inv_delta: float) -> int:
    """Register width s with (m_len - 1) / 2^(s+1) <= delta."""
    if m_len <= 1:
        return 1
    return max(1, math.ceil(math.log2(m_len - 1) - 1 + log2_inv_delta - 1e-12))


def biased_seed_new(m_len: int, delta: float, rng_bits, meter: Optional[Meter] = None,
                    log2_inv_delta: Optional[float] = None) -> BiasedSeed:
    if m_len < 1:
        raise ValueError("output length must be positive")
    if log2_inv_delta is None:
        if not 0 < delta < 1:
            raise ValueError("bias must lie in (0, 1)")
        log2_inv_delta = -math.log2(delta)
    s = biased_width(m_len, log2_inv_delta)
    ctx = _field_of_width(s)
    src = as_source(rng_bits)
    start = src.take(ctx.ell)
    taps = src.take(ctx.ell)
    if meter is not None:
        meter.randomness_bits += 2 * ctx.ell
    return BiasedSeed(m_len, delta, s, start, taps)


def biased_bit(seed: BiasedSeed, i: int, meter: Optional[Meter] = None) -> int:
    if not 0 <= i < seed.m_len:
        raise IndexOutOfRange(f"index {i} outside [0, {seed.m_len})")
    ctx = seed.ctx
    if meter is not None:
        # start, taps, running power, exponent counter
        meter.observe(3 * ctx.nbytes + byte_len(i.bit_length()))
    return ctx.mul(seed.lfsr_start, ctx.pow(seed.lfsr_taps, i)) & 1


def biased_bits(seed: BiasedSeed, i0: int, count: int):
    """Bits i0 .. i0+count-1, clocking the register one step at a time."""
    if count <= 0:
        return
    if not (0 <= i0 and i0 + count <= seed.m_len):
        raise IndexOutOfRange("range outside the output")
    ctx = seed.ctx
    state = ctx.mul(seed.lfsr_start, ctx.pow(seed.lfsr_taps, i0))
    for _ in range(count):
        yield state & 1
        state = ctx.mul(state, seed.lfsr_taps)


def biased_bits_many(seed: BiasedSeed, idx) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    ctx = seed.ctx
    if ctx.has_tables:
        return ctx.mul(_pow_many(ctx, seed.lfsr_taps, idx), seed.lfsr_start) & 1
    return np.array([biased_bit(seed, int(i)) for i in idx], dtype=np.int64)


def _pow_many(ctx: FieldCtx, a: int, idx: np.ndarray) -> np.ndarray:
    from .gf2e import _tables
    t = _tables(ctx.ell, ctx.modulus)
    if a == 0:
        return np.where(idx == 0, 1, 0).astype(np.int64)
    return t.exp_np[(t.log[a] * idx) % t.period].astype(np.int64)


# ------------------------------------------------------ AND-of-bits sampler

@dataclass(frozen=True)
class YaoSampleSeed:
    """z_i = AND of one block-1 bit and t-1 block-2 bits; Pr[z_i = 1] is about 1/(4k)."""

    n_len: int
    k: int
    t: int
    delta1: float
    delta2: float
    dprime_exp: int
    seed_block1: BiasedSeed
    seed_block2: BiasedSeed

    @property
    def seed_bits(self) -> int:
        return self.seed_block1.seed_bits + self.seed_block2.seed_bits

    @property
    def k_pow2(self) -> int:
        return 1 << (self.t - 2)

    def __call__(self, i: int) -> int:
        return yao_sample_bit(self, i)


def yao_t(k: int) -> int:
    """t with 2^t = 4k, k rounded up to a power of two."""
    return ceil_log2(max(1, k)) + 2


def block2_bound(n: int, delta2: float, c: int = BLOCK2_SEED_CONST) -> float:
    return c * max(1.0, math.log2(max(n, 2))) * math.log2(1 / delta2)


def yao_seed_new(n: int, k: int, delta1: float = DEFAULT_DELTA, delta2: float = DEFAULT_DELTA,
                 rng_bits=None, meter: Optional[Meter] = None,
                 dprime_exp: Optional[int] = None) -> YaoSampleSeed:
    if k < 1:
        raise ValueError("k must be at least 1")
    if not (0 < delta1 < 1 and 0 < delta2 < 1):
        raise ValueError("biases must lie in (0, 1)")
    t = yao_t(k)
    if dprime_exp is None:
        dprime_exp = math.ceil(math.log2(1 / delta2) - 1e-12)
    src = as_source(rng_bits)
    b1 = biased_seed_new(n, delta1, src, meter)
    # delta' = (n t)^(-dprime_exp), kept in log form since it underflows quickly
    log2_inv = dprime_exp * math.log2(n * t)
    m2 = n * (t - 1)
    b2 = biased_seed_new(m2, 2.0 ** -log2_inv, src, meter, log2_inv_delta=log2_inv)
    if k <= n:
        assert b2.seed_bits <= block2_bound(n, delta2), "block-2 seed exceeds its length budget"
    return YaoSampleSeed(n, k, t, delta1, delta2, dprime_exp, b1, b2)


def yao_sample_bit(seed: YaoSampleSeed, i: int, meter: Optional[Meter] = None) -> int:
    if not 0 <= i < seed.n_len:
        raise IndexOutOfRange(f"index {i} outside [0, {seed.n_len})")
    b1 = seed.seed_block1
    c1 = b1.ctx
    if meter is not None:
        meter.observe(3 * c1.nbytes + 3 * seed.seed_block2.ctx.nbytes + byte_len(i.bit_length() + 3))
    if not c1.mul(b1.lfsr_start, c1.pow(b1.lfsr_taps, i)) & 1:
        return 0
    b2 = seed.seed_block2
    c2 = b2.ctx
    tm1 = seed.t - 1
    state = c2.mul(b2.lfsr_start, c2.pow(b2.lfsr_taps, i * tm1))
    for _ in range(tm1):
        if not state & 1:
            return 0
        state = c2.mul(state, b2.lfsr_taps)
    return 1


def yao_sample_many(seed: YaoSampleSeed, idx) -> np.ndarray:
    """Vectorized sampler for a batch of indices (used in experiments)."""
    return np.array([yao_sample_bit(seed, int(i)) for i in np.asarray(idx)], dtype=np.int64)


# ----------------------------------------------------------- serialization

_TAG_HASH, _TAG_BIASED, _TAG_YAO = b"H", b"B", b"Y"


def _pack_elems(vals, width: int) -> bytes:
    acc = 0
    for v in vals:
        acc = (acc << width) | v
    nbits = width * len(vals)
    return struct.pack(">I", nbits) + acc.to_bytes((nbits + 7) // 8, "big")


def _unpack_elems(buf: bytes, off: int, width: int, count: int):
    (nbits,) = struct.unpack_from(">I", buf, off)
    off += 4
    nb = (nbits + 7) // 8
    if nbits != width * count:
        raise ValueError("seed bit count does not match its parameters")
    acc = int.from_bytes(buf[off:off + nb], "big")
    vals = [(acc >> (width * (count - 1 - j))) & ((1 << width) - 1) for j in range(count)]
    return vals, off + nb


def seed_to_bytes(seed: Union[HashFamilySeed, BiasedSeed, YaoSampleSeed]) -> bytes:
    v = bytes([SEED_FORMAT_VERSION])
    if isinstance(seed, HashFamilySeed):
        params = struct.pack(">IQQ", seed.ell_wise, seed.n_domain, seed.m_range)
        return _TAG_HASH + v + params + _pack_elems(seed.coeffs, seed.ctx.ell)
    if isinstance(seed, BiasedSeed):
        params = struct.pack(">QdH", seed.m_len, seed.delta, seed.s)
        return _TAG_BIASED + v + params + _pack_elems((seed.lfsr_start, seed.lfsr_taps), seed.ctx.ell)
    if isinstance(seed, YaoSampleSeed):
        params = struct.pack(">QIBddH", seed.n_len, seed.k, seed.t, seed.delta1, seed.delta2, seed.dprime_exp)
        b1 = seed_to_bytes(seed.seed_block1)
        b2 = seed_to_bytes(seed.seed_block2)
        return (_TAG_YAO + v + params + struct.pack(">I", len(b1)) + b1
                + struct.pack(">I", len(b2)) + b2)
    raise TypeError(f"cannot serialize {type(seed).__name__}")


def seed_from_bytes(buf: bytes):
    seed, off = _read_seed(bytes(buf), 0)
    if off != len(buf):
        raise ValueError("trailing bytes after seed")
    return seed


def _read_seed(buf: bytes, off: int):
    tag, ver = buf[off:off + 1], buf[off + 1]
    if ver != SEED_FORMAT_VERSION:
        raise ValueError(f"unsupported seed format version {ver}")
    off += 2
    if tag == _TAG_HASH:
        ell_wise, n, m = struct.unpack_from(">IQQ", buf, off)
        off += struct.calcsize(">IQQ")
        w = HashFamilySeed(ell_wise, n, m, ()).ctx.ell
        coeffs, off = _unpack_elems(buf, off, w, ell_wise)
        return HashFamilySeed(ell_wise, n, m, tuple(coeffs)), off
    if tag == _TAG_BIASED:
        m_len, delta, s = struct.unpack_from(">QdH", buf, off)
        off += struct.calcsize(">QdH")
        w = _field_of_width(s).ell
        (start, taps), off = _unpack_elems(buf, off, w, 2)
        return BiasedSeed(m_len, delta, s, start, taps), off
    if tag == _TAG_YAO:
        fmt = ">QIBddH"
        n, k, t, d1, d2, dexp = struct.unpack_from(fmt, buf, off)
        off += struct.calcsize(fmt)
        (l1,) = struct.unpack_from(">I", buf, off)
        b1, _ = _read_seed(buf[off + 4:off + 4 + l1], 0)
        off += 4 + l1
        (l2,) = struct.unpack_from(">I", buf, off)
        b2, _ = _read_seed(buf[off + 4:off + 4 + l2], 0)
        off += 4 + l2
        return YaoSampleSeed(n, k, t, d1, d2, dexp, b1, b2), off
    raise ValueError(f"unknown seed tag {tag!r}")
