"""Arithmetic in GF(2^l) for 1 <= l <= 256.

Elements are plain Python ints below 2**l, read as GF(2) polynomials (bit i is the
coefficient of x^i). Addition is XOR. Multiplication is a carry-less product
followed by reduction modulo a fixed irreducible polynomial from ``_TAILS``.

Fields up to 22 bits also build log/exp tables, which makes ``mul`` fast and lets
it work elementwise on numpy integer arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .meter import BitSource, Meter, as_source


class RequestTooLarge(ValueError):
    pass


# Low-weight irreducible polynomials: x^l + sum(x^e for e in tail) + 1.
# A trinomial with the smallest middle exponent when one exists, otherwise the
# lexicographically smallest pentanomial. Irreducibility is re-checked in tests.
_TAILS: dict[int, tuple[int, ...]] = {
    1: (), 2: (1,), 3: (1,), 4: (1,), 5: (2,), 6: (1,), 7: (1,), 8: (4, 3, 1),
    9: (1,), 10: (3,), 11: (2,), 12: (3,), 13: (4, 3, 1), 14: (5,), 15: (1,), 16: (5, 3, 1),
    17: (3,), 18: (3,), 19: (5, 2, 1), 20: (3,), 21: (2,), 22: (1,), 23: (5,), 24: (4, 3, 1),
    25: (3,), 26: (4, 3, 1), 27: (5, 2, 1), 28: (1,), 29: (2,), 30: (1,), 31: (3,), 32: (7, 3, 2),
    33: (10,), 34: (7,), 35: (2,), 36: (9,), 37: (6, 4, 1), 38: (6, 5, 1), 39: (4,), 40: (5, 4, 3),
    41: (3,), 42: (7,), 43: (6, 4, 3), 44: (5,), 45: (4, 3, 1), 46: (1,), 47: (5,), 48: (5, 3, 2),
    49: (9,), 50: (4, 3, 2), 51: (6, 3, 1), 52: (3,), 53: (6, 2, 1), 54: (9,), 55: (7,), 56: (7, 4, 2),
    57: (4,), 58: (19,), 59: (7, 4, 2), 60: (1,), 61: (5, 2, 1), 62: (29,), 63: (1,), 64: (4, 3, 1),
    96: (10, 9, 6), 128: (7, 2, 1), 192: (7, 2, 1), 256: (10, 5, 2),
}

SUPPORTED_WIDTHS: tuple[int, ...] = tuple(range(8, 65)) + (96, 128, 192, 256)
TABLE_LIMIT = 22  # build log/exp tables up to this width

# carry-less multiply: spread bits into byte (or 16-bit) slots, use integer
# multiplication, then read back the parity of every slot
_SPREAD8 = str.maketrans({"0": "\x00", "1": "\x01"})
_SPREAD16 = str.maketrans({"0": "\x00\x00", "1": "\x00\x01"})
_PARITY = bytes(48 + (v & 1) for v in range(256))


def _spread_nibble(v: int) -> int:
    return (v & 1) | ((v & 2) << 1) | ((v & 4) << 2) | ((v & 8) << 3)


# squaring interleaves zeros: each byte expands to two bytes via these tables
_SQ_HI = bytes(_spread_nibble(b >> 4) for b in range(256))
_SQ_LO = bytes(_spread_nibble(b & 15) for b in range(256))


def clmul(a: int, b: int) -> int:
    """Carry-less product of two non-negative ints."""
    if a < 2 or b < 2:
        return a * b
    if min(a.bit_length(), b.bit_length()) < 256:
        A = int.from_bytes(bin(a)[2:].translate(_SPREAD8).encode("latin-1"), "big")
        B = int.from_bytes(bin(b)[2:].translate(_SPREAD8).encode("latin-1"), "big")
        P = A * B
        return int(P.to_bytes((P.bit_length() + 7) // 8, "big").translate(_PARITY), 2)
    A = int.from_bytes(bin(a)[2:].translate(_SPREAD16).encode("latin-1"), "big")
    B = int.from_bytes(bin(b)[2:].translate(_SPREAD16).encode("latin-1"), "big")
    P = A * B
    nb = (P.bit_length() + 15) // 16 * 2
    return int(P.to_bytes(nb, "big")[1::2].translate(_PARITY), 2)


def clsquare(a: int) -> int:
    if a < 2:
        return a
    n = (a.bit_length() + 7) // 8
    raw = a.to_bytes(n, "big")
    out = bytearray(2 * n)
    out[0::2] = raw.translate(_SQ_HI)
    out[1::2] = raw.translate(_SQ_LO)
    return int.from_bytes(out, "big")


def _make_reducer(ell: int, tail: tuple):
    """Unrolled reduction modulo x^ell + sum(x^e for e in tail)."""
    fold = " ^ ".join("hi" if e == 0 else f"(hi << {e})" for e in tail) or "0"
    mask = (1 << ell) - 1
    src = (
        "def red(p):\n"
        f"    hi = p >> {ell}\n"
        "    while hi:\n"
        f"        p = (p & {mask}) ^ {fold}\n"
        f"        hi = p >> {ell}\n"
        "    return p\n"
    )
    ns: dict = {}
    exec(src, ns)
    return ns["red"]


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class FieldCtx:
    """GF(2^ell) defined by ``modulus`` (an int with bit ell set)."""

    ell: int
    modulus: int
    _tail: tuple = field(default=(), repr=False, compare=False)
    _mask: int = field(default=0, repr=False, compare=False)
    _red: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.modulus >> self.ell != 1:
            raise ValueError("modulus must have degree exactly ell")
        low = self.modulus ^ (1 << self.ell)
        tail = tuple(i for i in range(self.ell) if (low >> i) & 1)
        object.__setattr__(self, "_tail", tail)
        object.__setattr__(self, "_mask", (1 << self.ell) - 1)
        object.__setattr__(self, "_red", _make_reducer(self.ell, tail))

    @property
    def order(self) -> int:
        return 1 << self.ell

    @property
    def nbytes(self) -> int:
        return (self.ell + 7) // 8

    @property
    def has_tables(self) -> bool:
        return self.ell <= TABLE_LIMIT

    # reduction of a polynomial of any degree
    def reduce(self, p: int) -> int:
        return self._red(p)

    def mul_generic(self, a: int, b: int) -> int:
        """Table-free multiply; also the reference the table path is checked against."""
        return self._red(clmul(a, b))

    def square_generic(self, a: int) -> int:
        return self._red(clsquare(a))

    def mul(self, a, b):
        if self.ell <= TABLE_LIMIT:
            t = _tables(self.ell, self.modulus)
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                return t.mul_array(a, b)
            if a == 0 or b == 0:
                return 0
            return t.exp[t.log[a] + t.log[b]]
        return self._red(clmul(a, b))

    def pow(self, a, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        if self.ell <= TABLE_LIMIT:
            t = _tables(self.ell, self.modulus)
            if isinstance(a, np.ndarray):
                return t.pow_array(a, e)
            if e == 0:
                return 1
            if a == 0:
                return 0
            return t.exp[(t.log[a] * e) % t.period]
        return self.pow_generic(a, e)

    def pow_generic(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a < 2:
            return a
        red = self._red
        frombytes = int.from_bytes
        # spread form of the base is reused by every multiply step
        A = frombytes(bin(a)[2:].translate(_SPREAD8).encode("latin-1"), "big")
        wide = self.ell >= 256
        r = a
        for bit in bin(e)[3:]:
            nb = (r.bit_length() + 7) // 8
            raw = r.to_bytes(nb, "big")
            out = bytearray(2 * nb)
            out[0::2] = raw.translate(_SQ_HI)
            out[1::2] = raw.translate(_SQ_LO)
            r = red(frombytes(out, "big"))
            if bit == "1":
                if wide:
                    r = red(clmul(r, a))
                elif r > 1:
                    P = frombytes(bin(r)[2:].translate(_SPREAD8).encode("latin-1"), "big") * A
                    r = red(int(P.to_bytes((P.bit_length() + 7) // 8, "big").translate(_PARITY), 2))
                else:
                    r = a if r else 0
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.pow(a, self.order - 2)

    def random_elem(self, bits, meter: Optional[Meter] = None) -> int:
        src = as_source(bits)
        v = src.take(self.ell)
        if meter is not None:
            meter.randomness_bits += self.ell
        return v


class _Tables:
    """log/exp tables for a small field, both as Python lists and numpy arrays."""

    def __init__(self, ctx: FieldCtx):
        ell = ctx.ell
        self.period = (1 << ell) - 1
        self.generator = _find_generator(ctx)
        g = self.generator
        dtype = np.uint32
        exp = np.zeros(2 * self.period + 1, dtype=dtype)
        log = np.zeros(1 << ell, dtype=np.int64)
        # powers of g by doubling: exp[L:2L] = exp[0:L] * g^L
        arr = np.ones(1, dtype=np.int64)
        gl = g
        while len(arr) < self.period:
            arr = np.concatenate([arr, _vec_mul_const(ctx, arr, gl)])
            gl = ctx.mul_generic(gl, gl)
        arr = arr[: self.period].astype(dtype)
        period = self.period
        exp[:period] = arr
        exp[period:2 * period] = arr
        exp[2 * period] = arr[0]
        log[arr] = np.arange(period, dtype=np.int64)
        log[0] = 0
        self.exp_np = exp
        self.log_np = log
        if ell <= 16:
            self.exp = exp.tolist()
            self.log = log.tolist()
        else:
            self.exp = exp
            self.log = log

    def mul_array(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        r = self.exp_np[self.log_np[a] + self.log_np[b]].astype(np.int64)
        return np.where((a == 0) | (b == 0), 0, r)

    def pow_array(self, a, e: int):
        a = np.asarray(a)
        if e == 0:
            return np.ones_like(a, dtype=np.int64)
        r = self.exp_np[(self.log_np[a] * (e % self.period)) % self.period].astype(np.int64)
        return np.where(a == 0, 0, r)


def _vec_mul_const(ctx: FieldCtx, arr, c: int):
    w = np.zeros_like(arr)
    for s in range(c.bit_length()):
        if (c >> s) & 1:
            w ^= arr << s
    mask = ctx._mask
    hi = w >> ctx.ell
    while hi.any():
        w &= mask
        for e in ctx._tail:
            w ^= hi << e
        hi = w >> ctx.ell
    return w


def _find_generator(ctx: FieldCtx) -> int:
    period = (1 << ctx.ell) - 1
    if period == 1:
        return 1
    factors = _prime_factors(period)
    for g in range(2, 1 << ctx.ell):
        if all(ctx.pow_generic(g, period // p) != 1 for p in factors):
            return g
    raise ArithmeticError("no generator found; modulus is not irreducible")


@lru_cache(maxsize=None)
def _tables(ell: int, modulus: int) -> _Tables:
    return _Tables(FieldCtx(ell, modulus))


def modulus_for(ell: int) -> int:
    if ell not in _TAILS:
        raise RequestTooLarge(f"no table modulus for width {ell}")
    m = (1 << ell) | 1
    for e in _TAILS[ell]:
        m |= 1 << e
    if ell == 1:
        m = 0b11
    return m


@lru_cache(maxsize=None)
def exact_field(ell: int) -> FieldCtx:
    """Field of exactly ``ell`` bits (any width with a table modulus, 1..64 and the large ones)."""
    if ell < 1:
        raise ValueError("field width must be positive")
    if ell > 256:
        raise RequestTooLarge(f"requested {ell} bits, max is 256")
    return FieldCtx(ell, modulus_for(ell))


def field_for(ell_requested: int) -> FieldCtx:
    """Smallest supported field of at least ``ell_requested`` bits (never below 8)."""
    if ell_requested > 256:
        raise RequestTooLarge(f"requested {ell_requested} bits, max is 256")
    if ell_requested < 1:
        raise ValueError("field width must be positive")
    for w in SUPPORTED_WIDTHS:
        if w >= ell_requested:
            return exact_field(w)
    raise RequestTooLarge(f"requested {ell_requested} bits")


def add(a, b):
    return a ^ b


def mul(ctx: FieldCtx, a, b):
    return ctx.mul(a, b)


def power(ctx: FieldCtx, a, e: int):
    return ctx.pow(a, e)


def random_elem(ctx: FieldCtx, rng_bits, meter: Optional[Meter] = None) -> int:
    return ctx.random_elem(rng_bits, meter)


def warm_tables(ctx: FieldCtx) -> None:
    """Build lookup tables now rather than on first use."""
    if ctx.has_tables:
        _tables(ctx.ell, ctx.modulus)


def elem_bytes(ctx: FieldCtx) -> int:
    return ctx.nbytes


__all__ = [
    "FieldCtx", "RequestTooLarge", "SUPPORTED_WIDTHS", "add", "mul", "power", "random_elem",
    "field_for", "exact_field", "clmul", "modulus_for", "BitSource",
]
