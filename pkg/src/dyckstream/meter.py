"""Random bit sources, resource meters and verdicts shared by every algorithm."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Optional


class SourceExhausted(Exception):
    """A finite bit source ran out before a draw completed."""


def split_seed(master: int, label: str) -> int:
    """Derive a 64-bit child seed from a master seed and a text label.

    child = first 8 bytes (big endian) of BLAKE2b-256("dyckstream/split" | master | label).
    """
    h = hashlib.blake2b(digest_size=32, person=b"dyckstream/split")
    h.update(str(int(master)).encode())
    h.update(b"\x00")
    h.update(label.encode())
    return int.from_bytes(h.digest()[:8], "big")


class BitSource:
    """Stream of random bits drawn most-significant-bit first.

    Seeded sources expand (seed, label) with BLAKE2b in counter mode, one 512-bit
    block per counter value. Finite sources replay an explicit bit string and raise
    SourceExhausted once it is used up. ``consumed`` counts every bit handed out.
    """

    _BLOCK = 512

    def __init__(self, seed: Optional[int] = None, label: str = "", bits: Optional[str] = None):
        self.seed = seed
        self.label = label
        self._finite = bits
        self._buf = 0
        self._nbuf = 0
        self._counter = 0
        self.consumed = 0
        if bits is not None:
            clean = "".join(ch for ch in bits if ch in "01")
            self._buf = int(clean, 2) if clean else 0
            self._nbuf = len(clean)
        elif seed is None:
            raise ValueError("BitSource needs a seed or explicit bits")

    @classmethod
    def from_seed(cls, seed: int, label: str = "") -> "BitSource":
        return cls(seed=seed, label=label)

    @classmethod
    def from_bits(cls, bits) -> "BitSource":
        if not isinstance(bits, str):
            bits = "".join("1" if b else "0" for b in bits)
        return cls(bits=bits)

    def _refill(self) -> None:
        h = hashlib.blake2b(digest_size=64, person=b"dyckstream/bits")
        h.update(str(int(self.seed)).encode())
        h.update(b"\x00")
        h.update(self.label.encode())
        h.update(b"\x00")
        h.update(self._counter.to_bytes(8, "big"))
        self._counter += 1
        self._buf = (self._buf << self._BLOCK) | int.from_bytes(h.digest(), "big")
        self._nbuf += self._BLOCK

    def take(self, nbits: int) -> int:
        """Return the next ``nbits`` bits as an integer (first bit is the MSB)."""
        if nbits < 0:
            raise ValueError("negative bit count")
        if nbits == 0:
            return 0
        while self._nbuf < nbits:
            if self._finite is not None:
                raise SourceExhausted(f"needed {nbits} bits, {self._nbuf} left")
            self._refill()
        rest = self._nbuf - nbits
        out = self._buf >> rest
        self._buf &= (1 << rest) - 1
        self._nbuf = rest
        self.consumed += nbits
        return out

    def take_bit(self) -> int:
        return self.take(1)

    def remaining(self) -> Optional[int]:
        return self._nbuf if self._finite is not None else None


def as_source(bits) -> BitSource:
    """Accept a BitSource, an int seed, or an explicit bit sequence."""
    if isinstance(bits, BitSource):
        return bits
    if isinstance(bits, int) and not isinstance(bits, bool):
        return BitSource.from_seed(bits)
    return BitSource.from_bits(bits)


@dataclass
class Meter:
    randomness_bits: int = 0
    max_live_bytes: int = 0
    items: int = 0
    postprocess_steps: int = 0

    def observe(self, live_bytes: int) -> None:
        if live_bytes > self.max_live_bytes:
            self.max_live_bytes = live_bytes

    def absorb(self, other: "Meter") -> None:
        """Fold another meter in as if both ran side by side."""
        self.randomness_bits += other.randomness_bits
        self.max_live_bytes += other.max_live_bytes
        self.items = max(self.items, other.items)
        self.postprocess_steps += other.postprocess_steps

    def to_dict(self) -> dict:
        return {
            "randomness_bits": self.randomness_bits,
            "max_live_bytes": self.max_live_bytes,
            "items": self.items,
            "postprocess_steps": self.postprocess_steps,
        }


@dataclass
class Verdict:
    accepted: bool
    support: Optional[tuple] = None
    meter: Meter = field(default_factory=Meter)
    err_count: Optional[int] = None
    reason: Optional[str] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"verdict": "accept" if self.accepted else "reject"}
        if self.support is not None:
            out["support"] = list(self.support)
        if self.err_count is not None:
            out["err_count"] = self.err_count
        if self.reason is not None:
            out["reason"] = self.reason
        out["meter"] = self.meter.to_dict()
        if self.details:
            out["details"] = self.details
        return out


def byte_len(nbits: int) -> int:
    return (max(int(nbits), 1) + 7) // 8


def bits_for(value: int) -> int:
    """Bits needed to store any integer in [0, value]."""
    return max(int(value), 1).bit_length()


def pack_bits(bits: Iterable[int]) -> str:
    return "".join("1" if b else "0" for b in bits)
