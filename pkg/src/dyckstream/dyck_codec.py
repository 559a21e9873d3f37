"""Symbol-level reductions between bracket languages and Hamming pairs.

Two-type strings use the ASCII alphabet ``( ) [ ]``. Strings over l > 2 types use
tokens ``(i`` / ``)i`` with a decimal type id 1..l (whitespace between tokens is
ignored); bare ``(``/``)`` mean type 1 and bare ``[``/``]`` mean type 2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Tuple

OPENERS = "(["
CLOSERS = ")]"


class TypeOutOfRange(ValueError):
    pass


class WrongSideSymbol(ValueError):
    def __init__(self, position: int, symbol: str):
        super().__init__(f"symbol {symbol!r} on the wrong side at position {position}")
        self.position = position
        self.symbol = symbol


class OddLength(ValueError):
    pass


@dataclass(frozen=True)
class ParenSymbol:
    kind: str  # "open" or "close"
    type_id: int

    def __post_init__(self):
        if self.kind not in ("open", "close"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.type_id < 1:
            raise TypeOutOfRange(f"type id {self.type_id} must be >= 1")

    def token(self) -> str:
        return ("(" if self.kind == "open" else ")") + str(self.type_id)


@dataclass
class CodecOutcome:
    emitted: list
    rejected: bool = False
    reason: Optional[str] = None
    position: Optional[int] = None


def encode_l_to_2(sym: ParenSymbol, l: int) -> str:
    """Fixed-width image of one l-type symbol: the type is the position of the square bracket."""
    i = sym.type_id
    if not 1 <= i <= l:
        raise TypeOutOfRange(f"type id {i} outside 1..{l}")
    if sym.kind == "open":
        return "(" * (i - 1) + "[" + "(" * (l - i)
    return ")" * (l - i) + "]" + ")" * (i - 1)


def encode_stream_l_to_2(symbols: Iterable[ParenSymbol], l: int) -> Iterator[str]:
    for sym in symbols:
        yield from encode_l_to_2(sym, l)


_TOKEN = re.compile(r"\s*([()\[\]])(\d*)")


def parse_sigma_l(text: str) -> List[ParenSymbol]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad token at offset {pos}: {text[pos:pos + 8]!r}")
        ch, digits = m.group(1), m.group(2)
        kind = "open" if ch in OPENERS else "close"
        if digits:
            if ch in "[]":
                raise ValueError(f"typed token must use round brackets at offset {pos}")
            tid = int(digits)
        else:
            tid = 1 if ch in "()" else 2
        out.append(ParenSymbol(kind, tid))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def format_sigma_l(symbols: Iterable[ParenSymbol]) -> str:
    return " ".join(s.token() for s in symbols)


def one_turn_stream(symbols: Iterable[str], n: int) -> Iterator[int]:
    """Yield x_1..x_{n/2} then y_{n/2}..y_1 for a one-turn two-type string of length n.

    First half: '(' -> 0, '[' -> 1. Second half: ')' -> 0, ']' -> 1. A closer in
    the first half or an opener in the second half raises WrongSideSymbol with the
    1-based position.
    """
    if n % 2:
        raise OddLength(f"length {n} is odd")
    half = n // 2
    count = 0
    for pos, ch in enumerate(symbols, start=1):
        if pos > n:
            raise ValueError(f"stream longer than declared length {n}")
        if pos <= half:
            if ch not in OPENERS:
                raise WrongSideSymbol(pos, ch)
            yield 1 if ch == "[" else 0
        else:
            if ch not in CLOSERS:
                raise WrongSideSymbol(pos, ch)
            yield 1 if ch == "]" else 0
        count = pos
    if count != n:
        raise ValueError(f"stream ended after {count} of {n} symbols")


def one_turn_to_ham(w: str) -> Tuple[List[int], List[int]]:
    """Return (x, y_reversed) for a one-turn string; see ``one_turn_stream``."""
    bits = list(one_turn_stream(w, len(w)))
    half = len(w) // 2
    return bits[:half], bits[half:]


def one_turn_outcome(w: str) -> CodecOutcome:
    try:
        return CodecOutcome(list(one_turn_stream(w, len(w))))
    except WrongSideSymbol as exc:
        return CodecOutcome([], True, "wrong-side symbol", exc.position)
    except OddLength:
        return CodecOutcome([], True, "odd length", None)
