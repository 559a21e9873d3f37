"""Exact oracles, instance generators and the instance file format.

The oracles store their whole input and share no code with the streaming
algorithms, so they can serve as ground truth in tests.

Instance files are plain text. The first line is ``#dyckstream-instances v1``.
Every later non-empty line holds one instance as tab-separated fields:

    kind  n  k  label  true_distance  payload

kind is ham, one_turn or dyck. For ham, n is the length of x and the payload is
x followed by reversed y (2n characters of 0/1). For one_turn and dyck, n is the
string length and the payload is the string over ( ) [ ]. true_distance is -1
for strings whose bracket shape does not balance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

INSTANCE_HEADER = "#dyckstream-instances v1"
KINDS = ("ham", "one_turn", "dyck")


class LengthMismatch(ValueError):
    pass


class ShapeUnbalanced(ValueError):
    pass


class DivisibilityViolation(ValueError):
    pass


# ---------------------------------------------------------------- oracles

def exact_ham(x: Sequence, y: Sequence) -> int:
    if len(x) != len(y):
        raise LengthMismatch(f"lengths {len(x)} and {len(y)} differ")
    return sum(1 for a, b in zip(x, y) if int(a) != int(b))


def shape_pairs(w: str) -> List[tuple]:
    """Matched (open position, close position) pairs ignoring bracket type."""
    stack, pairs = [], []
    for i, ch in enumerate(w):
        if ch in "([":
            stack.append(i)
        elif ch in ")]":
            if not stack:
                raise ShapeUnbalanced(f"closer at position {i} has no partner")
            pairs.append((stack.pop(), i))
        else:
            raise ValueError(f"unexpected symbol {ch!r}")
    if stack:
        raise ShapeUnbalanced(f"{len(stack)} openers left unmatched")
    return pairs


def exact_dyck_flip_distance(w: str) -> int:
    """Number of shape-matched pairs whose bracket types disagree."""
    return sum(1 for i, j in shape_pairs(w) if (w[i] == "(") != (w[j] == ")"))


def is_dyck2(w: str) -> bool:
    try:
        return exact_dyck_flip_distance(w) == 0
    except ShapeUnbalanced:
        return False


def one_turn_distance(w: str) -> Optional[int]:
    """Flip distance to the one-turn language, or None if no flips can reach it."""
    n = len(w)
    if n % 2:
        return None
    h = n // 2
    if any(c not in "([" for c in w[:h]) or any(c not in ")]" for c in w[h:]):
        return None
    return sum(1 for i in range(h) if (w[i] == "[") != (w[n - 1 - i] == "]"))


# ------------------------------------------------------------- instances

def label_for(distance: int, k: int) -> str:
    return "within-k" if 0 <= distance <= k else "beyond-k"


@dataclass
class Instance:
    kind: str
    n: int
    k: int
    payload: str
    true_distance: int = -1
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        # never trust a supplied distance
        self.true_distance = instance_distance(self.kind, self.payload)
        if not self.label:
            self.label = label_for(self.true_distance, self.k)

    def to_line(self) -> str:
        return "\t".join([self.kind, str(self.n), str(self.k), self.label,
                          str(self.true_distance), self.payload])


def instance_distance(kind: str, payload: str) -> int:
    if kind == "ham":
        h = len(payload) // 2
        x, yr = payload[:h], payload[h:]
        return exact_ham(x, yr[::-1])
    if kind == "one_turn":
        d = one_turn_distance(payload)
        return -1 if d is None else d
    try:
        return exact_dyck_flip_distance(payload)
    except ShapeUnbalanced:
        return -1


def parse_instance_line(line: str) -> Instance:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 6:
        raise ValueError(f"expected 6 tab-separated fields, got {len(parts)}")
    kind, n, k, label, dist, payload = parts
    inst = Instance(kind, int(n), int(k), payload, label=label)
    if int(dist) != inst.true_distance:
        raise ValueError(f"stored distance {dist} disagrees with oracle {inst.true_distance}")
    return inst


def write_instances(path, instances: Iterable[Instance]) -> None:
    with open(path, "w") as fh:
        fh.write(INSTANCE_HEADER + "\n")
        for inst in instances:
            fh.write(inst.to_line() + "\n")


def read_instances(path) -> List[Instance]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != INSTANCE_HEADER:
        raise ValueError("missing instance file header")
    return [parse_instance_line(ln) for ln in lines[1:] if ln.strip()]


# ------------------------------------------------------------- generators

def random_bits(n: int, rng: random.Random) -> str:
    return "".join("1" if rng.getrandbits(1) else "0" for _ in range(n))


def random_shape(n: int, rng: random.Random) -> str:
    """Random balanced string over '(' ')' of even length n."""
    if n % 2:
        raise ValueError("length must be even")
    out, depth = [], 0
    for pos in range(n):
        left = n - pos
        if depth == 0:
            opener = True
        elif depth == left:
            opener = False
        else:
            opener = rng.random() < 0.5
        out.append("(" if opener else ")")
        depth += 1 if opener else -1
    return "".join(out)


def random_dyck_member(n: int, rng: random.Random) -> str:
    w = list(random_shape(n, rng))
    for i, j in shape_pairs("".join(w)):
        if rng.getrandbits(1):
            w[i], w[j] = "[", "]"
    return "".join(w)


def random_one_turn_member(n: int, rng: random.Random) -> str:
    if n % 2:
        raise ValueError("length must be even")
    half = ["[" if rng.getrandbits(1) else "(" for _ in range(n // 2)]
    closing = [")" if c == "(" else "]" for c in reversed(half)]
    return "".join(half) + "".join(closing)


_FLIP = {"(": "[", "[": "(", ")": "]", "]": ")"}


def gen_flipped(base: str, d: int, rng: random.Random, kind: str = "dyck",
                k: Optional[int] = None) -> Instance:
    """Flip the type of d distinct pairs (dyck, one_turn) or d distinct bits of y (ham).

    For ham the base is x; the instance payload is x followed by reversed y.
    """
    if kind == "ham":
        if d > len(base):
            raise ValueError("more flips than positions")
        y = list(base)
        for i in rng.sample(range(len(base)), d):
            y[i] = "1" if y[i] == "0" else "0"
        payload = base + "".join(reversed(y))
        return Instance("ham", len(base), d if k is None else k, payload)
    pairs = shape_pairs(base)
    if d > len(pairs):
        raise ValueError("more flips than matched pairs")
    w = list(base)
    for i, j in rng.sample(pairs, d):
        p = i if rng.getrandbits(1) else j
        w[p] = _FLIP[w[p]]
    return Instance(kind, len(base), d if k is None else k, "".join(w))


# -------------------------------------------------- augmented indexing

@dataclass
class AugIndexInstance:
    universe_size: int
    x_blocks: str
    y_blocks: str
    ind_value: int
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)  # None stands for the empty symbol
    i: int = 0

    @property
    def distance(self) -> int:
        return exact_ham(self.x_blocks, self.y_blocks)

    def to_instance(self, k_budget: int) -> Instance:
        payload = self.x_blocks + self.y_blocks[::-1]
        return Instance("ham", len(self.x_blocks), k_budget, payload,
                        label=f"gap-({k_budget},{k_budget + 2})")


def f_a(u: int, universe: int) -> str:
    return "".join("110" if j == u else "000" for j in range(universe))


def f_b(u: Optional[int], universe: int) -> str:
    if u is None:
        return "000" * universe
    return "".join("011" if j == u else "000" for j in range(universe))


def gen_augmented_indexing(n: int, k: int, ind_value: int, rng: random.Random) -> AugIndexInstance:
    """Promise input for augmented indexing encoded as two 3n-bit strings.

    Distance is 2k when x_i = y_i (ind_value 1) and 2k + 2 otherwise.
    """
    if k < 1 or n % k or n // k < 2:
        raise DivisibilityViolation(f"need k | n and n/k >= 2 (n={n}, k={k})")
    universe = n // k
    x = [rng.randrange(universe) for _ in range(k)]
    i = rng.randrange(k)
    y: list = []
    for j in range(k):
        if j < i:
            y.append(x[j])
        elif j == i:
            if ind_value:
                y.append(x[j])
            else:
                y.append(rng.choice([u for u in range(universe) if u != x[j]]) if universe <= 64
                         else _other(x[j], universe, rng))
        else:
            y.append(None)
    xa = "".join(f_a(u, universe) for u in x)
    yb = "".join(f_b(u, universe) for u in y)
    inst = AugIndexInstance(universe, xa, yb, 1 if ind_value else 0, x, y, i)
    expected = 2 * k if ind_value else 2 * k + 2
    assert inst.distance == expected, "encoding broke the distance promise"
    return inst


def _other(v: int, universe: int, rng: random.Random) -> int:
    w = rng.randrange(universe - 1)
    return w + 1 if w >= v else w
