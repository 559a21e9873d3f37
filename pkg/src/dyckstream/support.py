"""Brute-force search for a small index set whose values XOR to a target.

Given values a_0..a_{n-1} (field elements) and a target T, find the first set S
in (size, lexicographic) order with XOR_{i in S} a_i = T and |S| <= max_size.
Both search paths report ``steps``: the number of candidate sets examined up to
and including the hit, so the count is identical whichever path runs.
"""

from __future__ import annotations

from math import comb
from typing import Optional, Sequence

import numpy as np

PAIR_TABLE_BYTES = 96 * 2**20  # largest pair table built by the vectorized path
SCALAR_LIMIT = 20_000  # candidate counts below this use the scalar path


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, needed: int, budget: int):
        super().__init__(f"support search needs up to {needed} candidates, budget is {budget}")
        self.needed = needed
        self.budget = budget


def candidate_count(n: int, max_size: int, min_size: int = 0) -> int:
    return sum(comb(n, s) for s in range(min_size, min(max_size, n) + 1))


def iter_supports(n: int, max_size: int, min_size: int = 0):
    """All subsets of range(n) of size min_size..max_size in (size, lex) order."""
    from itertools import combinations
    for s in range(min_size, min(max_size, n) + 1):
        yield from combinations(range(n), s)


def _scan_scalar(values: Sequence[int], target: int, s: int, cap: Optional[int] = None):
    n = len(values)
    if s == 0:
        return ((), 1) if target == 0 else (None, 1)
    if s > n:
        return None, 0
    p = s - 1
    idx = list(range(p))
    pref = [target] * (p + 1)
    for j in range(p):
        pref[j + 1] = pref[j] ^ values[idx[j]]
    steps = 0
    while True:
        # the last index runs over a contiguous tail; list.index scans it in C
        lo = idx[-1] + 1 if p else 0
        if lo < n:
            try:
                i = values.index(pref[p], lo)
                return tuple(idx) + (i,), steps + (i - lo) + 1
            except ValueError:
                steps += n - lo
        if cap is not None and steps > cap:
            raise SearchBudgetExceeded(steps, cap)
        j = p - 1
        while j >= 0 and idx[j] == n - s + j:
            j -= 1
        if j < 0:
            return None, steps
        idx[j] += 1
        pref[j + 1] = pref[j] ^ values[idx[j]]
        for t in range(j + 1, p):
            idx[t] = idx[t - 1] + 1
            pref[t + 1] = pref[t] ^ values[idx[t]]


def _split_words(values: Sequence[int], ell: int) -> np.ndarray:
    words = max(1, (ell + 63) // 64)
    mask = (1 << 64) - 1
    out = np.empty((words, len(values)), dtype=np.uint64)
    for w in range(words):
        out[w] = np.array([(v >> (64 * w)) & mask for v in values], dtype=np.uint64)
    return out


def _word_list(v: int, words: int):
    mask = (1 << 64) - 1
    return [np.uint64((v >> (64 * w)) & mask) for w in range(words)]


class SupportSearch:
    """Reusable search over a fixed value list (pair table built on first use)."""

    def __init__(self, values: Sequence[int], ell: Optional[int] = None):
        self.values = [int(v) for v in values]
        self.n = len(self.values)
        if ell is None:
            ell = max((v.bit_length() for v in self.values), default=1)
        self.ell = max(1, ell)
        self.words = max(1, (self.ell + 63) // 64)
        self._arr = None
        self._pairs = None
        self._offsets = None

    # ---- vectorized helpers
    def _array(self):
        if self._arr is None:
            self._arr = _split_words(self.values, self.ell)
        return self._arr

    def _pair_table(self):
        if self._pairs is None:
            n = self.n
            npairs = n * (n - 1) // 2
            if npairs * 8 * self.words > PAIR_TABLE_BYTES:
                return None
            jj, ll = np.triu_indices(n, 1)
            arr = self._array()
            self._pairs = arr[:, jj] ^ arr[:, ll]
            self._pair_j = jj
            self._pair_l = ll
            j = np.arange(n + 1, dtype=np.int64)
            self._offsets = j * (n - 1) - j * (j - 1) // 2
        return self._pairs

    def _first_hit(self, table: np.ndarray, start: int, target: int) -> int:
        """Index (relative to ``start``) of the first column equal to target, or -1."""
        tw = _word_list(target, self.words)
        m = table[0, start:] == tw[0]
        for w in range(1, self.words):
            m &= table[w, start:] == tw[w]
        pos = int(np.argmax(m))
        if m.size == 0 or not m[pos]:
            return -1
        return pos

    def _scan_vector(self, target: int, s: int, cap: Optional[int] = None):
        n = self.n
        vals = self.values
        if s == 0:
            return ((), 1) if target == 0 else (None, 1)
        if s > n:
            return None, 0
        if s == 1:
            pos = self._first_hit(self._array(), 0, target)
            return ((pos,), pos + 1) if pos >= 0 else (None, n)
        pairs = self._pair_table()
        if pairs is None:
            return self._scan_last_index(target, s, cap)
        offs = self._offsets
        p = s - 2
        steps = 0
        idx = list(range(p))
        pref = [target] * (p + 1)
        for j in range(p):
            pref[j + 1] = pref[j] ^ vals[idx[j]]
        while True:
            lo = idx[-1] + 1 if p else 0
            if lo <= n - 2:
                start = int(offs[lo])
                pos = self._first_hit(pairs, start, pref[p])
                if pos >= 0:
                    flat = start + pos
                    hit = tuple(idx) + (int(self._pair_j[flat]), int(self._pair_l[flat]))
                    return hit, steps + pos + 1
                steps += pairs.shape[1] - start
            if cap is not None and steps > cap:
                raise SearchBudgetExceeded(steps, cap)
            j = p - 1
            while j >= 0 and idx[j] == n - s + j:
                j -= 1
            if j < 0:
                return None, steps
            idx[j] += 1
            pref[j + 1] = pref[j] ^ vals[idx[j]]
            for t in range(j + 1, p):
                idx[t] = idx[t - 1] + 1
                pref[t + 1] = pref[t] ^ vals[idx[t]]

    def _scan_last_index(self, target: int, s: int, cap: Optional[int] = None):
        n = self.n
        vals = self.values
        arr = self._array()
        p = s - 1
        steps = 0
        idx = list(range(p))
        pref = [target] * (p + 1)
        for j in range(p):
            pref[j + 1] = pref[j] ^ vals[idx[j]]
        while True:
            lo = idx[-1] + 1
            if lo <= n - 1:
                pos = self._first_hit(arr, lo, pref[p])
                if pos >= 0:
                    return tuple(idx) + (lo + pos,), steps + pos + 1
                steps += n - lo
            if cap is not None and steps > cap:
                raise SearchBudgetExceeded(steps, cap)
            j = p - 1
            while j >= 0 and idx[j] == n - s + j:
                j -= 1
            if j < 0:
                return None, steps
            idx[j] += 1
            pref[j + 1] = pref[j] ^ vals[idx[j]]
            for t in range(j + 1, p):
                idx[t] = idx[t - 1] + 1
                pref[t + 1] = pref[t] ^ vals[idx[t]]

    def find(self, target: int, max_size: int, min_size: int = 0,
             budget: Optional[int] = None, vectorized: Optional[bool] = None):
        """Return (support or None, steps)."""
        total = candidate_count(self.n, max_size, min_size)
        if vectorized is None:
            vectorized = total > SCALAR_LIMIT
        steps = 0
        for s in range(min_size, min(max_size, self.n) + 1):
            cap = None if budget is None else budget - steps
            try:
                if vectorized:
                    hit, st = self._scan_vector(target, s, cap)
                else:
                    hit, st = _scan_scalar(self.values, target, s, cap)
            except SearchBudgetExceeded as exc:
                raise SearchBudgetExceeded(steps + exc.needed, budget) from None
            steps += st
            if hit is not None:
                return hit, steps
        return None, steps


def find_support(values: Sequence[int], target: int, max_size: int, min_size: int = 0,
                 budget: Optional[int] = None, vectorized: Optional[bool] = None,
                 ell: Optional[int] = None):
    return SupportSearch(values, ell).find(target, max_size, min_size, budget, vectorized)
