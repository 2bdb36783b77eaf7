"""Edit-distance primitives used by the lexical search channel.

``damerau_levenshtein`` is the optimal-string-alignment variant: adjacent
transposition counts as a single edit. ``damerau_levenshtein_within``
computes the same distance inside a diagonal band and exits early, which
is what makes scanning a suspect against tens of thousands of trusted
names tractable.
"""

from __future__ import annotations


def damerau_levenshtein(a: str, b: str) -> int:
    """Damerau-Levenshtein distance (transposition = one edit)."""
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la

    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ca = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ca == b[j - 1] else 1
            d = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and ca == b[j - 2] and a[i - 2] == b[j - 1]:
                d = min(d, prev2[j - 2] + 1)
            cur[j] = d
        prev2, prev = prev, cur
    return prev[lb]


def damerau_levenshtein_within(a: str, b: str, k: int) -> int | None:
    """Distance if ``<= k``, else None. Banded DP with early exit."""
    la, lb = len(a), len(b)
    if abs(la - lb) > k:
        return None
    if a == b:
        return 0
    if la == 0 or lb == 0:
        d = max(la, lb)
        return d if d <= k else None

    big = k + 1
    prev2: list[int] = []
    prev = [j if j <= k else big for j in range(lb + 1)]
    for i in range(1, la + 1):
        lo = max(1, i - k)
        hi = min(lb, i + k)
        cur = [big] * (lb + 1)
        if i <= k:
            cur[0] = i
        ca = a[i - 1]
        best = cur[0]
        for j in range(lo, hi + 1):
            cost = 0 if ca == b[j - 1] else 1
            d = prev[j - 1] + cost
            if prev[j] + 1 < d:
                d = prev[j] + 1
            if cur[j - 1] + 1 < d:
                d = cur[j - 1] + 1
            if i > 1 and j > 1 and ca == b[j - 2] and a[i - 2] == b[j - 1]:
                t = prev2[j - 2] + 1
                if t < d:
                    d = t
            cur[j] = d
            if d < best:
                best = d
        if best > k:
            return None
        prev2, prev = prev, cur
    return prev[lb] if prev[lb] <= k else None


def longest_common_substring(a: str, b: str) -> int:
    """Length of the longest contiguous substring shared by a and b."""
    if not a or not b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    best = 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b, 1):
            if ca == cb:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


def longest_common_subsequence(a: str, b: str) -> int:
    """Length of the longest (non-contiguous) common subsequence."""
    if not a or not b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b, 1):
            if ca == cb:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] >= prev[j] else prev[j]
        prev = cur
    return prev[-1]


class LengthBucketedScanner:
    """Scan a fixed name set for everything within edit distance ``k``.

    Names are bucketed by length so a query only touches buckets within
    ``k`` of its own length before running the banded DP.
    """

    def __init__(self, names: list[str]):
        self._buckets: dict[int, list[str]] = {}
        for name in names:
            self._buckets.setdefault(len(name), []).append(name)

    def within(self, query: str, k: int) -> list[tuple[str, int]]:
        hits: list[tuple[str, int]] = []
        lq = len(query)
        for length in range(max(1, lq - k), lq + k + 1):
            for name in self._buckets.get(length, ()):
                d = damerau_levenshtein_within(query, name, k)
                if d is not None:
                    hits.append((name, d))
        return hits
