"""Stamping sets: frequencies reachable from ``F`` by repeated Minkowski sums.

``S^0 = F`` and ``S^n = S^{n-1} + stamp``. Because the stamp contains 0 the
sets are nested, and every frequency first appearing at level ``n`` is a
level ``n-1`` frequency plus a nonzero stamp element, so a breadth-first
frontier expansion records each frequency's minimal level directly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import reduce
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .exceptions import InvalidStampError, StampOverflowError
from .spectra import Frequency, as_frequency, frequency_array

DEFAULT_CAP = 2_000_000

# Largest candidate block (rows * dim) materialized per expansion step.
_BLOCK = 2**23


@dataclass(frozen=True)
class StampSet:
    dim: int
    N: int
    levels: Dict[Frequency, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.levels)

    def __contains__(self, k) -> bool:
        return as_frequency(k) in self.levels

    def frequencies(self, n: Optional[int] = None) -> List[Frequency]:
        """Members of ``S^n`` (default ``S^N``) in lexicographic order."""
        if n is None:
            return list(self.levels)
        return [k for k, lvl in self.levels.items() if lvl <= n]

    def at_level(self, n: int) -> List[Frequency]:
        """Frequencies that first appear at level ``n``."""
        return [k for k, lvl in self.levels.items() if lvl == n]

    def level_sizes(self) -> List[int]:
        counts = [0] * (self.N + 1)
        for lvl in self.levels.values():
            counts[lvl] += 1
        return counts

    @property
    def contains_zero(self) -> bool:
        return (0,) * self.dim in self.levels

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"k_{i + 1}" for i in range(self.dim)] + ["level"])
        for k, lvl in self.levels.items():
            w.writerow(list(k) + [lvl])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _normalize(freqs: Iterable, dim: Optional[int] = None) -> List[Frequency]:
    out = sorted({as_frequency(k) for k in freqs})
    if dim is not None and any(len(k) != dim for k in out):
        raise InvalidStampError(f"all frequencies must have length {dim}")
    return out


def validate_stamp(stamp: Sequence[Frequency]) -> None:
    members = set(stamp)
    if not members:
        raise InvalidStampError("stamp support is empty")
    dim = len(next(iter(members)))
    if (0,) * dim not in members:
        raise InvalidStampError("stamp support must contain the zero frequency")
    for k in members:
        if tuple(-c for c in k) not in members:
            raise InvalidStampError(f"stamp support is not symmetric: -{k} missing")


def stamp_set(stamp_supp: Iterable, F: Iterable, N: int,
              cap: int = DEFAULT_CAP) -> StampSet:
    """Enumerate ``S^N[stamp](F)`` with the minimal level of every member."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    stamp = _normalize(stamp_supp)
    validate_stamp(stamp)
    dim = len(stamp[0])
    F = _normalize(F, dim)
    if len(F) > cap:
        raise StampOverflowError(f"|F| = {len(F)} exceeds cap {cap}")

    steps = frequency_array([k for k in stamp if any(k)], dim)
    levels: Dict[bytes, int] = {}
    rows: List[np.ndarray] = []
    frontier = frequency_array(F, dim)
    for r in frontier:
        levels[r.tobytes()] = 0
    rows.append(frontier)

    reach = int(np.abs(steps).max()) if steps.size else 0
    for n in range(1, N + 1):
        if not len(frontier) or not len(steps):
            break
        if int(np.abs(frontier).max()) + reach >= 2**62:
            raise OverflowError("stamping sum leaves the int64 range")
        fresh = []
        chunk = max(1, _BLOCK // (len(steps) * dim))
        for lo in range(0, len(frontier), chunk):
            cand = (frontier[lo:lo + chunk, None, :] + steps[None, :, :]).reshape(-1, dim)
            for r in cand:
                key = r.tobytes()
                if key not in levels:
                    levels[key] = n
                    fresh.append(r)
                    if len(levels) > cap:
                        raise StampOverflowError(
                            f"stamping set exceeds cap {cap} at level {n}; "
                            "lower N or s, or raise the cap")
        frontier = np.array(fresh, dtype=np.int64).reshape(-1, dim)
        rows.append(frontier)

    allrows = np.concatenate(rows)
    lvls = np.repeat(np.arange(len(rows)), [len(r) for r in rows])
    out = {tuple(r): int(v) for r, v in zip(allrows.tolist(), lvls.tolist())}
    return StampSet(dim, N, dict(sorted(out.items())))


def minkowski_sum(*supports: Iterable) -> List[Frequency]:
    sets = [_normalize(s) for s in supports]
    total = reduce(lambda acc, s: {tuple(x + y for x, y in zip(p, q)) for p in acc for q in s},
                   sets[1:], set(sets[0]))
    return sorted(total)


def adr_stamp(a_supp: Iterable, b_supps: Sequence[Iterable], c_supp: Iterable,
              dim: int, combine: str = "sum") -> List[Frequency]:
    """Combined stamp for the advection-diffusion-reaction operator.

    Each support is joined with ``{0}`` first (advection components usually
    have no mean), then the supports are combined by Minkowski sum
    (``combine="sum"``) or by plain union (``combine="union"``). The union is
    the exact coupling set of the operator and grows far more slowly.
    """
    zero = (0,) * dim
    parts = [_normalize(list(s) + [zero], dim) for s in [a_supp, *b_supps, c_supp]]
    if combine == "sum":
        return minkowski_sum(*parts)
    if combine == "union":
        return sorted(set().union(*map(set, parts)))
    raise ValueError(f"unknown combine mode {combine!r}")


def stamp_set_adr(a_supp: Iterable, b_supps: Sequence[Iterable], c_supp: Iterable,
                  F: Iterable, N: int, combine: str = "sum",
                  cap: int = DEFAULT_CAP) -> StampSet:
    a_supp = list(a_supp)
    F = list(F)
    probe = a_supp or F
    if not probe:
        raise InvalidStampError("cannot infer dimension from empty supports")
    dim = len(as_frequency(probe[0]))
    return stamp_set(adr_stamp(a_supp, b_supps, c_supp, dim, combine), F, N, cap)


def cardinality_bound_simple(s: int, N: int, f_size: int = 1) -> int:
    """``7 max(s, 2N+1)^min(s, 2N+1)``; valid when ``f_size <= s``."""
    if s < 1 or N < 0:
        raise ValueError("need s >= 1 and N >= 0")
    m = 2 * N + 1
    return 7 * max(s, m) ** min(s, m)


def _binom(n: int, k: int) -> int:
    # conventions for the t = 0 terms: C(-1, -1) = 1 and C(m, -1) = 0 for m >= 0
    if k == -1:
        return 1 if n == -1 else 0
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


def cardinality_bound_combinatorial(s: int, N: int, f_size: int) -> int:
    """Count of sign/multiplicity patterns bounding ``|S^N|`` for odd ``s``.

    ``f_size * sum_{n<=N} sum_{t<=min(n,r)} 2^t C(r,t) C(n-1,t-1)`` with
    ``r = (s-1)/2`` the number of +/- frequency pairs in the stamp.
    """
    if s < 1 or s % 2 == 0:
        raise ValueError("stamp size must be odd (symmetric support containing 0)")
    r = (s - 1) // 2
    total = 0
    for n in range(N + 1):
        for t in range(min(n, r) + 1):
            total += 2**t * comb(r, t) * _binom(n - 1, t - 1)
    return f_size * total
