"""Good-length regions and the three options on a length profile.

A length profile is a finite sequence of nonnegative reals summing to 1. It
satisfies option 1 if one entry reaches the long-factor threshold, option 2 if
some subset sum lands in the first region, and option 3 if one subset sum lands
in the second region and another in the third.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

A_MIN, A_MAX = 0.475, 0.77
MAX_EXACT_LENGTH = 24
MAX_LENGTH = 10_000
DP_GRID = 1e-4
# allowance for rounding in float subset sums
SUM_SLACK = 1e-12

# branch upper endpoints; the last branch is open above
_BRANCH_TOPS = (0.53, 0.545, 0.57, 0.59, 0.61, np.inf)

_CHI0 = (0.290, 0.315, 0.335, 0.330, 0.330, 0.320)
_CHI1_HALF = (
    ((0.290, 0.360),),
    ((0.315, 0.345), (0.427, 0.474)),
    ((0.400, 0.475),),
    ((0.380, 0.420),),
    ((0.365, 0.420),),
    ((0.355, 0.420),),
)
# None means "same as region 1"
_CHI2 = (
    None,
    ((0.405, 0.485), (0.515, 0.595)),
    None,
    ((0.380, 0.455), (0.545, 0.620)),
    ((0.365, 0.435), (0.565, 0.635)),
    None,
)
_CHI3 = (
    None,
    ((0.285, 0.375), (0.625, 0.715)),
    None,
    ((0.315, 0.420), (0.580, 0.685)),
    ((0.330, 0.420), (0.580, 0.670)),
    None,
)


@dataclass(frozen=True)
class RegionSet:
    """Finite union of closed subintervals of [0, 1], kept sorted and merged."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        for lo, hi in self.intervals:
            if not lo <= hi:
                raise ValueError(f"bad interval [{lo}, {hi}]")
        merged = _merge(self.intervals)
        object.__setattr__(self, "intervals", merged)

    @classmethod
    def of(cls, intervals: Iterable[tuple[float, float]]) -> RegionSet:
        return cls(tuple((float(lo), float(hi)) for lo, hi in intervals))

    def reflect(self) -> RegionSet:
        return RegionSet.of((1.0 - hi, 1.0 - lo) for lo, hi in self.intervals)

    def union(self, other: RegionSet) -> RegionSet:
        return RegionSet.of(self.intervals + other.intervals)

    def widen(self, pad: float) -> RegionSet:
        return RegionSet.of((lo - pad, hi + pad) for lo, hi in self.intervals)

    def contains(self, x, slack: float = 0.0):
        """Membership, vectorized over ``x``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            out |= (x >= lo - slack) & (x <= hi + slack)
        return out if out.ndim else bool(out)

    def __contains__(self, x: float) -> bool:
        return bool(self.contains(x))

    @property
    def endpoints(self) -> np.ndarray:
        return np.array(self.intervals, dtype=float).ravel()


def _merge(intervals: Sequence[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def branch_index(a: float) -> int:
    """Index of the a-branch: 0 for a <= 0.53 up to 5 for a > 0.61."""
    if not A_MIN - 1e-9 <= a <= A_MAX:
        raise ValueError(f"a={a} outside [{A_MIN}, {A_MAX}]")
    for i, top in enumerate(_BRANCH_TOPS):
        if a <= top:
            return i
    raise AssertionError("unreachable")


def chi0(a: float, eps1: float = 0.0) -> float:
    """Long-factor threshold for option 1."""
    return _CHI0[branch_index(a)] - eps1


def _padded(pairs, eps1: float) -> RegionSet:
    return RegionSet.of((lo - eps1, hi + eps1) for lo, hi in pairs)


def chi(k: int, a: float, eps1: float = 0.0) -> RegionSet:
    """Region k in 0..3 for the given a. Region 0 is returned as [threshold, 1]."""
    b = branch_index(a)
    if k == 0:
        return RegionSet.of([(chi0(a, eps1), 1.0)])
    half = _padded(_CHI1_HALF[b], eps1)
    first = half.union(half.reflect())
    if k == 1:
        return first
    table = {2: _CHI2, 3: _CHI3}.get(k)
    if table is None:
        raise ValueError(f"region index must be 0..3, got {k}")
    entry = table[b]
    return first if entry is None else _padded(entry, eps1)


# ---------------------------------------------------------------------------
# subset sums


class Outcome(enum.Enum):
    YES = "yes"
    NO = "no"
    MAYBE = "maybe"

    def __and__(self, other: Outcome) -> Outcome:
        if self is Outcome.NO or other is Outcome.NO:
            return Outcome.NO
        if self is Outcome.YES and other is Outcome.YES:
            return Outcome.YES
        return Outcome.MAYBE


@dataclass(frozen=True)
class OptionResult:
    option1: Outcome
    option2: Outcome
    option3: Outcome
    method: str

    @property
    def opt1(self) -> bool:
        return self.option1 is Outcome.YES

    @property
    def opt2(self) -> bool:
        return self.option2 is Outcome.YES

    @property
    def opt3(self) -> bool:
        return self.option3 is Outcome.YES

    @property
    def any_option(self) -> bool:
        return self.opt1 or self.opt2 or self.opt3

    @property
    def all_fail(self) -> bool:
        """True only when every option is definitely refuted."""
        return all(o is Outcome.NO for o in (self.option1, self.option2, self.option3))


def validate_sequence(seq: Sequence[float]) -> np.ndarray:
    arr = np.asarray(seq, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("a length profile must be a non-empty 1-d sequence")
    if arr.size > MAX_LENGTH:
        raise ValueError(f"length profile longer than {MAX_LENGTH}")
    if (arr < 0).any() or (arr > 1).any():
        raise ValueError("entries must lie in [0, 1]")
    if abs(float(np.sum(arr)) - 1.0) > 1e-12 * max(1, arr.size):
        raise ValueError("entries must sum to 1")
    return arr


def subset_sums(values: Sequence[float]) -> np.ndarray:
    """All 2^n subset sums, in mask order."""
    sums = np.zeros(1)
    for v in values:
        sums = np.concatenate((sums, sums + v))
    return sums


def _hits_exact(halves: tuple[np.ndarray, np.ndarray], region: RegionSet, slack: float) -> bool:
    left, right = halves
    for lo, hi in region.intervals:
        idx = np.searchsorted(right, lo - slack - left, side="left")
        ok = idx < right.size
        if ok.any():
            cand = right[np.minimum(idx, right.size - 1)]
            if (ok & (left + cand <= hi + slack)).any():
                return True
    return False


def _split_sums(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mid = arr.size // 2
    return np.unique(subset_sums(arr[:mid])), np.unique(subset_sums(arr[mid:]))


class _GridReach:
    """Over-approximate reachable subset sums on a grid, with one witness per cell."""

    def __init__(self, arr: np.ndarray, grid: float) -> None:
        n_cells = int(np.ceil(1.0 / grid)) + 2
        reach = np.zeros(n_cells, dtype=bool)
        witness = np.full(n_cells, np.nan)
        reach[0] = True
        witness[0] = 0.0
        for v in arr:
            k = int(v // grid)
            if k >= n_cells:
                continue
            shifted = np.zeros_like(reach)
            shifted[k:] |= reach[: n_cells - k]
            if k + 1 < n_cells:
                shifted[k + 1 :] |= reach[: n_cells - k - 1]
            have = np.flatnonzero(~np.isnan(witness))
            new_w = witness[have] + v
            cells = np.minimum((new_w // grid).astype(int), n_cells - 1)
            free = np.isnan(witness[cells])
            # first writer wins; np.unique keeps it deterministic
            cells, first = np.unique(cells[free], return_index=True)
            witness[cells] = new_w[free][first]
            reach |= shifted
        self.grid = grid
        self.reach = reach
        self.witness = witness

    def decide(self, region: RegionSet, slack: float) -> Outcome:
        w = self.witness[~np.isnan(self.witness)]
        if region.contains(w, slack).any():
            return Outcome.YES
        cells = np.flatnonzero(self.reach)
        # cell c holds sums in [c*g, (c+1)*g); pad one cell each side
        lo = (cells - 1) * self.grid
        hi = (cells + 2) * self.grid
        for a_lo, a_hi in region.intervals:
            if ((lo <= a_hi + slack) & (hi >= a_lo - slack)).any():
                return Outcome.MAYBE
        return Outcome.NO


def check_options(
    seq: Sequence[float],
    a: float,
    eps1: float = 0.0,
    method: str = "auto",
    slack: float = SUM_SLACK,
) -> OptionResult:
    """Decide options 1, 2 and 3 for a length profile at parameter ``a``.

    ``method`` is ``"exact"`` (meet-in-the-middle enumeration, up to 24
    entries), ``"dp"`` (grid reachability, which may answer MAYBE) or
    ``"auto"``.
    """
    arr = validate_sequence(seq)
    regions = [chi(k, a, eps1) for k in (1, 2, 3)]
    opt1 = Outcome.YES if float(arr.max()) >= chi0(a, eps1) - slack else Outcome.NO
    if method == "auto":
        method = "exact" if arr.size <= MAX_EXACT_LENGTH else "dp"
    if method == "exact":
        if arr.size > MAX_EXACT_LENGTH:
            raise ValueError(f"exact enumeration is limited to {MAX_EXACT_LENGTH} entries")
        halves = _split_sums(arr)
        res = [Outcome.YES if _hits_exact(halves, r, slack) else Outcome.NO for r in regions]
    elif method == "dp":
        reach = _GridReach(arr, DP_GRID)
        res = [reach.decide(r, slack) for r in regions]
    else:
        raise ValueError(f"unknown method {method!r}")
    return OptionResult(opt1, res[0], res[1] & res[2], method)


def brute_force_options(seq: Sequence[float], a: float, eps1: float = 0.0) -> tuple[bool, bool, bool]:
    """Plain 2^n enumeration; the reference oracle for small profiles."""
    arr = [float(x) for x in seq]
    regions = [chi(k, a, eps1) for k in (1, 2, 3)]
    hits = [False, False, False]
    for mask in itertools.product((0, 1), repeat=len(arr)):
        s = sum(x for x, m in zip(arr, mask) if m)
        for i, r in enumerate(regions):
            if r.contains(s, SUM_SLACK):
                hits[i] = True
    return max(arr) >= chi0(a, eps1) - SUM_SLACK, hits[0], hits[1] and hits[2]
