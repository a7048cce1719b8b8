"""Adversarial stress test for the tuple families that must satisfy the options.

A tuple (l1*, ..., lr*, beta) describes every length profile that can be cut
into blocks summing to the lk* plus leftover fillers of size at most beta,
with at most one larger leftover. The profile family without beta drops the
filler restriction. A case fixes an a-range, the allowed r and a list of
inequalities on the tuple; the claim is that every profile in the family
satisfies option 1, 2 or 3 for every a in the range.

The harness samples tuples from each case, builds hostile profiles around
them and decides the options exactly. Passing means no counterexample was
found, which is evidence and not proof.
"""

from __future__ import annotations

import enum
import itertools
import time
import zlib
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, Sequence, Union

import numba
import numpy as np

from .expr import BoundExpr, emax, emin, eval_points, to_infix, var
from .regions import RegionSet, check_options, chi, chi0

# tolerance standing in for the vanishing slack in the profile definitions
XI_TOL = 1e-9
SUM_SLACK = 1e-12
# tolerance when testing the tuple constraints in floating point
CONSTRAINT_TOL = 1e-12
MAX_PROFILE_LENGTH = 200
MAX_R = 6
MAX_COUNT = 10_000_000
NODE_CAP = 2_000_000
# proposals without a single feasible tuple before a case is declared infeasible
MAX_BLIND_PROPOSALS = 2_000_000
BATCH = 8192
STORED_COUNTEREXAMPLES = 20

FALSIFICATION_PASSED = "FALSIFICATION-PASSED"
FALSIFIED = "FALSIFIED"
INCONCLUSIVE = "INCONCLUSIVE"

L = tuple(var(f"ell{i}") for i in range(1, MAX_R + 1))
l1, l2, l3, l4, l5, l6 = L
beta = var("beta")
e1 = var("eps1")
h = e1 / 2
q = e1 / 4


class Family(enum.Enum):
    R_STAR = "R_star"
    R_STAR_STAR = "R_star_star"

    @property
    def sum_cap(self) -> float:
        return 0.75 if self is Family.R_STAR else 0.99


# ---------------------------------------------------------------------------
# constraints


@dataclass(frozen=True)
class Ineq:
    """lhs <= rhs. Comparisons with an absent l_k (NaN) are false."""

    lhs: BoundExpr
    rhs: BoundExpr

    def holds(self, env: dict, eps1: float) -> np.ndarray:
        lhs = eval_points(self.lhs, env, eps1)
        rhs = eval_points(self.rhs, env, eps1)
        with np.errstate(invalid="ignore"):
            return lhs <= rhs + CONSTRAINT_TOL

    def describe(self) -> str:
        return f"{to_infix(self.lhs)} <= {to_infix(self.rhs)}"


@dataclass(frozen=True)
class AnyOf:
    """Disjunction of conjunctions."""

    options: tuple[tuple["Constraint", ...], ...]

    def holds(self, env: dict, eps1: float) -> np.ndarray:
        out = None
        for group in self.options:
            ok = _all_hold(group, env, eps1)
            out = ok if out is None else out | ok
        return out

    def describe(self) -> str:
        parts = [" and ".join(c.describe() for c in g) for g in self.options]
        return " or ".join(f"({p})" for p in parts)


Constraint = Union[Ineq, AnyOf]


def _all_hold(group: Sequence[Constraint], env: dict, eps1: float) -> np.ndarray:
    n = len(next(iter(env.values())))
    out = np.ones(n, dtype=bool)
    for c in group:
        out &= c.holds(env, eps1)
    return out


def le(x, y) -> tuple[Ineq]:
    return (Ineq(_e(x), _e(y)),)


def ge(x, y) -> tuple[Ineq]:
    return (Ineq(_e(y), _e(x)),)


def within(x, lo, hi) -> tuple[Ineq, Ineq]:
    return (Ineq(_e(lo), _e(x)), Ineq(_e(x), _e(hi)))


def in_union(x, pairs) -> tuple[AnyOf]:
    return (AnyOf(tuple(within(x, lo, hi) for lo, hi in pairs)),)


def any_of(*groups) -> tuple[AnyOf]:
    return (AnyOf(tuple(tuple(g) for g in groups)),)


def _e(x) -> BoundExpr:
    from .expr import as_expr

    return as_expr(x)


# ---------------------------------------------------------------------------
# cases


@dataclass(frozen=True)
class RegionOverride:
    """Replacement targets, used to build deliberately broken cases."""

    chi0: float
    chi1: RegionSet
    chi2: RegionSet
    chi3: RegionSet


@dataclass(frozen=True, eq=False)
class CaseSpec:
    id: str
    family: Family
    a_case: str
    a_interval: tuple[float, float]
    r_values: tuple[int, ...]
    constraints: tuple[Constraint, ...]
    beta_range: tuple[float, float] | None = None
    lstar_min: BoundExpr | None = None
    source: str = ""
    regions: RegionOverride | None = None

    def __post_init__(self) -> None:
        if self.family is Family.R_STAR:
            if self.beta_range is None:
                raise ValueError(f"{self.id}: beta range required")
            lo, hi = self.beta_range
            if not 0.01 <= lo <= hi <= 0.15:
                raise ValueError(f"{self.id}: beta range {self.beta_range} outside [0.01, 0.15]")
            if not set(self.r_values) <= set(range(0, 6)):
                raise ValueError(f"{self.id}: r must lie in 0..5")
        else:
            if not set(self.r_values) <= {2, 4, 6}:
                raise ValueError(f"{self.id}: r must be 2, 4 or 6")

    @property
    def sum_cap(self) -> float:
        return self.family.sum_cap

    @property
    def r_max(self) -> int:
        return max(self.r_values)

    @property
    def representative_a(self) -> float:
        # the targets are constant on each a-range, so one point stands for all
        lo, hi = self.a_interval
        return 0.5 * (lo + hi)

    def targets(self, eps1: float = 0.0) -> tuple[float, RegionSet, RegionSet, RegionSet]:
        if self.regions is not None:
            o = self.regions
            return o.chi0, o.chi1, o.chi2, o.chi3
        a = self.representative_a
        return (chi0(a, eps1),) + tuple(chi(k, a, eps1) for k in (1, 2, 3))

    def feasible(self, lstar: np.ndarray, betas: np.ndarray, r: np.ndarray, eps1: float = 0.0) -> np.ndarray:
        """Row mask: the general tuple conditions plus the case inequalities.

        ``lstar`` is (n, 6) with NaN in the unused slots.
        """
        lstar = np.asarray(lstar, dtype=float)
        n = lstar.shape[0]
        ok = np.isin(r, self.r_values)
        used = np.arange(MAX_R)[None, :] < r[:, None]
        with np.errstate(invalid="ignore"):
            ok &= ~(used & np.isnan(lstar)).any(axis=1)
            top = 0.5 + eps1
            if self.family is Family.R_STAR:
                low = betas[:, None]
            else:
                low = np.full((n, 1), 0.01 - eps1)
            vals = np.where(used, lstar, np.nan)
            ok &= np.where(used, (vals >= low - CONSTRAINT_TOL) & (vals <= top + CONSTRAINT_TOL), True).all(axis=1)
            nxt = np.where(used[:, 1:], vals[:, 1:] <= vals[:, :-1] + CONSTRAINT_TOL, True)
            ok &= nxt.all(axis=1)
            ok &= np.nansum(vals, axis=1) <= self.sum_cap + CONSTRAINT_TOL
        env = {f"ell{i + 1}": vals[:, i] for i in range(MAX_R)}
        env["beta"] = betas if betas is not None else np.full(n, np.nan)
        if self.lstar_min is not None:
            floor = eval_points(self.lstar_min, env, eps1)
            with np.errstate(invalid="ignore"):
                ok &= np.where(used, vals >= floor[:, None] - CONSTRAINT_TOL, True).all(axis=1)
        ok &= _all_hold(self.constraints, env, eps1)
        return ok

    def describe(self) -> str:
        parts = [c.describe() for c in self.constraints]
        return "; ".join(parts) if parts else "(no extra constraints)"


_A_RANGES = {
    "I": ("a<=0.53", (0.475, 0.53)),
    "II": ("0.53-0.545", (0.53, 0.545)),
    "III": ("0.545-0.57", (0.545, 0.57)),
    "IV": ("0.57-0.59", (0.57, 0.59)),
    "V": ("0.59-0.61", (0.59, 0.61)),
    "VI": ("a>0.61", (0.61, 0.77)),
}
_FAMILY_LETTER = {"A": "I", "B": "II", "C": "III", "D": "IV", "E": "V", "F": "VI"}
_FLOOR = {"A": 0.07, "B": 0.08, "C": 0.075, "D": 0.075, "E": 0.07, "F": 0.065}

S3 = l1 + l2 + l3
R01, R23, R45 = (0, 1), (2, 3), (4, 5)


def _star(group: str, item: str, r_values, beta_range, *constraints, source: str = "") -> CaseSpec:
    if isinstance(beta_range, float):
        beta_range = (beta_range, beta_range)
    label, interval = _A_RANGES[group]
    return CaseSpec(
        id=f"{group}({item})",
        family=Family.R_STAR,
        a_case=label,
        a_interval=interval,
        r_values=tuple(r_values),
        constraints=tuple(c for grp in constraints for c in grp),
        beta_range=beta_range,
        source=source,
    )


def _star2(group: str, item: str, r_values, *constraints, source: str = "") -> CaseSpec:
    label, interval = _A_RANGES[_FAMILY_LETTER[group]]
    return CaseSpec(
        id=f"{group}({item})",
        family=Family.R_STAR_STAR,
        a_case=label,
        a_interval=interval,
        r_values=tuple(r_values),
        constraints=tuple(c for grp in constraints for c in grp),
        lstar_min=_FLOOR[group] - h,
        source=source,
    )


def _some_partner(r_max: int, pairs_of) -> tuple[AnyOf]:
    """l1 + l_i lands in one of the pairs for some i != 1."""
    groups = []
    for i in range(1, r_max):
        for lo_, hi_ in pairs_of:
            groups.append(within(l1 + L[i], lo_, hi_))
    return (AnyOf(tuple(groups)),)


def _r_star_cases() -> list[CaseSpec]:
    B09 = (0.01, 0.09)
    B105 = (0.01, 0.105)
    return [
        # a <= 0.53, beta = 0.07
        _star("I", "i", R01, 0.07),
        _star("I", "ii", R23, 0.07, le(l2, (0.71 - l1) / 2 + q)),
        _star("I", "iii", R45, 0.07, le(l4, (0.71 - S3) / 2 + q)),
        # 0.53 < a <= 0.545
        _star("II", "i", R01, 0.08),
        _star(
            "II", "ii", R23, B09,
            ge(l1, 0.474 + h),
            le(l2, emin(0.595 - l1 + h, (0.715 - l1) / 2 + q)),
        ),
        _star("II", "iii", R23, 0.08, le(l1, 0.427 + h), le(l2, (0.655 - l1) / 2 + q)),
        _star(
            "II", "iv", R45, 0.08,
            le(l1, 0.285 + h),
            le(l2, (0.655 - l1) / 2 + q),
            le(l4, (0.655 - S3) / 2 + q),
        ),
        # 0.545 < a <= 0.57, beta = 0.075
        _star("III", "i", R01, 0.075),
        _star("III", "ii", R23, 0.075, within(l2, 0.475 - l1 - h, emin(0.525 - l1, 0.14) + h)),
        _star("III", "iii", R23, 0.075, le(l2, (0.6 - l1) / 2 + q)),
        _star("III", "iv", R45, 0.075, le(l2, 0.4 - l1 + h), le(l4, (0.615 - S3) / 2 + q)),
        # 0.57 < a <= 0.59
        _star("IV", "i", R01, 0.075),
        _star(
            "IV", "ii", R23, 0.075,
            ge(l1, 0.455 - h),
            le(l2, emin(0.58 - l1 + h, (0.685 - l1) / 2 + q)),
        ),
        _star("IV", "iii", R23, B105, within(l1, 0.42 - h, 0.455 + h), le(l2, (0.685 - l1) / 2 + q)),
        _star(
            "IV", "iv", R23, 0.075,
            within(l1, 0.315 - h, 0.38 + h),
            le(l2, emax(0.145 + h, (0.62 - l1) / 2 + q)),
        ),
        _star("IV", "v", R23, 0.075, within(l1, 0.29 - h, 0.315 + h), le(l2, (0.62 - l1) / 2 + q)),
        _star(
            "IV", "vi", R23, 0.075,
            le(l1, 0.29 + h),
            le(l2, emin(0.2275 + h, (0.685 - l1) / 2 + q)),
        ),
        _star("IV", "vii", R23, B105, le(l1, 0.29 + h), within(l2, 0.42 - l1 - h, 0.455 - l1 + h)),
        _star("IV", "viii", R45, 0.075, le(l1, 0.29 + h), le(l4, (0.62 - S3) / 2 + q)),
        # 0.59 < a <= 0.61
        _star("V", "i", R01, 0.07),
        _star(
            "V", "ii", R23, 0.07,
            ge(l1, 0.435 - h),
            le(l2, emin(0.105 + h, (0.67 - l1) / 2 + q)),
        ),
        _star("V", "iii", R23, B09, within(l1, 0.42 - h, 0.435 + h), le(l2, (0.67 - l1) / 2 + q)),
        _star("V", "iv", R23, 0.07, within(l1, 0.33 - h, 0.365 + h), le(l2, 0.1524 + h)),
        _star("V", "v", R23, 0.07, within(l1, 0.305 - h, 0.33 + h), le(l2, (0.635 - l1) / 2 + q)),
        _star("V", "vi", R23, 0.07, le(l1, 0.305 + h), le(l2, 0.2099 + h)),
        _star("V", "vii", R45, 0.07, le(l1, 0.305 + h), le(l4, (0.635 - S3) / 2 + q)),
        # a > 0.61, beta = 0.065
        _star("VI", "i", R01, 0.065),
        _star("VI", "ii", R23, 0.065, ge(l1, 0.42 - h), le(l2, emin(0.58 - l1, 0.1) + h)),
        _star("VI", "iii", R23, 0.065, within(l1, 0.325 - h, 0.355 + h), le(l2, (0.645 - l1) / 2 + q)),
        _star("VI", "iv", R23, 0.065, le(l1, 0.325 + h), le(l2, 0.2099 + h)),
        _star("VI", "v", R45, 0.065, le(l1, 0.325 + h), le(l4, (0.645 - S3) / 2 + q)),
        _star("VI", "vi", R45, 0.065, le(l1, 0.325 + h), le(l4, (0.42 - l2 - l3) / 2 + q)),
    ]


def _subsets_in(pairs, r_max: int) -> tuple[AnyOf]:
    groups = []
    for size in range(1, r_max + 1):
        for combo in itertools.combinations(range(r_max), size):
            s = L[combo[0]]
            for i in combo[1:]:
                s = s + L[i]
            for lo, hi in pairs:
                groups.append(within(s, lo, hi))
    return (AnyOf(tuple(groups)),)


def _r_star_star_cases() -> list[CaseSpec]:
    return [
        # a <= 0.53, all l* >= 0.07 - eps1/2
        _star2("A", "a", (2,), within(l1, 0.29 - h, 0.36 + h)),
        _star2("A", "b", (2,), within(l2, 0.64 - l1 - h, 0.71 - l1 + h)),
        _star2("A", "c", (4,), le(l2, (0.71 - l1) / 2 + q), ge(l3, 0.64 - l1 - l2 - h)),
        _star2("A", "d", (4,), within(l1, 0.22 - h, 0.29 + h), le(l4, 0.36 - l1 + h)),
        _star2(
            "A", "e", (6,),
            any_of(*[within(L[i] + L[j], 0.29 - h, 0.36 + h) for i, j in itertools.combinations(range(6), 2)]),
        ),
        _star2(
            "A", "f", (6,),
            le(l1 + l2 + l3 + l4 + l5, 0.71 + h),
            ge(l1, 0.18 - h),
            within(l3, 0.145 - h, 0.29 + h),
        ),
        # 0.53 < a <= 0.545, all l* >= 0.08 - eps1/2
        _star2("B", "a", (2,), in_union(l1, [(0.315 - h, 0.345 + h), (0.427 - h, 0.474 + h)])),
        _star2(
            "B", "b", (2,),
            in_union(l1 + l2, [(0.427 - h, 0.474 + h), (0.526 - h, 0.573 + h), (0.655 - h, 0.685 + h)]),
        ),
        _star2(
            "B", "c", (2,),
            within(l1, 0.285 - h, 0.375 + h),
            in_union(l1 + l2, [(0.405 - h, 0.485 + h), (0.515 - h, 0.595 + h)]),
        ),
        # 0.545 < a <= 0.57, all l* >= 0.075 - eps1/2
        _star2("C", "a", (2,), within(l1, 0.4 - h, 0.475 + h)),
        _star2(
            "C", "b", (2,),
            in_union(l2, [(0.4 - l1 - h, 0.475 - l1 + h), (0.525 - l1 - h, 0.6 - l1 + h)]),
        ),
        _star2("C", "c", (4,), within(l4, 0.4 - l1 - l2 - h, 0.475 - l1 - l2 + h)),
        # 0.57 < a <= 0.59, all l* >= 0.075 - eps1/2
        _star2("D", "a", (2,), within(l1, 0.38 - h, 0.42 + h)),
        _star2("D", "b", (2,), within(l1, 0.42 - h, 0.455 + h), within(l2, 0.58 - l1 - h, 0.685 - l1 + h)),
        _star2(
            "D", "c", (2, 4),
            within(l1, 0.315 - h, 0.38 + h),
            _some_partner(4, [(0.38 - h, 0.455 + h), (0.545 - h, 0.62 + h)]),
        ),
        _star2(
            "D", "d", (2, 4),
            any_of(
                *[
                    within(L[i], lo, hi)
                    for i in range(1, 4)
                    for lo, hi in ((0.38 - l1 - h, 0.42 - l1 + h), (0.58 - l1 - h, 0.62 - l1 + h))
                ]
            ),
        ),
        _star2(
            "D", "e", (4,),
            within(l2, 0.42 - l1 - h, 0.455 - l1 + h),
            within(l4, 0.315 - l1 - h, 0.42 - l1 + h),
        ),
        _star2(
            "D", "f", (4,),
            le(l1, 0.29 + h),
            within(l2, 0.315 - l1 - h, 0.38 - l1 + h),
            within(l1 + l2 + l4, 0.38 - h, 0.455 + h),
        ),
        _star2(
            "D", "g", (4,),
            le(l1, 0.29 + h),
            within(l2, 0.315 - l1 - h, 0.38 - l1 + h),
            within(l2 + l3 + l4, 0.38 - h, 0.455 + h),
        ),
        # 0.59 < a <= 0.61, all l* >= 0.07 - eps1/2
        _star2("E", "a", (2, 4), _subsets_in([(0.365 - h, 0.42 + h), (0.58 - h, 0.635 + h)], 4)),
        _star2("E", "b", (2,), within(l1, 0.42 - h, 0.435 + h), within(l2, 0.58 - l1 - h, 0.67 - l1 + h)),
        _star2(
            "E", "c", (2,),
            within(l1, 0.33 - h, 0.365 + h),
            in_union(l1 + l2, [(0.365 - h, 0.435 + h), (0.565 - h, 0.635 + h)]),
        ),
        # a > 0.61, all l* >= 0.065 - eps1/2
        _star2("F", "a", (2,), within(l1, 0.355 - h, 0.42 + h)),
        _star2(
            "F", "b", (2, 4),
            _some_partner(4, [(0.355 - h, 0.42 + h), (0.58 - h, 0.645 + h)]),
        ),
    ]


@lru_cache(maxsize=1)
def case_catalog() -> tuple[CaseSpec, ...]:
    """All transcribed cases, the beta family first."""
    return tuple(_r_star_cases() + _r_star_star_cases())


def case_by_id(case_id: str) -> CaseSpec:
    for c in case_catalog():
        if c.id == case_id:
            return c
    raise KeyError(f"unknown combinatorics case {case_id!r}")


def mutant_case(eps1: float = 0.0) -> CaseSpec:
    """Case I(i) with the subset-sum target narrowed to [0.30, 0.31].

    For a <= 0.53 the second and third targets coincide with the first, so all
    three are narrowed together.
    """
    base = case_by_id("I(i)")
    narrow = RegionSet.of([(0.30, 0.31)])
    return replace(
        base,
        id="mutant-narrow-chi1",
        regions=RegionOverride(chi0(base.representative_a, eps1), narrow, narrow, narrow),
    )


# ---------------------------------------------------------------------------
# lemma hypotheses


@dataclass(frozen=True)
class LemmaConditions:
    A: bool
    B: bool
    C: bool
    D: bool
    E: bool

    @property
    def any(self) -> bool:
        return self.A or self.B or self.C or self.D or self.E

    def as_dict(self) -> dict[str, bool]:
        return {k: getattr(self, k) for k in "ABCDE"}


def lemma_conditions_check(
    lstar: Sequence[float],
    beta: float,
    rho: float,
    b1: float,
    b2: float,
    chi: tuple[float, float],
    eps1: float = 0.0,
    tol: float = CONSTRAINT_TOL,
) -> LemmaConditions:
    """Evaluate the five sufficient conditions for hitting [a1 - eps1/2, a2 + eps1/2].

    ``lstar`` is nonincreasing with r = len(lstar) entries. (A) to (D) also
    require a2 - a1 >= beta.
    """
    a1, a2 = (float(x) for x in chi)
    if a1 > a2:
        raise ValueError("chi must satisfy a1 <= a2")
    ls = [float(x) for x in lstar]
    r = len(ls)
    prefix = np.concatenate(([0.0], np.cumsum(ls))) if r else np.zeros(1)
    total = float(prefix[-1])
    wide = a2 - a1 >= beta - tol

    cond_a = wide and total <= a2 + tol and 1 - rho >= a1 - tol
    cond_b = wide and any(
        prefix[k - 1] <= a2 + tol and ls[k - 1] <= b1 + tol and 1 - rho - (r - k + 1) * b1 >= a1 - tol
        for k in range(2, r + 1)
    )
    cond_c = (
        wide
        and r >= 1
        and total - ls[0] <= a2 + tol
        and ls[0] <= b2 + tol
        and 1 - rho - b2 >= a1 - tol
    )
    lo_d = 1 - a2 - (2 * a1 - 1)
    cond_d = (
        wide
        and a1 >= 0.5 + eps1 - tol
        and total <= 1 - rho - (2 * a1 - 1) + tol
        and any(lo_d - tol <= prefix[k] <= a2 + tol for k in range(1, r + 1))
    )
    sums = _subset_sums_list(ls)
    cond_e = any(a1 - tol <= s <= a2 + tol for s in sums)
    return LemmaConditions(cond_a, bool(cond_b), cond_c, cond_d, cond_e)


def _subset_sums_list(ls: Sequence[float]) -> list[float]:
    out = [0.0]
    for v in ls:
        out += [s + v for s in out]
    return out


# ---------------------------------------------------------------------------
# exact option decision


@numba.njit(cache=True)
def _hit_interval(vals, lo, hi, slack, cap):
    """1 if some subset of ``vals`` sums into [lo, hi], 0 if none, -1 if capped.

    Entries no wider than the interval can be added one at a time without
    jumping over it, so the interval is hit exactly when some subset of the
    wider entries sums into [lo - (sum of narrow entries), hi].
    """
    width = hi - lo
    small = 0.0
    nbig = 0
    big = np.empty(vals.size)
    for v in vals:
        if v <= width:
            small += v
        else:
            big[nbig] = v
            nbig += 1
    lo_t = lo - small - slack
    hi_t = hi + slack
    if lo_t <= 0.0:
        return 1
    if nbig == 0:
        return 0
    big = np.sort(big[:nbig])[::-1]
    gv = np.empty(nbig)
    gc = np.zeros(nbig, dtype=np.int64)
    ng = 0
    for i in range(nbig):
        if ng > 0 and big[i] == gv[ng - 1]:
            gc[ng - 1] += 1
        else:
            gv[ng] = big[i]
            gc[ng] = 1
            ng += 1
    rest = np.zeros(ng + 1)
    for g in range(ng - 1, -1, -1):
        rest[g] = rest[g + 1] + gv[g] * gc[g]
    if rest[0] < lo_t:
        return 0
    base = np.zeros(ng + 1)
    k = np.full(ng + 1, -1, dtype=np.int64)
    level = 0
    nodes = 0
    while level >= 0:
        if level == ng:
            level -= 1
            continue
        k[level] += 1
        if k[level] > gc[level]:
            level -= 1
            continue
        cur = base[level] + k[level] * gv[level]
        nodes += 1
        if nodes > cap:
            return -1
        if cur > hi_t:
            level -= 1
            continue
        if cur >= lo_t:
            return 1
        if cur + rest[level + 1] < lo_t:
            continue
        base[level + 1] = cur
        k[level + 1] = -1
        level += 1
    return 0


@numba.njit(cache=True)
def _hit_region(vals, intervals, slack, cap):
    unknown = False
    for m in range(intervals.shape[0]):
        res = _hit_interval(vals, intervals[m, 0], intervals[m, 1], slack, cap)
        if res == 1:
            return 1
        if res == -1:
            unknown = True
    return -1 if unknown else 0


@numba.njit(cache=True)
def _decide_rows(rows, threshold, r1, r2, r3, slack, cap):
    """Per row: 1 if some option holds, 0 if all fail, -1 if undecided."""
    n = rows.shape[0]
    out = np.empty(n, dtype=np.int8)
    for i in range(n):
        row = rows[i]
        vals = row[row > 0.0]
        if vals.size == 0:
            out[i] = 0
            continue
        if vals.max() >= threshold - slack:
            out[i] = 1
            continue
        o2 = _hit_region(vals, r1, slack, cap)
        if o2 == 1:
            out[i] = 1
            continue
        o3a = _hit_region(vals, r2, slack, cap)
        o3b = _hit_region(vals, r3, slack, cap) if o3a != 0 else 0
        if o3a == 1 and o3b == 1:
            out[i] = 1
        elif o2 == 0 and (o3a == 0 or o3b == 0):
            out[i] = 0
        else:
            out[i] = -1
    return out


def _region_array(region: RegionSet) -> np.ndarray:
    return np.array(region.intervals, dtype=float).reshape(-1, 2)


def decide_profiles(rows: np.ndarray, targets, slack: float = SUM_SLACK, cap: int = NODE_CAP) -> np.ndarray:
    """Vectorized exact decision for zero-padded profiles (one per row)."""
    threshold, r1, r2, r3 = targets
    rows = np.ascontiguousarray(rows, dtype=float)
    return _decide_rows(rows, float(threshold), _region_array(r1), _region_array(r2), _region_array(r3), slack, cap)


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class XiSample:
    values: tuple[float, ...]
    blocks: tuple[tuple[int, ...], ...]
    lstar: tuple[float, ...]
    beta: float | None
    family: Family
    index: int = 0

    @property
    def length(self) -> int:
        return len(self.values)

    def leftover(self) -> list[int]:
        used = {i for b in self.blocks for i in b}
        return [i for i in range(len(self.values)) if i not in used]

    def permuted(self, perm: Sequence[int], block_order: Sequence[int] | None = None) -> XiSample:
        """Reorder entries by ``perm`` (new position i holds old entry perm[i])."""
        inv = {old: new for new, old in enumerate(perm)}
        blocks = tuple(tuple(sorted(inv[i] for i in b)) for b in self.blocks)
        lstar = self.lstar
        if block_order is not None:
            blocks = tuple(blocks[k] for k in block_order)
            lstar = tuple(lstar[k] for k in block_order)
        return replace(self, values=tuple(self.values[i] for i in perm), blocks=blocks, lstar=lstar)


def check_structure(sample: XiSample, tol: float = XI_TOL) -> list[str]:
    """Problems with a sample's structural invariants; empty when valid."""
    problems = []
    vals = np.asarray(sample.values, dtype=float)
    if len(vals) > MAX_PROFILE_LENGTH:
        problems.append(f"length {len(vals)} exceeds {MAX_PROFILE_LENGTH}")
    if ((vals < 0) | (vals > 1)).any():
        problems.append("entry outside [0, 1]")
    if abs(float(np.sum(vals)) - 1.0) > tol:
        problems.append(f"sum {float(np.sum(vals))!r} differs from 1")
    seen: set[int] = set()
    for s, block in enumerate(sample.blocks):
        if seen & set(block):
            problems.append("blocks overlap")
        seen |= set(block)
        got = float(np.sum(vals[list(block)]))
        if abs(got - sample.lstar[s]) > tol:
            problems.append(f"block {s + 1} sums to {got}, expected {sample.lstar[s]}")
    if sample.family is Family.R_STAR:
        rest = vals[sample.leftover()]
        if int(np.sum(rest > sample.beta + tol)) > 1:
            problems.append("more than one leftover entry exceeds beta")
    return problems


@dataclass
class _Batch:
    """Zero-padded profiles plus the tuple each was built from."""

    rows: np.ndarray
    owner: np.ndarray  # block index per column (-1 for leftover)
    lstar: np.ndarray
    betas: np.ndarray
    r: np.ndarray

    def sample(self, i: int, family: Family, rng: np.random.Generator | None, index: int) -> XiSample:
        row = self.rows[i]
        keep = np.flatnonzero(row > 0.0)
        values = row[keep]
        owner = self.owner[keep]
        perm = rng.permutation(len(values)) if rng is not None else np.arange(len(values))
        values, owner = values[perm], owner[perm]
        r = int(self.r[i])
        blocks = tuple(tuple(int(j) for j in np.flatnonzero(owner == s)) for s in range(r))
        return XiSample(
            values=tuple(float(v) for v in values),
            blocks=blocks,
            lstar=tuple(float(x) for x in self.lstar[i, :r]),
            beta=float(self.betas[i]) if family is Family.R_STAR else None,
            family=family,
            index=index,
        )


class InfeasibleCaseError(ValueError):
    pass


_BOX_CACHE: dict[tuple[str, float], np.ndarray] = {}


def _feasible_box(case: CaseSpec, eps1: float) -> np.ndarray:
    """Per-coordinate hull of feasible tuples from a fixed pilot draw, padded."""
    key = (case.id, eps1)
    if key not in _BOX_CACHE:
        pilot = np.random.default_rng(0)
        found = []
        for _ in range(3):
            lstar, betas, r = _propose(case, pilot, 100_000, eps1)
            ok = case.feasible(lstar, betas, r, eps1)
            found.append(lstar[ok])
        pts = np.concatenate(found)
        if len(pts) == 0:
            box = np.array([[0.0] * MAX_R, [1.0] * MAX_R])
        else:
            nan = np.isnan(pts)
            box = np.array([np.where(nan, np.inf, pts).min(axis=0), np.where(nan, -np.inf, pts).max(axis=0)])
            box[:, ~np.isfinite(box).all(axis=0)] = 0.0
            box[0] -= 0.01
            box[1] += 0.01
        _BOX_CACHE[key] = box
    return _BOX_CACHE[key]


def _propose_boxed(case: CaseSpec, rng: np.random.Generator, n: int, eps1: float):
    """Mix broad proposals with draws inside the pilot hull."""
    lstar, betas, r = _propose(case, rng, n, eps1)
    box = _feasible_box(case, eps1)
    inside = rng.random(n) < 0.75
    mask = np.arange(MAX_R)[None, :] < r[:, None]
    u = rng.uniform(box[0], box[1], (n, MAX_R))
    u = -np.sort(-np.where(mask, u, -np.inf), axis=1)
    u = np.where(mask, u, np.nan)
    lstar[inside] = u[inside]
    return lstar, betas, r


def _propose(case: CaseSpec, rng: np.random.Generator, n: int, eps1: float):
    r = rng.choice(np.array(case.r_values), size=n)
    if case.family is Family.R_STAR:
        lo_b, hi_b = case.beta_range
        betas = np.where(rng.random(n) < 0.5, hi_b, rng.uniform(lo_b, hi_b, n))
        floor = betas
    else:
        betas = np.full(n, np.nan)
        floor = np.full(n, 0.01 - eps1)
        if case.lstar_min is not None:
            floor = np.maximum(floor, eval_points(case.lstar_min, {"beta": betas}, eps1))
    top = 0.5 + eps1
    # two proposal shapes: independent uniforms, or a uniform total split randomly
    u = rng.uniform(floor[:, None], top, (n, MAX_R))
    total = rng.uniform(0, 1, n) * (case.sum_cap - r * floor) + r * floor
    w = rng.standard_exponential((n, MAX_R))
    mask = np.arange(MAX_R)[None, :] < r[:, None]
    w = np.where(mask, w, 0.0)
    w /= np.maximum(w.sum(axis=1, keepdims=True), 1e-300)
    v = floor[:, None] + w * (total - r * floor)[:, None]
    lstar = np.where(rng.random(n)[:, None] < 0.5, u, v)
    lstar = -np.sort(-np.where(mask, lstar, -np.inf), axis=1)
    lstar = np.where(mask, lstar, np.nan)
    return lstar, betas, r


def _push(case: CaseSpec, rng, lstar, betas, r, eps1: float, steps: int = 16):
    """Move one coordinate of each tuple as far as feasibility allows."""
    n = len(r)
    lstar = lstar.copy()
    betas = betas.copy()
    coord = rng.integers(0, MAX_R + 1, n)
    has_beta = case.family is Family.R_STAR and case.beta_range[0] < case.beta_range[1]
    coord = np.where(coord >= r, np.where(has_beta, MAX_R, 0), coord)
    coord = np.where((r == 0) & ~has_beta, -1, coord)
    up = rng.random(n) < 0.5
    start_l, start_b = lstar.copy(), betas.copy()
    rows = np.arange(n)
    cur = np.zeros(n)
    goal = np.zeros(n)
    on_l = (coord >= 0) & (coord < MAX_R)
    on_b = coord == MAX_R
    safe = np.clip(coord, 0, MAX_R - 1)
    cur[on_l] = start_l[rows[on_l], safe[on_l]]
    cur[on_b] = start_b[on_b]
    if case.family is Family.R_STAR:
        goal[on_l] = np.where(up[on_l], 0.5 + eps1, betas[on_l])
        goal[on_b] = np.where(up[on_b], case.beta_range[1], case.beta_range[0])
    else:
        goal[on_l] = np.where(up[on_l], 0.5 + eps1, 0.0)
    lo = np.zeros(n)
    hi = np.ones(n)
    active = on_l | on_b
    for _ in range(steps):
        t = 0.5 * (lo + hi)
        val = cur + t * (goal - cur)
        trial_l, trial_b = start_l.copy(), start_b.copy()
        trial_l[rows[on_l], safe[on_l]] = val[on_l]
        trial_b[on_b] = val[on_b]
        ok = case.feasible(trial_l, trial_b, r, eps1)
        lo = np.where(ok, t, lo)
        hi = np.where(ok, hi, t)
    val = cur + lo * (goal - cur)
    lstar[rows[on_l], safe[on_l]] = val[on_l]
    betas[on_b] = val[on_b]
    good = case.feasible(lstar, betas, r, eps1) & active
    lstar[~good] = start_l[~good]
    betas[~good] = start_b[~good]
    return lstar, betas


def sample_tuples(case: CaseSpec, rng: np.random.Generator, n: int, eps1: float = 0.0, max_rounds: int = 200):
    """Draw ``n`` feasible tuples; about a third are pushed onto a constraint boundary."""
    got_l, got_b, got_r = [], [], []
    have = 0
    tried = accepted = 0
    for _ in range(max_rounds):
        rate = max(accepted, 1) / max(tried, 1) if tried else 0.25
        m = int(min(max(1.3 * (n - have) / rate, 1024), 200_000))
        lstar, betas, r = _propose_boxed(case, rng, m, eps1)
        ok = case.feasible(lstar, betas, r, eps1)
        tried += m
        accepted += int(ok.sum())
        if ok.any():
            got_l.append(lstar[ok])
            got_b.append(betas[ok])
            got_r.append(r[ok])
            have += int(ok.sum())
        if have >= n:
            break
        if have == 0 and tried >= MAX_BLIND_PROPOSALS:
            break
    if have == 0:
        raise InfeasibleCaseError(f"case {case.id}: no feasible tuple in {tried} proposals")
    lstar = np.concatenate(got_l)[:n]
    betas = np.concatenate(got_b)[:n]
    r = np.concatenate(got_r)[:n]
    if len(r) < n:
        idx = rng.integers(0, len(r), n)
        lstar, betas, r = lstar[idx], betas[idx], r[idx]
    pick = rng.random(n) < 0.35
    if pick.any():
        pl, pb = _push(case, rng, lstar[pick], betas[pick], r[pick], eps1)
        lstar[pick], betas[pick] = pl, pb
    return lstar, betas, r


def _endpoints(targets) -> np.ndarray:
    pts = [targets[0]]
    for region in targets[1:]:
        pts.extend(region.endpoints.tolist())
    pts = np.array(pts)
    return np.unique(np.concatenate([pts, 1.0 - pts]))


def _fillers(rng, n: int, amount: np.ndarray, size_hi: np.ndarray, mode_exact: np.ndarray, slots: int):
    """Split ``amount`` into pieces no larger than ``size_hi`` using at most ``slots`` columns."""
    # lower size bound keeps the slot count sufficient for any amount <= 1
    floor = 1.2 / (slots - 1)
    tiny = rng.random(n) < 0.1
    frac = np.where(tiny, 0.05, 0.5)
    size_lo = np.minimum(np.maximum(frac * size_hi, floor), size_hi)
    size_lo = np.where(mode_exact, size_hi, size_lo)
    groups = [g for g in (tiny, ~tiny) if g.any()]
    widths = [min(slots - 1, int(np.ceil(np.max(amount[g] / size_lo[g]))) + 1) for g in groups]
    out = np.zeros((n, max(widths, default=0) + 1))
    for g, width in zip(groups, widths):
        m = int(g.sum())
        lo, hi = size_lo[g], size_hi[g]
        sizes = lo[:, None] + (hi - lo)[:, None] * rng.random((m, width))
        csum = np.cumsum(sizes, axis=1)
        pieces = np.where(csum <= amount[g][:, None], sizes, 0.0)
        out[g, :width] = pieces
        out[g, -1] = np.maximum(amount[g] - pieces.sum(axis=1), 0.0)
    return out


def build_profiles(case: CaseSpec, rng: np.random.Generator, n: int, eps1: float = 0.0) -> _Batch:
    """Profiles around freshly sampled tuples, mixing several hostile shapes."""
    lstar, betas, r = sample_tuples(case, rng, n, eps1)
    targets = case.targets(eps1)
    used = np.arange(MAX_R)[None, :] < r[:, None]
    blocks = np.where(used, lstar, 0.0)

    # split each block into one to three pieces
    n_pieces = rng.choice([1, 2, 3], p=[0.6, 0.25, 0.15], size=(n, MAX_R))
    cuts = np.sort(rng.random((n, MAX_R, 2)), axis=2)
    cuts[..., 0] = np.where(n_pieces >= 2, cuts[..., 0], 1.0)
    cuts[..., 1] = np.where(n_pieces == 3, cuts[..., 1], 1.0)
    cuts = np.sort(cuts, axis=2)
    fr = np.stack([cuts[..., 0], cuts[..., 1] - cuts[..., 0], 1.0 - cuts[..., 1]], axis=2)
    piece_vals = (blocks[..., None] * fr).reshape(n, MAX_R * 3)
    # make each block sum exactly to its target
    pv = piece_vals.reshape(n, MAX_R, 3)
    pv[..., 2] = blocks - pv[..., 0] - pv[..., 1]
    piece_vals = np.maximum(pv.reshape(n, MAX_R * 3), 0.0)
    owner = np.repeat(np.arange(MAX_R), 3)

    rest = 1.0 - piece_vals.sum(axis=1)
    rest = np.maximum(rest, 0.0)
    mode = rng.choice(4, p=[0.3, 0.2, 0.25, 0.25], size=n)
    threshold = targets[0]
    big = np.zeros(n)
    # single large leftover, often just below the long-entry threshold
    m2 = mode == 2
    near_top = threshold - 10 ** rng.uniform(-8, -1.5, n)
    big_raw = np.where(rng.random(n) < 0.5, near_top, rng.uniform(0, threshold, n))
    big[m2] = big_raw[m2]
    # sums placed just outside a target
    m3 = mode == 3
    ends = _endpoints(targets)
    e = ends[rng.integers(0, len(ends), n)]
    delta = 10 ** rng.uniform(-8, -2, n) * np.where(rng.random(n) < 0.5, -1, 1)
    base = np.where(rng.random(n) < 0.5, 0.0, blocks.sum(axis=1))
    big[m3] = (e + delta - base)[m3]
    big = np.clip(big, 0.0, rest)

    if case.family is Family.R_STAR:
        size_hi = betas.copy()
    else:
        size_hi = rng.uniform(0.02, 0.35, n)
    slots = MAX_PROFILE_LENGTH - 3 * MAX_R - 1
    fill = _fillers(rng, n, rest - big, size_hi, mode == 1, slots)
    rows = np.concatenate([piece_vals, big[:, None], fill], axis=1)
    owner = np.concatenate([owner, np.full(1 + fill.shape[1], -1)])
    # exact normalisation: put the float residue on the largest leftover entry
    resid = 1.0 - rows.sum(axis=1)
    left = rows[:, 3 * MAX_R :]
    j = np.argmax(left, axis=1) + 3 * MAX_R
    rows[np.arange(n), j] += resid
    # zero out empty columns beyond the length cap
    return _Batch(rows, owner, lstar, betas, r)


def _case_rng(case: CaseSpec, seed: int, eps1: float) -> np.random.Generator:
    salt = zlib.crc32(f"{case.id}|{eps1!r}".encode())
    return np.random.default_rng([int(seed), salt])


def sample_xi(case: CaseSpec, rng_seed: int, count: int, eps1: float = 0.0) -> Iterator[XiSample]:
    """Deterministic stream of structurally valid profiles for ``case``."""
    if count > MAX_COUNT:
        raise ValueError(f"count must be at most {MAX_COUNT}")
    rng = _case_rng(case, rng_seed, eps1)
    done = 0
    while done < count:
        n = min(BATCH, count - done)
        batch = build_profiles(case, rng, n, eps1)
        for i in range(n):
            yield batch.sample(i, case.family, rng, done + i)
        done += n


# ---------------------------------------------------------------------------
# falsification


@dataclass
class FalsificationResult:
    case_id: str
    seed: int
    eps1: float
    checked: int
    counterexamples: list[XiSample] = field(default_factory=list)
    n_counterexamples: int = 0
    undecided: int = 0
    seconds: float = 0.0

    @property
    def status(self) -> str:
        if self.n_counterexamples:
            return FALSIFIED
        if self.undecided:
            return INCONCLUSIVE
        return FALSIFICATION_PASSED

    @property
    def passed(self) -> bool:
        return self.status == FALSIFICATION_PASSED


def _confirm(sample: XiSample, case: CaseSpec, eps1: float) -> bool:
    """Independent recheck of a counterexample with the generic option checker."""
    if case.regions is not None or sample.length > 24:
        return True
    res = check_options(sample.values, case.representative_a, eps1)
    return res.all_fail


def falsify_case(
    case: CaseSpec,
    seed: int,
    count: int,
    eps1: float = 0.0,
    stop_after: int | None = None,
) -> FalsificationResult:
    """Search ``count`` hostile profiles for one that satisfies no option.

    ``stop_after`` ends the search once that many counterexamples are found.
    """
    if count > MAX_COUNT:
        raise ValueError(f"count must be at most {MAX_COUNT}")
    t0 = time.perf_counter()
    rng = _case_rng(case, seed, eps1)
    targets = case.targets(eps1)
    result = FalsificationResult(case.id, seed, eps1, 0)
    done = 0
    while done < count:
        n = min(BATCH, count - done)
        batch = build_profiles(case, rng, n, eps1)
        verdict = decide_profiles(batch.rows, targets)
        result.undecided += int(np.sum(verdict < 0))
        for i in np.flatnonzero(verdict == 0):
            sample = batch.sample(int(i), case.family, None, done + int(i))
            if not _confirm(sample, case, eps1):
                result.undecided += 1
                continue
            result.n_counterexamples += 1
            if len(result.counterexamples) < STORED_COUNTEREXAMPLES:
                result.counterexamples.append(sample)
        done += n
        result.checked = done
        if stop_after is not None and result.n_counterexamples >= stop_after:
            break
    result.seconds = time.perf_counter() - t0
    return result


def profile_verdict(values: Sequence[float], case: CaseSpec, eps1: float = 0.0) -> int:
    """1 if some option holds for the profile, 0 if none, -1 if undecided."""
    row = np.asarray(values, dtype=float)[None, :]
    return int(decide_profiles(row, case.targets(eps1))[0])


@dataclass
class CombinatoricsReport:
    results: list[FalsificationResult]
    mutant: FalsificationResult | None
    seconds: float

    @property
    def passed(self) -> bool:
        ok = all(r.passed for r in self.results)
        if self.mutant is not None:
            ok = ok and self.mutant.n_counterexamples > 0
        return ok


def verify_combinatorics(
    cases: Sequence[CaseSpec] | None = None,
    seeds: Sequence[int] = (1, 42, 2024),
    count: int = 100_000,
    eps1: float = 0.0,
    mutant: bool = True,
) -> CombinatoricsReport:
    t0 = time.perf_counter()
    cases = case_catalog() if cases is None else cases
    results = [falsify_case(c, s, count, eps1) for c in cases for s in seeds]
    mres = falsify_case(mutant_case(eps1), seeds[0], count, eps1, stop_after=1) if mutant else None
    return CombinatoricsReport(results, mres, time.perf_counter() - t0)
