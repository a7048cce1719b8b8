"""Catalog of the remainder terms for each a-range, and their verification.

Each a-range carries an ordered list of remainder terms. A term is either a
nested omega integral or a closed-form sum of log powers, together with the
upper bound it is claimed to satisfy. Verification computes every term, checks
value + err < bound, and checks that the summed terms stay under the budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence, Union

from .buchstab import PiecewiseOmega, UpperOmega, build_omega
from .expr import BoundExpr, const, emax, emin, var
from .quadrature import (
    DEFAULT_TOL,
    ArithSpec,
    ArithTerm,
    IntegralSpec,
    OmegaKernel,
    QuadratureBudgetError,
    eval_arith_bound,
    integrate,
)

BUDGET = 0.99999
CHECKSUM_TOL = 1e-4
# float allowance so a decimal difference of exactly CHECKSUM_TOL still passes
_CHECKSUM_ROUNDING = 1e-12
# rounding allowance charged to closed-form terms
ARITH_ERR = 1e-12

CASE_IDS = ("a<=0.53", "0.53-0.545", "0.545-0.57", "0.57-0.59", "0.59-0.61", "a>0.61")

a1, a2, a3, a4 = (var(f"alpha{i}") for i in range(1, 5))
e1 = var("eps1")
HALF = 0.5 + e1

ThetaSpec = Union[IntegralSpec, ArithSpec]


@dataclass(frozen=True, eq=False)
class ThetaEntry:
    id: str
    spec: ThetaSpec
    claimed_bound: float
    source: str = ""

    @property
    def kind(self) -> str:
        return "arith" if isinstance(self.spec, ArithSpec) else f"{len(self.spec.vars)}d"


@dataclass(frozen=True, eq=False)
class DecompositionCase:
    a_case: str
    label: str
    beta: float
    thetas: tuple[ThetaEntry, ...]
    claimed_total: float

    def __post_init__(self) -> None:
        if self.a_case not in CASE_IDS:
            raise ValueError(f"unknown case {self.a_case!r}")
        for t in self.thetas:
            if not 0 < t.claimed_bound < 1:
                raise ValueError(f"{t.id}: claimed bound must lie in (0, 1)")
        if not self.claimed_total < BUDGET:
            raise ValueError("claimed total must stay below the budget")

    @property
    def bound_sum(self) -> float:
        return math.fsum(t.claimed_bound for t in self.thetas)

    def theta(self, theta_id: str) -> ThetaEntry:
        for t in self.thetas:
            if t.id == theta_id:
                return t
        raise KeyError(theta_id)


# ---------------------------------------------------------------------------
# builders


def _two(l1, l2) -> IntegralSpec:
    """int int omega((1-a1-a2)/a2) / (a1 a2^2)."""
    c = 1 - a1
    kernel = OmegaKernel((1 - a1 - a2) / a2, a1 * a2 * a2, (c / 2, c / 3, c / 4))
    return IntegralSpec(("alpha1", "alpha2"), (l1, l2), kernel)


def _four(l1, l2, l3, l4) -> IntegralSpec:
    """Four-fold omega((1-a1-a2-a3-a4)/a4) / (a1 a2 a3 a4^2)."""
    c = 1 - a1 - a2 - a3
    kernel = OmegaKernel((c - a4) / a4, a1 * a2 * a3 * a4 * a4, (c / 2, c / 3, c / 4))
    return IntegralSpec(("alpha1", "alpha2", "alpha3", "alpha4"), (l1, l2, l3, l4), kernel)


def _arith(*terms: tuple) -> ArithSpec:
    return ArithSpec(tuple(ArithTerm(*t) for t in terms))


def _log_tail(lo: float, mid: float, top: float, beta: float) -> ArithSpec:
    """The three-term log-power bound sharing one small ratio."""
    return _arith(
        (((mid, lo, 6),), beta * 720),
        (((mid, lo, 5), (top, mid, 1)), beta * 120),
        (((mid, lo, 4), (top, mid, 2)), beta * 48),
    )


S3 = a1 + a2 + a3
CAP4 = (1 - S3) / 2


def _entries(label: str, rows: Sequence[tuple[ThetaSpec, float]]) -> tuple[ThetaEntry, ...]:
    out = []
    for i, (spec, bound) in enumerate(rows, start=1):
        out.append(ThetaEntry(f"theta{i}", spec, bound, f"a in {label}, Theta_{i}, printed bound < {bound}"))
    return tuple(out)


def _case_low() -> DecompositionCase:
    rows = [
        (_two((0.36, HALF), (((0.71 - a1) / 2, 0.64 - a1), (0.71 - a1, (1 - a1) / 2))), 0.513),
        (_four((0.36, HALF), (0.07, emin(a1, (0.71 - a1) / 2)), (0.07, emin(a2, 0.64 - a1 - a2)), (0.07, a3)), 0.079),
        (_two((0.07, 0.29), ((0.71 - a1) / 2, a1)), 0.08),
        (_four((0.22, 0.29), (0.07, emin(a1, (0.71 - a1) / 2)), (0.07, a2), (emax(0.36 - a1, (0.71 - S3) / 2), a3)), 0.112),
        (_four((0.07, 0.22), (0.07, emin(a1, (0.71 - a1) / 2)), (0.07, a2), (emax(0.07, (0.71 - S3) / 2), a3)), 0.063),
        # six-fold box integrals with omega <= 1 pulled out
        (_arith((((0.29, 0.18, 1), (0.29, 0.145, 1), (0.145, 0.07, 4)), 0.07 * 24)), 0.056),
        (_arith((((0.29, 0.07, 1), (0.145, 0.07, 5)), 0.07 * 120)), 0.035),
    ]
    return DecompositionCase("a<=0.53", "a <= 0.53", 0.07, _entries("a <= 0.53", rows), 0.938)


def _case_0530() -> DecompositionCase:
    lab = "(0.53, 0.545]"
    c2 = emin(0.595 - a1, (0.715 - a1) / 2)
    rows = [
        (_two((0.474, HALF), (c2, (1 - a1) / 2)), 0.185),
        (_four((0.474, HALF), (0.09, c2), (0.09, a2), (0.09, emin(a3, CAP4))), 0.001),
        (_two((0.375, 0.427), ((0.573 - a1, 0.655 - a1), (0.685 - a1, (1 - a1) / 2))), 0.175),
        (_two((0.375, 0.427), (emax(0.08, 0.474 - a1, (0.655 - a1) / 2), 0.526 - a1)), 0.01),
        (_four((0.375, 0.427), (emax(0.08, 0.474 - a1), emin(0.526 - a1, (0.655 - a1) / 2)),
               (0.08, a2), (0.08, emin(a3, CAP4))), 0.013),
        (_two(((0.285, 0.315), (0.345, 0.375)), (0.595 - a1, emin(a1, (1 - a1) / 2))), 0.08),
        (_two(((0.285, 0.315), (0.345, 0.375)), (emax(0.485 - a1, (0.655 - a1) / 2), 0.515 - a1)), 0.062),
        (_four((0.345, 0.375), (0.485 - a1, (0.655 - a1) / 2), (0.08, a2), (0.08, emin(a3, CAP4))), 0.012),
        (_four((0.285, 0.315), (0.08, 0.405 - a1), (0.08, a2), (0.08, emin(a3, CAP4))), 0.003),
        (_two((0.655 / 3, 0.285), ((0.655 - a1) / 2, emin(a1, 0.526 - a1))), 0.01),
        (_four((0.08, 0.285), (0.08, emin(a1, (0.655 - a1) / 2)), (0.08, a2),
               (emax(0.08, (0.655 - S3) / 2), emin(a3, CAP4))), 0.296),
        (_log_tail(0.08, 0.17, 0.285, 0.08), 0.04),
    ]
    return DecompositionCase("0.53-0.545", lab, 0.08, _entries(lab, rows), 0.887)


def _case_0545() -> DecompositionCase:
    lab = "(0.545, 0.57]"
    rows = [
        (_two((0.475, HALF), (0.6 - a1, (1 - a1) / 2)), 0.166),
        (_two((0.3, 0.4), (0.6 - a1, emin(a1, (1 - a1) / 2))), 0.187),
        (_two((0.475 / 2, 0.385), (emax(0.14, 0.475 - a1), emin(a1, 0.525 - a1))), 0.302),
        (_four((0.335, 0.4), (0.475 - a1, emin(0.14, 0.525 - a1)), (0.075, a2), (0.075, emin(a3, CAP4))), 0.032),
        (_four((0.075, 0.325), (0.075, emin(a1, 0.4 - a1)), (0.075, a2),
               (emax((0.615 - S3) / 2, 0.475 - a1 - a2), emin(a3, CAP4))), 0.07),
        (_four((0.075, 0.325), (0.075, emin(a1, 0.4 - a1)), (0.075, a2),
               (emax(0.075, (0.615 - S3) / 2), emin(a3, CAP4, 0.4 - a1 - a2))), 0.01),
        (_log_tail(0.075, 0.155, 0.4, 0.075), 0.1),
    ]
    return DecompositionCase("0.545-0.57", lab, 0.075, _entries(lab, rows), 0.867)


def _case_0570() -> DecompositionCase:
    lab = "(0.57, 0.59]"
    r15 = (0.455 - a1, emin(a1, (0.685 - a1) / 2))
    r19 = (emax(0.075, 0.315 - a1), emin(a1, 0.38 - a1))
    rows = [
        (_two((0.455, HALF), (0.62 - a1, (1 - a1) / 2)), 0.2029),
        (_two((0.455, 0.475), ((0.685 - a1) / 2, 0.58 - a1)), 0.0099),
        (_four((0.455, HALF), (0.075, emin(0.58 - a1, (0.685 - a1) / 2)), (0.075, a2),
               (0.075, emin(a3, CAP4))), 0.0038),
        (_two((0.42, 0.455), (0.685 - a1, (1 - a1) / 2)), 0.0345),
        (_two((0.42, 0.455), ((0.685 - a1) / 2, 0.58 - a1)), 0.0502),
        (_four((0.42, 0.455), (0.105, (0.685 - a1) / 2), (0.105, a2), (0.105, emin(a3, CAP4))), 0.0004),
        (_two((0.315, 0.38), (0.62 - a1, emin(a1, (1 - a1) / 2))), 0.0889),
        (_two((0.315, 0.38), (emax(0.145, (0.62 - a1) / 2), 0.545 - a1)), 0.1993),
        (_four((0.315, 0.38), (0.455 - a1, emax(0.145, (0.62 - a1) / 2)), (0.455 - a1, a2),
               (0.455 - a1, emin(a3, CAP4))), 0.0114),
        (_two((0.31, 0.315), (0.62 - a1, a1)), 0.0007),
        (_two((0.29, 0.315), ((0.62 - a1) / 2, 0.58 - a1)), 0.1343),
        (_four((0.29, 0.315), (0.42 - a1, (0.62 - a1) / 2), (0.42 - a1, a2), (0.42 - a1, emin(a3, CAP4))), 0.0020),
        (_four((0.29, 0.305), (0.075, (0.62 - a1) / 2), (0.075, a2), (0.075, emin(0.38 - a1, a3, CAP4))), 0.0092),
        (_two((0.075, 0.29), (emin(0.2275, (0.685 - a1) / 2), a1)), 0.1145),
        (_four((0.075, 0.29), r15, (0.075, 0.38 - a1), (emax(0.075, (0.62 - S3) / 2), emin(a3, CAP4))), 0.0116),
        (_four((0.075, 0.29), r15, (0.42 - a1, a2),
               (emax(0.075, (0.62 - S3) / 2), emin(a3, 0.38 - a1, CAP4))), 0.0129),
        (_four((0.075, 0.29), r15, (0.42 - a1, a2), (emax(0.42 - a1, (0.62 - S3) / 2), emin(a3, CAP4))), 0.0027),
        (_four((0.105, 0.29), (0.42 - a1, emin(a1, 0.455 - a1)), (0.105, a2),
               (emax(0.42 - a1, (0.62 - S3) / 2), emin(a3, CAP4))), 0.0012),
        (_four((0.075, 0.29), r19, (0.075, a2), (0.455 - a2 - a3, emin(a3, CAP4))), 0.0048),
        (_four((0.075, 0.29), r19, (0.075, a2), (0.455 - a1 - a2, emin(a3, 0.38 - a2 - a3))), 0.0252),
        (_four((0.075, 0.29), (0.075, emin(a1, 0.315 - a1)), (0.075, a2),
               (emax(0.075, (0.62 - S3) / 2), emin(a3, CAP4))), 0.0127),
        (_log_tail(0.075, 0.16, 0.29, 0.075), 0.0524),
    ]
    return DecompositionCase("0.57-0.59", lab, 0.075, _entries(lab, rows), 0.9855)


def _case_0590() -> DecompositionCase:
    lab = "(0.59, 0.61]"
    r13 = (0.42 - a1, 0.2099)
    r17 = (0.07, emin(a1, 0.365 - a1))
    rows = [
        (_two((0.435, HALF), (0.635 - a1, (1 - a1) / 2)), 0.2182),
        (_two((0.435, HALF), (emin(0.105, (0.67 - a1) / 2), 0.58 - a1)), 0.0921),
        (_four((0.435, HALF), (0.07, emin(0.58 - a1, 0.105, (0.67 - a1) / 2)), (0.07, a2),
               (0.07, emin(a3, CAP4))), 0.0083),
        (_two((0.42, 0.435), (0.67 - a1, (1 - a1) / 2)), 0.0189),
        (_two((0.42, 0.435), ((0.67 - a1) / 2, 0.58 - a1)), 0.0356),
        (_four((0.42, 0.435), (0.09, (0.67 - a1) / 2), (0.09, a2), (0.09, emin(a3, CAP4))), 0.001),
        (_two((0.33, 0.365), (0.635 - a1, emin(a1, (1 - a1) / 2))), 0.0367),
        (_two((0.33, 0.365), (0.1524, 0.565 - a1)), 0.1186),
        (_four((0.33, 0.365), (0.435 - a1, 0.1524), (0.435 - a1, a2), (0.435 - a1, emin(a3, CAP4))), 0.0211),
        (_two((0.305, 0.33), (0.635 - a1, a1)), 0.0043),
        (_two((0.305, 0.33), ((0.635 - a1) / 2, 0.58 - a1)), 0.1178),
        (_four((0.305, 0.33), (0.42 - a1, (0.635 - a1) / 2), (0.42 - a1, a2), (0.42 - a1, emin(a3, CAP4))), 0.0062),
        (_two((0.2099, 0.305), (0.2099, emin(a1, 0.58 - a1))), 0.1723),
        (_four((0.21, 0.305), r13, (0.42 - a1, a2), (0.42 - a1, emin(a3, CAP4))), 0.0104),
        (_four((0.21, 0.305), r13, (0.42 - a1, a2), (0.07, emin(a3, CAP4, 0.365 - a1))), 0.0212),
        (_four((0.21, 0.305), r13, (0.07, emin(a2, 0.365 - a1)), (0.07, emin(a3, 0.365 - a1))), 0.0397),
        (_four((0.07, 0.295), r17, (0.07, a2),
               (emax((0.635 - S3) / 2, 0.42 - a2 - a3), emin(a3, CAP4))), 0.0105),
        (_four((0.07, 0.295), r17, (0.07, a2),
               (emax(0.07, (0.635 - S3) / 2), emin(a3, 0.365 - a2 - a3))), 0.023),
        (_arith(
            (((0.2, 0.07, 6),), 0.07 * 720),
            (((0.165, 0.07, 5), (0.23, 0.2, 1)), 0.07 * 120),
            (((0.135, 0.07, 5), (0.295, 0.23, 1)), 0.07 * 120),
        ), 0.0379),
    ]
    return DecompositionCase("0.59-0.61", lab, 0.07, _entries(lab, rows), 0.9937)


def _case_high() -> DecompositionCase:
    lab = "a > 0.61"
    r8 = (0.42 - a1, 0.21)
    rows = [
        (_two((0.42, HALF), (0.645 - a1, (1 - a1) / 2)), 0.2194),
        (_two((0.42, 0.48), (0.1, 0.58 - a1)), 0.1769),
        (_four((0.42, 0.5), (0.065, emin(0.1, 0.58 - a1)), (0.065, a2), (0.065, emin(a3, CAP4))), 0.0170),
        (_two((0.3225, 0.355), (0.645 - a1, emin(a1, (1 - a1) / 2))), 0.0191),
        (_two((0.325, 0.355), ((0.645 - a1) / 2, 0.58 - a1)), 0.1266),
        (_four((0.325, 0.355), (0.42 - a1, (0.645 - a1) / 2), (0.42 - a1, a2), (0.42 - a1, emin(a3, CAP4))), 0.0282),
        (_two((0.2099, 0.325), (0.2099, emin(a1, 0.58 - a1))), 0.2102),
        (_four((0.21, 0.325), r8, (0.065, emin(a2, 0.355 - a1)),
               (emax(0.065, (0.42 - a2 - a3) / 2), emin(a3, CAP4))), 0.0249),
        (_four((0.21, 0.325), r8, (0.42 - a1, a2),
               (emax(0.065, (0.42 - a2 - a3) / 2), emin(a3, 0.355 - a1, CAP4))), 0.0191),
        (_four((0.21, 0.325), r8, (0.42 - a1, a2),
               (emax(0.42 - a1, (0.42 - a2 - a3) / 2), emin(a3, CAP4))), 0.0280),
        (_arith(
            (((0.325, 0.21, 1), (0.145, 0.065, 5)), 0.065 * 24, 24 / 120),
            (((0.325, 0.21, 1), (0.18, 0.145, 1), (0.145, 0.065, 4)), 0.065 * 24),
            (((0.325, 0.21, 1), (0.21, 0.18, 1), (0.11, 0.065, 4)), 0.065 * 24),
        ), 0.0471),
        (_four((0.065, 0.325), (0.065, emin(a1, 0.355 - a1)), (0.065, a2),
               (emax(0.065, (0.645 - S3) / 2), emin(a3, CAP4))), 0.0180),
        (_arith(
            (((0.1775, 0.065, 6),), 0.065 * 720),
            (((0.22, 0.1775, 1), (0.1775, 0.065, 5)), 0.065 * 120),
            (((0.29, 0.22, 1), (0.135, 0.065, 5)), 0.065 * 120),
        ), 0.0576),
    ]
    return DecompositionCase("a>0.61", lab, 0.065, _entries(lab, rows), 0.9921)


_CATALOG: tuple[DecompositionCase, ...] | None = None


def case_catalog() -> list[DecompositionCase]:
    """All six cases, in increasing order of a."""
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = (_case_low(), _case_0530(), _case_0545(), _case_0570(), _case_0590(), _case_high())
    return list(_CATALOG)


def case_by_id(case_id: str) -> DecompositionCase:
    for c in case_catalog():
        if c.a_case == case_id:
            return c
    raise KeyError(f"unknown case {case_id!r}; known: {', '.join(CASE_IDS)}")


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class ThetaResult:
    id: str
    kind: str
    value: float
    err: float
    claimed_bound: float
    evaluations: int = 0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.value + self.err < self.claimed_bound

    @property
    def margin(self) -> float:
        return self.claimed_bound - self.value - self.err


@dataclass(frozen=True)
class CaseReport:
    a_case: str
    beta: float
    eps1: float
    thetas: tuple[ThetaResult, ...]
    claimed_total: float
    bound_sum: float
    aborted: str | None = None
    seconds: float = 0.0
    omega_kind: str = "table"

    @property
    def total_computed(self) -> float:
        return math.fsum(t.value for t in self.thetas)

    @property
    def total_err(self) -> float:
        return math.fsum(t.err for t in self.thetas)

    @property
    def all_thetas_pass(self) -> bool:
        return self.aborted is None and all(t.passed for t in self.thetas)

    @property
    def total_pass(self) -> bool:
        return self.aborted is None and self.total_computed + self.total_err < self.claimed_total

    @property
    def budget_pass(self) -> bool:
        return self.aborted is None and self.total_computed + self.total_err < BUDGET

    @property
    def checksum_ok(self) -> bool:
        return abs(self.bound_sum - self.claimed_total) <= CHECKSUM_TOL + _CHECKSUM_ROUNDING

    @property
    def passed(self) -> bool:
        return self.all_thetas_pass and self.total_pass and self.budget_pass

    @property
    def status(self) -> str:
        if self.omega_kind == "upper":
            return "SURVIVES" if self.total_pass else "EXPECTED-LOOSE"
        if self.aborted is not None:
            return "ABORTED"
        return "PASS" if self.passed else "FAIL"


def evaluate_theta(
    entry: ThetaEntry, omega: PiecewiseOmega | UpperOmega, tol: float = DEFAULT_TOL, eps1: float = 0.0
) -> ThetaResult:
    if isinstance(entry.spec, ArithSpec):
        value = eval_arith_bound(entry.spec)
        note = "" if value < entry.claimed_bound else "printed closed form exceeds its bound; possible typo"
        return ThetaResult(entry.id, entry.kind, value, ARITH_ERR, entry.claimed_bound, 0, note)
    res = integrate(entry.spec, omega, tol, eps1=eps1)
    notes = []
    if res.value == 0.0:
        notes.append("empty domain; review transcription")
    if res.sliver_nodes:
        notes.append(f"omega bounded by 1 at {res.sliver_nodes} nodes below u=1")
    return ThetaResult(entry.id, entry.kind, res.value, res.err, entry.claimed_bound, res.evaluations, "; ".join(notes))


def verify_case(
    case: DecompositionCase,
    omega: PiecewiseOmega | UpperOmega | None = None,
    tol: float = DEFAULT_TOL,
    eps1: float = 0.0,
) -> CaseReport:
    if tol > DEFAULT_TOL:
        raise ValueError(f"tol must be at most {DEFAULT_TOL}")
    if omega is None:
        omega = build_omega()
    kind = "upper" if isinstance(omega, UpperOmega) else "table"
    start = time.perf_counter()
    results: list[ThetaResult] = []
    aborted = None
    for entry in case.thetas:
        try:
            results.append(evaluate_theta(entry, omega, tol, eps1))
        except (QuadratureBudgetError, ValueError) as exc:
            aborted = f"{entry.id}: {exc}"
            break
    return CaseReport(
        case.a_case,
        case.beta,
        eps1,
        tuple(results),
        case.claimed_total,
        case.bound_sum,
        aborted,
        time.perf_counter() - start,
        kind,
    )


def verify_all(
    tol: float = DEFAULT_TOL,
    omega: PiecewiseOmega | UpperOmega | None = None,
    eps1: float = 0.0,
    cases: Sequence[str] | None = None,
) -> list[CaseReport]:
    if omega is None:
        omega = build_omega()
    chosen = case_catalog() if cases is None else [case_by_id(c) for c in cases]
    return [verify_case(c, omega, tol, eps1) for c in chosen]


def upper_envelope_comparison(tol: float = DEFAULT_TOL) -> list[CaseReport]:
    """Rerun every case with omega replaced by max(0.6, 1/u)."""
    return verify_all(tol, UpperOmega())
