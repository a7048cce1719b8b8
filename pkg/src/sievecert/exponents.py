"""Exponent threshold functions and box certification of their numeric claims.

Every function here is built as a :class:`~sievecert.expr.BoundExpr` in the
variables ``a`` (log tau / log x), ``sigma``, ``ell`` (a subset length),
``gamma`` and the constants ``nu`` and ``eps1``. A :class:`ClaimSpec` pairs a
displayed inequality ``lhs REL rhs`` with a *slack* expression that is
nonnegative exactly where the inequality holds but has no removable
singularities, so interval evaluation can certify it.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .expr import (
    NU,
    BoundExpr,
    as_expr,
    emax,
    emin,
    eval_interval_batch,
    eval_points,
    var,
)

a = var("a")
sigma = var("sigma")
ell = var("ell")
gamma = var("gamma")
nu = var("nu")
eps1 = var("eps1")

F = Fraction

# The nine exponent tuples (U, V, W, X, Y, Z).
CURLY_Z: tuple[tuple[Fraction, ...], ...] = (
    (F(1), F(4), F(4), F(3), F(4), F(1)),
    (F(1, 2), F(2), F(3, 2), F(3, 2), F(2), F(1, 2)),
    (F(2, 5), F(16, 5), F(12, 5), F(12, 5), F(16, 5), F(4, 5)),
    (F(2, 5), F(4, 5), F(3, 5), F(6, 5), F(8, 5), F(2, 5)),
    (F(1, 3), F(2, 3), F(1, 3), F(1), F(4, 3), F(1, 3)),
    (F(2, 7), F(16, 21), F(8, 21), F(8, 7), F(32, 21), F(8, 21)),
    (F(3, 8), F(2), F(3, 2), F(15, 8), F(5, 2), F(5, 8)),
    (F(1, 4), F(4, 3), F(2, 3), F(5, 4), F(5, 3), F(5, 12)),
    (F(1, 9), F(16, 9), F(8, 9), F(5, 3), F(20, 9), F(5, 9)),
)
Z_V_EQUALS_2 = (CURLY_Z[1], CURLY_Z[6])
Z_V_ABOVE_2_FIRST = (CURLY_Z[0],)
Z_V_ABOVE_2_SECOND = (CURLY_Z[2],)
Z_V_BELOW_2 = tuple(t for t in CURLY_Z if t[1] < 2)
Z_LOWER_BOUND_FAMILY = Z_V_EQUALS_2 + Z_V_ABOVE_2_SECOND + Z_V_BELOW_2

# the a-threshold below which the subset-length bounds mix in the Q-based terms
A_SPLIT = 0.64

# Montgomery/Huxley style exponent shapes: (xi, lambda, mu) means
# xi*a + ell*(lambda - mu*beta); the first entry is the 2 - 2 beta bound.
MEAN_VALUE_SHAPES = ((0, 2, 2), (1, 1, 2), (1, 4, 6), (1, 11, 14))


def _c(x: Fraction | float) -> BoundExpr:
    return as_expr(float(x))


# ---------------------------------------------------------------------------
# basic building blocks


def large_value_cap_full() -> BoundExpr:
    """max(1 - sigma - eps1, a + 1 - 2 sigma + nu + 2 eps1)."""
    return emax(1 - sigma - eps1, a + 1 - 2 * sigma + nu + 2 * eps1)


def large_value_cap_small_sigma() -> BoundExpr:
    """The second branch of the cap, used when sigma <= a + nu."""
    return a + 1 - 2 * sigma + nu + 2 * eps1


def large_value_cap_large_sigma() -> BoundExpr:
    """The first branch of the cap, used when sigma >= a + nu."""
    return 1 - sigma - eps1


def density_g(cap: BoundExpr) -> BoundExpr:
    return (3 * a + cap - 2 * eps1) / (3 * a + 3 * cap - 6 * eps1)


def density_h(cap: BoundExpr) -> BoundExpr:
    return (3 * a - 2 * cap + 4 * eps1) / (3 * a - cap + 2 * eps1)


def density_e(cap: BoundExpr) -> BoundExpr:
    """E = min(G, H); the sigma-threshold past which the large-value bound wins."""
    return emin(density_g(cap), density_h(cap))


def huxley_m(a_: BoundExpr = a, s: BoundExpr = sigma) -> BoundExpr:
    """min{3a/(6s-2), max{3a/(20s-14), 2a/(4s-1)}}."""
    return emin(3 * a_ / (6 * s - 2), emax(3 * a_ / (20 * s - 14), 2 * a_ / (4 * s - 1)))


def sigma_circ_1() -> BoundExpr:
    return emin(1.0, a + 1.0 / 3.0)


def sigma_circ_2() -> BoundExpr:
    return emax(0.3 * a + 0.7, a + 0.25)


def _q_branch(s: BoundExpr, k: int) -> BoundExpr:
    base = (a - 3 - nu) / (4 * (1 - 2 * s))
    if k == 1:
        return base + a * (3 - 3 * s) / ((3 * s - 1) * (1 - 2 * s))
    if k == 2:
        return base + a * (3 - 3 * s) / ((10 * s - 7) * (1 - 2 * s))
    if k == 3:
        return base + a * (4 - 4 * s) / ((4 * s - 1) * (1 - 2 * s))
    raise ValueError(k)


def q_small_m(k: int) -> BoundExpr:
    """m_k(a, sigma): the branch evaluated at sigma and at its sigma-circle endpoint."""
    circ = sigma_circ_1() if k == 1 else sigma_circ_2()
    return emin(_q_branch(sigma, k), _q_branch(circ, k))


def q_small_m_combined() -> BoundExpr:
    return emax(q_small_m(1), emin(q_small_m(2), q_small_m(3)))


def upsilon_q() -> BoundExpr:
    return 1 - huxley_m()


def lambda_q() -> BoundExpr:
    return 1 - q_small_m_combined()


# ---------------------------------------------------------------------------
# long-factor functions X1, X2, X3, Y1, Y2


def _long_factor_parts(cap: BoundExpr):
    g = density_g(cap)
    h = density_h(cap)
    parts = {
        "X1": (sigma - a / 4 + cap / 4 - g - 2 * eps1, 0.5 - g),
        "X2": (sigma - a / 4 + cap / 4 - h - 2 * eps1, 0.5 - h),
        "X3": (sigma - a / 6 + cap / 12 - g - 2 * eps1, 0.5 - g),
        "Y1": (sigma - (5 * a / 24 - 7.0 / 24 + sigma / 3 - nu / 24 + 2 * eps1 + g), 0.5 - g),
        "Y2": (sigma - (a / 6 - 1.0 / 3 + sigma / 3 + 2 * eps1 + g), 2.0 / 3 - g),
    }
    return parts


def long_factor_functions(cap: Optional[BoundExpr] = None) -> dict[str, BoundExpr]:
    cap = large_value_cap_full() if cap is None else cap
    return {k: n / d for k, (n, d) in _long_factor_parts(cap).items()}


def long_factor_threshold(cap: Optional[BoundExpr] = None) -> BoundExpr:
    f = long_factor_functions(cap)
    return emin(f["X1"], f["X2"], f["X3"], emax(f["Y1"], f["Y2"]))


# ---------------------------------------------------------------------------
# subset-length bounds built from the exponent tuples


def _lower_v2(t) -> BoundExpr:
    U, V, W, X, Y, Z = t
    return -2 * _c(U) * a - 2 * _c(X - 2) + 2 * _c(Y - V) * sigma - 2 * _c(Z) * nu + 4 * eps1


def _upper_v2(t) -> BoundExpr:
    U, V, W, X, Y, Z = t
    return 2 * _c(U - 1) * a + 2 * _c(X - 1) - 2 * _c(Y - V) * sigma + 2 * _c(Z) * nu - 4 * eps1


def _lower_second(cap: BoundExpr) -> BoundExpr:
    e = density_e(cap)
    head = (2 * a + 2 + 4 * nu - 10 * eps1) / 6
    first = (2 * a + 2 + 4 * nu - 6 * e - 10 * eps1) / (6 * (1.0 / 3 - e))
    second = (-1.5) * (head + cap / 2 - 1 - eps1)
    third = emin(
        *[
            (head + cap / mu - a / mu - lam / mu - 2 * eps1 / mu) / (1.0 / 3 - lam / mu)
            for lam, mu in ((1, 2), (4, 6))
        ]
    )
    return emin(first, emax(second, third))


def upsilon_star(cap: BoundExpr) -> BoundExpr:
    e = density_e(cap)
    first = (a + 1 + nu - 2 * e - 2 * eps1) / (2 * (1 - e))
    rest = [
        ((a + 1 + nu - 2 * eps1) / 2 + cap / mu - a / mu - lam / mu - 2 * eps1 / mu) / (1 - lam / mu)
        for lam, mu in ((1, 2), (4, 6))
    ]
    return emax(first, emax(*rest))


def _upper_v_above_2(t, cap: BoundExpr) -> BoundExpr:
    U, V, W, X, Y, Z = t
    e = density_e(cap)
    q = _c(U - 1) * a + _c(X - 1) + _c(Z) * nu
    r = float((W - 1) / (V - 2))
    first = (q - float(V - 2) * e - 2 * eps1) / (float(W - 1) - float(V - 2) * e)
    coef = float((W - 4) / (V - 6) - (W - 1) / (V - 2))
    second = ((4 * _c(U - 1) * a + float(4 * X - 3 * V + 2) + 4 * _c(Z) * nu - 8 * eps1)
              / float((V - 2) * (V - 6))) / coef
    q_over = (q - 2 * eps1) / float(V - 2)
    third = (q_over + cap / 2 - 1 - eps1) / (r - 1)
    fourth = emax(
        *[(q_over + (cap - a - lam - 2 * eps1) / mu) / (r - lam / mu) for lam, mu in ((1, 2), (4, 6))]
    )
    return emax(first, second, emin(third, fourth))


def _v_below_2_pieces(t):
    U, V, W, X, Y, Z = t
    p1 = (_c(U) * a + _c(X - 2) - _c(Y - V) * sigma + _c(Z) * nu - 2 * eps1) / float(V - 2)
    p2 = (_c(U - 1) * a + _c(X - 1) - _c(Y - V) * sigma + _c(Z) * nu - 2 * eps1) / float(V - 2)
    return p1, float((W - 2) / (V - 2)), p2, float((W - 1) / (V - 2))


def _lower_v_below_2(t, cap: BoundExpr, small_a: bool) -> BoundExpr:
    e = density_e(cap)
    p1, r1, _, _ = _v_below_2_pieces(t)
    simple = (sigma - p1) / (e - r1)
    if not small_a:
        return simple
    alt = emax(
        (-p1 + (2 + 2 * sigma - 7 * eps1) / 4) / (1 - r1),
        emin(
            (-p1 + (2 + 2 * sigma - a - 7 * eps1) / 4) / (0.75 - r1),
            (-p1 + (2 + 6 * sigma - a - 7 * eps1) / 8) / (0.75 - r1),
            (-p1 + (2 + 14 * sigma - a - 7 * eps1) / 16) / (13.0 / 16 - r1),
        ),
    )
    return emin(simple, alt)


def _upper_v_below_2_alt(t) -> BoundExpr:
    _, _, p2, r2 = _v_below_2_pieces(t)
    return emin(
        (-p2 + (2 + 2 * sigma - 7 * eps1) / 4) / (1 - r2),
        emax(
            *[
                (-p2 + (2 + mu * sigma - a - 7 * eps1) / (2 + mu)) / ((lam + 2) / (mu + 2) - r2)
                for lam, mu in ((1, 2), (4, 6), (11, 14))
            ]
        ),
    )


def _upper_v_below_2(t, cap: BoundExpr, small_a: bool) -> BoundExpr:
    e = density_e(cap)
    _, _, p2, r2 = _v_below_2_pieces(t)
    simple = (sigma - p2) / (e - r2)
    if not small_a:
        return simple
    return emax(simple, _upper_v_below_2_alt(t))


def lower_bound(t, cap: BoundExpr, small_a: bool = True) -> BoundExpr:
    """Lambda_*(a, sigma; t): lower end of the good subset lengths for tuple t."""
    if t in Z_V_EQUALS_2:
        return _lower_v2(t)
    if t in Z_V_ABOVE_2_SECOND:
        return _lower_second(cap)
    if t in Z_V_BELOW_2:
        return _lower_v_below_2(t, cap, small_a)
    raise ValueError(f"no lower bound is defined for tuple {t}")


def upper_bound(t, cap: BoundExpr, small_a: bool = True) -> BoundExpr:
    """Upsilon_2(a, sigma; t): upper end of the good subset lengths for tuple t."""
    if t in Z_V_EQUALS_2:
        return _upper_v2(t)
    if t[1] > 2:
        return _upper_v_above_2(t, cap)
    return _upper_v_below_2(t, cap, small_a)


def upper_bound_delta6(t, cap: BoundExpr) -> BoundExpr:
    """Upsilon_6(a, sigma; t), valid for sigma >= 0.75."""
    U, V, W, X, Y, Z = t
    e = density_e(cap)
    num = _c(U - 1) * a + _c(X - 4) - _c(Y - 6) * sigma + _c(Z) * nu - 2 * eps1
    return num / (float(W - 4) - float(V - 6) * e)


def max_lower_bound(cap: BoundExpr, small_a: bool = True) -> BoundExpr:
    return emax(*[lower_bound(t, cap, small_a) for t in Z_LOWER_BOUND_FAMILY])


def min_upper_bound(cap: BoundExpr, small_a: bool = True, with_delta6: bool = False) -> BoundExpr:
    terms = []
    for t in CURLY_Z:
        u2 = upper_bound(t, cap, small_a)
        terms.append(emax(u2, upper_bound_delta6(t, cap)) if with_delta6 else u2)
    return emin(upsilon_star(cap), *terms)


def _upper_bound_slack(t, cap: BoundExpr, thr: BoundExpr, small_a: bool) -> BoundExpr:
    """Nonsingular form of upper_bound(t) - thr.

    For tuples with V < 2 the simple branch is a quotient whose denominator
    E - r2 is positive when B < a and vanishes at B = a. Multiplying out
    keeps the sign and removes the pole.
    """
    if t in Z_V_BELOW_2:
        e = density_e(cap)
        _, _, p2, r2 = _v_below_2_pieces(t)
        simple = (sigma - p2) - thr * (e - r2)
        if not small_a:
            return simple
        return emax(simple, _upper_v_below_2_alt(t) - thr)
    return upper_bound(t, cap, small_a) - thr


def min_upper_bound_slack(cap: BoundExpr, thr: BoundExpr, small_a: bool, with_delta6: bool) -> BoundExpr:
    terms = []
    for t in CURLY_Z:
        s2 = _upper_bound_slack(t, cap, thr, small_a)
        terms.append(emax(s2, upper_bound_delta6(t, cap) - thr) if with_delta6 else s2)
    return emin(upsilon_star(cap) - thr, *terms)


def lambda_e(cap: BoundExpr) -> BoundExpr:
    return (1 - cap / 2 - sigma + eps1) / (1 - density_e(cap))


def upsilon_e1(cap: BoundExpr) -> BoundExpr:
    return (1 - cap + a - 2 * sigma + 2 * eps1) / (1 - 2 * density_e(cap))


def upsilon_e2(cap: BoundExpr) -> BoundExpr:
    """Valid for sigma >= 0.75, where 4 - 6E < 0."""
    e = density_e(cap)
    return emax(upsilon_e1(cap), (4 - cap + a - 6 * sigma + 6 * eps1) / (4 - 6 * e))


beta = var("beta")


def mean_value_exponent(lam: int, mu: int) -> BoundExpr:
    """log_x of M^(2-2beta) + T0 M^(lam-mu*beta) with M = x^ell and T0 = x^(a+eps1)."""
    return emax((2 - 2 * beta) * ell, a + eps1 + (lam - mu * beta) * ell)


def c3_exponent(t) -> BoundExpr:
    """log_x of tau^U M^(V beta - W) x^(X - Y sigma + Z nu + eps1)."""
    U, V, W, X, Y, Z = t
    return _c(U) * a + (_c(V) * beta - float(W)) * ell + float(X) - _c(Y) * sigma + _c(Z) * nu + eps1


def c4_exponents() -> tuple[BoundExpr, BoundExpr]:
    return (
        -a / 4 + (2 * beta - 1) * ell + 1.75 - 2 * sigma + nu / 4 - 4 * eps1,
        (2 * beta - 2) * ell + 2 - 2 * sigma - 4 * eps1,
    )


# ---------------------------------------------------------------------------
# claims and verdicts


class Relation(str, enum.Enum):
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="

    @property
    def strict(self) -> bool:
        return self in (Relation.LT, Relation.GT)


@dataclass(frozen=True, eq=False)
class ClaimSpec:
    """One numeric inequality to certify over a parameter box.

    ``guards`` are expressions that must be >= 0 at a point for the claim to
    apply there; ``slack`` is >= 0 (or > 0 for strict relations) exactly where
    the claim holds. When ``slack`` is omitted it defaults to the signed
    difference of the two sides.
    """

    id: str
    lhs: BoundExpr
    relation: Relation
    rhs: BoundExpr
    box: Mapping[str, tuple[float, float]]
    anchor: str
    guards: tuple[BoundExpr, ...] = ()
    slack: Optional[BoundExpr] = None
    rebuild: Optional[Callable[[float], "ClaimSpec"]] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "relation", Relation(self.relation))
        for name, (lo, hi) in self.box.items():
            if not lo <= hi:
                raise ValueError(f"{self.id}: box side {name} is empty")
        if self.slack is None:
            if self.relation in (Relation.LT, Relation.LE):
                object.__setattr__(self, "slack", self.rhs - self.lhs)
            else:
                object.__setattr__(self, "slack", self.lhs - self.rhs)
        needed = set(self.slack.free_variables())
        for g in self.guards:
            needed |= g.free_variables()
        missing = needed - set(self.box)
        if missing:
            raise ValueError(f"{self.id}: box does not cover {sorted(missing)}")

    def tightened(self, delta: float) -> ClaimSpec:
        """The same claim with its numeric constant moved ``delta`` against it."""
        if self.rebuild is None:
            raise ValueError(f"{self.id} has no tunable constant")
        return self.rebuild(delta)


class Status(str, enum.Enum):
    CERTIFIED = "CERTIFIED"
    FALSIFIED = "FALSIFIED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class Verdict:
    status: Status
    margin: float
    boxes_processed: int
    witness: Optional[dict[str, float]] = None
    unresolved: list[dict[str, tuple[float, float]]] = field(default_factory=list)
    worst_point: Optional[dict[str, float]] = None
    worst_slack: float = math.inf
    worst_lhs: float = math.nan
    worst_rhs: float = math.nan


DEFAULT_MARGIN = 1e-4
DEFAULT_MIN_WIDTH = 1e-5
DEFAULT_DEPTH_LIMIT = 80
MAX_BOXES = 4_000_000
BATCH = 20_000
MAX_REPORTED = 50


def _violates(relation: Relation, slack: np.ndarray) -> np.ndarray:
    return slack <= 0 if relation.strict else slack < 0


def certify(
    claim: ClaimSpec,
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
    min_width: float = DEFAULT_MIN_WIDTH,
    eps1_value: float = 0.0,
    margin: float = DEFAULT_MARGIN,
    max_boxes: int = MAX_BOXES,
) -> Verdict:
    """Branch-and-bound certification of ``claim`` over its box.

    A leaf is proven when the interval lower bound of the slack is at least
    ``margin``. Box centers double as probe points: the first center that
    satisfies every guard and violates the claim is returned as a witness.
    """
    names = sorted(claim.box)
    # work stack of (lo, hi, depth) batches; popping the newest keeps memory bounded
    stack = [(
        {k: np.array([float(claim.box[k][0])]) for k in names},
        {k: np.array([float(claim.box[k][1])]) for k in names},
        np.zeros(1, dtype=int),
    )]
    processed = 0
    cert_margin = math.inf
    unresolved: list[dict[str, tuple[float, float]]] = []
    worst = (math.inf, None)

    while stack:
        lo, hi, depth = stack.pop()
        if depth.size > BATCH:
            stack.append(({k: v[BATCH:] for k, v in lo.items()}, {k: v[BATCH:] for k, v in hi.items()}, depth[BATCH:]))
            lo = {k: v[:BATCH] for k, v in lo.items()}
            hi = {k: v[:BATCH] for k, v in hi.items()}
            depth = depth[:BATCH]
        n = depth.size
        processed += n
        keep = np.ones(n, dtype=bool)
        for g in claim.guards:
            _, g_hi, g_bad = eval_interval_batch(g, lo, hi, eps1_value)
            keep &= g_bad | (g_hi >= 0)
        s_lo, _, s_bad = eval_interval_batch(claim.slack, lo, hi, eps1_value)

        mid = {k: 0.5 * (lo[k] + hi[k]) for k in names}
        with np.errstate(all="ignore"):
            pt_slack = eval_points(claim.slack, mid, eps1_value)
            in_domain = np.ones(n, dtype=bool)
            for g in claim.guards:
                in_domain &= eval_points(g, mid, eps1_value) >= 0
        probe = in_domain & keep & np.isfinite(pt_slack)
        if probe.any():
            i = int(np.argmin(np.where(probe, pt_slack, np.inf)))
            if pt_slack[i] < worst[0]:
                worst = (float(pt_slack[i]), {k: float(mid[k][i]) for k in names})
        bad_pts = probe & _violates(claim.relation, pt_slack)
        if bad_pts.any():
            i = int(np.flatnonzero(bad_pts)[0])
            point = {k: float(mid[k][i]) for k in names}
            return _finish(claim, Status.FALSIFIED, float(pt_slack[i]), processed, eps1_value,
                           witness=point, worst=(float(pt_slack[i]), point))

        proven = keep & ~s_bad & (s_lo >= margin)
        if proven.any():
            cert_margin = min(cert_margin, float(s_lo[proven].min()))
        todo = keep & ~proven
        if not todo.any():
            continue
        widths = np.stack([hi[k] - lo[k] for k in names])
        too_small = (widths.max(axis=0) < min_width) | (depth >= depth_limit)
        stuck = todo & too_small
        for i in np.flatnonzero(stuck)[: MAX_REPORTED - len(unresolved)]:
            unresolved.append({k: (float(lo[k][i]), float(hi[k][i])) for k in names})
        if stuck.any() and len(unresolved) >= MAX_REPORTED:
            break
        split = todo & ~too_small
        if processed + 2 * int(split.sum()) > max_boxes:
            for i in np.flatnonzero(split)[: max(0, MAX_REPORTED - len(unresolved))]:
                unresolved.append({k: (float(lo[k][i]), float(hi[k][i])) for k in names})
            break
        idx = np.flatnonzero(split)
        if not idx.size:
            continue
        axis = _split_axes(claim, names, lo, hi, idx, widths, eps1_value)
        new_lo, new_hi = {}, {}
        for j, k in enumerate(names):
            sel = axis == j
            m = 0.5 * (lo[k][idx] + hi[k][idx])
            new_hi[k] = np.concatenate([np.where(sel, m, hi[k][idx]), hi[k][idx]])
            new_lo[k] = np.concatenate([lo[k][idx], np.where(sel, m, lo[k][idx])])
        stack.append((new_lo, new_hi, np.concatenate([depth[idx] + 1, depth[idx] + 1])))

    if unresolved:
        return _finish(claim, Status.INCONCLUSIVE, cert_margin, processed, eps1_value,
                       unresolved=unresolved, worst=worst)
    return _finish(claim, Status.CERTIFIED, cert_margin, processed, eps1_value, worst=worst)


def _split_axes(claim, names, lo, hi, idx, widths, eps1_value) -> np.ndarray:
    """Per box, the axis whose bisection most raises the mean lower bound of the halves.

    Ties and boxes where every trial half is singular fall back to the widest axis.
    """
    sub_lo = {k: lo[k][idx] for k in names}
    sub_hi = {k: hi[k][idx] for k in names}
    scores = np.full((len(names), idx.size), -np.inf)
    for j, k in enumerate(names):
        m = 0.5 * (sub_lo[k] + sub_hi[k])
        total = np.zeros(idx.size)
        for half_lo, half_hi in ((sub_lo[k], m), (m, sub_hi[k])):
            trial_lo = dict(sub_lo)
            trial_hi = dict(sub_hi)
            trial_lo[k], trial_hi[k] = half_lo, half_hi
            s_lo, _, bad = eval_interval_batch(claim.slack, trial_lo, trial_hi, eps1_value)
            total = total + np.where(bad, -np.inf, s_lo)
        scores[j] = total
    widest = widths[:, idx].argmax(axis=0)
    best = scores.argmax(axis=0)
    undecided = ~np.isfinite(scores.max(axis=0)) | (scores.max(axis=0) == scores.min(axis=0))
    return np.where(undecided, widest, best).astype(int)


def _finish(claim, status, margin, processed, eps1_value, witness=None, unresolved=None, worst=(math.inf, None)):
    v = Verdict(status, margin, processed, witness=witness, unresolved=unresolved or [])
    v.worst_slack, v.worst_point = worst
    if v.worst_point is not None:
        pt = {k: np.array([x]) for k, x in v.worst_point.items()}
        with np.errstate(all="ignore"):
            v.worst_lhs = float(eval_points(claim.lhs, pt, eps1_value)[0])
            v.worst_rhs = float(eval_points(claim.rhs, pt, eps1_value)[0])
    return v


# grid points this close to a pole of a displayed side are skipped
GRID_POLE_TOL = 1e-9


def grid_scan(claim: ClaimSpec, n: int = 400, eps1_value: float = 0.0) -> tuple[float, Optional[dict]]:
    """Evaluate the displayed inequality on a regular grid.

    Returns the smallest signed gap (positive when the claim holds) among
    in-domain points where the sides evaluate finitely, and where it occurs.
    """
    names = sorted(claim.box)
    dims = len(names)
    per_axis = n if dims <= 2 else max(8, int(round(n ** (2.0 / dims))))
    axes = [np.linspace(claim.box[k][0], claim.box[k][1], per_axis) for k in names]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = {k: m.ravel() for k, m in zip(names, mesh)}
    with np.errstate(all="ignore"):
        lhs = eval_points(claim.lhs, pts, eps1_value, GRID_POLE_TOL)
        rhs = eval_points(claim.rhs, pts, eps1_value, GRID_POLE_TOL)
        ok = np.isfinite(lhs) & np.isfinite(rhs)
        for g in claim.guards:
            ok &= eval_points(g, pts, eps1_value) >= 0
    gap = rhs - lhs if claim.relation in (Relation.LT, Relation.LE) else lhs - rhs
    gap = np.where(ok, gap, np.inf)
    i = int(np.argmin(gap))
    if not np.isfinite(gap[i]):
        return math.inf, None
    return float(gap[i]), {k: float(pts[k][i]) for k in names}


# ---------------------------------------------------------------------------
# the claim catalog

SIGMA_TOP = 1.0 - 1e-6
SIGMA_HALF = (1 + NU) / 2
TOP_SLIVER_PER_EPS1 = 1000.0


def _thr(value: float, sign: int) -> BoundExpr:
    """A threshold with its eps1 allowance: value - eps1 (sign -1) or value + eps1 (+1)."""
    return as_expr(value) + sign * eps1 if sign else as_expr(value)


def _smoothfull(cid: str, a_box: tuple[float, float], thr_value: float, tighten: float = 0.0) -> ClaimSpec:
    thr = thr_value - tighten
    cap = large_value_cap_full()
    parts = _long_factor_parts(cap)
    t = as_expr(thr)

    def cross(key):
        # N/D < thr with D < 0 is N > thr*D
        n, d = parts[key]
        return n - t * d

    slack = emax(cross("X1"), cross("X2"), cross("X3"), emin(cross("Y1"), cross("Y2")))
    return ClaimSpec(
        id=cid,
        lhs=long_factor_threshold(cap),
        relation=Relation.LT,
        rhs=t,
        box={"a": a_box, "sigma": (0.6, SIGMA_TOP)},
        anchor=f"long-factor lemma: min(X1, X2, X3, max(Y1, Y2)) < {thr_value} for a in [{a_box[0]}, {a_box[1]}]",
        guards=(a + 2 * eps1 - cap,),
        slack=slack,
        rebuild=lambda d: _smoothfull(cid, a_box, thr_value, tighten + d),
    )


def _largetau(tighten: float = 0.0) -> ClaimSpec:
    cap = large_value_cap_full()
    target = emin(density_h(cap), density_g(cap))
    return ClaimSpec(
        id="largetau",
        lhs=sigma - tighten,
        relation=Relation.GE,
        rhs=target,
        box={"a": (0.685, 0.77), "sigma": (0.6, 0.88)},
        anchor="large-tau lemma: sigma >= min(H, G) for a in [0.685, 0.77], sigma in [0.6, 0.88]",
        rebuild=lambda d: _largetau(tighten + d),
    )


def _largetau_high_sigma(which: str, tighten: float = 0.0) -> ClaimSpec:
    cap = large_value_cap_full()
    f = emax(
        (3 * a + 7 * cap - 14 * eps1) / (3 * a + 10 * cap - 20 * eps1),
        (4 * a + cap - 2 * eps1) / (4 * a + 4 * cap - 8 * eps1),
    )
    box = {"a": (0.685, 0.77), "sigma": (0.88, SIGMA_TOP), "ell": (0.35 - tighten, 0.48 + tighten)}
    if which == "upper":
        num = sigma + cap / 2 - f - eps1
        den = 1 - f
        # num/den rewritten so that the O(B) factors of num and den cancel
        spread = emax(3 * a + 10 * cap - 20 * eps1, 4 * a + 4 * cap - 8 * eps1)
        stable = 1 - spread / 3 * ((1 - sigma) / (cap - 2 * eps1) - 0.5)
        slack = stable - ell
        lhs, rel, rhs = ell, Relation.LE, num / den
        text = "ell <= (sigma + B/2 - F)/(1 - F)"
    else:
        num = sigma - a / 14 + cap / 14 - f - eps1
        den = 11.0 / 14 - f
        # the bound reads ell >= num/den with den < 0; the underlying need is ell*den <= num
        slack = num - ell * den
        lhs, rel, rhs = ell, Relation.GE, num / den
        text = "ell >= (sigma - a/14 + B/14 - F)/(11/14 - F)"
    return ClaimSpec(
        id=f"largetau-high-sigma-{which}",
        lhs=lhs,
        relation=rel,
        rhs=rhs,
        box=box,
        anchor=f"large-tau lemma, sigma >= 0.88 with ell in [0.35, 0.48]: {text}",
        # with eps1 > 0 the bound degenerates within O(eps1) of sigma = 1
        guards=(1 - TOP_SLIVER_PER_EPS1 * eps1 - sigma,),
        slack=slack,
        rebuild=lambda d: _largetau_high_sigma(which, tighten + d),
    )


def _smalltau_case1(cid: str, a_box, thr_value: float, tighten: float = 0.0) -> ClaimSpec:
    thr = thr_value + tighten
    q = 1 - emin(3 * a / (4 - 2 * gamma), 3 * a / (6 * gamma - 2))
    return ClaimSpec(
        id=cid,
        lhs=q,
        relation=Relation.GT,
        rhs=as_expr(thr),
        box={"a": a_box, "gamma": (0.6, 1.0)},
        anchor=f"small-tau lemma, case 1A: 1 - min(3a/(4-2g), 3a/(6g-2)) > {thr_value} for a in [{a_box[0]}, {a_box[1]}]",
        rebuild=lambda d: _smalltau_case1(cid, a_box, thr_value, tighten + d),
    )


def _smalltau_case1_edge(tighten: float = 0.0) -> ClaimSpec:
    thr = 0.375 + tighten
    s_star = a + nu - eps1
    return ClaimSpec(
        id="smalltau-1A-0.375",
        lhs=1 - 3 * a / (6 * s_star - 2),
        relation=Relation.GT,
        rhs=as_expr(thr),
        box={"a": (0.53, 0.545)},
        anchor="small-tau lemma, case 1A: 1 - 3a/(6(a + nu) - 2) > 0.375 for a in [0.53, 0.545]",
        rebuild=lambda d: _smalltau_case1_edge(tighten + d),
    )


def _smalltau_case2_rhs() -> BoundExpr:
    g = gamma
    return (
        1
        - (a - 3 - nu) / (4 * (1 - 2 * g))
        - emax(a * (3 - 3 * g) / ((2 - g) * (1 - 2 * g)), a * (3 - 3 * g) / ((3 * g - 1) * (1 - 2 * g)))
        + 35 * eps1
    )


def _smalltau_case2(cid: str, a_box, thr_value: float, from_edge: bool, tighten: float = 0.0) -> ClaimSpec:
    thr = thr_value - tighten
    g_lo = a_box[0] + NU if from_edge else 0.6
    guards = [a + 0.34 - gamma]
    if from_edge:
        guards.append(gamma - (a + nu - eps1))
    start = "a + nu" if from_edge else "0.6"
    return ClaimSpec(
        id=cid,
        lhs=_smalltau_case2_rhs(),
        relation=Relation.LT,
        rhs=as_expr(thr),
        box={"a": a_box, "gamma": (g_lo - 1e-9 if from_edge else g_lo, a_box[1] + 0.34)},
        anchor=f"small-tau lemma, case 2A: bound < {thr_value} for a in [{a_box[0]}, {a_box[1]}], gamma in [{start}, a + 0.34]",
        guards=tuple(guards),
        rebuild=lambda d: _smalltau_case2(cid, a_box, thr_value, from_edge, tighten + d),
    )


_SMALL_SIGMA_ROWS = (
    ((0.53, 0.545), 0.405, 0.485),
    ((0.545, 0.57), 0.400, 0.475),
    ((0.57, 0.59), 0.380, 0.455),
    ((0.59, 0.61), 0.365, 0.435),
)


def _small_sigma_box(a_box, low_sigma: float, high_sigma: Optional[float]) -> dict:
    top = a_box[1] + NU if high_sigma is None else high_sigma
    return {"a": a_box, "sigma": (low_sigma, top)}


def _small_sigma_lower(a_box, thr_value: float, tighten: float = 0.0) -> ClaimSpec:
    cap = large_value_cap_small_sigma()
    thr = thr_value - tighten
    cid = f"smallsigma-lower-{a_box[0]}-{a_box[1]}"
    return ClaimSpec(
        id=cid,
        lhs=max_lower_bound(cap, small_a=True),
        relation=Relation.LE,
        rhs=_thr(thr, -1),
        box=_small_sigma_box(a_box, SIGMA_HALF, None),
        anchor=f"small-sigma lemma table: max Lambda_* <= {thr_value} - eps1 for a in [{a_box[0]}, {a_box[1]}], sigma in [(1+nu)/2, a+nu]",
        guards=(a + nu - sigma,),
        rebuild=lambda d: _small_sigma_lower(a_box, thr_value, tighten + d),
    )


def _small_sigma_upper(a_box, thr_value: float, high: bool, tighten: float = 0.0) -> ClaimSpec:
    cap = large_value_cap_small_sigma()
    thr = thr_value + tighten
    t = _thr(thr, +1)
    if high:
        cid = f"smallsigma-upper-delta6-{a_box[0]}-{a_box[1]}"
        box = _small_sigma_box(a_box, 0.75, None)
        where = "sigma in [0.75, a+nu]"
    else:
        cid = f"smallsigma-upper-{a_box[0]}-{a_box[1]}"
        box = _small_sigma_box(a_box, SIGMA_HALF, 0.75)
        where = "sigma in [(1+nu)/2, 0.75]"
    return ClaimSpec(
        id=cid,
        lhs=min_upper_bound(cap, small_a=True, with_delta6=high),
        relation=Relation.GE,
        rhs=t,
        box=box,
        anchor=f"small-sigma lemma table: min upper bound >= {thr_value} + eps1 for a in [{a_box[0]}, {a_box[1]}], {where}",
        guards=(a + nu - sigma,),
        slack=min_upper_bound_slack(cap, t, small_a=True, with_delta6=high),
        rebuild=lambda d: _small_sigma_upper(a_box, thr_value, high, tighten + d),
    )


_MEDIUM_TAU_ROWS = (
    ((0.57, 0.59), 0.315),
    ((0.59, 0.61), 0.33),
    ((0.61, 0.64), 0.355),
    ((0.64, 0.685), 0.355),
)


def _medium_tau(a_box, ell_low: float, tighten: float = 0.0) -> ClaimSpec:
    cap = large_value_cap_large_sigma()
    small_a = a_box[1] <= A_SPLIT
    lower = emax(max_lower_bound(cap, small_a), 0.365)
    upper = emin(*[upper_bound_delta6(t, cap) for t in CURLY_Z])
    lq, uq = lambda_q(), upsilon_q()
    covered = emax(emin(ell - lower, upper - ell), emin(ell - lq, uq - ell))
    lo_ell = ell_low - tighten
    top_sigma = max(0.3 * a_box[1] + 0.7, a_box[1] + 0.25)
    cid = f"mediumtau-{a_box[0]}-{a_box[1]}"
    return ClaimSpec(
        id=cid,
        lhs=covered,
        relation=Relation.GE,
        rhs=as_expr(0.0),
        box={"a": a_box, "sigma": (a_box[0] + NU - 1e-9, top_sigma), "ell": (lo_ell - 1e-9, 0.42 + 1e-9)},
        anchor=(
            f"medium-tau lemma: every ell in [{ell_low}, 0.42] lies in the Z-window or the Q-window "
            f"for a in [{a_box[0]}, {a_box[1]}], sigma in [a+nu, sigma_circ_2]"
        ),
        guards=(
            sigma - (a + nu - eps1),
            sigma_circ_2() - sigma,
            ell - (lo_ell - eps1),
            0.42 + eps1 - ell,
        ),
        rebuild=lambda d: _medium_tau(a_box, ell_low, tighten + d),
    )


def _window(lower: BoundExpr, upper_slack: BoundExpr) -> BoundExpr:
    return emin(ell - lower, upper_slack)


def _small_sigma_cover(a_box, s_box, tighten: float = 0.0) -> ClaimSpec:
    """Coverage of ell in [0.355, 0.42] for a in [0.61, 0.685] below sigma = a + nu.

    Alternatives switch on at sigma = 0.65, 0.75 and 0.85; each claim's
    sigma-box lies between consecutive switch points so that only defined
    alternatives enter the slack.
    """
    cap = large_value_cap_full()
    small_a = a_box[1] <= A_SPLIT
    s_lo, s_hi = s_box
    lower = max_lower_bound(cap, small_a)
    options = [_window(lower, min_upper_bound_slack(cap, ell, small_a, with_delta6=False))]
    if s_lo >= 0.75:
        options.append(_window(lower, min_upper_bound_slack(cap, ell, small_a, with_delta6=True)))
    if s_lo >= 0.65:
        options.append(_window(lambda_e(cap), upsilon_e1(cap) - ell))
    if s_lo >= 0.75:
        options.append(_window(lambda_e(cap), upsilon_e2(cap) - ell))
    if s_lo >= 0.85 or (s_lo >= 0.75 and a_box[1] + NU >= 0.75):
        q_gate = sigma - emin(a + nu - eps1, 0.85)
        options.append(emin(q_gate, ell - lambda_q(), upsilon_q() - ell))
    covered = emax(*options)
    lo_ell = 0.355 - tighten
    top = min(s_hi, a_box[1] + NU)
    cid = f"smallsigma-cover-{a_box[0]}-{a_box[1]}-sigma-{s_lo}"
    return ClaimSpec(
        id=cid,
        lhs=covered,
        relation=Relation.GE,
        rhs=as_expr(0.0),
        box={"a": a_box, "sigma": (s_lo, top), "ell": (lo_ell - 1e-9, 0.42 + 1e-9)},
        anchor=(
            f"small-sigma lemma, closing remark: every ell in [0.355, 0.42] is covered by the Z-windows, "
            f"the E-windows or the Q-window for a in [{a_box[0]}, {a_box[1]}], sigma in [{s_lo}, min({s_hi}, a+nu)]"
        ),
        guards=(
            a + 2 * eps1 - cap,
            a + nu - sigma,
            ell - (lo_ell - eps1),
            0.42 + eps1 - ell,
        ),
        rebuild=lambda d: _small_sigma_cover(a_box, s_box, tighten + d),
    )


_COVER_SIGMA_SPLITS = ((0.6, 0.65), (0.65, 0.75), (0.75, 0.85), (0.85, 0.915))


def catalog_claims() -> list[ClaimSpec]:
    """Every certified inequality, in a fixed order."""
    claims: list[ClaimSpec] = [
        _largetau(),
        _largetau_high_sigma("upper"),
        _largetau_high_sigma("lower"),
        _smoothfull("smoothfull-0.335", (0.475, 0.57), 0.335),
        _smoothfull("smoothfull-0.33", (0.57, 0.61), 0.33),
        _smoothfull("smoothfull-0.32", (0.61, 0.77), 0.32),
        _smalltau_case1("smalltau-1A-0.36", (0.47, 0.53), 0.36),
        _smalltau_case1("smalltau-1A-0.345", (0.53, 0.545), 0.345),
        _smalltau_case1_edge(),
        _smalltau_case2("smalltau-2A-0.29", (0.47, 0.53), 0.29, from_edge=False),
        _smalltau_case2("smalltau-2A-0.315", (0.53, 0.545), 0.315, from_edge=False),
        _smalltau_case2("smalltau-2A-0.285", (0.53, 0.545), 0.285, from_edge=True),
    ]
    for a_box, lo_thr, up_thr in _SMALL_SIGMA_ROWS:
        claims.append(_small_sigma_lower(a_box, lo_thr))
        claims.append(_small_sigma_upper(a_box, up_thr, high=False))
        claims.append(_small_sigma_upper(a_box, up_thr, high=True))
    for a_box in ((0.61, 0.64), (0.64, 0.685)):
        for s_box in _COVER_SIGMA_SPLITS:
            if s_box[0] < a_box[1] + NU:
                claims.append(_small_sigma_cover(a_box, s_box))
    for a_box, ell_low in _MEDIUM_TAU_ROWS:
        claims.append(_medium_tau(a_box, ell_low))
    return claims


def claim_by_id(claim_id: str) -> ClaimSpec:
    for c in catalog_claims():
        if c.id == claim_id:
            return c
    raise KeyError(f"unknown claim {claim_id!r}")


def function_catalog() -> dict[str, BoundExpr]:
    """Named threshold functions, with the full large-value cap where one is needed."""
    cap = large_value_cap_full()
    out: dict[str, BoundExpr] = {
        "B": cap,
        "G": density_g(cap),
        "H": density_h(cap),
        "E": density_e(cap),
        "M": huxley_m(),
        "m1": q_small_m(1),
        "m2": q_small_m(2),
        "m3": q_small_m(3),
        "m": q_small_m_combined(),
        "sigma_circ_1": sigma_circ_1(),
        "sigma_circ_2": sigma_circ_2(),
        "Lambda_Q": lambda_q(),
        "Upsilon_Q": upsilon_q(),
        "Upsilon_star": upsilon_star(large_value_cap_small_sigma()),
    }
    out.update(long_factor_functions(cap))
    out["Lambda_E"] = lambda_e(cap)
    out["Upsilon_E1"] = upsilon_e1(cap)
    out["Upsilon_E2"] = upsilon_e2(cap)
    for lam, mu in ((1, 2), (4, 6), (11, 14)):
        out[f"mean_value[{lam}-{mu}beta]"] = mean_value_exponent(lam, mu)
    for i, t in enumerate(CURLY_Z, start=1):
        out[f"C3[{i}]"] = c3_exponent(t)
    for i, e in enumerate(c4_exponents(), start=1):
        out[f"C4[{i}]"] = e
    small = large_value_cap_small_sigma()
    for i, t in enumerate(CURLY_Z, start=1):
        if t in Z_LOWER_BOUND_FAMILY:
            out[f"Lambda_star[{i}]"] = lower_bound(t, small)
        out[f"Upsilon_2[{i}]"] = upper_bound(t, small)
        out[f"Upsilon_6[{i}]"] = upper_bound_delta6(t, small)
    return out
