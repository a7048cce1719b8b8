"""Nested integrals with variable limits and Buchstab-function kernels.

An integral has up to four ordered variables. Each variable ranges over a
finite union of pieces [lower, upper] whose endpoints are expressions in the
earlier variables; an upper end below the lower end makes the piece empty.

Evaluation is a nested composite Gauss-Legendre rule. Each variable has its
own panel count. Panels are also cut where limit pieces of inner variables
cross as functions of this one (kinks of the inner integral) and, for the innermost variable,
at the kernel's listed kinks. Panel counts are doubled one variable at a time
until the summed per-variable change falls below the tolerance. The reported
error is four times that summed change, plus the integral of the omega table error over
the same nodes, plus a relative rounding floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .buchstab import PiecewiseOmega, UpperOmega
from .expr import BoundExpr, as_expr, eval_points, to_infix

MAX_VARS = 4
GL_ORDER = 5
START_PANELS = 2
MAX_PANELS = 64
DEFAULT_TOL = 1e-4
DEFAULT_MAX_EVALS = 80_000_000
# largest node array built in one go
CHUNK = 400_000
# omega arguments this far below 1 are treated as rounding, not as a sliver
SLIVER_ROUNDING = 1e-9
# relative floor on the error estimate, covering summation rounding
ROUNDING_REL = 1e-12
# multiplier on the level-difference error estimate
SAFETY = 4.0

Piece = tuple[BoundExpr, BoundExpr]


class QuadratureBudgetError(RuntimeError):
    """Raised when the tolerance is not met within the evaluation budget."""

    def __init__(self, message: str, partial: IntegralResult) -> None:
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True, eq=False)
class OmegaKernel:
    """Integrand omega(argument) / denom.

    ``breaks`` lists points of the innermost variable, as expressions in the
    outer ones, where the integrand has a kink; panels are cut there.
    """

    argument: BoundExpr
    denom: BoundExpr
    breaks: tuple[BoundExpr, ...] = ()


@dataclass(frozen=True, eq=False)
class ClosedForm:
    """Integrand given directly as an expression."""

    value: BoundExpr


Kernel = Union[OmegaKernel, ClosedForm]


def _as_pieces(lim) -> tuple[Piece, ...]:
    if len(lim) == 2 and not isinstance(lim[0], (tuple, list)):
        lim = (lim,)
    return tuple((as_expr(lo), as_expr(hi)) for lo, hi in lim)


@dataclass(frozen=True, eq=False)
class IntegralSpec:
    vars: tuple[str, ...]
    limits: tuple[tuple[Piece, ...], ...]
    kernel: Kernel
    prefactor: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(self.vars))
        if not 1 <= len(self.vars) <= MAX_VARS:
            raise ValueError(f"need 1..{MAX_VARS} variables, got {len(self.vars)}")
        if len(self.limits) != len(self.vars):
            raise ValueError("one limit entry per variable is required")
        limits = tuple(_as_pieces(lim) for lim in self.limits)
        object.__setattr__(self, "limits", limits)
        known = {"eps1", "nu"}
        for name, pieces in zip(self.vars, limits):
            for lo, hi in pieces:
                extra = (lo.free_variables() | hi.free_variables()) - known
                if extra:
                    raise ValueError(f"limits of {name} use later or unknown variables {sorted(extra)}")
            known.add(name)
        exprs = (
            [self.kernel.argument, self.kernel.denom, *self.kernel.breaks]
            if isinstance(self.kernel, OmegaKernel)
            else [self.kernel.value]
        )
        for e in exprs:
            extra = e.free_variables() - known
            if extra:
                raise ValueError(f"kernel uses unknown variables {sorted(extra)}")

    def describe(self) -> str:
        parts = []
        for name, pieces in zip(self.vars, self.limits):
            ranges = " u ".join(f"[{to_infix(lo)}, {to_infix(hi)}]" for lo, hi in pieces)
            parts.append(f"{name} in {ranges}")
        k = self.kernel
        if isinstance(k, OmegaKernel):
            integrand = f"omega({to_infix(k.argument)}) / {to_infix(k.denom)}"
        else:
            integrand = to_infix(k.value)
        pre = "" if self.prefactor == 1.0 else f"{self.prefactor!r} * "
        return f"{pre}int {integrand} over " + "; ".join(parts)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    err: float
    evaluations: int
    panels: int = 0
    sliver_nodes: int = 0


@dataclass
class _Tally:
    value: float = 0.0
    omega_err: float = 0.0
    count: int = 0
    sliver: int = 0


@dataclass(frozen=True)
class _Rule:
    offsets: np.ndarray
    weights: np.ndarray


def _rule(n_panels: int, order: int = GL_ORDER) -> _Rule:
    t, w = np.polynomial.legendre.leggauss(order)
    base = (t + 1.0) / 2.0
    offs = (np.arange(n_panels)[:, None] + base[None, :]).ravel() / n_panels
    wts = np.tile(w / 2.0, n_panels) / n_panels
    return _Rule(offs, wts)


def _broadcast(x, n: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(x, dtype=float), (n,))


def _nodes(lo: np.ndarray, hi: np.ndarray, cuts: list[np.ndarray], rule: _Rule):
    """Nodes and weights on [lo, hi] per row, with extra panel cuts."""
    hi = np.maximum(hi, lo)
    pts = [lo] + [np.clip(c, lo, hi) for c in cuts] + [hi]
    pts = np.sort(np.stack(pts, axis=1), axis=1)
    seg_lo = pts[:, :-1]
    seg_w = np.diff(pts, axis=1)
    x = seg_lo[:, :, None] + seg_w[:, :, None] * rule.offsets[None, None, :]
    w = seg_w[:, :, None] * rule.weights[None, None, :]
    n = lo.shape[0]
    return x.reshape(n, -1), w.reshape(n, -1)


def _kernel_values(spec: IntegralSpec, env, eps1: float, omega, tally: _Tally):
    k = spec.kernel
    n = next(iter(env.values())).shape[0]
    if isinstance(k, ClosedForm):
        return _broadcast(eval_points(k.value, env, eps1), n), np.zeros(n)
    u = _broadcast(eval_points(k.argument, env, eps1), n)
    den = _broadcast(eval_points(k.denom, env, eps1), n)
    if (den <= 0).any() or not np.isfinite(den).all():
        raise ValueError("kernel denominator must stay positive on the domain")
    low = u < 1.0
    if low.any():
        # sliver where the argument dips below 1: bound omega by 1 there
        tally.sliver += int((u < 1.0 - SLIVER_ROUNDING).sum())
        u = np.where(low, 1.0, u)
    val, err = omega.evaluate(u)
    return val / den, err / den


def _leaves(e: BoundExpr) -> list[BoundExpr]:
    """Arguments of a top-level min/max tree, flattened."""
    if e.kind in ("min", "max"):
        return [leaf for c in e.children for leaf in _leaves(c)]
    return [e]


def _crossing_pairs(spec: IntegralSpec, depth: int) -> tuple[tuple[BoundExpr, BoundExpr], ...]:
    """Pairs of inner limit pieces whose crossing is a kink in this variable.

    A pair qualifies when its difference depends on this variable and on
    outer ones only, so the crossing is a point of this variable's range.
    """
    name = spec.vars[depth]
    allowed = set(spec.vars[: depth + 1]) | {"eps1", "nu"}
    pairs = []
    for j in range(depth + 1, len(spec.vars)):
        los, his = [], []
        for lo, hi in spec.limits[j]:
            los += _leaves(lo)
            his += _leaves(hi)
        cand = [(f, g) for group in (los, his) for i, f in enumerate(group) for g in group[i + 1 :]]
        cand += [(f, g) for f in los for g in his]
        for f, g in cand:
            free = f.free_variables() | g.free_variables()
            if name in free and free <= allowed:
                pairs.append((f, g))
    return tuple(pairs)


def _crossings(pairs, name: str, env, eps1: float, n_rows: int) -> list[np.ndarray]:
    """Roots in ``name`` of f - g, treating both as affine in that variable."""
    out = []
    for f, g in pairs:
        d = []
        for t in (0.0, 1.0):
            e2 = dict(env)
            e2[name] = np.full(n_rows, t)
            d.append(_broadcast(eval_points(f - g, e2, eps1), n_rows))
        slope = d[1] - d[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            root = np.where(np.abs(slope) > 1e-14, -d[0] / slope, np.nan)
        out.append(root)
    return out


def _level(spec, depth, env, w, rules, omega, eps1, tally, pairs) -> None:
    n_rows = w.shape[0]
    pieces = spec.limits[depth]
    last = depth == len(spec.vars) - 1
    rule = rules[depth]
    cuts_exprs = spec.kernel.breaks if (last and isinstance(spec.kernel, OmegaKernel)) else ()
    n_cuts = len(cuts_exprs) + len(pairs[depth])
    per_row = len(pieces) * (n_cuts + 1) * rule.offsets.size
    if n_rows > 1 and n_rows * per_row > CHUNK:
        step = max(1, CHUNK // per_row)
        for s in range(0, n_rows, step):
            sub = {k: v[s : s + step] for k, v in env.items()}
            _level(spec, depth, sub, w[s : s + step], rules, omega, eps1, tally, pairs)
        return
    name = spec.vars[depth]
    cuts = [_broadcast(eval_points(c, env, eps1), n_rows) for c in cuts_exprs]
    cuts += _crossings(pairs[depth], name, env, eps1, n_rows)
    # undefined crossings become harmless cuts at the lower end
    xs, ws = [], []
    for lo_e, hi_e in pieces:
        lo = _broadcast(eval_points(lo_e, env, eps1), n_rows)
        hi = _broadcast(eval_points(hi_e, env, eps1), n_rows)
        cl = [np.where(np.isfinite(c), c, lo) for c in cuts]
        x, wt = _nodes(lo, hi, cl, rule)
        xs.append(x)
        ws.append(wt)
    x = np.concatenate(xs, axis=1)
    wt = np.concatenate(ws, axis=1) * w[:, None]
    keep = wt.ravel() > 0
    m = x.shape[1]
    new_env = {k: np.repeat(v, m)[keep] for k, v in env.items()}
    new_env[name] = x.ravel()[keep]
    new_w = wt.ravel()[keep]
    if new_w.size == 0:
        return
    if last:
        f, ferr = _kernel_values(spec, new_env, eps1, omega, tally)
        tally.value += float(np.dot(new_w, f))
        tally.omega_err += float(np.dot(new_w, ferr))
        tally.count += new_w.size
        return
    _level(spec, depth + 1, new_env, new_w, rules, omega, eps1, tally, pairs)


def _run(spec: IntegralSpec, panels: tuple[int, ...], omega, eps1: float) -> _Tally:
    tally = _Tally()
    env = {"_row": np.zeros(1)}
    rules = [_rule(n) for n in panels]
    pairs = [_crossing_pairs(spec, d) for d in range(len(spec.vars))]
    _level(spec, 0, env, np.ones(1), rules, omega, eps1, tally, pairs)
    return tally


def integrate(
    spec: IntegralSpec,
    omega: PiecewiseOmega | UpperOmega,
    tol: float = DEFAULT_TOL,
    eps1: float = 0.0,
    max_evals: int = DEFAULT_MAX_EVALS,
    start_panels: int = START_PANELS,
) -> IntegralResult:
    """Evaluate ``spec`` to within ``tol``; raises QuadratureBudgetError if that fails.

    Panel counts are kept per variable. Each round doubles every variable's
    count in turn; the change in value is that variable's error estimate,
    and the variable with the largest estimate is refined.
    """
    if not 1e-8 <= tol <= 1e-2:
        raise ValueError("tol must lie in [1e-8, 1e-2]")
    scale = abs(spec.prefactor)
    k = len(spec.vars)
    panels = (start_panels,) * k
    cache: dict[tuple[int, ...], _Tally] = {}
    evals = 0

    def run(p: tuple[int, ...]) -> _Tally:
        nonlocal evals
        if p not in cache:
            cache[p] = _run(spec, p, omega, eps1)
            evals += cache[p].count
        return cache[p]

    base = run(panels)
    if base.count == 0:
        return IntegralResult(0.0, 0.0, 0, panels[0], 0)
    while True:
        trials = []
        for d in range(k):
            p = panels[:d] + (panels[d] * 2,) + panels[d + 1 :]
            trials.append((p, run(p)))
        est = [abs(t.value - base.value) for _, t in trials]
        err = scale * (SAFETY * math.fsum(est) + base.omega_err + ROUNDING_REL * abs(base.value))
        result = IntegralResult(scale * base.value, err, evals, max(panels), base.sliver)
        if err <= tol:
            return result
        if evals >= max_evals or max(panels) >= MAX_PANELS:
            raise QuadratureBudgetError(
                f"tolerance {tol} not met: err {err:.3g} after {evals} evaluations", result
            )
        worst = int(np.argmax(est))
        panels, base = trials[worst]


# ---------------------------------------------------------------------------
# closed-form log-power bounds


@dataclass(frozen=True)
class ArithTerm:
    """coeff * prod(log(num/den) ** power) / denominator."""

    logs: tuple[tuple[float, float, int], ...]
    denominator: float
    coeff: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "logs", tuple((float(a), float(b), int(p)) for a, b, p in self.logs))
        if not self.denominator > 0:
            raise ValueError("denominator must be positive")
        for num, den, p in self.logs:
            if not (num > 0 and den > 0) or p < 0:
                raise ValueError(f"bad log factor ({num}, {den}, {p})")

    def value(self) -> float:
        prod = self.coeff
        for num, den, p in self.logs:
            prod *= math.log(num / den) ** p
        return prod / self.denominator

    def describe(self) -> str:
        factors = " * ".join(f"log({n!r}/{d!r})^{p}" for n, d, p in self.logs)
        c = "" if self.coeff == 1.0 else f"{self.coeff!r} * "
        return f"{c}{factors} / {self.denominator!r}"


@dataclass(frozen=True)
class ArithSpec:
    terms: tuple[ArithTerm, ...] = field(default_factory=tuple)

    def describe(self) -> str:
        return " + ".join(t.describe() for t in self.terms)


def eval_arith_bound(terms: Sequence[ArithTerm] | ArithSpec) -> float:
    """Sum of closed-form log-power terms."""
    if isinstance(terms, ArithSpec):
        terms = terms.terms
    return math.fsum(t.value() for t in terms)
