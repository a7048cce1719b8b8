"""Expression trees over named real variables.

Threshold functions, integration limits and claim inequalities are all built
from :class:`BoundExpr` nodes. Two evaluators are provided: plain point
evaluation in round-to-nearest arithmetic and a natural interval extension
with outward rounding. Both have batched numpy variants used by the
branch-and-bound certifier and the quadrature engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

NU = 0.23

ALLOWED_VARIABLES = frozenset(
    ["a", "sigma", "beta", "gamma", "ell", "u", "nu", "eps1"]
    + [f"ell{i}" for i in range(1, 7)]
    + [f"alpha{i}" for i in range(1, 7)]
)

_KINDS = ("const", "var", "add", "sub", "mul", "div", "min", "max", "neg")

Number = Union[int, float]


class IntervalDivisionError(ZeroDivisionError):
    """Raised when a denominator interval contains zero."""


@dataclass(frozen=True, eq=False)
class BoundExpr:
    kind: str
    children: tuple["BoundExpr", ...] = ()
    value: float = 0.0
    name: str = ""
    _hash: int = field(default=0, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if self.kind == "var" and self.name not in ALLOWED_VARIABLES:
            raise ValueError(f"variable {self.name!r} is not in the allowed set")
        if self.kind in ("min", "max") and len(self.children) < 2:
            raise ValueError(f"{self.kind} needs at least two children")

    # arithmetic sugar -------------------------------------------------
    def __add__(self, other: ExprLike) -> BoundExpr:
        return BoundExpr("add", (self, as_expr(other)))

    def __radd__(self, other: ExprLike) -> BoundExpr:
        return BoundExpr("add", (as_expr(other), self))

    def __sub__(self, other: ExprLike) -> BoundExpr:
        return BoundExpr("sub", (self, as_expr(other)))

    def __rsub__(self, other: ExprLike) -> BoundExpr:
        return BoundExpr("sub", (as_expr(other), self))

    def __mul__(self, other: ExprLike) -> BoundExpr:
        return BoundExpr("mul", (self, as_expr(other)))

    def __rmul__(self, other: ExprLike) -> BoundExpr:
        return BoundExpr("mul", (as_expr(other), self))

    def __truediv__(self, other: ExprLike) -> BoundExpr:
        return BoundExpr("div", (self, as_expr(other)))

    def __rtruediv__(self, other: ExprLike) -> BoundExpr:
        return BoundExpr("div", (as_expr(other), self))

    def __neg__(self) -> BoundExpr:
        return BoundExpr("neg", (self,))

    def free_variables(self) -> frozenset[str]:
        seen: set[str] = set()
        for node in _walk(self):
            if node.kind == "var" and node.name not in ("nu", "eps1"):
                seen.add(node.name)
        return frozenset(seen)

    def __str__(self) -> str:
        return to_infix(self)


ExprLike = Union[BoundExpr, Number]


def const(value: Number) -> BoundExpr:
    v = float(value)
    if not math.isfinite(v):
        raise ValueError("constants must be finite")
    return BoundExpr("const", value=v)


def var(name: str) -> BoundExpr:
    return BoundExpr("var", name=name)


def as_expr(x: ExprLike) -> BoundExpr:
    if isinstance(x, BoundExpr):
        return x
    return const(x)


def emin(*args: ExprLike) -> BoundExpr:
    if len(args) == 1:
        return as_expr(args[0])
    return BoundExpr("min", tuple(as_expr(a) for a in args))


def emax(*args: ExprLike) -> BoundExpr:
    if len(args) == 1:
        return as_expr(args[0])
    return BoundExpr("max", tuple(as_expr(a) for a in args))


def _walk(e: BoundExpr):
    stack = [e]
    seen: set[int] = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(node.children)


def node_count(e: BoundExpr) -> int:
    return sum(1 for _ in _walk(e))


# ---------------------------------------------------------------------------
# debug rendering


_INFIX = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def to_infix(e: BoundExpr) -> str:
    """Render as fully parenthesized infix text."""
    k = e.kind
    if k == "const":
        return repr(e.value)
    if k == "var":
        return e.name
    if k == "neg":
        return f"(-{to_infix(e.children[0])})"
    if k in _INFIX:
        left, right = (to_infix(c) for c in e.children)
        return f"({left} {_INFIX[k]} {right})"
    return f"{k}(" + ", ".join(to_infix(c) for c in e.children) + ")"


# ---------------------------------------------------------------------------
# point evaluation


def _bindings(point: Mapping[str, float], eps1: float) -> dict[str, float]:
    env = {"nu": NU, "eps1": float(eps1)}
    env.update(point)
    return env


def eval_point(e: BoundExpr, point: Mapping[str, float], eps1: float = 0.0) -> float:
    """Evaluate ``e`` at a point in ordinary floating point arithmetic."""
    env = _bindings(point, eps1)
    cache: dict[int, float] = {}

    def ev(node: BoundExpr) -> float:
        key = id(node)
        if key in cache:
            return cache[key]
        k = node.kind
        if k == "const":
            r = node.value
        elif k == "var":
            try:
                r = float(env[node.name])
            except KeyError:
                raise KeyError(f"unbound variable {node.name!r}") from None
        elif k == "neg":
            r = -ev(node.children[0])
        elif k == "add":
            r = ev(node.children[0]) + ev(node.children[1])
        elif k == "sub":
            r = ev(node.children[0]) - ev(node.children[1])
        elif k == "mul":
            r = ev(node.children[0]) * ev(node.children[1])
        elif k == "div":
            den = ev(node.children[1])
            if den == 0.0:
                raise ZeroDivisionError(f"division by zero in {to_infix(node)}")
            r = ev(node.children[0]) / den
        elif k == "min":
            r = min(ev(c) for c in node.children)
        else:
            r = max(ev(c) for c in node.children)
        cache[key] = r
        return r

    return ev(e)


def eval_points(
    e: BoundExpr, points: Mapping[str, np.ndarray | float], eps1: float = 0.0, pole_tol: float = 0.0
) -> np.ndarray:
    """Vectorized point evaluation.

    Division by a denominator with absolute value at most ``pole_tol`` yields
    ``nan``; with the default this is exact division by zero.
    """
    env = _bindings(points, eps1)
    cache: dict[int, np.ndarray] = {}

    def ev(node: BoundExpr):
        key = id(node)
        if key in cache:
            return cache[key]
        k = node.kind
        if k == "const":
            r = node.value
        elif k == "var":
            try:
                r = env[node.name]
            except KeyError:
                raise KeyError(f"unbound variable {node.name!r}") from None
        elif k == "neg":
            r = -ev(node.children[0])
        elif k == "add":
            r = ev(node.children[0]) + ev(node.children[1])
        elif k == "sub":
            r = ev(node.children[0]) - ev(node.children[1])
        elif k == "mul":
            r = ev(node.children[0]) * ev(node.children[1])
        elif k == "div":
            num, den = ev(node.children[0]), ev(node.children[1])
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(np.abs(np.asarray(den)) <= pole_tol, np.nan, np.divide(num, den))
        elif k == "min":
            r = ev(node.children[0])
            for c in node.children[1:]:
                r = np.minimum(r, ev(c))
        else:
            r = ev(node.children[0])
            for c in node.children[1:]:
                r = np.maximum(r, ev(c))
        cache[key] = r
        return r

    out = ev(e)
    shape = np.broadcast(*[np.asarray(v) for v in env.values()]).shape
    return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


# ---------------------------------------------------------------------------
# interval evaluation


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


Box = Mapping[str, tuple[float, float]]


def _down(x):
    return np.nextafter(x, -np.inf)


def _up(x):
    return np.nextafter(x, np.inf)


def eval_interval_batch(
    e: BoundExpr,
    lo: Mapping[str, np.ndarray],
    hi: Mapping[str, np.ndarray],
    eps1: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Interval extension over a batch of boxes.

    Returns ``(lo, hi, bad)`` arrays. ``bad`` marks boxes on which some
    denominator interval contains zero; their bounds are meaningless.
    """
    n = None
    for v in lo.values():
        n = np.shape(v)[0] if np.ndim(v) else n
    if n is None:
        n = 1
    env_lo = {"nu": np.full(n, NU), "eps1": np.full(n, float(eps1))}
    env_hi = {"nu": np.full(n, NU), "eps1": np.full(n, float(eps1))}
    for k in lo:
        env_lo[k] = np.broadcast_to(np.asarray(lo[k], dtype=float), (n,))
        env_hi[k] = np.broadcast_to(np.asarray(hi[k], dtype=float), (n,))
    bad = np.zeros(n, dtype=bool)
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def ev(node: BoundExpr) -> tuple[np.ndarray, np.ndarray]:
        nonlocal bad
        key = id(node)
        if key in cache:
            return cache[key]
        k = node.kind
        if k == "const":
            r = (np.full(n, node.value), np.full(n, node.value))
        elif k == "var":
            if node.name not in env_lo:
                raise KeyError(f"variable {node.name!r} not covered by box")
            r = (env_lo[node.name], env_hi[node.name])
        elif k == "neg":
            a, b = ev(node.children[0])
            r = (-b, -a)
        elif k == "add":
            (a, b), (c, d) = ev(node.children[0]), ev(node.children[1])
            r = (_down(a + c), _up(b + d))
        elif k == "sub":
            (a, b), (c, d) = ev(node.children[0]), ev(node.children[1])
            r = (_down(a - d), _up(b - c))
        elif k == "mul":
            (a, b), (c, d) = ev(node.children[0]), ev(node.children[1])
            r = _mul(a, b, c, d)
        elif k == "div":
            (a, b), (c, d) = ev(node.children[0]), ev(node.children[1])
            straddle = (c <= 0.0) & (d >= 0.0)
            bad = bad | straddle
            c1 = np.where(straddle, 1.0, c)
            d1 = np.where(straddle, 1.0, d)
            with np.errstate(divide="ignore", invalid="ignore"):
                rc = (_down(1.0 / d1), _up(1.0 / c1))
            r = _mul(a, b, rc[0], rc[1])
        elif k == "min":
            parts = [ev(c) for c in node.children]
            r = (
                np.minimum.reduce([p[0] for p in parts]),
                np.minimum.reduce([p[1] for p in parts]),
            )
        else:
            parts = [ev(c) for c in node.children]
            r = (
                np.maximum.reduce([p[0] for p in parts]),
                np.maximum.reduce([p[1] for p in parts]),
            )
        cache[key] = r
        return r

    with np.errstate(invalid="ignore", over="ignore"):
        out_lo, out_hi = ev(e)
    return np.asarray(out_lo, dtype=float), np.asarray(out_hi, dtype=float), bad


def _mul(a, b, c, d):
    with np.errstate(invalid="ignore"):
        p = np.stack([a * c, a * d, b * c, b * d])
    p = np.nan_to_num(p, nan=0.0, posinf=np.inf, neginf=-np.inf)
    return _down(p.min(axis=0)), _up(p.max(axis=0))


def eval_interval(e: BoundExpr, box: Box, eps1: float = 0.0) -> Interval:
    """Enclosure of ``e`` over ``box`` by natural interval extension."""
    for name, (lo, hi) in box.items():
        if not lo <= hi:
            raise ValueError(f"box side {name} has lo > hi")
    lo_map = {k: np.array([float(v[0])]) for k, v in box.items()}
    hi_map = {k: np.array([float(v[1])]) for k, v in box.items()}
    lo, hi, bad = eval_interval_batch(e, lo_map, hi_map, eps1)
    if bad[0]:
        raise IntervalDivisionError(f"denominator interval contains 0 in {to_infix(e)}")
    return Interval(float(lo[0]), float(hi[0]))
