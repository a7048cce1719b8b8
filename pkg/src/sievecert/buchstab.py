"""Buchstab's function with per-panel error bounds.

omega(u) is 1/u on [1, 2] and (1 + log(u - 1))/u on [2, 3]. Beyond 3 it is
tabulated from the integrated delay equation

    u * omega(u) = 1 + int_1^{u-1} omega(s) ds

by a composite trapezoid rule over the already-built part of the table. The
step is snapped to 1/n so every integer is a grid node; this keeps the kinks of
omega (derivative jump at 2, second-derivative jump at 3) on panel
boundaries, where the trapezoid error bound stays valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

EXP_MINUS_GAMMA = math.exp(-np.euler_gamma)
DEFAULT_U_MAX = 64.0
DEFAULT_STEP = 1e-4

# rounding allowance for the closed form on (2, 3]
_CLOSED_FORM_ERR = 1e-15
# factor applied to second-difference curvature estimates
_CURVATURE_SAFETY = 2.0

ArrayLike = Union[float, np.ndarray]


class OmegaDomainError(ValueError):
    """Raised when omega is queried outside [1, u_max]."""


@dataclass(frozen=True)
class OmegaPanel:
    u_lo: float
    u_hi: float
    values: np.ndarray
    max_error: float


@dataclass(frozen=True, eq=False)
class PiecewiseOmega:
    """Immutable table of omega on [1, u_max], one panel per unit interval."""

    panels: tuple[OmegaPanel, ...]
    u_max: float
    step: float
    _interp: PchipInterpolator | None

    def __call__(self, u: float) -> tuple[float, float]:
        return omega(self, u)

    @property
    def max_error(self) -> float:
        return max(p.max_error for p in self.panels)

    def panel_errors(self) -> np.ndarray:
        return np.array([p.max_error for p in self.panels])

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        """All grid nodes and stored values, duplicates at panel joins removed."""
        us, vs = [], []
        for k, p in enumerate(self.panels):
            n = len(p.values)
            u = np.linspace(p.u_lo, p.u_hi, n)
            sl = slice(0 if k == 0 else 1, None)
            us.append(u[sl])
            vs.append(p.values[sl])
        return np.concatenate(us), np.concatenate(vs)

    def evaluate(self, u: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized omega with error bounds. Raises on any u outside [1, u_max]."""
        u = np.asarray(u, dtype=float)
        if u.size and (np.isnan(u).any() or u.min() < 1.0 or u.max() > self.u_max):
            bad = u[(u < 1.0) | (u > self.u_max) | np.isnan(u)].ravel()[0]
            raise OmegaDomainError(f"omega queried at u={bad!r}, outside [1, {self.u_max}]")
        vals = np.empty_like(u)
        errs = np.zeros_like(u)
        low = u <= 2.0
        mid = (u > 2.0) & (u <= 3.0)
        high = u > 3.0
        vals[low] = 1.0 / u[low]
        um = u[mid]
        vals[mid] = (1.0 + np.log(um - 1.0)) / um
        errs[mid] = _CLOSED_FORM_ERR
        if high.any():
            uh = u[high]
            vals[high] = self._interp(uh)
            idx = np.minimum(np.floor(uh).astype(int) - 1, len(self.panels) - 1)
            errs[high] = self.panel_errors()[idx]
        return vals, errs


@dataclass(frozen=True)
class UpperOmega:
    """The crude envelope max(0.6, 1/u), usable wherever a table is expected."""

    u_max: float = DEFAULT_U_MAX

    def evaluate(self, u: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
        u = np.asarray(u, dtype=float)
        if u.size and np.nanmin(u) < 1.0:
            raise OmegaDomainError("omega_upper needs u >= 1")
        return np.maximum(0.6, 1.0 / u), np.zeros_like(u)


def omega_upper(u: float) -> float:
    """The envelope max(0.6, 1/u) for u >= 1."""
    if not math.isfinite(u) or u < 1.0:
        raise OmegaDomainError(f"omega_upper needs u >= 1, got {u!r}")
    return max(0.6, 1.0 / u)


def omega(table: PiecewiseOmega, u: float) -> tuple[float, float]:
    """Return ``(value, err)`` with ``|value - omega(u)| <= err``."""
    v, e = table.evaluate(np.array([float(u)]))
    return float(v[0]), float(e[0])


def _snap_step(step: float) -> tuple[float, int]:
    n = math.ceil(1.0 / step - 1e-9)
    return 1.0 / n, n


def _curvature_bound(values: np.ndarray, h: float) -> float:
    """Max |omega''| on a panel from second differences, padded by a safety factor."""
    if len(values) < 3:
        return 0.0
    d2 = np.abs(np.diff(values, 2)) / (h * h)
    return _CURVATURE_SAFETY * float(d2.max())


def build_omega(u_max: float = DEFAULT_U_MAX, step: float = DEFAULT_STEP) -> PiecewiseOmega:
    """Tabulate omega on [1, u_max] with grid spacing at most ``step``."""
    if not (math.isfinite(u_max) and math.isfinite(step)):
        raise ValueError("u_max and step must be finite")
    if u_max <= 2.0:
        raise ValueError("u_max must exceed 2")
    if u_max > 64.0:
        raise ValueError("u_max is capped at 64")
    if not 0.0 < step <= 0.01:
        raise ValueError("step must lie in (0, 0.01]")
    h, n = _snap_step(step)
    k_top = max(3, math.ceil(u_max - 1e-12))
    u_axis = [np.linspace(k, k + 1, n + 1) for k in range(1, k_top)]

    panel_vals: list[np.ndarray] = []
    panel_vals.append(1.0 / u_axis[0])
    u2 = u_axis[1]
    panel_vals.append((1.0 + np.log(u2 - 1.0)) / u2)

    # cumulative integral of omega from 1 to the start of each panel
    acc = math.log(2.0)
    for k in range(3, k_top):
        prev = panel_vals[-1]
        # trapezoid cumulative integral over [k-1, u-1] for u on panel k
        cum = np.concatenate(([0.0], np.cumsum(0.5 * h * (prev[1:] + prev[:-1]))))
        panel_vals.append((1.0 + acc + cum) / u_axis[k - 1])
        acc += float(cum[-1])

    delta = error_bounds_from_values(panel_vals, h)
    return _assemble(panel_vals, u_max, h, delta)


def _assemble(panel_vals: list[np.ndarray], u_max: float, h: float, delta: list[float]) -> PiecewiseOmega:
    panels = []
    for k, vals in enumerate(panel_vals, start=1):
        err = delta[k - 1]
        if k >= 3:
            # PCHIP interpolation error, charged as h^2 * |omega''|
            err += h * h * _curvature_bound(vals, h)
        vals = np.array(vals)
        vals.setflags(write=False)
        panels.append(OmegaPanel(float(k), float(k + 1), vals, float(err)))
    interp = None
    if len(panels) > 2:
        us = np.concatenate([np.linspace(p.u_lo, p.u_hi, len(p.values))[(0 if i == 0 else 1):]
                             for i, p in enumerate(panels[2:])])
        vs = np.concatenate([p.values[(0 if i == 0 else 1):] for i, p in enumerate(panels[2:])])
        interp = PchipInterpolator(us, vs, extrapolate=False)
    return PiecewiseOmega(tuple(panels), float(u_max), h, interp)


def error_bounds_from_values(panel_vals: list[np.ndarray], h: float) -> list[float]:
    """Construction error per panel.

    The value on panel k is (1 + I)/u with u >= k, where I carries the
    trapezoid error of every earlier panel plus the value errors already
    committed there, so delta_k <= (sum of Q_j + sum of delta_j) / k.
    """
    delta = [0.0, _CLOSED_FORM_ERR]
    quad_err = 0.0
    prop_err = delta[0] + delta[1]
    for k in range(3, len(panel_vals) + 1):
        quad_err += h * h / 12.0 * _curvature_bound(panel_vals[k - 2], h)
        delta.append((quad_err + prop_err) / k)
        prop_err += delta[-1]
    return delta


def dump_table(table: PiecewiseOmega, path: str | Path) -> None:
    """Write the table as ``omega-table v1 u_max step`` then ``u value`` lines."""
    us, vs = table.grid()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"omega-table v1 {table.u_max!r} {table.step!r}\n")
        for u, v in zip(us, vs):
            fh.write(f"{u:.17g} {v:.17g}\n")


def load_table(path: str | Path) -> PiecewiseOmega:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().split()
        if header[:2] != ["omega-table", "v1"] or len(header) != 4:
            raise ValueError("not an omega-table v1 file")
        u_max, h = float(header[2]), float(header[3])
        data = np.loadtxt(fh, ndmin=2)
    n = round(1.0 / h)
    vs = data[:, 1]
    n_panels = (len(vs) - 1) // n
    if n_panels * n + 1 != len(vs):
        raise ValueError("table length does not match step")
    panel_vals = [vs[k * n:(k + 1) * n + 1] for k in range(n_panels)]
    return _assemble(panel_vals, u_max, h, error_bounds_from_values(panel_vals, h))


@dataclass(frozen=True)
class OmegaCheck:
    id: str
    anchor: str
    value: float
    err: float
    bound: float
    relation: str

    @property
    def passed(self) -> bool:
        top = self.value + self.err
        return top < self.bound if self.relation == "<" else top <= self.bound


def omega_checks(table: PiecewiseOmega, grid_points: int = 10_000) -> list[OmegaCheck]:
    """Headline checks on a table: exactness on [1, 2], the closed form at 2.5,
    the limit for large u, and the max(0.6, 1/u) envelope."""
    out = []
    u = np.linspace(1.0, 2.0, 1001)
    v, e = table.evaluate(u)
    out.append(OmegaCheck("omega-exact-on-1-2", "omega(u) = 1/u for 1 <= u <= 2",
                          float(np.max(np.abs(v - 1.0 / u))), float(e.max()), 0.0, "<="))
    v, e = table.evaluate(np.array([2.5]))
    exact = (1.0 + math.log(1.5)) / 2.5
    out.append(OmegaCheck("omega-at-2.5", "omega(2.5) = (1 + log 1.5)/2.5",
                          float(abs(v[0] - exact)), float(e[0]), 1e-8, "<"))
    if table.u_max >= 10.0:
        u = np.linspace(10.0, table.u_max, 2001)
        v, e = table.evaluate(u)
        out.append(OmegaCheck("omega-limit", "omega(u) -> exp(-gamma) for u >= 10",
                              float(np.max(np.abs(v - EXP_MINUS_GAMMA))), float(e.max()), 1e-6, "<"))
    u = np.linspace(1.0, table.u_max, grid_points)
    v, e = table.evaluate(u)
    gap = v + e - np.maximum(0.6, 1.0 / u)
    out.append(OmegaCheck("omega-upper-envelope", "omega(u) <= max(0.6, 1/u)",
                          float(gap.max()), 0.0, 0.0, "<="))
    return out
