from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sievecert.expr import (
    BoundExpr,
    IntervalDivisionError,
    const,
    emax,
    emin,
    eval_interval,
    eval_point,
    eval_points,
    to_infix,
    var,
)

a, sigma, x = var("a"), var("sigma"), var("ell1")


def test_density_exponent_example():
    B = emax(1 - sigma, a + 1 - 2 * sigma + var("nu"))
    assert eval_point(B, {"a": 0.6, "sigma": 0.8}) == pytest.approx(0.23)
    E = emin(const(2.03) / 2.49, const(1.34) / 1.57)
    assert eval_point(E, {}) == pytest.approx(0.81526, abs=1e-5)


def test_min_of_reflection_at_half():
    e = emin(x, 1 - x)
    assert eval_point(e, {"ell1": 0.5}) == 0.5


def test_envelope_interval_is_tight():
    u = var("ell1")
    iv = eval_interval(emax(0.6, 1 / u), {"ell1": (2.0, 4.0)})
    assert iv.lo == pytest.approx(0.6)
    assert iv.hi == pytest.approx(0.6)


def test_division_by_interval_containing_zero():
    with pytest.raises(IntervalDivisionError):
        eval_interval(1 / (x - 0.5), {"ell1": (0.0, 1.0)})


def test_eps1_binding():
    e = 0.5 + var("eps1")
    assert eval_point(e, {}, eps1=1e-7) == pytest.approx(0.5000001, abs=1e-15)


def test_unknown_variable_rejected():
    with pytest.raises(ValueError):
        var("zeta")


def test_infix_dump():
    assert to_infix(emin(x, 1 - x)) == "min(ell1, (1.0 - ell1))"


def test_vectorized_matches_scalar():
    e = emax(a * sigma, (1 - sigma) / (a + 0.1))
    aa = np.linspace(0.5, 0.7, 7)
    ss = np.linspace(0.6, 0.9, 7)
    got = eval_points(e, {"a": aa, "sigma": ss})
    for i in range(7):
        assert got[i] == eval_point(e, {"a": aa[i], "sigma": ss[i]})


# ---------------------------------------------------------------------------
# soundness of the interval extension

_NAMES = ("a", "sigma", "ell1")


def _trees():
    leaves = st.one_of(
        st.sampled_from(_NAMES).map(var),
        st.floats(min_value=-3, max_value=3, allow_nan=False).map(const),
    )

    def grow(children):
        binary = st.tuples(st.sampled_from(["add", "sub", "mul", "div", "min", "max"]), children, children)
        return st.one_of(
            binary.map(lambda t: BoundExpr(t[0], (t[1], t[2]))),
            children.map(lambda c: BoundExpr("neg", (c,))),
        )

    return st.recursive(leaves, grow, max_leaves=12)


@st.composite
def _box_and_points(draw):
    box = {}
    for name in _NAMES:
        lo = draw(st.floats(min_value=-2, max_value=2))
        w = draw(st.floats(min_value=0, max_value=1.5))
        box[name] = (lo, lo + w)
    fracs = draw(st.lists(st.tuples(*[st.floats(0, 1)] * len(_NAMES)), min_size=1, max_size=8))
    points = [{n: lo + f * (hi - lo) for n, f, (lo, hi) in zip(_NAMES, fr, box.values())} for fr in fracs]
    return box, points


@settings(max_examples=300, deadline=None)
@given(_trees(), _box_and_points())
def test_interval_encloses_point_values(e, bp):
    box, points = bp
    try:
        iv = eval_interval(e, box)
    except IntervalDivisionError:
        assume(False)
    for p in points:
        with np.errstate(all="ignore"):
            v = eval_point(e, p)
        if math.isfinite(v):
            assert iv.lo <= v <= iv.hi
