from __future__ import annotations

import math

import numpy as np
import pytest

from sievecert import decomposition
from sievecert.buchstab import UpperOmega
from sievecert.expr import const, eval_points, var
from sievecert.quadrature import (
    ArithSpec,
    ArithTerm,
    ClosedForm,
    IntegralSpec,
    OmegaKernel,
    QuadratureBudgetError,
    eval_arith_bound,
    integrate,
)

x1, x2 = var("alpha1"), var("alpha2")


def _midpoint(spec: IntegralSpec, omega, n: int) -> float:
    """Product midpoint rule for a two-variable omega integral."""
    total = 0.0
    for lo1, hi1 in spec.limits[0]:
        l1 = float(eval_points(lo1, {}))
        h1 = float(eval_points(hi1, {}))
        if h1 <= l1:
            continue
        t = (np.arange(n) + 0.5) / n
        a1 = l1 + (h1 - l1) * t
        w1 = (h1 - l1) / n
        for lo2, hi2 in spec.limits[1]:
            l2 = eval_points(lo2, {"alpha1": a1})
            h2 = eval_points(hi2, {"alpha1": a1})
            width = np.maximum(h2 - l2, 0.0)
            a2 = l2[:, None] + width[:, None] * t[None, :]
            env = {"alpha1": np.repeat(a1, n), "alpha2": a2.ravel()}
            u = eval_points(spec.kernel.argument, env)
            den = eval_points(spec.kernel.denom, env)
            val, _ = omega.evaluate(np.maximum(u, 1.0))
            f = (val / den).reshape(n, n)
            total += w1 * float(np.sum(f.sum(axis=1) * width / n))
    return spec.prefactor * total


def _two_dim_entries():
    out = []
    for case in decomposition.case_catalog():
        for t in case.thetas:
            if t.kind == "2d":
                out.append(pytest.param(case.a_case, t.id, id=f"{case.a_case}/{t.id}"))
    return out


def test_triangle_area(omega_table):
    spec = IntegralSpec(("alpha1", "alpha2"), ((0.0, 1.0), (0.0, x1)), ClosedForm(const(1.0)))
    res = integrate(spec, omega_table, 1e-8)
    assert res.value == pytest.approx(0.5, abs=1e-12)


def test_empty_domain_is_zero(omega_table):
    spec = IntegralSpec(("alpha1",), ((0.3, 0.2),), ClosedForm(const(1.0)))
    res = integrate(spec, omega_table)
    assert (res.value, res.err) == (0.0, 0.0)


def test_log_closed_form():
    assert eval_arith_bound([ArithTerm(((math.e, 1.0, 1),), 1.0)]) == pytest.approx(1.0, abs=1e-15)


def test_closed_form_term_of_second_case():
    entry = decomposition.case_by_id("0.53-0.545").theta("theta12")
    assert isinstance(entry.spec, ArithSpec)
    assert eval_arith_bound(entry.spec) == pytest.approx(0.0387, abs=1e-4)


def test_closed_form_term_above_061():
    entry = decomposition.case_by_id("a>0.61").theta("theta11")
    assert eval_arith_bound(entry.spec) < 0.0471


def test_tolerance_range_checked(omega_table):
    spec = IntegralSpec(("alpha1",), ((0.0, 1.0),), ClosedForm(const(1.0)))
    with pytest.raises(ValueError):
        integrate(spec, omega_table, 1e-1)
    with pytest.raises(ValueError):
        integrate(spec, omega_table, 1e-9)


def test_argument_beyond_table_raises():
    from sievecert.buchstab import build_omega

    small = build_omega(4.0, 1e-3)
    spec = IntegralSpec(("alpha1",), ((0.07, 0.1),), OmegaKernel((1 - x1) / x1, x1))
    with pytest.raises(ValueError):
        integrate(spec, small)


def test_budget_exhaustion_keeps_partial_result(omega_table):
    spec = IntegralSpec(("alpha1",), ((0.0, 1.0),), ClosedForm(1 / (x1 + 1e-3)))
    with pytest.raises(QuadratureBudgetError) as info:
        integrate(spec, omega_table, 1e-8, max_evals=50)
    assert info.value.partial.evaluations > 0


def test_spec_rejects_forward_references():
    with pytest.raises(ValueError):
        IntegralSpec(("alpha1", "alpha2"), ((0.0, x2), (0.0, 1.0)), ClosedForm(const(1.0)))
    with pytest.raises(ValueError):
        IntegralSpec(tuple(f"alpha{i}" for i in range(1, 6)), ((0.0, 1.0),) * 5, ClosedForm(const(1.0)))


@pytest.mark.parametrize("a_case, theta_id", _two_dim_entries())
def test_two_dim_terms_match_midpoint_rule(omega_table, a_case, theta_id):
    spec = decomposition.case_by_id(a_case).theta(theta_id).spec
    res = integrate(spec, omega_table, 1e-4)
    fine, mid, coarse = (_midpoint(spec, omega_table, n) for n in (2000, 1000, 500))
    # kinks off the grid make midpoint convergence uneven, so take the larger step
    err2 = max(abs(fine - mid), abs(mid - coarse))
    assert abs(res.value - fine) <= 3 * (res.err + err2) + 1e-12


def test_envelope_dominates_table(omega_table):
    case = decomposition.case_by_id("0.545-0.57")
    for t in case.thetas[:4]:
        lo = integrate(t.spec, omega_table, 1e-4)
        hi = integrate(t.spec, UpperOmega(), 1e-4)
        assert hi.value + hi.err >= lo.value - lo.err


def test_deterministic(omega_table):
    spec = decomposition.case_by_id("a<=0.53").theta("theta2").spec
    r1 = integrate(spec, omega_table, 1e-4)
    r2 = integrate(spec, omega_table, 1e-4)
    assert r1 == r2


def test_halving_tolerance_costs_bounded_work(omega_table):
    spec = decomposition.case_by_id("0.59-0.61").theta("theta1").spec
    r1 = integrate(spec, omega_table, 1e-4)
    r2 = integrate(spec, omega_table, 5e-5)
    assert r2.evaluations <= 8 * r1.evaluations
    assert abs(r1.value - r2.value) <= r1.err + r2.err
