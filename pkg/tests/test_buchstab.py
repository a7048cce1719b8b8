from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from sievecert import buchstab
from sievecert.buchstab import EXP_MINUS_GAMMA, OmegaDomainError, build_omega, omega, omega_upper


def _ivp_omega(u_top: int):
    """Method of steps on omega' = (omega(u-1) - omega(u))/u with an ODE solver."""
    pieces = [lambda u: 1.0 / np.asarray(u)]
    for k in range(2, u_top):
        prev = pieces[-1]
        sol = solve_ivp(
            lambda u, y, prev=prev: (prev(u - 1.0) - y) / u,
            (k, k + 1), [float(np.asarray(pieces[-1](float(k))).ravel()[0])],
            method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True,
        )
        pieces.append(lambda u, s=sol.sol: s(u)[0])

    def f(u: float) -> float:
        k = min(int(math.floor(u)), u_top - 1)
        return float(np.asarray(pieces[k - 1](u)).ravel()[0])

    return f


@pytest.fixture(scope="module")
def ivp_oracle():
    return _ivp_omega(31)


def test_exact_on_first_panel(omega_table):
    u = np.linspace(1.0, 2.0, 501)
    v, e = omega_table.evaluate(u)
    assert np.all(v == 1.0 / u)
    assert np.all(e == 0.0)


def test_closed_forms(omega_table):
    v, e = omega(omega_table, 2.5)
    assert abs(v - (1 + math.log(1.5)) / 2.5) <= 1e-8
    assert abs(v - 0.5621860) < 1e-7
    v, _ = omega(omega_table, 3.0)
    assert abs(v - (1 + math.log(2.0)) / 3) < 1e-12
    assert abs(v - 0.5643824) < 1e-7


def test_limit_against_ode_solver(ivp_oracle):
    table = build_omega(40.0, 1e-4)
    v, e = omega(table, 30.0)
    assert abs(v - EXP_MINUS_GAMMA) < 1e-6
    assert abs(v - ivp_oracle(30.0)) < 1e-6


@pytest.mark.parametrize("u", [3.3, 3.5, 4.0, 4.7, 5.5, 7.25, 12.0])
def test_table_matches_ode_solver_within_error(omega_table, ivp_oracle, u):
    v, e = omega(omega_table, u)
    assert abs(v - ivp_oracle(u)) <= e + 1e-12


def test_omega_upper_examples():
    assert omega_upper(1.25) == pytest.approx(0.8)
    assert omega_upper(5.0) == pytest.approx(0.6)
    assert omega_upper(5 / 3) == pytest.approx(0.6)
    with pytest.raises(OmegaDomainError):
        omega_upper(0.9)


def test_out_of_range_raises(omega_table):
    with pytest.raises(OmegaDomainError):
        omega(omega_table, 0.5)
    with pytest.raises(OmegaDomainError):
        omega(omega_table, 64.5)
    with pytest.raises(OmegaDomainError):
        omega(omega_table, float("nan"))


def test_build_argument_checks():
    with pytest.raises(ValueError):
        build_omega(2.0)
    with pytest.raises(ValueError):
        build_omega(10.0, 0.05)
    with pytest.raises(ValueError):
        build_omega(65.0)


def test_below_envelope_on_dense_grid(omega_table):
    u = np.linspace(1.0, 64.0, 10_000)
    v, e = omega_table.evaluate(u)
    assert np.all(v + e <= np.maximum(0.6, 1.0 / u))


def test_delay_equation_residual(omega_table):
    # (u omega(u))' = omega(u - 1), by central differences
    u = np.linspace(3.2, 20.0, 400)
    h = 1e-3
    vp, _ = omega_table.evaluate(u + h)
    vm, _ = omega_table.evaluate(u - h)
    lhs = ((u + h) * vp - (u - h) * vm) / (2 * h)
    rhs, _ = omega_table.evaluate(u - 1.0)
    assert np.max(np.abs(lhs - rhs)) < 1e-6


def test_oscillation_settles(omega_table):
    amp = []
    for k in range(4, 12):
        v, _ = omega_table.evaluate(np.linspace(k, k + 1, 2001))
        amp.append(np.max(np.abs(v - EXP_MINUS_GAMMA)))
    assert all(b < a for a, b in zip(amp, amp[1:]))


def test_error_drops_when_step_halves():
    coarse = build_omega(12.0, 2e-3)
    fine = build_omega(12.0, 1e-3)
    assert fine.max_error <= coarse.max_error / 2


def test_dump_and_load_round_trip(tmp_path):
    table = build_omega(8.0, 1e-3)
    path = tmp_path / "omega.txt"
    buchstab.dump_table(table, path)
    assert path.read_text().splitlines()[0].startswith("omega-table v1 ")
    back = buchstab.load_table(path)
    u = np.linspace(1.0, 8.0, 333)
    v1, e1 = table.evaluate(u)
    v2, e2 = back.evaluate(u)
    # join nodes are stored once, so values may move by an ulp there
    assert np.max(np.abs(v1 - v2)) < 1e-15
    assert np.allclose(e1, e2, rtol=1e-6, atol=1e-15)


def test_headline_checks_pass(omega_table):
    checks = buchstab.omega_checks(omega_table)
    assert [c.id for c in checks] == [
        "omega-exact-on-1-2", "omega-at-2.5", "omega-limit", "omega-upper-envelope",
    ]
    assert all(c.passed for c in checks)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1.0, max_value=64.0))
def test_value_within_envelope_everywhere(omega_table, u):
    v, e = omega(omega_table, u)
    assert v - e <= omega_upper(u)
    assert v + e >= 0.5
