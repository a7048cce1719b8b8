from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sievecert import combinatorics as cb
from sievecert.combinatorics import (
    CaseSpec,
    Family,
    InfeasibleCaseError,
    XiSample,
    case_by_id,
    case_catalog,
    check_structure,
    decide_profiles,
    falsify_case,
    lemma_conditions_check,
    mutant_case,
    profile_verdict,
    sample_xi,
)
from sievecert.regions import check_options


def _take(case_id: str, seed: int, count: int, eps1: float = 0.0) -> list[XiSample]:
    return list(sample_xi(case_by_id(case_id), seed, count, eps1))


# ---------------------------------------------------------------------------
# lemma conditions


def test_condition_a_with_no_blocks():
    res = lemma_conditions_check([], beta=0.07, rho=0.29, b1=0.0, b2=0.0, chi=(0.64, 0.71))
    assert res.A
    assert res.any


def test_condition_e_by_direct_membership():
    res = lemma_conditions_check([0.45, 0.30], beta=0.2, rho=0.29, b1=0.0, b2=0.0, chi=(0.40, 0.47))
    assert res.E


def test_condition_d_needs_lower_end_above_half():
    # the prefix 0.45 lies in [1 - a2 - (2 a1 - 1), a2] once a1 >= 0.5
    res = lemma_conditions_check([0.3, 0.15], beta=0.01, rho=0.1, b1=0.1, b2=0.1, chi=(0.49, 0.6))
    assert not res.D
    res = lemma_conditions_check([0.3, 0.15], beta=0.01, rho=0.1, b1=0.1, b2=0.1, chi=(0.5, 0.6))
    assert res.D


def test_side_condition_on_width():
    # the interval is narrower than beta, so only (E) can hold
    res = lemma_conditions_check([], beta=0.08, rho=0.29, b1=0.0, b2=0.0, chi=(0.64, 0.71))
    assert not (res.A or res.B or res.C or res.D)
    assert res.as_dict() == {"A": False, "B": False, "C": False, "D": False, "E": False}


def test_reversed_interval_rejected():
    with pytest.raises(ValueError):
        lemma_conditions_check([0.3], 0.07, 0.29, 0.0, 0.0, (0.7, 0.6))


# ---------------------------------------------------------------------------
# catalog


def test_catalog_covers_both_families():
    ids = [c.id for c in case_catalog()]
    assert len(ids) == len(set(ids)) == 56
    assert sum(c.family is Family.R_STAR for c in case_catalog()) == 32
    assert ids[0] == "I(i)" and ids[-1] == "F(b)"
    assert "VI(vi)" in ids and "A(f)" in ids


def test_case_lookup_error():
    with pytest.raises(KeyError):
        case_by_id("VII(i)")


# ---------------------------------------------------------------------------
# samples


def test_hand_built_sample_is_valid():
    fillers = [0.06] * 10
    s = XiSample(tuple([0.4] + fillers), ((0,),), (0.4,), 0.07, Family.R_STAR)
    assert check_structure(s) == []
    bad = XiSample(tuple([0.4, 0.3, 0.3]), ((0,),), (0.4,), 0.07, Family.R_STAR)
    assert any("leftover" in p for p in check_structure(bad))


@pytest.mark.parametrize("case_id", ["I(i)", "II(ii)", "IV(iv)", "VI(vi)", "A(a)", "C(b)", "F(b)"])
def test_samples_are_structurally_valid(case_id):
    for s in _take(case_id, 1, 300):
        assert check_structure(s) == []
        assert abs(sum(s.values) - 1.0) <= 1e-9
        assert s.length <= cb.MAX_PROFILE_LENGTH


def test_seeded_stream_is_reproducible():
    a = _take("I(i)", 42, 100)
    b = _take("I(i)", 42, 100)
    assert [s.values for s in a] == [s.values for s in b]
    assert [s.blocks for s in a] == [s.blocks for s in b]
    c = _take("I(i)", 43, 100)
    assert [s.values for s in a] != [s.values for s in c]


def test_sample_tuples_satisfy_case_constraints():
    case = case_by_id("II(iii)")
    for s in _take("II(iii)", 2, 200):
        lstar = np.full((1, cb.MAX_R), np.nan)
        lstar[0, : len(s.lstar)] = s.lstar
        assert case.feasible(lstar, np.array([s.beta]), np.array([len(s.lstar)]))[0]


def test_infeasible_case_is_reported():
    bad = CaseSpec(
        id="contradiction",
        family=Family.R_STAR,
        a_case="a<=0.53",
        a_interval=(0.475, 0.53),
        r_values=(1,),
        constraints=cb.le(cb.L[0], 0.02),
        beta_range=(0.07, 0.07),
    )
    with pytest.raises(InfeasibleCaseError):
        next(sample_xi(bad, 1, 10))


def test_count_cap():
    with pytest.raises(ValueError):
        next(sample_xi(case_by_id("I(i)"), 1, 10**7 + 1))


# ---------------------------------------------------------------------------
# option decisions


def test_kernel_agrees_with_enumeration():
    rng = np.random.default_rng(9)
    for case_id in ("I(i)", "II(i)", "IV(ii)", "V(i)", "A(a)", "F(a)"):
        case = case_by_id(case_id)
        rows = []
        for _ in range(250):
            n = int(rng.integers(2, 16))
            w = rng.standard_exponential(n)
            w /= w.sum()
            w[-1] = 1.0 - w[:-1].sum()
            rows.append(np.abs(w))
        width = max(len(r) for r in rows)
        padded = np.zeros((len(rows), width))
        for i, r in enumerate(rows):
            padded[i, : len(r)] = r
        got = decide_profiles(padded, case.targets())
        for i, r in enumerate(rows):
            want = check_options(r, case.representative_a).any_option
            assert got[i] == int(want)


def test_known_failing_profile():
    assert profile_verdict([0.24, 0.24, 0.24, 0.28], case_by_id("I(i)")) == 0
    assert profile_verdict([0.3, 0.7], case_by_id("I(i)")) == 1


@pytest.mark.parametrize("case_id", ["I(i)", "B(a)"])
def test_documented_cases_have_no_counterexample(case_id):
    res = falsify_case(case_by_id(case_id), 1, 100_000)
    assert res.checked == 100_000
    assert res.n_counterexamples == 0
    assert res.status == cb.FALSIFICATION_PASSED


@pytest.mark.parametrize("eps1", [0.0, 1e-7])
def test_mutant_is_caught(eps1):
    res = falsify_case(mutant_case(eps1), 1, 100_000, eps1, stop_after=1)
    assert res.n_counterexamples >= 1
    assert res.status == cb.FALSIFIED
    witness = res.counterexamples[0]
    assert check_structure(witness) == []
    assert profile_verdict(witness.values, mutant_case(eps1), eps1) == 0


def test_lemma_condition_a_implies_no_counterexample():
    case = case_by_id("I(i)")
    rho = 0.29
    lo, hi = 0.64, 0.71
    checked = 0
    for s in _take("I(i)", 5, 3000):
        if max(s.values) > rho:
            continue
        cond = lemma_conditions_check(s.lstar, s.beta, rho, 0.0, 0.0, (lo, hi))
        if cond.A:
            checked += 1
            assert profile_verdict(s.values, case) == 1
    assert checked > 50


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 199), st.randoms(use_true_random=False))
def test_relabelling_blocks_keeps_verdict(index, rnd):
    samples = _PERM_POOL
    s = samples[index % len(samples)]
    perm = list(range(s.length))
    rnd.shuffle(perm)
    order = list(range(len(s.blocks)))
    rnd.shuffle(order)
    t = s.permuted(perm, order)
    assert check_structure(t) == []
    case = case_by_id("III(iii)")
    assert profile_verdict(t.values, case) == profile_verdict(s.values, case)


_PERM_POOL = list(itertools.islice(sample_xi(case_by_id("III(iii)"), 3, 200), 200))
