from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sievecert.regions import (
    Outcome,
    RegionSet,
    brute_force_options,
    check_options,
    chi,
    chi0,
    validate_sequence,
)

A_SAMPLES = (0.48, 0.5, 0.53, 0.54, 0.56, 0.58, 0.6, 0.65, 0.75)


def _profile(rng, n):
    w = rng.standard_exponential(n)
    w /= w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return np.abs(w)


def test_two_halves_take_option_one():
    res = check_options([0.5, 0.5], 0.5)
    assert res.opt1


def test_complementary_pair_takes_option_two():
    res = check_options([0.30, 0.70], 0.5)
    assert res.opt2 and res.any_option


def test_four_entry_example_fails_everything():
    seq = [0.24, 0.24, 0.24, 0.28]
    assert brute_force_options(seq, 0.5) == (False, False, False)
    res = check_options(seq, 0.5)
    assert res.all_fail


def test_thresholds():
    assert chi0(0.5) == 0.29
    assert chi0(0.54) == 0.315
    assert chi0(0.7, 1e-7) == pytest.approx(0.32 - 1e-7)
    assert chi(0, 0.5).intervals == ((0.29, 1.0),)
    assert 0.455 in chi(2, 0.58)


def test_out_of_range_a():
    with pytest.raises(ValueError):
        chi(1, 0.3)
    with pytest.raises(ValueError):
        chi(4, 0.5)


@pytest.mark.parametrize("a", [0.5, 0.56, 0.65])
def test_regions_coincide_where_the_table_says_so(a):
    assert chi(2, a) == chi(1, a) == chi(3, a)


@pytest.mark.parametrize("a", A_SAMPLES)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_reflection_symmetry(a, k):
    r = chi(k, a)
    ends = np.concatenate([r.endpoints, 1.0 - r.endpoints])
    x = np.linspace(0, 1, 4001)
    x = x[np.min(np.abs(x[:, None] - ends[None, :]), axis=1) > 1e-9]
    assert np.array_equal(r.contains(x), r.contains(1.0 - x))


def test_region_set_merges():
    r = RegionSet.of([(0.1, 0.2), (0.15, 0.3), (0.5, 0.6)])
    assert r.intervals == ((0.1, 0.3), (0.5, 0.6))
    with pytest.raises(ValueError):
        RegionSet.of([(0.3, 0.2)])


def test_sequence_validation():
    with pytest.raises(ValueError):
        validate_sequence([0.5, 0.4])
    with pytest.raises(ValueError):
        validate_sequence([])
    with pytest.raises(ValueError):
        check_options([1.0 / 30] * 30, 0.5, method="exact")


def test_enumeration_agrees_with_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(300):
        seq = _profile(rng, int(rng.integers(2, 11)))
        a = float(rng.choice(A_SAMPLES))
        res = check_options(seq, a, method="exact")
        assert (res.opt1, res.opt2, res.opt3) == brute_force_options(seq, a)


def test_grid_reachability_agrees_with_enumeration():
    # grid answers are one-sided: YES and NO must match the exact answer
    rng = np.random.default_rng(5)
    decided = 0
    for _ in range(2000):
        seq = _profile(rng, int(rng.integers(5, 25)))
        a = float(rng.choice(A_SAMPLES))
        exact = check_options(seq, a, method="exact")
        dp = check_options(seq, a, method="dp")
        for got, want in ((dp.option2, exact.option2), (dp.option3, exact.option3)):
            if got is not Outcome.MAYBE:
                decided += 1
                assert got is want
    assert decided > 3000


def test_long_profile_uses_grid():
    seq = [1.0 / 400] * 400
    res = check_options(seq, 0.5)
    assert res.method == "dp"
    assert res.opt2


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(0.001, 1.0), min_size=1, max_size=14),
    st.sampled_from(A_SAMPLES),
    st.randoms(use_true_random=False),
)
def test_options_are_permutation_invariant(weights, a, rnd):
    w = np.array(weights)
    w /= w.sum()
    w[-1] = max(0.0, 1.0 - w[:-1].sum())
    perm = list(w)
    rnd.shuffle(perm)
    r1 = check_options(w, a)
    r2 = check_options(perm, a)
    assert (r1.option1, r1.option2, r1.option3) == (r2.option1, r2.option2, r2.option3)
