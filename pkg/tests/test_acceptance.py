"""Acceptance criteria, one test each. Every test records a PASS or FAIL line
that is printed in the terminal summary."""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES, EPS1_VALUES

from sievecert import buchstab, combinatorics, decomposition, exponents
from sievecert.cli import run
from sievecert.sieve_sets import SievedInterval, buchstab_identity_check, legendre_count, sifted_count

THETA_BOUNDS_0530 = (0.185, 0.001, 0.175, 0.01, 0.013, 0.08, 0.062, 0.012, 0.003, 0.01, 0.296, 0.04)
PRINTED_TOTALS = {
    "a<=0.53": 0.938,
    "0.53-0.545": 0.887,
    "0.545-0.57": 0.867,
    "0.57-0.59": 0.9855,
    "0.59-0.61": 0.9937,
    "a>0.61": 0.9921,
}
SMOOTHFULL = ("smoothfull-0.335", "smoothfull-0.33", "smoothfull-0.32")


def _record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_1_omega():
    t0 = time.perf_counter()
    table = buchstab.build_omega()
    checks = buchstab.omega_checks(table, grid_points=10_000)
    elapsed = time.perf_counter() - t0
    ok = all(c.passed for c in checks) and elapsed < 5.0
    worst = {c.id: c.value + c.err for c in checks}
    _record(1, ok, f"omega checks {sorted(worst.items())}, {elapsed:.2f}s")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="term 10 of the (0.53, 0.545] case computes to 0.12207, above its printed bound 0.01",
)
def test_criterion_2_second_case():
    t0 = time.perf_counter()
    rep = decomposition.verify_case(decomposition.case_by_id("0.53-0.545"))
    elapsed = time.perf_counter() - t0
    bounds_match = tuple(t.claimed_bound for t in rep.thetas) == THETA_BOUNDS_0530
    t12 = rep.thetas[11]
    failing = [f"{t.id}={t.value:.5f}>={t.claimed_bound}" for t in rep.thetas if not t.passed]
    ok = (
        bounds_match
        and rep.all_thetas_pass
        and all(t.err <= 1e-4 for t in rep.thetas)
        and rep.total_pass
        and abs(t12.value - 0.0387) <= 1e-4
        and elapsed < 120
    )
    _record(
        2, ok,
        f"{12 - len(failing)}/12 terms pass, failing {failing}, "
        f"total {rep.total_computed + rep.total_err:.5f} vs 0.887, theta12 {t12.value:.5f}, {elapsed:.1f}s",
    )
    # the parts that do hold are asserted unconditionally
    assert bounds_match and abs(t12.value - 0.0387) <= 1e-4
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="the (0.53, 0.545] total is 0.9491, above its printed value 0.887",
)
def test_criterion_3_all_totals():
    t0 = time.perf_counter()
    table = buchstab.build_omega()
    problems = []
    for eps1 in EPS1_VALUES:
        for rep in decomposition.verify_all(1e-4, table, eps1):
            top = rep.total_computed + rep.total_err
            assert rep.claimed_total == PRINTED_TOTALS[rep.a_case]
            if not rep.total_pass:
                problems.append(f"{rep.a_case}@{eps1:g}: {top:.5f}>={rep.claimed_total}")
            if not rep.budget_pass:
                problems.append(f"{rep.a_case}@{eps1:g}: {top:.5f} over budget")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 900
    _record(3, ok, f"totals {'all below printed values' if ok else problems}, {elapsed:.1f}s")
    assert elapsed < 900
    assert ok


def test_criterion_4_exponent_claims():
    ids = list(SMOOTHFULL) + ["largetau"] + [
        c.id for c in exponents.catalog_claims() if c.id.startswith(("smallsigma-lower", "smallsigma-upper"))
    ]
    assert len(ids) == 16
    slow, bad = [], []
    for eps1 in EPS1_VALUES:
        for cid in ids:
            t0 = time.perf_counter()
            v = exponents.certify(exponents.claim_by_id(cid), min_width=1e-5, eps1_value=eps1, margin=1e-4)
            dt = time.perf_counter() - t0
            if v.status is not exponents.Status.CERTIFIED or v.margin < 1e-4:
                bad.append(f"{cid}@{eps1:g}:{v.status.value}")
            if dt >= 30:
                slow.append(f"{cid}@{eps1:g}:{dt:.1f}s")
    ok = not bad and not slow
    _record(4, ok, f"{len(ids)} claims x {len(EPS1_VALUES)} eps1 values certified; problems {bad + slow}")
    assert ok


@pytest.mark.slow
def test_criterion_5_combinatorics():
    details, ok = [], True
    for eps1 in EPS1_VALUES:
        rep = combinatorics.verify_combinatorics(seeds=(1, 42, 2024), count=100_000, eps1=eps1)
        bad = [f"{r.case_id}/{r.seed}:{r.status}" for r in rep.results if not r.passed]
        caught = rep.mutant.n_counterexamples > 0 and rep.mutant.checked <= 100_000
        ok = ok and not bad and caught and rep.seconds < 300 and len(rep.results) == 56 * 3
        details.append(
            f"eps1={eps1:g}: {len(rep.results) - len(bad)}/{len(rep.results)} runs clean, "
            f"mutant caught after {rep.mutant.checked} samples, {rep.seconds:.0f}s"
        )
    _record(5, ok, "; ".join(details))
    assert ok


def test_criterion_6_sieve_sets():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240)
    identity = 0
    for _ in range(200):
        lo = int(rng.integers(2, 10**6))
        hi = lo + int(rng.integers(0, 10**4))
        d = int(rng.integers(1, 50))
        z1 = float(rng.uniform(2, 100))
        z2 = z1 + float(rng.uniform(0, 300))
        identity += buchstab_identity_check(SievedInterval(lo, hi), d, z1, z2)
    legendre = 0
    for _ in range(100):
        lo = int(rng.integers(2, 10**7))
        hi = lo + int(rng.integers(0, 1001))
        d = int(rng.integers(1, 20))
        z = float(rng.uniform(2, 45))
        c = SievedInterval(lo, hi)
        legendre += sifted_count(c, d, z) == legendre_count(c, d, z)
    elapsed = time.perf_counter() - t0
    ok = identity == 200 and legendre == 100 and elapsed < 60
    _record(6, ok, f"identity {identity}/200, Legendre {legendre}/100, {elapsed:.1f}s")
    assert ok


def test_criterion_7_determinism_and_robustness(tmp_path):
    # repeated runs give the same report apart from the timestamp
    texts = []
    for k in range(2):
        p = tmp_path / f"r{k}.json"
        argv = ["verify-decomposition", "--report", str(p)]
        run(argv)
        doc = json.loads(p.read_text())
        doc.pop("timestamp")
        texts.append(json.dumps(doc))
    identical = texts[0] == texts[1]

    comb = []
    for k in range(2):
        p = tmp_path / f"c{k}.json"
        run(["verify-combinatorics", "--case", "IV(iv)", "--count", "5000", "--report", str(p)])
        doc = json.loads(p.read_text())
        doc.pop("timestamp")
        comb.append(json.dumps(doc))
    identical = identical and comb[0] == comb[1]

    # doubling resolution: halve the tolerance, and separately halve the omega step
    base = decomposition.verify_all(1e-4)
    finer_tol = decomposition.verify_all(5e-5)
    finer_step = decomposition.verify_all(1e-4, buchstab.build_omega(step=5e-5))
    flips = []
    for b, f1, f2 in zip(base, finer_tol, finer_step):
        for tb, t1, t2 in zip(b.thetas, f1.thetas, f2.thetas):
            if not tb.passed == t1.passed == t2.passed:
                flips.append(f"{b.a_case}/{tb.id}")
        if not b.status == f1.status == f2.status:
            flips.append(b.a_case)

    # transcription checksum
    off = [
        c.a_case for c in decomposition.case_catalog()
        if abs(c.bound_sum - c.claimed_total) > decomposition.CHECKSUM_TOL + 1e-12
    ]
    ok = identical and not flips and not off
    worst = max(abs(c.bound_sum - c.claimed_total) for c in decomposition.case_catalog())
    _record(
        7, ok,
        f"reports identical={identical}, verdict flips {flips}, "
        f"largest checksum gap {worst:.1e} (cases off {off})",
    )
    assert ok
    assert math.isfinite(worst)
