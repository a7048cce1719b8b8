"""Evaluate every remainder term of every a-range and show where bounds fail."""

from __future__ import annotations

from sievecert.decomposition import verify_all

for rep in verify_all():
    top = rep.total_computed + rep.total_err
    print(f"{rep.a_case:11s} {rep.status:4s} total {top:.5f} (printed {rep.claimed_total}, "
          f"bounds sum to {rep.bound_sum:.4f})")
    for t in rep.thetas:
        if not t.passed:
            print(f"    {t.id}: {t.value:.6f} +/- {t.err:.1e} exceeds printed bound {t.claimed_bound}")
