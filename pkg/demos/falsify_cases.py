"""Hunt for length profiles that satisfy none of the three options."""

from __future__ import annotations

from sievecert.combinatorics import case_by_id, falsify_case, mutant_case

for cid in ("I(i)", "II(ii)", "B(a)", "F(b)"):
    res = falsify_case(case_by_id(cid), seed=1, count=20_000)
    print(f"{cid:8s} {res.status:21s} checked {res.checked}, undecided {res.undecided}, {res.seconds:.1f}s")

res = falsify_case(mutant_case(), seed=1, count=100_000, stop_after=1)
print(f"\nnarrowed target: {res.status} after {res.checked} samples")
if res.counterexamples:
    w = res.counterexamples[0]
    print("  profile", [round(x, 4) for x in sorted(w.values, reverse=True)])
    print("  blocks ", w.lstar, "beta", w.beta)
