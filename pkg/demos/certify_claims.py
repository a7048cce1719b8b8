"""Certify the long-factor exponent claims, then show that a tightened copy fails."""

from __future__ import annotations

from sievecert.exponents import certify, claim_by_id

for cid in ("smoothfull-0.335", "smoothfull-0.33", "smoothfull-0.32", "largetau"):
    claim = claim_by_id(cid)
    v = certify(claim)
    print(f"{cid:18s} {v.status.value:10s} margin {v.margin:.2e} after {v.boxes_processed} boxes")
    print(f"    {claim.anchor}")

mutant = claim_by_id("smoothfull-0.335").tightened(0.05)
v = certify(mutant)
print(f"\ntightened by 0.05: {v.status.value}, witness {v.witness}")
