"""Build the Buchstab table and look at a few values and their error bounds."""

from __future__ import annotations

from sievecert.buchstab import EXP_MINUS_GAMMA, build_omega, omega_checks

table = build_omega()
print(f"table on [1, {table.u_max}] with step {table.step:.1e}, worst panel error {table.max_error:.2e}")
for u in (1.5, 2.5, 3.0, 4.0, 6.0, 10.0, 30.0):
    v, e = table(u)
    print(f"  omega({u:5.1f}) = {v:.12f}  +/- {e:.1e}   (limit gap {v - EXP_MINUS_GAMMA:+.1e})")

print()
for c in omega_checks(table):
    print(f"  {c.id:24s} {'PASS' if c.passed else 'FAIL'}   value {c.value:.2e} + err {c.err:.2e} vs {c.bound}")
