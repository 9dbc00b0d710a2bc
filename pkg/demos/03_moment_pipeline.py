"""
The lower-bound pipeline at desk scale
======================================

k = 3/2, T = 5000, theta = 0.3.  Builds the polynomials, computes the
twisted integral I(T), compares it with its diagonal model, then checks the
Hölder chain and the final inequality in log-space.
"""

from zetamoments.construction import build_params
from zetamoments.moments import MomentLab, report_theorem

params = build_params("1.5", 5000.0)
print("T0 =", params.T0, " active A/B:", params.active_A, params.active_B)

lab = MomentLab(params)
rep = report_theorem(lab, {"command": "demo"})

print("I(T)       =", rep.I_numeric)
print("diagonal   =", rep.I_diagonal)
print("offdiag    <=", rep.offdiag_bound)
print("M_k(T)     =", rep.M_k_numeric)
print("Hölder     |I| <= RHS:", rep.holder_lhs_rhs)
print("log of e^{-30k^4} T (log T)^{k^2}:", rep.theorem_bound_log)

for name, a in rep.audits.items():
    print(f"  [{'ok' if a.passed else 'FAIL'}] {name}  (slack_log={a.slack_log:.3g})")
print("all audits passed:", rep.passed)
