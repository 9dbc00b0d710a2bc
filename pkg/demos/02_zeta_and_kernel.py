"""
Zeta on the critical line and the smooth kernel
================================================

Euler-Maclaurin below t = 50, Riemann-Siegel above; the kernel's Fourier
transform decays fast enough that off-diagonal terms are negligible.
"""

import numpy as np

from zetamoments.kernel import KernelSpec, decay_audit, fourier_K, geometric_grid
from zetamoments.zeta import zeta_half, zeta_truncated

for t in (0.0, 14.134725, 100.0, 1000.0):
    v = zeta_half(t)
    print(f"zeta(1/2 + {t:g}i) = {v.value:.10f}   [{v.method.value}, err <= {v.err:.1e}]")

# the truncated sum sum_{n<=T} n^{-1/2-it} tracks zeta inside theta T <= t <= T,
# up to the boundary term of size T^{1/2}/t
for t in (400.0, 900.0):
    v = zeta_truncated(t, 1000.0)
    print(f"T=1000, t={t:g}: |truncated - zeta| = {abs(v.value - zeta_half(t).value):.3f}, estimate {v.err:.3f}")

# kernel: plateau 1 on [2 theta, 1 - 2 theta], mass 1 - 3 theta
for theta in (0.01, 0.3):
    spec = KernelSpec(theta)
    xi = np.array([0.0, 10.0, 100.0, 1000.0])
    print(f"theta={theta}: |Khat| at {xi.tolist()} =", np.abs(fourier_K(spec, xi)))
    grid = geometric_grid(1e-2, 1e5, 4000)
    print("  sup (1+|xi|)^nu |Khat|, nu=0..4:", [f"{decay_audit(spec, nu, grid):.3g}" for nu in range(5)])
