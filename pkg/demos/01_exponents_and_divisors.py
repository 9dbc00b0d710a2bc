"""
Greedy exponents and generalized divisor functions
==================================================

The construction splits the exponent 1 into Egyptian fractions.  For k > 1
the two exponent sequences are the greedy expansions of 1 - 1/k and 1.
"""

from fractions import Fraction

import numpy as np

from zetamoments.multiplicative import diagonal_asymptotic, diagonal_sum, divisor_values
from zetamoments.sylvester import construction_exponents, sylvester

# the classical greedy expansion of 1
s = sylvester(1, 6)
print("s_n(1):", list(s.terms))
print("remainder after 6 terms:", float(s.remainders[-1]))

# the exponents for k = 3/2: 1 - 2/3 = 1/3 = 1/4 + 1/13 + ...
e = construction_exponents(Fraction(3, 2), 5)
print("a_l for k=3/2:", list(e.a.terms))
print("b_l for k=3/2:", list(e.b.terms))

# d_k(n) for a non-integer k, from the multiplicative sieve
d = divisor_values(1.5, 20)
print("d_1.5(n), n=1..20:", np.round(d[1:], 4))

# the diagonal sum of d_k(n)^2/n against its Euler-product asymptotic
for N in (10**3, 10**4, 10**5):
    s = diagonal_sum(1.5, N)
    a = diagonal_asymptotic(1.5, N, 10**5).value
    print(f"N={N:>6}: sum={s:10.3f}  asymptotic={a:10.3f}  ratio={s / a:.3f}")
