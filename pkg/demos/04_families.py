"""
Analogues over Dirichlet characters
===================================

The same twisted first moment, averaged over the characters mod a prime q
and over real characters chi_d with |d| <= X.
"""

import numpy as np

from zetamoments.families import I_X, I_q, L_half, build_characters, fundamental_discriminants

t = build_characters(11)
print("primitive root mod 11:", t.generator)
for j in (1, 5):
    print(f"L(1/2, chi_{j}) =", L_half(t.character(j)))

m = I_q(211, "1.5", 0.2)
print("I(211) =", m.value, " diagonal model:", m.diagonal)

fam = fundamental_discriminants(200)
print("fundamental discriminants up to 200:", len(fam.discriminants), "first few", fam.discriminants[:8])
mx = I_X(200, "1.5", 0.2)
print("I_X(200) =", mx.value, " diagonal model:", mx.diagonal)
print("mean L(1/2, chi_d):", np.mean(mx.L_values.real))
