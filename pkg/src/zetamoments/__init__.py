"""Numerical lower bounds for moments of the Riemann zeta function.

The package builds the twisted first moment of zeta against products of short
divisor-function Dirichlet polynomials (exponents from greedy Egyptian
fractions), evaluates it on desk-scale heights, and audits every inequality
in the chain that bounds ``int_0^T |zeta(1/2+it)|^{2k} dt`` from below.
"""

__version__ = "0.1.0"
