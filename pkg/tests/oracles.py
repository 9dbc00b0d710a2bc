"""Independent reference implementations shared by the test modules."""

import cmath
import math

import mpmath as mp
import numpy as np
from scipy.special import gammaincc


def euler_expansion(k, N):
    """d_k on 1..N by multiplying out the Euler factors (1 - p^-s)^-k as
    Dirichlet series, coefficients from mpmath binomials."""
    out = np.zeros(N + 1)
    out[1] = 1.0
    for p in [n for n in range(2, N + 1) if all(n % d for d in range(2, math.isqrt(n) + 1))]:
        factor = {}
        q, a = p, 1
        while q <= N:
            factor[q] = float(mp.binomial(k + a - 1, a))
            q *= p
            a += 1
        new = out.copy()
        for q, c in factor.items():
            new[q : N + 1 : q] += c * out[1 : N // q + 1]
        out = new
    return out


def afe_L_half(values, q, parity, epsilon):
    """L(1/2, chi) from the smoothed approximate functional equation

        L(1/2) = sum chi(n) n^-1/2 Q(n) + eps sum conj chi(n) n^-1/2 Q(n),
        Q(n) = Gamma((1/2 + a)/2, pi n^2 / q) / Gamma((1/2 + a)/2),

    with ``values`` the character on 0..q-1 (independent of the Hurwitz route)."""
    N = int(12 * math.sqrt(q)) + 20
    n = np.arange(1, N + 1)
    Q = gammaincc((0.5 + parity) / 2, math.pi * n**2 / q)
    chi = values[n % q]
    return np.sum(chi * Q / np.sqrt(n)) + epsilon * np.sum(np.conj(chi) * Q / np.sqrt(n))


def root_number(values, q, parity):
    tau = sum(values[a] * cmath.exp(2j * math.pi * a / q) for a in range(1, q))
    return tau / ((1j) ** parity * math.sqrt(q))
