"""Evaluation of zeta(s) on and near the critical line.

Three evaluators share the :class:`ZetaValue` record:

* Euler-Maclaurin, any ``Re s >= 1/2``, with the standard remainder bound;
* Riemann-Siegel for ``t >= 50``, main sum plus the corrections C0..C4;
* the sharp truncated Dirichlet sum ``sum_{n<=T} n^{-s}``.

:func:`zeta_grid` evaluates ``zeta(1/2 + i t)`` on an array of ordinates,
picking Euler-Maclaurin below :data:`RS_FLOOR` and Riemann-Siegel above.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import bernoulli

from .errors import InsufficientPrecision, InvalidArgument, UseEulerMaclaurin

RS_FLOOR = 50.0
_EM_MAX_ORDER = 40
_BERN = bernoulli(2 * _EM_MAX_ORDER + 2)
_FACT = [math.factorial(i) for i in range(2 * _EM_MAX_ORDER + 3)]
_BLOCK = 1 << 16
# sup |C5(p)| envelope for the first omitted Riemann-Siegel correction;
# observed maximum against an mpmath reference is 8.7e-5
_C5_BOUND = 2e-4


class Method(str, Enum):
    euler_maclaurin = "euler_maclaurin"
    riemann_siegel = "riemann_siegel"
    truncated_sum = "truncated_sum"


@dataclass(frozen=True)
class ZetaValue:
    t: float
    value: complex
    method: Method
    err: float

    def conjugate(self) -> "ZetaValue":
        return ZetaValue(-self.t, self.value.conjugate(), self.method, self.err)


# --------------------------------------------------------------------------
# Euler-Maclaurin
# --------------------------------------------------------------------------


def em_terms_for(t: float) -> int:
    return int(2 * abs(t) + 50)


def zeta_em_array(s, N: int, rel_tol: float = 1e-17):
    """Euler-Maclaurin for an array of ``s`` sharing the cut point ``N``.

    Returns ``(values, err)``; ``err`` bounds the remainder after the last
    correction used by ``|(s+2m+1) T_{m+1}| / (Re s + 2m + 1)``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if N < 10:
        raise InvalidArgument("need at least 10 main terms")
    if np.any(s == 1):
        raise InvalidArgument("pole at s = 1")
    total = np.zeros_like(s)
    for n in range(1, N):
        total += np.exp(-s * math.log(n))
    logN = math.log(N)
    Ns = np.exp(-s * logN)
    total += N * Ns / (s - 1.0) + 0.5 * Ns

    # T_j = B_2j/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    rising = s.copy()
    power = Ns / N
    err = np.full(s.shape, np.inf)
    done = np.zeros(s.shape, dtype=bool)
    prev = np.full(s.shape, np.inf)
    for j in range(1, _EM_MAX_ORDER + 1):
        term = _BERN[2 * j] / _FACT[2 * j] * rising * power
        mag = np.abs(term)
        # the asymptotic series starts growing: stop before using this term
        diverging = ~done & (mag > prev)
        err[diverging] = prev[diverging]
        done |= diverging
        live = ~done
        total[live] += term[live]
        rising = rising * (s + 2 * j - 1) * (s + 2 * j)
        power = power / (N * N)
        nxt = _BERN[2 * j + 2] / _FACT[2 * j + 2] * rising * power
        bound = np.abs(nxt * (s + 2 * j + 1) / (s.real + 2 * j + 1))
        converged = live & (bound <= rel_tol * np.abs(total))
        err[converged] = bound[converged]
        done |= converged
        prev = np.where(done, prev, mag)
        if done.all():
            break
    left = ~done
    err[left] = np.abs(nxt[left])
    return total, err


def zeta_em(s: complex, terms: int | None = None, tol: float = 1e-8) -> ZetaValue:
    s = complex(s)
    if s.real < 0.5:
        raise InvalidArgument("Euler-Maclaurin evaluator needs Re s >= 1/2")
    N = terms if terms is not None else em_terms_for(s.imag)
    vals, err = zeta_em_array([s], N)
    if not err[0] <= tol * max(1.0, abs(vals[0])):
        raise InsufficientPrecision(f"remainder bound {err[0]:.2e} with {N} terms")
    return ZetaValue(s.imag, complex(vals[0]), Method.euler_maclaurin, float(err[0]))


# --------------------------------------------------------------------------
# Riemann-Siegel
# --------------------------------------------------------------------------


def theta(t):
    """Riemann-Siegel theta by its Stirling expansion (``t >= 10``)."""
    t = np.asarray(t, dtype=float)
    return (
        0.5 * t * np.log(t / (2.0 * math.pi))
        - 0.5 * t
        - math.pi / 8.0
        + 1.0 / (48.0 * t)
        + 7.0 / (5760.0 * t**3)
        + 31.0 / (80640.0 * t**5)
        + 127.0 / (430080.0 * t**7)
    )


def _psi(p):
    return np.cos(2.0 * np.pi * (p * p - p - 1.0 / 16.0)) / np.cos(2.0 * np.pi * p)


def _psi_taylor(radius: float = 1.0, points: int = 512) -> np.ndarray:
    # Psi is entire (every zero of the denominator cancels), so its Taylor
    # coefficients at 1/2 come from a Cauchy integral on any circle
    z = 0.5 + radius * np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
    c = np.fft.fft(_psi(z)) / points
    n = np.arange(points)
    c = c * np.exp(-1j * np.pi * n / points) / radius**n
    # beyond ~80 the computed coefficients sit at the rounding floor
    return c.real[:90]


_PSI_COEFFS = _psi_taylor()


def _psi_derivs(p: np.ndarray, order: int = 12) -> list[np.ndarray]:
    """``Psi^(j)(p)`` for ``j = 0..order`` from the Taylor series at 1/2."""
    x = p - 0.5
    c = _PSI_COEFFS
    out = []
    for j in range(order + 1):
        n = np.arange(j, c.size)
        coeff = c[j:] * np.array([math.perm(int(m), j) for m in n], dtype=float)
        # Horner in x
        acc = np.zeros_like(x)
        for a in coeff[::-1]:
            acc = acc * x + a
        out.append(acc)
    return out


def _rs_corrections(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sum of C_k(p) u^k for k = 0..4, ``u = sqrt(2 pi / t)``."""
    d = _psi_derivs(p)
    pi2 = math.pi**2
    c0 = d[0]
    c1 = -d[3] / (96.0 * pi2)
    c2 = d[2] / (64.0 * pi2) + d[6] / (18432.0 * pi2**2)
    c3 = -d[1] / (64.0 * pi2) - d[5] / (3840.0 * pi2**2) - d[9] / (5308416.0 * pi2**3)
    c4 = (
        d[0] / (128.0 * pi2)
        + 19.0 * d[4] / (24576.0 * pi2**2)
        + 11.0 * d[8] / (5898240.0 * pi2**3)
        + d[12] / (2038431744.0 * pi2**4)
    )
    return c0 + u * (c1 + u * (c2 + u * (c3 + u * c4)))


def siegel_z(t) -> tuple[np.ndarray, np.ndarray]:
    """Hardy's ``Z(t)`` for ``t >= 50`` with an error estimate."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < RS_FLOOR):
        raise UseEulerMaclaurin(f"Riemann-Siegel needs t >= {RS_FLOOR}")
    a = np.sqrt(t / (2.0 * math.pi))
    N = np.floor(a).astype(np.int64)
    p = a - N
    th = theta(t)
    main = np.zeros_like(t)
    for n in range(1, int(N.max()) + 1):
        use = N >= n
        main += np.where(use, np.cos(th - t * math.log(n)), 0.0) / math.sqrt(n)
    main *= 2.0
    u = 1.0 / a
    corr = _rs_corrections(p, u)
    sign = np.where(N % 2 == 1, 1.0, -1.0)
    scale = np.sqrt(u)
    Z = main + sign * scale * corr
    err = _C5_BOUND * u**5.5 + 4e-16 * t * np.sqrt(N)
    return Z, err


def zeta_rs(t: float) -> ZetaValue:
    if t < RS_FLOOR:
        raise UseEulerMaclaurin(f"t = {t} is below the Riemann-Siegel floor {RS_FLOOR}")
    Z, err = siegel_z([t])
    val = complex(Z[0] * np.exp(-1j * theta(t)))
    return ZetaValue(float(t), val, Method.riemann_siegel, float(err[0]))


# --------------------------------------------------------------------------
# truncated sum
# --------------------------------------------------------------------------


def truncated_sum_array(t, T: float) -> np.ndarray:
    """``sum_{n<=T} n^{-1/2-it}`` on an array of ordinates."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    M = int(math.floor(T))
    logs = np.log(np.arange(1, M + 1, dtype=float))
    w = np.exp(-0.5 * logs)
    out = np.empty(t.shape, dtype=complex)
    step = max(1, (1 << 22) // max(M, 1))
    for s in range(0, t.size, step):
        ph = np.outer(t[s : s + step], logs)
        out[s : s + step] = (np.cos(ph) - 1j * np.sin(ph)) @ w
    return out


def truncation_error_estimate(t: float, T: float) -> float:
    """Size of the leading Euler-Maclaurin correction ``zeta(s) - sum_{n<=T}``."""
    s = complex(0.5, t)
    M = math.floor(T)
    return abs(M ** (1 - s) / (s - 1)) + 0.5 * M**-0.5 + abs(s) / 12.0 * M**-1.5


def zeta_truncated(t: float, T: float, theta_window: float | None = None) -> ZetaValue:
    """The sharp sum ``sum_{n<=T} n^{-1/2-it}``.

    ``err`` is the magnitude of the next Euler-Maclaurin terms, which is the
    ``O(T^{-1/2})`` discrepancy with ``zeta`` inside ``theta T <= t <= T``.
    Outside that window the value is still returned; use
    :func:`in_truncation_window` to flag it.
    """
    val = complex(truncated_sum_array([t], T)[0])
    return ZetaValue(float(t), val, Method.truncated_sum, truncation_error_estimate(t, T))


def in_truncation_window(t: float, T: float, theta_window: float) -> bool:
    return theta_window * T <= t <= T


# --------------------------------------------------------------------------
# grid evaluation
# --------------------------------------------------------------------------


def _block(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    out = np.empty(t.shape, dtype=complex)
    err = np.empty(t.shape)
    at = np.abs(t)
    low = at < RS_FLOOR
    if np.any(low):
        tl = t[low]
        v, e = zeta_em_array(0.5 + 1j * tl, em_terms_for(np.abs(tl).max()))
        out[low], err[low] = v, e
    high = ~low
    if np.any(high):
        th = at[high]
        Z, e = siegel_z(th)
        v = Z * np.exp(-1j * theta(th))
        out[high] = np.where(t[high] < 0, np.conj(v), v)
        err[high] = e
    return out, err


def zeta_grid(t, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """``zeta(1/2 + i t)`` and error estimates on an array of ordinates.

    Blocks are evaluated independently, so the result does not depend on
    ``threads``.
    """
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    starts = range(0, flat.size, _BLOCK)
    if threads > 1 and flat.size > _BLOCK:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda s: _block(flat[s : s + _BLOCK]), starts))
    else:
        parts = [_block(flat[s : s + _BLOCK]) for s in starts]
    if not parts:
        return np.zeros(t.shape, dtype=complex), np.zeros(t.shape)
    vals = np.concatenate([p[0] for p in parts]).reshape(t.shape)
    errs = np.concatenate([p[1] for p in parts]).reshape(t.shape)
    return vals, errs


def zeta_half(t: float) -> ZetaValue:
    """``zeta(1/2 + i t)`` with the engine's default method choice."""
    if abs(t) >= RS_FLOOR:
        v = zeta_rs(abs(t))
        return v if t >= 0 else v.conjugate()
    return zeta_em(complex(0.5, t))
