"""Sieves and sums over multiplicative functions.

The generalized divisor function for real order ``k > 0`` is the
multiplicative function with ``d_k(p^a) = binomial(k + a - 1, a)``, i.e. the
Dirichlet coefficients of ``zeta(s)**k``.  Everything here works on dense
numpy arrays indexed ``0..N`` with slot 0 unused.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidArgument

EULER_GAMMA = 0.57721566490153286061
MERTENS_B1 = 0.26149721284764278375

_DKTB_MAGIC = b"DKTB"
_DKTB_HEADER = struct.Struct("<4sdQ")


@dataclass(frozen=True)
class AnalyticConstants:
    euler_gamma: float = EULER_GAMMA
    mertens_B1: float = MERTENS_B1
    gamma_function: Callable[[float], float] = math.gamma


CONSTANTS = AnalyticConstants()


# --------------------------------------------------------------------------
# primes and Moebius
# --------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _prime_mask(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    mask.setflags(write=False)
    return mask


def primes_upto(x: float) -> np.ndarray:
    """All primes ``p <= x`` as an int64 array."""
    limit = int(math.floor(x))
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(_prime_mask(limit)).astype(np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        self.primes.setflags(write=False)
        self.mu.setflags(write=False)


def prime_table(limit: int) -> PrimeTable:
    """Primes up to ``limit`` together with the Moebius function on ``0..limit``."""
    if limit < 1:
        raise InvalidArgument("limit must be >= 1")
    primes = primes_upto(limit)
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes.tolist():
        mu[p::p] *= -1
        if p * p <= limit:
            mu[p * p :: p * p] = 0
    return PrimeTable(limit, primes, mu)


# --------------------------------------------------------------------------
# generalized divisor function
# --------------------------------------------------------------------------


def prime_power_coeff(k: float, p: int, a: int) -> float:
    """Coefficient ``d_k(p^a) = prod_{i<a} (k+i)/(i+1)``; independent of ``p``."""
    if a < 0:
        raise InvalidArgument("exponent must be non-negative")
    c = 1.0
    for i in range(a):
        c *= (k + i) / (i + 1)
    return c


@dataclass(frozen=True)
class DivisorTable:
    """Values ``d_k(n)`` for ``1 <= n <= limit``; ``values[0]`` is unused (0)."""

    k: float
    limit: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values.setflags(write=False)

    def __getitem__(self, n):
        return self.values[n]

    def save(self, path) -> None:
        """Write the flat ``DKTB`` cache: header, then N little-endian doubles."""
        with open(path, "wb") as fh:
            fh.write(_DKTB_HEADER.pack(_DKTB_MAGIC, float(self.k), int(self.limit)))
            fh.write(np.ascontiguousarray(self.values[1:], dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "DivisorTable":
        raw = Path(path).read_bytes()
        if len(raw) < _DKTB_HEADER.size:
            raise InvalidArgument("truncated DKTB file")
        magic, k, n = _DKTB_HEADER.unpack_from(raw)
        if magic != _DKTB_MAGIC:
            raise InvalidArgument(f"bad magic {magic!r}")
        body = np.frombuffer(raw, dtype="<f8", offset=_DKTB_HEADER.size)
        if body.size != n:
            raise InvalidArgument(f"expected {n} values, found {body.size}")
        values = np.empty(n + 1)
        values[0] = 0.0
        values[1:] = body
        return cls(k, int(n), values)


def divisor_values(k: float, N: int) -> np.ndarray:
    """Dense array ``v`` with ``v[n] = d_k(n)`` for ``n <= N`` (``v[0] = 0``).

    Each prime power ``p^a <= N`` multiplies every multiple of itself by the
    ratio ``d_k(p^a)/d_k(p^(a-1)) = (k+a-1)/a``, so after the pass over ``p``
    every ``n`` with ``p^a || n`` carries exactly ``d_k(p^a)``.
    """
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    if not k > 0:
        raise InvalidArgument("k must be positive")
    v = np.ones(N + 1)
    v[0] = 0.0
    for p in primes_upto(N).tolist():
        q, a = p, 1
        while q <= N:
            v[q::q] *= (k + a - 1) / a
            q *= p
            a += 1
    return v


def sieve_divisor(k: float, N: int) -> DivisorTable:
    return DivisorTable(float(k), int(N), divisor_values(float(k), int(N)))


def load_or_sieve(k: float, N: int, cache_dir=None) -> DivisorTable:
    """Sieve ``d_k`` on ``1..N``, reusing a ``DKTB`` file in ``cache_dir`` if present."""
    if cache_dir is None:
        return sieve_divisor(k, N)
    path = Path(cache_dir) / f"dk_{float(k).hex()}_{int(N)}.dktb"
    if path.exists():
        table = DivisorTable.load(path)
        if table.k == float(k) and table.limit == N:
            return table
    table = sieve_divisor(k, N)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table


# --------------------------------------------------------------------------
# diagonal sums
# --------------------------------------------------------------------------


def diagonal_sum(k: float, N: int) -> float:
    """``sum_{n<=N} d_k(n)^2 / n``, accumulated with ``math.fsum``."""
    v = divisor_values(k, int(N))
    n = np.arange(1, int(N) + 1, dtype=float)
    return math.fsum((v[1:] ** 2 / n).tolist())


class EulerProductValue(NamedTuple):
    value: float
    tail_bound: float
    log_product: float


def _log_diagonal_factor(k: float, p: np.ndarray) -> np.ndarray:
    """``log[(1-1/p)^{k^2} (1 + sum_a d_k(p^a)^2 p^-a)]`` for an array of primes."""
    x = 1.0 / p.astype(float)
    series = np.zeros_like(x)
    c = 1.0
    xa = np.ones_like(x)
    for a in range(1, 4000):
        c *= (k + a - 1) / a
        xa = xa * x
        term = c * c * xa
        series += term
        if term.max() < 1e-18 * series.min():
            break
    return k * k * np.log1p(-x) + np.log1p(series)


def diagonal_asymptotic(k: float, N: float, prime_cutoff: int) -> EulerProductValue:
    """Leading-order asymptotic of :func:`diagonal_sum`.

    ``(log N)^{k^2} / Gamma(k^2+1) * prod_{p <= cutoff} (1-1/p)^{k^2}
    (1 + sum_a d_k(p^a)^2 / p^a)``.  The log of each Euler factor is
    ``O(p^-2)``; the reported tail bound is ``C / cutoff`` with ``C`` the largest
    observed ``p^2 |log factor|`` over the top half of the primes used.
    """
    if prime_cutoff < 2:
        raise InvalidArgument("prime_cutoff must be >= 2")
    p = primes_upto(prime_cutoff)
    logs = _log_diagonal_factor(float(k), p)
    log_product = math.fsum(logs.tolist())
    upper = p >= max(2, p[-1] // 2)
    C = float(np.max(np.abs(logs[upper]) * p[upper].astype(float) ** 2))
    tail = C / max(prime_cutoff - 1, 1)
    k2 = float(k) ** 2
    log_prefactor = k2 * math.log(math.log(N)) - math.lgamma(k2 + 1.0)
    return EulerProductValue(math.exp(log_prefactor + log_product), tail, log_product)


# --------------------------------------------------------------------------
# prime sums
# --------------------------------------------------------------------------


def mertens_prime_sum(x: float) -> float:
    if x < 2:
        raise InvalidArgument("x must be >= 2")
    return math.fsum((1.0 / primes_upto(x)).tolist())


class DeficitSum(NamedTuple):
    value: float
    bound: float
    in_regime: bool


def prime_deficit_sum(x: float, alpha: float) -> DeficitSum:
    """``sum_{p<=x} (1/p - p^{-1-alpha})`` with the audit bound ``1 + log(alpha log x) + gamma``.

    ``in_regime`` is False when ``alpha < 1/log x``; the sum is still computed.
    """
    if x < 2:
        raise InvalidArgument("x must be >= 2")
    p = primes_upto(x).astype(float)
    terms = -np.expm1(-alpha * np.log(p)) / p
    log_x = math.log(x)
    bound = 1.0 + math.log(alpha * log_x) + EULER_GAMMA
    return DeficitSum(math.fsum(terms.tolist()), bound, alpha * log_x >= 1.0)
