"""Greedy Egyptian-fraction (Sylvester) expansions in exact arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Union

from .errors import InsufficientPrecision, InvalidArgument

DEFAULT_TERMS = 12

RationalLike = Union[int, float, str, Fraction, Decimal]


def as_fraction(x: RationalLike) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest repr, so ``1.1`` becomes ``11/10``
    rather than the binary value closest to it.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidArgument(f"non-finite value {x!r}")
        return Fraction(repr(x))
    try:
        return Fraction(x)
    except (ValueError, TypeError) as exc:
        raise InvalidArgument(f"cannot read {x!r} as an exact rational") from exc


@dataclass(frozen=True)
class SylvesterSequence:
    alpha: Fraction
    terms: tuple[int, ...]
    remainders: tuple[Fraction, ...]

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def __iter__(self):
        return iter(self.terms)

    def log_terms(self) -> list[float]:
        # math.log is exact-enough on big ints and never overflows
        return [math.log(s) for s in self.terms]

    def tail_mass(self) -> Fraction:
        """``alpha - sum of listed reciprocals``: the mass carried by unlisted terms."""
        return self.remainders[-1]


def sylvester(alpha: RationalLike, count: int = DEFAULT_TERMS) -> SylvesterSequence:
    """First ``count`` greedy denominators of ``alpha`` with exact remainders.

    Each term is the least integer strictly larger than the reciprocal of the
    current remainder, so the remainder never reaches zero.
    """
    a = as_fraction(alpha)
    if not 0 < a <= 1:
        raise InvalidArgument(f"alpha must lie in (0, 1], got {a}")
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    terms, rems = [], []
    r = a
    for _ in range(count):
        s = r.denominator // r.numerator + 1  # floor(1/r) + 1
        terms.append(s)
        r -= Fraction(1, s)
        rems.append(r)
    return SylvesterSequence(a, tuple(terms), tuple(rems))


@dataclass(frozen=True)
class ExponentPair:
    k: Fraction
    a: SylvesterSequence
    b: SylvesterSequence


def construction_exponents(k: RationalLike, count: int = DEFAULT_TERMS) -> ExponentPair:
    kk = as_fraction(k)
    if kk <= 1:
        raise InvalidArgument(f"k must exceed 1, got {kk}")
    return ExponentPair(kk, sylvester(1 - 1 / kk, count), sylvester(1, count))


def active_length(T0: float, seq) -> int:
    """Largest ``L`` with ``T0**(1/s_L) >= 2``; 0 when even ``s_1`` is too big.

    Compared as ``T0 >= 2**s_L`` so that ``T0 = 2**43`` against ``s = 43``
    lands exactly on the threshold.
    """
    if T0 < 2:
        raise InvalidArgument("T0 must be >= 2")
    L = 0
    for s in seq:
        if s > 1100 or T0 < 2.0**s:
            break
        L += 1
    return L


def _log_term(s: int) -> float:
    """``log(1 + s^2) / s`` without converting a huge ``s`` to float."""
    ls = math.log(s)
    log_num = 2.0 * ls + math.log1p(math.exp(-2.0 * ls))
    return math.exp(math.log(log_num) - ls)


def tail_log_sum(seq) -> tuple[float, float]:
    """``sum_l log(1 + s_l^2)/s_l`` over the listed terms and a bound on the rest.

    ``log(1+x^2)/x`` is decreasing for ``x >= 2`` and ``s_{l+1} >= s_l^2 - s_l + 1``,
    so the next term is at most ``h(s_N^2 - s_N + 1)``; later terms shrink
    faster than geometrically, hence the factor 2.
    """
    terms = list(seq)
    if len(terms) < 6:
        raise InsufficientPrecision("need at least 6 terms for a tail bound")
    total = math.fsum(_log_term(s) for s in terms)
    s = terms[-1]
    tail = 2.0 * _log_term(s * (s - 1) + 1)
    return total, tail
