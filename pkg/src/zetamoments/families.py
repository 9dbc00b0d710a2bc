"""Family analogues: Dirichlet characters to a prime modulus and quadratic
characters of fundamental discriminants, central values, twisted first moments.

Characters mod a prime ``q`` are indexed through a primitive root ``g``:
``chi_j(g^r) = e(j r / (q-1))``.  Central values come from the Hurwitz
decomposition ``L(1/2, chi) = q^{-1/2} sum_a chi(a) zeta(1/2, a/q)``; for the
whole family at once the character sum is a length ``q-1`` FFT over the index.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import bernoulli

from .construction import dirichlet_convolve, poly_coeffs, poly_length
from .errors import InvalidArgument, ResourceLimit
from .multiplicative import is_prime
from .sylvester import as_fraction, construction_exponents

MAX_MODULUS = 10_000
MAX_X = 10_000
FAMILY_THETA = 0.2

_EM_HEAD = 16
_EM_ORDER = 12
_B = bernoulli(2 * _EM_ORDER)


def hurwitz_zeta(s: float, x) -> np.ndarray:
    """``zeta(s, x) = sum_{n>=0} (n + x)^-s`` for real ``s != 1``, ``x > 0``, by
    Euler-Maclaurin after ``16`` explicit terms (error far below 1e-16)."""
    x = np.asarray(x, dtype=float)
    n = np.arange(_EM_HEAD, dtype=float)
    head = np.sum((x[..., None] + n) ** -s, axis=-1)
    y = x + _EM_HEAD
    out = head + y ** (1.0 - s) / (s - 1.0) + 0.5 * y**-s
    poch = s  # rising factorial (s)_{2j-1}
    for j in range(1, _EM_ORDER + 1):
        out = out + _B[2 * j] / math.factorial(2 * j) * poch * y ** (-s - 2 * j + 1)
        poch *= (s + 2 * j - 1) * (s + 2 * j)
    return out


# --------------------------------------------------------------------------
# characters mod a prime
# --------------------------------------------------------------------------


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def primitive_root(q: int) -> int:
    if not is_prime(q):
        raise InvalidArgument(f"{q} is not prime")
    if q == 2:
        return 1
    fs = _prime_factors(q - 1)
    for g in range(2, q):
        if all(pow(g, (q - 1) // f, q) != 1 for f in fs):
            return g
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class CharacterTable:
    """All ``q - 1`` characters mod a prime ``q`` as index maps.

    ``index[n]`` is the discrete log of ``n`` to base ``generator`` (``-1`` for
    ``n = 0``), so ``chi_j(n) = e(j * index[n] / (q-1))`` in exact integer
    arithmetic up to the final exponential.
    """

    q: int
    generator: int
    index: np.ndarray = field(repr=False)
    powers: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.q - 1

    def __len__(self) -> int:
        return self.q - 1

    def is_principal(self, j: int) -> bool:
        return j % self.order == 0

    @property
    def principal(self) -> np.ndarray:
        return np.arange(self.order) == 0

    def conj_index(self, j: int) -> int:
        return (-j) % self.order

    def exponent(self, j: int, n) -> np.ndarray:
        """``j * ind(n) mod (q-1)``; -1 where ``q | n``."""
        n = np.asarray(n) % self.q
        ind = self.index[n]
        return np.where(ind < 0, -1, (j * ind) % self.order)

    def values(self, j: int, n=None) -> np.ndarray:
        """``chi_j(n)`` (default: ``n = 0 .. q-1``)."""
        n = np.arange(self.q) if n is None else np.asarray(n)
        e = self.exponent(j, n)
        return np.where(e < 0, 0.0, np.exp(2j * np.pi * e / self.order))

    def character(self, j: int) -> "Character":
        return Character(self, j % self.order)

    def __iter__(self):
        return (Character(self, j) for j in range(self.order))

    @cached_property
    def central_values(self) -> np.ndarray:
        """``L(1/2, chi_j)`` for every ``j`` (the principal entry is ``nan``)."""
        a = self.powers  # g^r for r = 0 .. q-2
        h = hurwitz_zeta(0.5, a / self.q)
        # sum_r h(g^r) e(j r/(q-1)) for all j
        out = np.fft.ifft(h) * self.order / math.sqrt(self.q)
        out[0] = np.nan
        return out


def build_characters(q: int) -> CharacterTable:
    if q < 3 or not is_prime(q):
        raise InvalidArgument(f"q must be a prime >= 3, got {q}")
    if q > MAX_MODULUS:
        raise ResourceLimit(f"q = {q} exceeds the budget {MAX_MODULUS}")
    g = primitive_root(q)
    powers = np.empty(q - 1, dtype=np.int64)
    index = np.full(q, -1, dtype=np.int64)
    x = 1
    for r in range(q - 1):
        powers[r] = x
        index[x] = r
        x = x * g % q
    return CharacterTable(q, g, index, powers)


@dataclass(frozen=True)
class Character:
    table: CharacterTable
    j: int

    @property
    def q(self) -> int:
        return self.table.q

    @property
    def is_principal(self) -> bool:
        return self.table.is_principal(self.j)

    @property
    def is_real(self) -> bool:
        return (2 * self.j) % self.table.order == 0

    def __call__(self, n):
        return self.table.values(self.j, n)

    def conj(self) -> "Character":
        return Character(self.table, self.table.conj_index(self.j))


def L_half(chi) -> complex:
    """``L(1/2, chi)`` for a non-principal character (prime modulus or quadratic)."""
    if isinstance(chi, QuadraticCharacter):
        return complex(quadratic_L_half(chi.d))
    if chi.is_principal:
        raise InvalidArgument("principal character: L(s, chi_0) has a pole structure, not handled")
    a = np.arange(1, chi.q)
    h = hurwitz_zeta(0.5, a / chi.q)
    v = chi(a)
    return complex(np.sum(v * h) / math.sqrt(chi.q))


def orthogonality_sum(table: CharacterTable, i: int, j: int) -> int:
    """``sum_{n mod q} chi_i(n) conj(chi_j(n))`` computed exactly.

    The exponents ``(i - j) ind(n)`` run over a subgroup of ``Z/(q-1)``, each
    value equally often, so the sum is ``q - 1`` when ``i = j`` and a sum of
    full sets of roots of unity (zero) otherwise; both facts are checked on
    the integer exponents rather than assumed.
    """
    d = (i - j) % table.order
    e = (d * table.index[1:]) % table.order
    counts = np.bincount(e, minlength=table.order)
    if d == 0:
        return int(counts[0])
    g = math.gcd(d, table.order)
    support = np.flatnonzero(counts)
    if not (np.all(support % g == 0) and support.size == table.order // g and np.all(counts[support] == g)):
        raise AssertionError("index map is not a group isomorphism")
    # a complete set of (q-1)/g-th roots of unity, g times over
    return 0


# --------------------------------------------------------------------------
# twisted family moments
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyPolys:
    """Active ``A_l``, ``B_l`` coefficient arrays for a family of conductor ``Q``."""

    k: object
    length_scale: float
    A: list
    B: list

    @property
    def trivial(self) -> bool:
        return not self.A and not self.B


def family_polys(k, Q: float, vartheta: float) -> FamilyPolys:
    kk = as_fraction(k)
    ex = construction_exponents(kk)
    L = Q**vartheta
    A = [poly_coeffs(kk, a, L) for a in ex.a.terms if poly_length(L, a) >= 2]
    B = [poly_coeffs(kk, b, L) for b in ex.b.terms if poly_length(L, b) >= 2]
    return FamilyPolys(kk, L, A, B)


def _poly_on_characters(coeffs: np.ndarray, table: CharacterTable) -> np.ndarray:
    """``sum_n c(n) chi_j(n)/sqrt(n)`` for every ``j``, via an FFT over the index."""
    n = np.flatnonzero(coeffs)
    h = np.zeros(table.order, dtype=complex)
    n = n[n % table.q != 0]
    np.add.at(h, table.index[n % table.q], coeffs[n] / np.sqrt(n))
    return np.fft.ifft(h) * table.order


@dataclass(frozen=True)
class FamilyMoment:
    value: complex
    diagonal: float
    labels: np.ndarray = field(repr=False)
    L_values: np.ndarray = field(repr=False)
    products: np.ndarray = field(repr=False)

    @property
    def difference(self) -> complex:
        return self.value - self.diagonal

    @property
    def summands(self) -> np.ndarray:
        return self.L_values * self.products

    @property
    def scale(self) -> float:
        return float(np.sum(np.abs(self.summands)))

    def to_csv(self, fh=None) -> str | None:
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "L_re", "L_im", "poly_re", "poly_im", "summand_re", "summand_im"])
        for lab, L, P, S in zip(self.labels.tolist(), self.L_values, self.products, self.summands):
            w.writerow([lab, *(repr(float(x)) for x in (L.real, L.imag, P.real, P.imag, S.real, S.imag))])
        return None if fh is not None else buf.getvalue()


def _diagonal(polys: FamilyPolys, count: int) -> float:
    """``count * sum_n alpha(n) beta(n)/n`` with ``alpha = 1 * A_1 * ...``,
    ``beta = B_1 * ...``: what orthogonality leaves of the family sum when
    ``L`` is replaced by its Dirichlet series."""
    limit_b = math.prod(b.size - 1 for b in polys.B) if polys.B else 1
    beta = np.array([0.0, 1.0])
    for b in polys.B:
        beta = dirichlet_convolve(beta, b, limit_b)
    alpha = np.ones(limit_b + 1)
    alpha[0] = 0.0
    for a in polys.A:
        alpha = dirichlet_convolve(alpha, a, limit_b)
    n = np.flatnonzero(beta)
    return count * math.fsum((alpha[n] * beta[n] / n).tolist())


def I_q(q: int, k, vartheta: float = FAMILY_THETA) -> FamilyMoment:
    """``sum over primitive chi mod q of L(1/2, chi) prod A_l(chi) B_l(conj chi)``."""
    table = build_characters(q)
    polys = family_polys(k, q, vartheta)
    if polys.length_scale >= q:
        raise ResourceLimit("polynomial length q^vartheta must stay below q")
    prod = np.ones(table.order, dtype=complex)
    for a in polys.A:
        prod *= _poly_on_characters(a, table)
    for b in polys.B:
        prod *= np.conj(_poly_on_characters(b, table))
    keep = ~table.principal
    L = table.central_values[keep]
    P = prod[keep]
    idx = np.arange(table.order)[keep]
    S = L * P
    val = math.fsum(S.real.tolist()), math.fsum(S.imag.tolist())
    return FamilyMoment(complex(*val), _diagonal(polys, table.order - 1), idx, L, P)


# --------------------------------------------------------------------------
# quadratic characters
# --------------------------------------------------------------------------


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol ``(d / n)``."""
    if n == 0:
        return 1 if abs(d) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if d < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if d % 2 == 0:
            return 0
        if v % 2 and d % 8 in (3, 5):
            result = -result
    # Jacobi symbol (d / n) for odd n > 0
    a = d % n if n > 1 else 0
    if n == 1:
        return result
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _squarefree(m: int) -> bool:
    if m == 0:
        return False
    m = abs(m)
    p = 2
    while p * p <= m:
        if m % (p * p) == 0:
            return False
        p += 1 if p == 2 else 2
    return True


def is_fundamental(d: int) -> bool:
    """Fundamental discriminant (``d = 1`` excluded: it indexes the trivial character)."""
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


@dataclass(frozen=True)
class QuadraticCharacter:
    d: int

    @property
    def modulus(self) -> int:
        return abs(self.d)

    def __call__(self, n):
        n = np.atleast_1d(np.asarray(n, dtype=np.int64))
        return np.array([kronecker(self.d, int(x)) for x in n.ravel()]).reshape(n.shape)

    @cached_property
    def table(self) -> np.ndarray:
        """``chi_d(a)`` for ``a = 0 .. |d|-1`` (periodic with period ``|d|``)."""
        return self(np.arange(self.modulus))


@dataclass(frozen=True)
class QuadraticFamily:
    X: float
    discriminants: tuple[int, ...]

    def chi_d(self, d: int) -> QuadraticCharacter:
        return QuadraticCharacter(d)

    def __len__(self):
        return len(self.discriminants)


def fundamental_discriminants(X: float) -> QuadraticFamily:
    if X > MAX_X:
        raise ResourceLimit(f"X = {X} exceeds the budget {MAX_X}")
    M = int(math.floor(X))
    ds = tuple(d for d in range(-M, M + 1) if is_fundamental(d))
    return QuadraticFamily(float(X), ds)


@lru_cache(maxsize=4096)
def quadratic_L_half(d: int) -> float:
    """``L(1/2, chi_d)``; ``chi_d`` is primitive of conductor ``|d|``, so the
    Hurwitz decomposition applies with modulus ``|d|``."""
    m = abs(d)
    chi = QuadraticCharacter(d).table
    a = np.flatnonzero(chi)
    return float(np.sum(chi[a] * hurwitz_zeta(0.5, a / m)) / math.sqrt(m))


def I_X(X: float, k, vartheta: float = FAMILY_THETA) -> FamilyMoment:
    """``sum over fundamental |d| <= X of L(1/2, chi_d) prod A_l(chi_d)``."""
    fam = fundamental_discriminants(X)
    polys = family_polys(k, X, vartheta)
    L = np.array([quadratic_L_half(d) for d in fam.discriminants])
    P = np.ones(len(fam))
    for a in polys.A:
        n = np.flatnonzero(a)
        chi = np.array([[kronecker(d, int(x)) for x in n] for d in fam.discriminants], dtype=float)
        P *= chi @ (a[n] / np.sqrt(n))
    S = L * P
    polys_A_only = FamilyPolys(polys.k, polys.length_scale, polys.A, [])
    return FamilyMoment(complex(math.fsum(S.tolist())), _diagonal(polys_A_only, len(fam)),
                        np.array(fam.discriminants), L.astype(complex), P.astype(complex))
