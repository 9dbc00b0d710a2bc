"""Parameters and coefficient vectors of the twisted first moment.

The integrand pairs ``zeta(1/2+it)`` with the short Dirichlet polynomials

    A_l(s) = sum_{n <= T0^(1/a_l)} d_{k/a_l}(n) n^-s,
    B_l(s) = sum_{n <= T0^(1/b_l)} d_{k/b_l}(n) n^-s,

where ``a_l``, ``b_l`` are the greedy expansions of ``1 - 1/k`` and ``1``.
Only the finitely many polynomials with length at least 2 are materialised.

The shift weights ``W_A[0] = c k^3``, ``W_A[j] = c k^3 a_j^2`` and
``W_B[l] = c k^3 b_l^2`` (``c = 20``, ``W_B[l]`` stored at index ``l - 1``)
overflow a double for late terms, so their logs are kept alongside; the
float arrays hold ``inf`` there.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidArgument, ResourceLimit
from .multiplicative import divisor_values, primes_upto
from .sylvester import DEFAULT_TERMS, ExponentPair, as_fraction, active_length, construction_exponents

WEIGHT_SCALE = 20.0
MAX_SUPPORT = 20_000_000


@dataclass(frozen=True)
class ConstructionParams:
    k: Fraction
    T: float
    theta: float
    T0: float
    exponents: ExponentPair
    weight_scale: float = WEIGHT_SCALE
    desk_scale: bool = True
    log_weights_A: np.ndarray = field(repr=False, default=None)
    log_weights_B: np.ndarray = field(repr=False, default=None)
    weights_A: np.ndarray = field(repr=False, default=None)
    weights_B: np.ndarray = field(repr=False, default=None)

    @property
    def kf(self) -> float:
        return float(self.k)

    @property
    def log_T0(self) -> float:
        return (1.0 - self.theta) * math.log(self.T)

    @property
    def a_seq(self) -> list:
        """``[a_0, a_1, ...]`` with the convention ``a_0 = k``."""
        return [self.k, *self.exponents.a.terms]

    @property
    def b_seq(self) -> list:
        return list(self.exponents.b.terms)

    @property
    def active_A(self) -> int:
        return active_length(self.T0, self.exponents.a)

    @property
    def active_B(self) -> int:
        return active_length(self.T0, self.exponents.b)

    @property
    def log_shifts_alpha(self) -> np.ndarray:
        return self.log_weights_A - math.log(self.log_T0)

    @property
    def log_shifts_beta(self) -> np.ndarray:
        return self.log_weights_B - math.log(self.log_T0)

    @property
    def shifts_alpha(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_shifts_alpha)

    @property
    def shifts_beta(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_shifts_beta)

    def summary(self) -> dict:
        return {
            "k": str(self.k),
            "T": self.T,
            "theta": self.theta,
            "T0": self.T0,
            "desk_scale": self.desk_scale,
            "a": [str(a) for a in self.exponents.a.terms[:6]],
            "b": [str(b) for b in self.exponents.b.terms[:6]],
            "active_A": self.active_A,
            "active_B": self.active_B,
            "poly_lengths_A": [poly_length(self.T0, a) for a in self.exponents.a.terms[: self.active_A]],
            "poly_lengths_B": [poly_length(self.T0, b) for b in self.exponents.b.terms[: self.active_B]],
            "weights_A": [float(w) for w in self.weights_A[:4]],
            "weights_B": [float(w) for w in self.weights_B[:4]],
            "shifts_alpha": [float(a) for a in self.shifts_alpha[:4]],
            "shifts_beta": [float(b) for b in self.shifts_beta[:4]],
        }


def _weight(scale: float, k: Fraction, a) -> tuple[float, float]:
    """``(scale k^3 a^2, its log)``; the float is ``inf`` once it overflows."""
    log_w = math.log(scale) + 3.0 * math.log(k) + 2.0 * math.log(a)
    try:
        w = float(Fraction(scale) * k**3 * a**2)
    except OverflowError:
        w = math.inf
    return w, log_w


def build_params(
    k,
    T: float,
    theta: float = 0.3,
    *,
    count: int = DEFAULT_TERMS,
    weight_scale: float = WEIGHT_SCALE,
    desk_scale: bool = True,
) -> ConstructionParams:
    """Full parameter pack for order ``k`` at height ``T``.

    ``theta >= 1/10`` is only accepted with ``desk_scale=True``.
    """
    kk = as_fraction(k)
    if kk <= 1:
        raise InvalidArgument(f"k must exceed 1, got {kk}")
    if T < 100:
        raise InvalidArgument("T must be >= 100")
    if not 0.0 < theta < 1.0 / 3.0:
        raise InvalidArgument(f"theta must lie in (0, 1/3), got {theta}")
    if theta >= 0.1 and not desk_scale:
        raise InvalidArgument("theta >= 1/10 requires desk_scale=True")
    ex = construction_exponents(kk, count)
    # W_A[0] = c k^3; the a_0 = k convention only enters the f(p) coefficients
    wa = [_weight(weight_scale, kk, 1)] + [_weight(weight_scale, kk, a) for a in ex.a.terms]
    wb = [_weight(weight_scale, kk, b) for b in ex.b.terms]
    T0 = float(T) ** (1.0 - theta)
    return ConstructionParams(
        kk, float(T), float(theta), T0, ex, weight_scale, desk_scale,
        np.array([w[1] for w in wa]), np.array([w[1] for w in wb]),
        np.array([w[0] for w in wa]), np.array([w[0] for w in wb]),
    )


# --------------------------------------------------------------------------
# coefficient vectors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientVector:
    """Dense coefficients ``c(1..N)`` of a Dirichlet series; ``coeffs[0]`` is 0."""

    coeffs: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    @property
    def limit(self) -> int:
        return self.coeffs.size - 1

    def __getitem__(self, n):
        return self.coeffs[n]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coeffs)

    @property
    def is_trivial(self) -> bool:
        return self.limit <= 1 or not np.any(self.coeffs[2:])

    def evaluate(self, t, conjugate: bool = False) -> np.ndarray:
        """``sum c(n) n^{-1/2 - i t}`` (or at ``1/2 + i t`` with ``conjugate``)."""
        t = np.asarray(t, dtype=float)
        sign = 1.0 if conjugate else -1.0
        out = np.zeros(t.shape, dtype=complex)
        for n in self.support.tolist():
            ln = math.log(n)
            out += self.coeffs[n] / math.sqrt(n) * np.exp(sign * 1j * ln * t)
        return out

    def harmonic_mass(self) -> float:
        n = self.support
        return float(np.sum(self.coeffs[n] / np.sqrt(n)))

    def to_csv(self, fh=None) -> str | None:
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf)
        w.writerow(["n", "c"])
        for n in self.support.tolist():
            w.writerow([n, repr(float(self.coeffs[n]))])
        return None if fh is not None else buf.getvalue()

    def summary(self) -> dict:
        supp = self.support
        return {
            "label": self.label,
            "limit": self.limit,
            "nonzero": int(supp.size),
            "max_n": int(supp.max()) if supp.size else 0,
            "sum_c_over_n": float(np.sum(self.coeffs[supp] / supp)) if supp.size else 0.0,
        }


def trivial_vector(label: str = "") -> CoefficientVector:
    return CoefficientVector(np.array([0.0, 1.0]), label)


def poly_length(T0: float, a) -> int:
    """``floor(T0 ** (1/a))`` computed exactly for integer ``a``."""
    if a > 1100 or T0 < 2.0**a:
        return 1
    N = int(math.floor(T0 ** (1.0 / float(a))))
    while (N + 1) ** a <= T0:
        N += 1
    while N > 1 and N**a > T0:
        N -= 1
    return N


def dirichlet_convolve(x: np.ndarray, y: np.ndarray, limit: int) -> np.ndarray:
    """Dense Dirichlet convolution truncated to ``n <= limit``.

    Loops over the nonzero entries of the shorter operand and adds strided
    slices, so the summation order is fixed by the inputs.
    """
    if x.size < y.size:
        x, y = y, x
    out = np.zeros(limit + 1)
    for d in np.flatnonzero(y).tolist():
        if d > limit:
            break
        m = min(x.size - 1, limit // d)
        if m >= 1:
            out[d : d * m + 1 : d] += y[d] * x[1 : m + 1]
    return out


def poly_coeffs(k: Fraction, a, T0: float) -> np.ndarray:
    N = poly_length(T0, a)
    if N <= 1:
        return np.array([0.0, 1.0])
    return divisor_values(float(Fraction(k) / a), N)


def build_poly_A(params: ConstructionParams, ell: int) -> CoefficientVector:
    if ell < 1:
        raise InvalidArgument("ell must be >= 1")
    if ell > params.active_A:
        return trivial_vector(f"poly_A({ell})")
    a = params.exponents.a.terms[ell - 1]
    return CoefficientVector(poly_coeffs(params.k, a, params.T0), f"poly_A({ell})")


def build_poly_B(params: ConstructionParams, ell: int) -> CoefficientVector:
    if ell < 1:
        raise InvalidArgument("ell must be >= 1")
    if ell > params.active_B:
        return trivial_vector(f"poly_B({ell})")
    b = params.exponents.b.terms[ell - 1]
    return CoefficientVector(poly_coeffs(params.k, b, params.T0), f"poly_B({ell})")


def power_truncated(k, a: int, T0: float, max_support: int = MAX_SUPPORT) -> CoefficientVector:
    """Coefficients of ``(sum_{n <= T0^(1/a)} d_{k/a}(n) n^-s)^a``."""
    if a < 1:
        raise InvalidArgument("a must be >= 1")
    N = poly_length(T0, a)
    limit = N**a
    if limit > max_support:
        raise ResourceLimit(f"support {limit} exceeds budget {max_support}")
    base = poly_coeffs(as_fraction(k), a, T0)
    out = base
    for _ in range(a - 1):
        out = dirichlet_convolve(out, base, limit)
    return CoefficientVector(out, "power_a")


def build_alpha_beta(
    params: ConstructionParams, max_support: int = MAX_SUPPORT
) -> tuple[CoefficientVector, CoefficientVector]:
    """``alpha = 1_{n<=T} * A_1 * A_2 * ...`` and ``beta = B_1 * B_2 * ...``."""
    polys_A = [build_poly_A(params, l).coeffs for l in range(1, params.active_A + 1)]
    polys_B = [build_poly_B(params, l).coeffs for l in range(1, params.active_B + 1)]
    M = int(math.floor(params.T))
    limit_a = M * math.prod(p.size - 1 for p in polys_A)
    limit_b = math.prod(p.size - 1 for p in polys_B)
    if max(limit_a, limit_b) > max_support:
        raise ResourceLimit(f"alpha support {limit_a} exceeds budget {max_support}; use a smaller T")
    alpha = np.ones(M + 1)
    alpha[0] = 0.0
    for p in polys_A:
        alpha = dirichlet_convolve(alpha, p, limit_a)
    beta = np.array([0.0, 1.0])
    for p in polys_B:
        beta = dirichlet_convolve(beta, p, limit_b)
    return CoefficientVector(alpha, "alpha_conv"), CoefficientVector(beta, "beta_conv")


# --------------------------------------------------------------------------
# f(p)
# --------------------------------------------------------------------------


def _pair_log_weights(params: ConstructionParams) -> np.ndarray:
    """``log(k^2 / (a_j b_l))`` on the (j, l) grid."""
    log_a = np.array([math.log(a) for a in params.a_seq])
    log_b = np.array([math.log(b) for b in params.b_seq])
    return 2.0 * math.log(params.kf) - log_a[:, None] - log_b[None, :]


def _pair_log_shifts(params: ConstructionParams) -> np.ndarray:
    """``log(alpha_j + beta_l)`` on the (j, l) grid."""
    return np.logaddexp(params.log_shifts_alpha[:, None], params.log_shifts_beta[None, :])


def log_f_at_primes(params: ConstructionParams, primes) -> np.ndarray:
    """``log f(p)`` with ``f(p) = sum_{j>=0, l>=1} k^2/(a_j b_l) p^(-alpha_j - beta_l)``.

    Each term is formed in log-space and combined by log-sum-exp, so the
    result stays finite even when every term underflows a double.
    """
    p = np.atleast_1d(np.asarray(primes, dtype=float))
    lw = _pair_log_weights(params).ravel()
    with np.errstate(over="ignore"):
        shifts = np.exp(_pair_log_shifts(params)).ravel()
    terms = lw[None, :] - shifts[None, :] * np.log(p)[:, None]
    return np.logaddexp.reduce(terms, axis=1)


def f_at_prime(params: ConstructionParams, p: int) -> float:
    if p > params.T0:
        raise InvalidArgument(f"p = {p} exceeds T0 = {params.T0:.6g}")
    return float(np.exp(log_f_at_primes(params, [p])[0]))


def f_at_squarefree(params: ConstructionParams, factors) -> float:
    """Multiplicative extension ``f(p_1 ... p_r) = prod f(p_i)``."""
    return float(np.exp(np.sum(log_f_at_primes(params, list(factors))))) if factors else 1.0


def f_mass(params: ConstructionParams) -> float:
    """``sum_{j,l} k^2/(a_j b_l)`` over the listed terms (tends to ``k^2``)."""
    return float(np.exp(np.logaddexp.reduce(_pair_log_weights(params).ravel())))


def primes_below_T0(params: ConstructionParams) -> np.ndarray:
    return primes_upto(params.T0)
