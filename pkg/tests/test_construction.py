import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetamoments.errors import InvalidArgument, ResourceLimit
from zetamoments.construction import (
    build_alpha_beta,
    build_params,
    build_poly_A,
    build_poly_B,
    dirichlet_convolve,
    f_at_prime,
    f_at_squarefree,
    f_mass,
    log_f_at_primes,
    poly_coeffs,
    poly_length,
    power_truncated,
    primes_below_T0,
    trivial_vector,
)
from zetamoments.multiplicative import divisor_values, primes_upto


def brute_power(kappa, N, a, limit):
    """a-fold product of sum_{n<=N} d_kappa(n) n^-s by enumerating tuples."""
    d = divisor_values(kappa, max(N, 1))
    out = np.zeros(limit + 1)
    for tup in itertools.product(range(1, N + 1), repeat=a):
        n = math.prod(tup)
        if n <= limit:
            out[n] += math.prod(d[m] for m in tup)
    return out


# -- parameters -------------------------------------------------------------


def test_weights_examples():
    p = build_params(2, 1e4)
    assert p.weights_A[0] == 160.0
    assert p.exponents.a[0] == 3
    assert p.weights_A[1] == 20 * 8 * 9 == 1440
    assert p.weights_B[0] == 20 * 8 * 4
    assert p.T0 == 1e4**0.7


def test_shift_example():
    theta = 0.3
    T = math.exp(10 / (1 - theta))
    p = build_params(2, T, theta)
    assert p.log_T0 == pytest.approx(10.0, abs=1e-12)
    assert p.shifts_alpha[0] == pytest.approx(16.0, rel=1e-12)
    assert p.shifts_beta[0] == pytest.approx(64.0, rel=1e-12)


def test_params_rejects():
    with pytest.raises(InvalidArgument):
        build_params(1, 1e4)
    with pytest.raises(InvalidArgument):
        build_params("0.5", 1e4)
    with pytest.raises(InvalidArgument):
        build_params(2, 50)
    with pytest.raises(InvalidArgument):
        build_params(2, 1e4, 0.3, desk_scale=False)
    assert build_params(2, 1e4, 0.01, desk_scale=False).theta == 0.01


@given(st.fractions(Fraction(101, 100), 8), st.floats(100, 1e6))
def test_params_invariants(k, T):
    p = build_params(k, T, 0.3)
    assert p.T0 == float(T) ** 0.7
    assert np.all(np.isfinite(p.log_shifts_alpha)) and np.all(np.isfinite(p.log_shifts_beta))
    assert p.a_seq[0] == k
    # exactly the active polynomials have length at least 2
    a = p.exponents.a.terms
    assert all(poly_length(p.T0, x) >= 2 for x in a[: p.active_A])
    assert poly_length(p.T0, a[p.active_A]) == 1


def test_huge_weights_stay_finite_in_log():
    p = build_params(5, 1e4)
    assert np.all(np.isfinite(p.log_weights_A)) and np.all(np.isfinite(p.log_weights_B))
    assert np.isinf(p.weights_A[-1])


# -- polynomials ------------------------------------------------------------


def test_poly_length_exact():
    assert poly_length(1000.0, 3) == 10
    assert poly_length(999.999, 3) == 9
    assert poly_length(1.9, 1) == 1
    assert poly_length(1e4, 14) == 1
    for T0 in (17.0, 1000.0, 12345.6):
        for a in range(1, 15):
            N = poly_length(T0, a)
            assert N**a <= T0 < (N + 1) ** a


def test_poly_examples():
    c = poly_coeffs(Fraction(2), 3, 1000.0)
    assert c.size - 1 == 10
    assert c[2] == pytest.approx(2 / 3, rel=1e-15)
    assert c[4] == pytest.approx(5 / 9, rel=1e-15)
    assert c[1] == 1.0


def test_inactive_polys_trivial():
    p = build_params("1.5", 1e4)
    v = build_poly_A(p, p.active_A + 1)
    assert v.is_trivial and v.coeffs.tolist() == [0.0, 1.0]
    assert build_poly_B(p, p.active_B + 5).is_trivial
    assert not build_poly_B(p, 1).is_trivial
    with pytest.raises(InvalidArgument):
        build_poly_A(p, 0)


def test_poly_A_matches_divisor_values():
    p = build_params("1.5", 1e4)
    for ell in range(1, p.active_A + 1):
        a = p.exponents.a.terms[ell - 1]
        v = build_poly_A(p, ell)
        N = poly_length(p.T0, a)
        np.testing.assert_array_equal(v.coeffs, divisor_values(1.5 / a, N))


# -- convolutions -----------------------------------------------------------


def test_power_examples():
    assert np.array_equal(power_truncated(2, 1, 100.0).coeffs, divisor_values(2.0, 100))
    a = power_truncated(2, 2, 100.0)
    assert a[1] == 1.0
    d2 = divisor_values(2.0, 100)
    assert np.all(a.coeffs <= d2 + 1e-12)
    for n in range(1, 101):
        has_big_factor = any(n % q == 0 and q > 10 for q in range(11, n + 1))
        if has_big_factor:
            assert a[n] < d2[n]
        else:
            # every ordered factorization n = n1 n2 with n1, n2 <= 10 is allowed
            full = sum(1 for m in range(1, n + 1) if n % m == 0 and m <= 10 and n // m <= 10)
            assert a[n] == pytest.approx(full)


@settings(max_examples=25)
@given(st.floats(0.2, 3), st.integers(1, 4), st.floats(4, 400))
def test_power_matches_brute_force(k, a, T0):
    N = poly_length(T0, a)
    v = power_truncated(k, a, T0)
    ref = brute_power(k / a, N, a, N**a)
    np.testing.assert_allclose(v.coeffs, ref, rtol=1e-12, atol=1e-300)
    assert v[1] == 1.0


@given(st.floats(0.5, 3), st.integers(2, 5), st.floats(50, 5000))
def test_power_dominated_by_dk(k, a, T0):
    v = power_truncated(k, a, T0, max_support=10**6)
    d = divisor_values(k, max(v.limit, 1))
    assert np.all(v.coeffs[1:] >= 0)
    assert np.all(v.coeffs[1:] <= d[1 : v.limit + 1] * (1 + 1e-12))


def test_power_resource_limit():
    with pytest.raises(ResourceLimit):
        power_truncated(2, 2, 1e8, max_support=1000)
    with pytest.raises(InvalidArgument):
        power_truncated(2, 0, 100.0)


def test_dirichlet_convolve_small():
    x = np.array([0, 1, 1, 1, 1.0])
    out = dirichlet_convolve(x, x, 16)
    assert out[4] == 3 and out[16] == 1 and out[5] == 0 and out[6] == 2


def test_alpha_beta_trivial_A():
    # T = 120, theta = 0.3: T0 = 28.5 and a_1 = 102, so no A polynomial is active;
    # B_1 (b_1 = 2) always is, since T >= 100 forces T0 >= 4
    p = build_params("1.01", 120.0, 0.3)
    assert p.active_A == 0 and p.active_B >= 1
    alpha, beta = build_alpha_beta(p)
    assert alpha.limit == 120 and np.all(alpha.coeffs[1:] == 1.0)
    assert beta.limit == poly_length(p.T0, 2) * poly_length(p.T0, 3)


def test_alpha_beta_dominance_and_support():
    p = build_params("1.5", 2000.0, 0.3)
    alpha, beta = build_alpha_beta(p)
    d = divisor_values(1.5, max(alpha.limit, beta.limit))
    assert np.all(alpha.coeffs[1:] >= 0) and np.all(beta.coeffs[1:] >= 0)
    assert np.all(alpha.coeffs[1:] <= d[1 : alpha.limit + 1] * (1 + 1e-12))
    assert np.all(beta.coeffs[1:] <= d[1 : beta.limit + 1] * (1 + 1e-12))
    assert alpha.limit <= p.T**2
    assert beta.limit <= p.T0
    assert alpha[1] == 1.0 and beta[1] == 1.0


def test_alpha_beta_brute_force():
    p = build_params(2, 300.0, 0.3)
    alpha, beta = build_alpha_beta(p)
    # beta by enumerating one factor per active polynomial
    polys = [build_poly_B(p, l).coeffs for l in range(1, p.active_B + 1)]
    ref = np.zeros(beta.limit + 1)
    for tup in itertools.product(*(range(1, c.size) for c in polys)):
        ref[math.prod(tup)] += math.prod(c[m] for c, m in zip(polys, tup))
    np.testing.assert_allclose(beta.coeffs, ref, rtol=1e-12)
    polys = [np.r_[0.0, np.ones(300)]] + [build_poly_A(p, l).coeffs for l in range(1, p.active_A + 1)]
    ref = np.zeros(alpha.limit + 1)
    for tup in itertools.product(*(range(1, c.size) for c in polys)):
        ref[math.prod(tup)] += math.prod(c[m] for c, m in zip(polys, tup))
    np.testing.assert_allclose(alpha.coeffs, ref, rtol=1e-12)


def test_alpha_beta_resource_limit():
    with pytest.raises(ResourceLimit):
        build_alpha_beta(build_params("1.5", 2000.0), max_support=1000)


def test_monotone_mass():
    # adding polynomials (nonnegative, constant term 1) never lowers sum alpha beta / n
    p = build_params("1.5", 2000.0, 0.3)
    polys_A = [build_poly_A(p, l).coeffs for l in range(1, p.active_A + 1)]
    polys_B = [build_poly_B(p, l).coeffs for l in range(1, p.active_B + 1)]
    alpha = np.r_[0.0, np.ones(2000)]
    beta = np.array([0.0, 1.0])
    pairs = [("A", q) for q in polys_A] + [("B", q) for q in polys_B]

    def mass(x, y):
        m = min(x.size, y.size)
        n = np.arange(1, m)
        return float(np.sum(x[1:m] * y[1:m] / n))

    prev = mass(alpha, beta)
    for side, q in pairs:
        if side == "A":
            alpha = dirichlet_convolve(alpha, q, (alpha.size - 1) * (q.size - 1))
        else:
            beta = dirichlet_convolve(beta, q, (beta.size - 1) * (q.size - 1))
        cur = mass(alpha, beta)
        assert cur >= prev
        prev = cur


def test_vector_helpers():
    v = trivial_vector("x")
    assert v.support.tolist() == [1] and v.harmonic_mass() == 1.0
    assert v.to_csv().splitlines() == ["n,c", "1,1.0"]
    assert v.evaluate(np.array([0.0, 3.0])).tolist() == [1.0, 1.0]
    p = build_params("1.5", 1e4)
    b = build_poly_B(p, 1)
    t = np.array([10.0, 123.4])
    direct = [sum(b[n] * n ** complex(-0.5, -tt) for n in range(1, b.limit + 1)) for tt in t]
    np.testing.assert_allclose(b.evaluate(t), direct, rtol=1e-12)
    np.testing.assert_allclose(b.evaluate(t, conjugate=True), np.conj(direct), rtol=1e-12)
    with pytest.raises(ValueError):
        b.coeffs[1] = 3.0


# -- f(p) -------------------------------------------------------------------


def test_f_example():
    T = math.exp(10 / 0.7)
    p = build_params(2, T, 0.3)
    v = f_at_prime(p, 2)
    assert 8.2e-25 < v < 8.4e-25
    assert v == pytest.approx(2.0**-80, rel=1e-6)


def test_f_mass_is_k_squared():
    for k in ("1.1", "1.5", 2, 3, 5):
        p = build_params(k, 1e4)
        assert f_mass(p) == pytest.approx(float(Fraction(k)) ** 2, rel=1e-12)
        assert f_mass(p) <= float(Fraction(k)) ** 2 * (1 + 1e-15)


def test_f_positive_and_below_k2():
    p = build_params("1.5", 1e4)
    primes = primes_below_T0(p)
    lf = log_f_at_primes(p, primes)
    assert np.all(np.isfinite(lf))
    assert np.all(lf < 2 * math.log(1.5))
    # at k = 5 every term underflows, the log stays finite
    q = build_params(5, 1e4)
    assert np.all(np.isfinite(log_f_at_primes(q, primes_upto(100))))
    assert f_at_prime(q, 2) == 0.0 or f_at_prime(q, 2) > 0


def test_f_direct_double_sum():
    p = build_params("1.5", 1e4)
    for prime in (2, 3, 101):
        direct = 0.0
        for j, a in enumerate(p.a_seq[:6]):
            for l, b in enumerate(p.b_seq[:6]):
                alpha = float(np.exp(p.log_shifts_alpha[j]))
                beta = float(np.exp(p.log_shifts_beta[l]))
                direct += 2.25 / float(a * b) * prime ** -(alpha + beta)
        assert f_at_prime(p, prime) == pytest.approx(direct, rel=1e-12)


def test_f_squarefree_extension():
    p = build_params("1.5", 1e4)
    for factors in ([2, 3], [2, 5, 7], [3, 11, 13]):
        assert f_at_squarefree(p, factors) == pytest.approx(math.prod(f_at_prime(p, q) for q in factors), rel=1e-12)
    assert f_at_squarefree(p, []) == 1.0


def test_f_rejects_large_prime():
    p = build_params("1.5", 1e4)
    with pytest.raises(InvalidArgument):
        f_at_prime(p, 10**6 + 3)
