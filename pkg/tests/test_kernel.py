import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from zetamoments.errors import InsufficientPrecision, InvalidArgument
from zetamoments.kernel import (
    CACHED_RAMP_ERR,
    CACHED_RAMP_W,
    RAMP_TAIL_W,
    KernelSpec,
    decay_audit,
    eval_K,
    fourier_K,
    fourier_K_abs_cached,
    fourier_K_real_phase_cached,
    geometric_grid,
    smoothstep,
)

FINE = KernelSpec(0.01)
DESK = KernelSpec(0.3)


def quad_fourier(spec, xi):
    """Khat by adaptive quadrature of the defining integral (independent oracle)."""
    th = spec.theta
    pts = sorted({th, 2 * th, 1 - 2 * th, 1 - th, 0.5})
    lo, hi = th, 1 - th
    kw = dict(points=pts, limit=2000, epsabs=1e-14, epsrel=1e-13)
    re = quad(lambda x: eval_K(spec, x) * math.cos(x * xi), lo, hi, **kw)[0]
    im = quad(lambda x: -eval_K(spec, x) * math.sin(x * xi), lo, hi, **kw)[0]
    return complex(re, im)


# -- eval_K -----------------------------------------------------------------


def test_eval_K_examples():
    assert eval_K(FINE, 0.5) == 1.0
    assert eval_K(FINE, 0.0) == 0.0
    v = eval_K(FINE, 0.015)
    assert 0 < v < 1
    # strictly increasing where doubles resolve the ramp, never decreasing
    x = np.linspace(0.0105, 0.0195, 2001)
    assert np.all(np.diff(eval_K(FINE, x)) > 0)
    x = np.linspace(0.01, 0.02, 20001)
    assert np.all(np.diff(eval_K(FINE, x)) >= 0)


@pytest.mark.parametrize("theta", [0.01, 0.05, 0.09, 0.2])
def test_eval_K_support_and_plateau(theta):
    spec = KernelSpec(theta)
    x = np.linspace(-0.5, 1.5, 200001)
    k = eval_K(spec, x)
    assert np.all((k >= 0) & (k <= 1))
    assert np.all(k[(x <= theta) | (x >= 1 - theta)] == 0.0)
    assert np.all(k[(x >= 2 * theta) & (x <= 1 - 2 * theta)] == 1.0)


def test_smoothstep_symmetry():
    u = np.linspace(0, 1, 1001)
    np.testing.assert_allclose(smoothstep(u) + smoothstep(1 - u), 1.0, atol=1e-15)


def test_kernel_spec_rejects():
    for bad in (0.0, -0.1, 0.34):
        with pytest.raises(InvalidArgument):
            KernelSpec(bad)
    with pytest.raises(InvalidArgument):
        KernelSpec(0.01, panels=8, order=8)
    assert FINE.reference_regime and not DESK.reference_regime


# -- Fourier transform ------------------------------------------------------


@pytest.mark.parametrize("theta", [0.01, 0.05, 0.3])
def test_fourier_zero_is_mass(theta):
    spec = KernelSpec(theta)
    v = fourier_K(spec, 0.0)
    assert v.imag == 0.0
    assert v.real == pytest.approx(1 - 3 * theta, abs=1e-13)
    assert 1 - 4 * theta <= v.real <= 1 - 2 * theta
    # int K by quadrature
    mass = quad(lambda x: eval_K(spec, x), theta, 1 - theta, points=[2 * theta, 1 - 2 * theta], epsabs=1e-14)[0]
    assert v.real == pytest.approx(mass, abs=1e-12)


@pytest.mark.parametrize("theta,xi", [(0.01, 1.0), (0.01, 37.5), (0.01, 400.0), (0.3, 2.0), (0.3, 25.0), (0.3, 111.0)])
def test_fourier_matches_adaptive_quadrature(theta, xi):
    spec = KernelSpec(theta)
    assert abs(fourier_K(spec, xi) - quad_fourier(spec, xi)) < 1e-12


@given(st.floats(-1e6, 1e6))
def test_fourier_conjugate_symmetry(xi):
    a, b = fourier_K(DESK, xi), fourier_K(DESK, -xi)
    assert a == pytest.approx(b.conjugate(), abs=1e-15)


def test_fourier_bounded_by_mass():
    xi = np.linspace(-200, 200, 4001)
    for spec in (FINE, DESK):
        assert np.all(np.abs(fourier_K(spec, xi)) <= spec.mass + 1e-14)


def test_plancherel():
    for spec in (KernelSpec(0.05), DESK):
        th = spec.theta
        l2 = quad(lambda x: eval_K(spec, x) ** 2, th, 1 - th, points=[2 * th, 1 - 2 * th], epsabs=1e-14)[0]
        # |Khat|^2 is even and its inverse transform lives on [-1, 1], so the
        # trapezoid rule with step below pi is exact up to the truncated tail
        h = 0.05
        xi = np.arange(0.0, CACHED_RAMP_W / th, h)
        f = fourier_K_abs_cached(spec, xi) ** 2
        integral = 2 * h * (f.sum() - 0.5 * f[0])
        assert integral / (2 * math.pi) == pytest.approx(l2, rel=1e-9)


def test_insufficient_nodes():
    spec = KernelSpec(0.3, panels=32, order=16)
    with pytest.raises(InsufficientPrecision):
        fourier_K(spec, 1200.0 / 0.3)


# -- ramp transform and cache -----------------------------------------------


def test_ramp_transform_normalised():
    assert DESK.ramp_transform(0.0) == pytest.approx(1.0, abs=1e-14)


def test_ramp_tail_negligible():
    # refined quadrature: beyond RAMP_TAIL_W only rounding noise is left
    fine = KernelSpec(0.3, panels=2048)
    w = np.linspace(RAMP_TAIL_W, 3 * RAMP_TAIL_W, 3001)
    assert np.max(np.abs(_direct_ramp(fine, w))) < 1e-14
    assert DESK.ramp_tail_sup < 1e-13


def _direct_ramp(spec, w):
    y, f = spec._nodes
    return np.cos(np.outer(w, y)) @ f


def test_cached_ramp_matches_direct():
    w = np.random.default_rng(3).uniform(0, CACHED_RAMP_W, 5000)
    err = np.abs(DESK.ramp_transform_cached(w) - DESK.ramp_transform(w))
    assert err.max() < CACHED_RAMP_ERR


def test_cached_fourier_helpers():
    xi = np.random.default_rng(4).uniform(-2000, 2000, 1000)
    direct = fourier_K(DESK, xi)
    np.testing.assert_allclose(fourier_K_abs_cached(DESK, xi), np.abs(direct), atol=1e-9)
    np.testing.assert_allclose(fourier_K_real_phase_cached(DESK, xi), (np.exp(0.5j * xi) * direct).real, atol=1e-9)
    np.testing.assert_allclose((np.exp(0.5j * xi) * direct).imag, 0.0, atol=1e-15)


def test_quadrature_refinement_stable():
    fine = KernelSpec(0.3, panels=1024, order=20)
    xi = geometric_grid(1e-2, 1e4, 500)
    assert np.max(np.abs(fourier_K(DESK, xi) - fourier_K(fine, xi))) < 1e-13


# -- decay audit ------------------------------------------------------------


def test_decay_audit_nu_zero():
    grid = geometric_grid(1e-3, 1e5, 2000)
    for spec in (FINE, DESK):
        assert decay_audit(spec, 0, grid) <= 1 - 2 * spec.theta


def test_decay_audit_grid_refinement():
    c1 = decay_audit(FINE, 2, geometric_grid(1e-2, 1e5, 4000))
    c2 = decay_audit(FINE, 2, geometric_grid(1e-2, 1e5, 16000))
    assert math.isfinite(c1) and abs(c1 - c2) / c2 < 0.05


@pytest.mark.parametrize("nu", range(5))
def test_decay_bounded_and_stable(nu):
    grid = geometric_grid(1e-2, 1e5, 8000)
    a = decay_audit(DESK, nu, grid)
    b = decay_audit(KernelSpec(0.3, panels=1024), nu, grid)
    assert math.isfinite(a) and abs(a - b) / b < 1e-6
    # the sup is attained well inside the grid, not at its end
    assert (1 + 1e5) ** nu * abs(fourier_K(DESK, 1e5)) < a


def test_decay_example_reference_theta():
    grid = geometric_grid(1e-2, 1e6, 8000)
    c4 = decay_audit(FINE, 4, grid)
    assert abs(fourier_K(FINE, 1e4)) <= c4 * (1 + 1e4) ** -4


def test_decay_audit_rejects_large_nu():
    with pytest.raises(InvalidArgument):
        decay_audit(DESK, 5, [0.0])
