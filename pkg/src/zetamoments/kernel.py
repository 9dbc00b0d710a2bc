"""The smooth weight K and its Fourier transform.

K is the indicator of ``[theta, 1 - 2 theta]`` convolved with the bump
``sigma'(y/theta)/theta`` on ``[0, theta]``, where
``sigma(u) = g(u) / (g(u) + g(1-u))``, ``g(u) = exp(-1/u)`` is the mollifier
smoothstep.  For ``theta <= 1/4`` that is 0 outside ``[theta, 1-theta]``, 1 on
``[2 theta, 1 - 2 theta]`` and ``sigma`` on the two ramps.  The convolution
factors the transform into a closed-form sinc and the transform of ``sigma'``:

    Khat(xi) = exp(-i xi/2) * 2 sin((1 - 3 theta) xi / 2) / xi * R(theta xi),
    R(w)     = int_0^1 sigma'(u) cos((u - 1/2) w) du.

Only ``R`` needs quadrature.  It is real, even, ``R(0) = 1``, and decays like
``exp(-c sqrt(w))``; at the rounding floor beyond ``w ~ 800``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicHermiteSpline

from .errors import InsufficientPrecision, InvalidArgument

# |R(w)| sits at the quadrature rounding floor (< 1e-14) beyond this point
RAMP_TAIL_W = 1600.0
_TABLE_W = 800.0
# ramp frequencies covered by the interpolation table
CACHED_RAMP_W = _TABLE_W
# bound on the table's interpolation error for R (measured ~1e-9)
CACHED_RAMP_ERR = 1e-8
_TABLE_STEP = 0.05
_CHUNK = 1 << 22


def smoothstep(u):
    """C-infinity step: 0 for ``u <= 0``, 1 for ``u >= 1``."""
    u = np.asarray(u, dtype=float)
    out = np.where(u >= 1.0, 1.0, 0.0)
    inner = (u > 0.0) & (u < 1.0)
    if np.any(inner):
        v = u[inner]
        a, b = -1.0 / v, -1.0 / (1.0 - v)
        out[inner] = np.exp(a - np.logaddexp(a, b))
    return out


def smoothstep_prime(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inner = (u > 0.0) & (u < 1.0)
    if np.any(inner):
        v = u[inner]
        a, b = -1.0 / v, -1.0 / (1.0 - v)
        out[inner] = np.exp(a + b - 2.0 * np.logaddexp(a, b)) * (1.0 / v**2 + 1.0 / (1.0 - v) ** 2)
    return out


@dataclass(frozen=True)
class KernelSpec:
    """Support parameter plus the quadrature used for the ramp transform.

    ``panels`` Gauss-Legendre panels of ``order`` nodes cover ``[0, 1/2]``
    (the ramp derivative is symmetric about 1/2).  A panel resolves
    frequencies up to a quarter period, so ``panels`` caps the largest ramp
    frequency that can be integrated.
    """

    theta: float = 0.3
    panels: int = 512
    order: int = 16
    decay_order: int = 4
    _nodes: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0 / 3.0:
            raise InvalidArgument(f"theta must lie in (0, 1/3), got {self.theta}")
        if self.panels * self.order < 512:
            raise InvalidArgument("at least 512 quadrature nodes are required")
        x, w = leggauss(self.order)
        edges = np.linspace(0.0, 0.5, self.panels + 1)
        h = np.diff(edges)
        u = (edges[:-1, None] + h[:, None] * (x + 1.0) / 2.0).ravel()
        wt = (h[:, None] * w / 2.0).ravel()
        object.__setattr__(self, "_nodes", (0.5 - u, 2.0 * smoothstep_prime(u) * wt))

    @property
    def reference_regime(self) -> bool:
        return self.theta < 0.1

    @property
    def mass(self) -> float:
        """``Khat(0) = int K = 1 - 3 theta`` (the ramps each contribute theta/2)."""
        return 1.0 - 3.0 * self.theta

    @property
    def max_ramp_frequency(self) -> float:
        return math.pi * self.panels

    def ramp_transform(self, w) -> np.ndarray:
        """``R(w)`` by direct quadrature (zero past :data:`RAMP_TAIL_W`)."""
        w = np.abs(np.asarray(w, dtype=float))
        flat = w.ravel()
        out = np.zeros_like(flat)
        need = flat < RAMP_TAIL_W
        if np.any(flat[need] > self.max_ramp_frequency):
            raise InsufficientPrecision(
                f"ramp frequency {flat[need].max():.1f} exceeds what {self.panels} panels resolve"
            )
        idx = np.flatnonzero(need)
        y, f = self._nodes
        step = max(1, _CHUNK // y.size)
        for s in range(0, idx.size, step):
            sel = idx[s : s + step]
            out[sel] = np.cos(np.outer(flat[sel], y)) @ f
        return out.reshape(w.shape)

    def ramp_transform_prime(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        flat = np.abs(w.ravel())
        y, f = self._nodes
        out = np.empty_like(flat)
        step = max(1, _CHUNK // y.size)
        for s in range(0, flat.size, step):
            out[s : s + step] = -(np.sin(np.outer(flat[s : s + step], y)) @ (f * y))
        return (np.sign(w.ravel()) * out).reshape(w.shape)

    @property
    def _table(self) -> CubicHermiteSpline:
        return _ramp_table(self.theta, self.panels, self.order)

    @cached_property
    def ramp_tail_sup(self) -> float:
        """``max |R(w)|`` over ``[CACHED_RAMP_W, RAMP_TAIL_W]``: what the table drops."""
        w = np.linspace(_TABLE_W, RAMP_TAIL_W, 4001)
        return float(np.max(np.abs(self.ramp_transform(w))))

    def ramp_transform_cached(self, w) -> np.ndarray:
        """Interpolated ``R(w)`` (cubic Hermite, error ~1e-9) for bulk double sums."""
        w = np.abs(np.asarray(w, dtype=float))
        out = np.zeros_like(w)
        inside = w < _TABLE_W
        out[inside] = self._table(w[inside])
        return out


@lru_cache(maxsize=16)
def _ramp_table(theta: float, panels: int, order: int) -> CubicHermiteSpline:
    spec = KernelSpec(theta, panels, order)
    grid = np.arange(0.0, _TABLE_W + _TABLE_STEP, _TABLE_STEP)
    return CubicHermiteSpline(grid, spec.ramp_transform(grid), spec.ramp_transform_prime(grid))


def eval_K(spec: KernelSpec, x):
    """``K(x) = sigma((x - theta)/theta) - sigma((x - 1 + 2 theta)/theta)``.

    For ``theta <= 1/4`` this is the two-ramp plateau function; above that the
    ramps overlap and K is a smooth bump of height below 1 and mass
    ``1 - 3 theta``.
    """
    x = np.asarray(x, dtype=float)
    th = spec.theta
    out = smoothstep((x - th) / th) - smoothstep((x - 1.0 + 2.0 * th) / th)
    return out if out.ndim else float(out)


def _sinc_factor(spec: KernelSpec, xi: np.ndarray) -> np.ndarray:
    # 2 sin(c xi)/xi with c = (1 - 3 theta)/2, written through np.sinc for xi -> 0
    c = spec.mass / 2.0
    return spec.mass * np.sinc(c * xi / np.pi)


def fourier_K(spec: KernelSpec, xi):
    """``Khat(xi) = int K(x) exp(-i x xi) dx``."""
    xi = np.asarray(xi, dtype=float)
    out = np.exp(-0.5j * xi) * _sinc_factor(spec, xi) * spec.ramp_transform(spec.theta * xi)
    return out if out.ndim else complex(out)


def fourier_K_abs_cached(spec: KernelSpec, xi) -> np.ndarray:
    """``|Khat(xi)|`` through the interpolation table."""
    xi = np.asarray(xi, dtype=float)
    return np.abs(_sinc_factor(spec, xi) * spec.ramp_transform_cached(spec.theta * xi))


def fourier_K_real_phase_cached(spec: KernelSpec, xi) -> np.ndarray:
    """``exp(i xi/2) Khat(xi)`` (real) through the interpolation table."""
    xi = np.asarray(xi, dtype=float)
    return _sinc_factor(spec, xi) * spec.ramp_transform_cached(spec.theta * xi)


def decay_audit(spec: KernelSpec, nu: int, grid) -> float:
    """``max over grid of (1+|xi|)^nu |Khat(xi)|``."""
    if not 0 <= nu <= spec.decay_order:
        raise InvalidArgument(f"nu must lie in [0, {spec.decay_order}]")
    xi = np.asarray(grid, dtype=float)
    return float(np.max((1.0 + np.abs(xi)) ** nu * np.abs(fourier_K(spec, xi))))


def geometric_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.concatenate([[0.0], np.geomspace(lo, hi, n)])
