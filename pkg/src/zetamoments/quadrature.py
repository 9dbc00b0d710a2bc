"""Uniform-grid Simpson quadrature with a Richardson error estimate, and
log-space helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss


class QuadValue(NamedTuple):
    value: complex | float
    err: float


@dataclass(frozen=True)
class SimpsonGrid:
    """``n + 1`` equispaced nodes on ``[a, b]`` with ``n`` a multiple of 4, so the
    every-other-node subgrid is itself a Simpson grid."""

    a: float
    b: float
    n: int

    @classmethod
    def covering(cls, a: float, b: float, step: float) -> "SimpsonGrid":
        n = max(4, math.ceil((b - a) / step))
        n += (-n) % 4
        return cls(float(a), float(b), n)

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def t(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.n + 1)

    def weights(self, coarse: bool = False) -> np.ndarray:
        m = self.n // 2 if coarse else self.n
        h = self.h * (2 if coarse else 1)
        w = np.empty(m + 1)
        w[0::2] = 2.0
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return w * h / 3.0

    def integrate(self, f: np.ndarray) -> QuadValue:
        fine = np.dot(self.weights(), f)
        coarse = np.dot(self.weights(coarse=True), f[::2])
        return QuadValue(fine, float(abs(fine - coarse)) / 15.0)


def gauss_panels(breaks, panel: float, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on panels of length at most ``panel``
    between consecutive sorted breakpoints."""
    x, w = leggauss(order)
    edges = []
    breaks = sorted(set(float(b) for b in breaks))
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        m = max(1, math.ceil((hi - lo) / panel))
        edges.append(np.linspace(lo, hi, m + 1)[:-1])
    edges.append(np.array([breaks[-1]]))
    e = np.concatenate(edges)
    h = np.diff(e)
    nodes = (e[:-1, None] + h[:, None] * (x + 1.0) / 2.0).ravel()
    weights = (h[:, None] * w / 2.0).ravel()
    return nodes, weights


def logsumexp(xs) -> float:
    xs = np.asarray(list(xs), dtype=float)
    if xs.size == 0:
        return -math.inf
    return float(np.logaddexp.reduce(xs))


def log_diff_exp(a: float, b: float) -> float:
    """``log(exp(a) - exp(b))``; ``nan`` when ``b > a``, ``-inf`` when equal."""
    if b == -math.inf:
        return a
    if b > a:
        return math.nan
    if b == a:
        return -math.inf
    return a + math.log(-math.expm1(b - a))


def safe_log(x: float) -> float:
    return math.log(x) if x > 0 else (-math.inf if x == 0 else math.nan)
