"""Shared quadrature rules, the smooth cutoff, and sphere measures.

Everything here is dimension-agnostic plumbing used by the transform,
kernel and Mellin code.  Integrands are always called with numpy arrays
and must be vectorised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    """A quadrature did not reach its tolerance; ``estimate`` is the achieved error."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


def sphere_volume(k: int) -> float:
    """Surface measure of the unit sphere S^k in R^{k+1} (S^0 counts two points)."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


# --------------------------------------------------------------------------
# cutoff
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth bump equal to 1 on [0, plateau_end] and 0 beyond support_end.

    The two junctions are glued with the exp(-1/t) partition, so the bump is
    infinitely flat at both ends of the transition layer.
    """

    plateau_end: float = 0.25
    support_end: float = 0.75

    def __post_init__(self):
        if not 0.0 < self.plateau_end < self.support_end < 1.0:
            raise ValueError(
                f"cutoff needs 0 < plateau_end < support_end < 1, got "
                f"{self.plateau_end}, {self.support_end}"
            )

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a = _flat_bump(self.support_end - t)
        b = _flat_bump(t - self.plateau_end)
        total = a + b
        out = np.where(total > 0, a / np.where(total > 0, total, 1.0), 0.0)
        return np.where(t <= self.plateau_end, 1.0, np.where(t >= self.support_end, 0.0, out))


def _flat_bump(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, np.exp(-1.0 / safe), 0.0)


DEFAULT_CUTOFF = CutoffSpec()


# --------------------------------------------------------------------------
# tanh-sinh (double exponential) rule
# --------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _tanh_sinh_rule(level: int):
    """Nodes on (-1, 1) as (x, distance to -1, distance to +1, weight)."""
    h = 2.0 ** (-level)
    t_max = 6.6
    k = np.arange(-int(t_max / h), int(t_max / h) + 1)
    t = k * h
    u = 0.5 * math.pi * np.sinh(t)
    au = np.abs(u)
    e = np.exp(-2.0 * au)
    # 1 - tanh|u| without cancellation, and sech^2 u without overflow
    gap = 2.0 * e / (1.0 + e)
    sech2 = 4.0 * e / (1.0 + e) ** 2
    w = h * 0.5 * math.pi * np.cosh(t) * sech2
    x = np.sign(u) * (1.0 - gap)
    left = np.where(u >= 0, 2.0 - gap, gap)
    right = np.where(u >= 0, gap, 2.0 - gap)
    keep = gap > 1e-300
    return x[keep], left[keep], right[keep], w[keep]


def tanh_sinh(
    f: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    a: float,
    b: float,
    rtol: float = 1e-13,
    atol: float = 0.0,
    min_level: int = 3,
    max_level: int = 9,
):
    """Integrate ``f`` over [a, b], tolerating integrable endpoint singularities.

    ``f(x, left, right)`` receives the nodes together with their exact distances
    to the two endpoints, so that integrands such as (b-x)^g log(b-x) never have
    to form b-x by subtraction.  Returns ``(value, error_estimate)``; the
    estimate is the change between the last two levels.
    """
    half = 0.5 * (b - a)
    previous = None
    value = 0.0
    err = math.inf
    for level in range(min_level, max_level + 1):
        x, left, right, w = _tanh_sinh_rule(level)
        vals = f(a + half * (1.0 + x), half * left, half * right)
        value = half * np.sum(w * vals)
        if previous is not None:
            err = abs(value - previous)
            if err <= max(rtol * abs(value), atol):
                return value, err
        previous = value
    return value, err


def tanh_sinh_batch(
    f: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    a: np.ndarray,
    b: np.ndarray,
    rtol: float = 1e-13,
    atol: float = 0.0,
    min_level: int = 3,
    max_level: int = 9,
):
    """Vectorised tanh-sinh over a batch of intervals ``[a_i, b_i]``.

    ``f`` receives arrays shaped (batch, nodes).  All intervals share the
    refinement level; iteration stops when every member has converged.  The
    relative test is taken against the integral of |f|, so integrals that
    cancel to zero still terminate.
    """
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    half = 0.5 * (b - a)
    previous = None
    value = None
    err = np.full(a.shape[0], np.inf)
    for level in range(min_level, max_level + 1):
        x, left, right, w = _tanh_sinh_rule(level)
        vals = f(a + half * (1.0 + x), half * left, half * right)
        value = half[:, 0] * (vals @ w)
        mass = np.abs(half[:, 0]) * (np.abs(vals) @ w)
        if previous is not None:
            err = np.abs(value - previous)
            if np.all(err <= np.maximum(rtol * mass, atol)):
                return value, err
        previous = value
    return value, err


# --------------------------------------------------------------------------
# composite Gauss-Legendre
# --------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _gauss_rule(order: int):
    return np.polynomial.legendre.leggauss(order)


def gauss_panels_nodes(a, b, panels: int, order: int = 16):
    """Nodes and weights of a composite rule for a batch of intervals.

    ``a`` and ``b`` may be scalars or 1-d arrays; the result has shape
    (batch, panels*order).
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))[:, None]
    b = np.atleast_1d(np.asarray(b, dtype=float))[:, None]
    g, gw = _gauss_rule(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halfw = 0.5 / panels
    unit = (mids[:, None] + halfw * g[None, :]).ravel()
    unit_w = np.tile(gw * halfw, panels)
    x = a + (b - a) * unit[None, :]
    w = (b - a) * unit_w[None, :]
    return x, w


def adaptive_gauss_batch(
    f: Callable[[np.ndarray], np.ndarray],
    a,
    b,
    rtol: float = 1e-13,
    atol: float = 0.0,
    order: int = 16,
    start_panels: int = 2,
    max_panels: int = 512,
):
    """Composite Gauss-Legendre with panel doubling for a batch of intervals.

    Returns ``(values, error_estimates)``; ``f`` maps an array of nodes shaped
    (batch, m) to integrand values of the same shape.  Convergence is judged
    relative to the integral of |f|.
    """
    panels = start_panels
    x, w = gauss_panels_nodes(a, b, panels, order)
    previous = np.sum(w * f(x), axis=1)
    err = np.full(previous.shape, np.inf)
    while panels < max_panels:
        panels *= 2
        x, w = gauss_panels_nodes(a, b, panels, order)
        vals = f(x)
        value = np.sum(w * vals, axis=1)
        mass = np.sum(np.abs(w * vals), axis=1)
        err = np.abs(value - previous)
        previous = value
        if np.all(err <= np.maximum(rtol * mass, atol)):
            break
    return previous, err


def adaptive_gauss(f, a: float, b: float, **kwargs):
    """Scalar-interval wrapper of :func:`adaptive_gauss_batch`."""
    value, err = adaptive_gauss_batch(lambda x: f(x[0])[None, :], a, b, **kwargs)
    return value[0], err[0]


# --------------------------------------------------------------------------
# sphere rules
# --------------------------------------------------------------------------


def sphere_rule(n: int, size: int = 64):
    """Product quadrature on S^{n-1} for n in {2, 3}.

    For n=2 this is the ``size``-point trapezoid rule on the circle; for n=3 a
    Gauss-Legendre rule in the polar cosine times a trapezoid rule in azimuth.
    Returns ``(points, weights)`` with points shaped (m, n).
    """
    if n == 2:
        phi = 2.0 * math.pi * np.arange(size) / size
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return pts, np.full(size, 2.0 * math.pi / size)
    if n == 3:
        g, gw = _gauss_rule(size // 2)
        az = 2.0 * math.pi * np.arange(size) / size
        ct = np.repeat(g, size)
        st = np.sqrt(1.0 - ct**2)
        a = np.tile(az, size // 2)
        pts = np.stack([st * np.cos(a), st * np.sin(a), ct], axis=1)
        wts = np.repeat(gw, size) * (2.0 * math.pi / size)
        return pts, wts
    raise ValueError(f"sphere quadrature implemented for n in (2, 3), got {n}")


def orthonormal_complement(theta: np.ndarray) -> np.ndarray:
    """Rows spanning the orthogonal complement of each unit vector in ``theta``.

    ``theta`` has shape (m, n); the result has shape (m, n-1, n).
    """
    theta = np.atleast_2d(theta)
    m, n = theta.shape
    if n == 2:
        return np.stack([-theta[:, 1], theta[:, 0]], axis=1)[:, None, :]
    if n == 3:
        helper = np.where(
            (np.abs(theta[:, 0]) < 0.9)[:, None], np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        )
        e1 = np.cross(theta, helper)
        e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
        e2 = np.cross(theta, e1)
        return np.stack([e1, e2], axis=1)
    raise ValueError(f"unsupported dimension {n}")


def great_circle(n: int, count: int = 256):
    """Points and weights of the fibre sphere S^{n-2} parameterisation.

    Returns ``(coords, weights)`` where coords has shape (count, n-1) in the
    basis produced by :func:`orthonormal_complement`.
    """
    if n == 2:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 3:
        a = 2.0 * math.pi * np.arange(count) / count
        return np.stack([np.cos(a), np.sin(a)], axis=1), np.full(count, 2.0 * math.pi / count)
    raise ValueError(f"unsupported dimension {n}")
