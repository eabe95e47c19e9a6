"""Radon transform, backprojection and normal operators on the unit disk and ball.

Conventions.  A hyperplane is Pi(s, theta) = {x : x.theta = s}, sigma = 1 - s^2
and rho = 1 - |x|^2.  The Radon transform integrates over Pi(s, theta) with
Lebesgue measure and the backprojection integrates over theta in S^{n-1} with
the round measure.

Radon quadrature.  The slice of the ball is parameterised as
x = s theta + sqrt(sigma) tau psi with tau in [0, 1] and psi in the unit sphere
of theta-perp, so that

    R u(s, theta) = sigma^{(n-1)/2} int_0^1 tau^{n-2} int_psi u dpsi dtau,

and rho restricted to the slice equals sigma (1 - tau^2).  The only endpoint
singularity sits at tau = 1; it is handled by tanh-sinh with the distance
1 - tau supplied exactly.  The factor sigma^{(n-1)/2} is applied analytically,
and ``reduced=True`` returns the integral without it (optionally with an extra
factor (1 - tau^2)^kappa), which is how weighted normal operators and the
pairing kernel avoid dividing tiny numbers by tiny numbers.

Backprojection quadrature.  At x = sqrt(1 - rho) theta_hat write
theta = cos(phi) theta_hat + sin(phi) psi.  Then
sigma(x.theta) = sin^2 phi + rho cos^2 phi, which is of size rho only in the
two polar caps.  There tan(phi) = sqrt(rho) sinh(u) turns the boundary layer
of width sqrt(rho) into an O(1) interval:

    sigma = rho cos^2(phi) cosh^2(u),   dphi = sqrt(rho) cosh(u) cos^2(phi) du.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from ._numerics import (
    DEFAULT_CUTOFF,
    CutoffSpec,
    QuadratureError,
    adaptive_gauss_batch,
    great_circle,
    orthonormal_complement,
    sphere_volume,
    tanh_sinh_batch,
)
from .coefficients import BoundaryWeight, weight_from_name
from .profiles import GeometricGrid, ProfileSamples
from .special_fn import MeromorphicValue, SampledFunction01, beta_functional, mellin_functional

__all__ = [
    "PhgComponentBall",
    "PhgComponentCyl",
    "CutoffSpec",
    "DEFAULT_CUTOFF",
    "radon",
    "radon_batch",
    "backproject",
    "backproject_ray",
    "normal",
    "weighted_normal",
    "Backprojected",
    "NormalOperator",
    "WeightedNormalOperator",
    "boundary_profile",
    "b_kernel",
    "fiber_values",
    "thread_count",
]

_CHUNK = 400_000  # complex entries per evaluation block


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("PHGRADON_THREADS", "1")))
    except ValueError:
        return 1


def _power_log(log_base, gamma: complex, ell: int):
    out = np.exp(gamma * log_base) if gamma != 0 else np.ones_like(log_base, dtype=complex)
    if ell:
        out = out * log_base**ell
    return out


# --------------------------------------------------------------------------
# components
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhgComponentBall:
    """u(x) = a(x/|x|) rho^gamma log^ell(rho) chi(rho) [* smooth_factor(x)].

    ``cutoff=None`` means chi = 1 on the whole ball, which is only meaningful
    for a constant weight (the radial extension is singular at the origin).
    """

    weight: BoundaryWeight
    gamma: complex = 0.0
    ell: int = 0
    cutoff: CutoffSpec | None = DEFAULT_CUTOFF
    smooth_factor: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if complex(self.gamma).real <= -1:
            raise ValueError("non-integrable component: need Re gamma > -1")
        if self.ell < 0:
            raise ValueError("log power must be non-negative")
        if self.cutoff is None and self.weight.constant is None:
            raise ValueError("a component without cutoff needs a constant weight")

    @property
    def n(self) -> int:
        return self.weight.n

    @property
    def radial(self) -> bool:
        return self.weight.constant is not None and self.smooth_factor is None

    def profile(self, rho, log_rho=None):
        """rho^gamma log^ell(rho) chi(rho)."""
        rho = np.asarray(rho, dtype=float)
        if log_rho is None:
            with np.errstate(divide="ignore"):
                log_rho = np.log(rho)
        out = _power_log(log_rho, complex(self.gamma), self.ell)
        if self.cutoff is not None:
            out = out * self.cutoff(rho)
        return out

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        out = self.profile(1.0 - r2)
        if self.weight.constant is not None:
            out = out * self.weight.constant
        else:
            out = out * self.weight(x / np.sqrt(r2)[..., None])
        if self.smooth_factor is not None:
            out = out * self.smooth_factor(x)
        return out


@dataclass(frozen=True)
class PhgComponentCyl:
    """u(s, theta) = a(theta) sigma^gamma log^ell(sigma) chi(1 - side*s)."""

    weight: BoundaryWeight
    gamma: complex = 0.0
    ell: int = 0
    side: int = 1
    cutoff: CutoffSpec | None = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.side not in (1, -1):
            raise ValueError("side must be +1 or -1")
        if self.ell < 0:
            raise ValueError("log power must be non-negative")

    @property
    def n(self) -> int:
        return self.weight.n

    @property
    def theta_independent(self) -> bool:
        return self.weight.constant is not None

    def __call__(self, s, sigma, theta) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        out = _power_log(np.log(sigma), complex(self.gamma), self.ell)
        if self.cutoff is not None:
            near = self.side * s
            # 1 - side*s from sigma where that is the accurate route
            dist = np.where(near >= 0, sigma / (1.0 + np.abs(s)), 1.0 - near)
            out = out * self.cutoff(dist)
        if self.weight.constant is not None:
            return out * self.weight.constant
        return out * self.weight(theta)


# --------------------------------------------------------------------------
# Radon transform
# --------------------------------------------------------------------------


def _fiber_directions(theta: np.ndarray, psi_nodes: int):
    """Directions psi (batch, P, n) in theta-perp and their weights (P,)."""
    n = theta.shape[1]
    coords, w = great_circle(n, psi_nodes)
    basis = orthonormal_complement(theta)
    return np.einsum("pk,bkn->bpn", coords, basis), w


def fiber_values(u: PhgComponentBall, s, sigma, theta, tau, psi_nodes: int = 64) -> np.ndarray:
    """G(tau) = sum over psi of weight and smooth factor of u at s theta + sqrt(sigma) tau psi.

    Shapes: s, sigma (B, 1); theta (B, n); tau (B, T).  Returns (B, T).
    The radial profile of u is not included.
    """
    n = u.n
    if u.radial:
        return np.full(tau.shape, u.weight.constant * sphere_volume(n - 2), dtype=complex)
    dirs, w = _fiber_directions(theta, psi_nodes)
    x = s[:, :, None, None] * theta[:, None, None, :] + (np.sqrt(sigma) * tau)[:, :, None, None] * dirs[:, None, :, :]
    vals = np.ones(x.shape[:-1], dtype=complex)
    if u.weight.constant is not None:
        vals = vals * u.weight.constant
    else:
        vals = vals * u.weight(x / np.linalg.norm(x, axis=-1, keepdims=True))
    if u.smooth_factor is not None:
        vals = vals * u.smooth_factor(x)
    return vals @ w


def radon_batch(
    u: PhgComponentBall,
    s,
    theta,
    *,
    sigma=None,
    tol: float = 1e-12,
    reduced: bool = False,
    fiber_exponent: complex = 0.0,
    psi_nodes: int = 64,
    return_error: bool = False,
):
    """Ru at a batch of hyperplanes.

    ``s`` has shape (B,) and ``theta`` shape (B, n) or (n,).  Pass ``sigma``
    when it is known more accurately than 1 - s^2.  With ``reduced=True`` the
    factor sigma^{(n-1)/2} is omitted and the fibre integrand carries the extra
    factor (1 - tau^2)^fiber_exponent.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        theta = np.broadcast_to(theta, (s.size, theta.size))
    sigma = (1.0 - s) * (1.0 + s) if sigma is None else np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sigma <= 0):
        raise ValueError("radon needs |s| < 1")
    if tol < 1e-13:
        raise ValueError("tolerance below 1e-13 is not attainable in double precision")
    n = theta.shape[1]
    per_row = 2 * (n - 1) * (1 if u.radial else (2 if n == 2 else psi_nodes)) * 2000
    step = max(1, _CHUNK // per_row)
    values, errors = [], []
    for lo in range(0, s.size, step):
        v, e = _radon_block(u, s[lo : lo + step], sigma[lo : lo + step], theta[lo : lo + step], tol, reduced, complex(fiber_exponent), psi_nodes)
        values.append(v)
        errors.append(e)
    value = np.concatenate(values)
    err = np.concatenate(errors)
    if not reduced:
        value = value * sigma ** (0.5 * (n - 1))
        err = err * sigma ** (0.5 * (n - 1))
    return (value, err) if return_error else value


def _radon_block(u, s, sigma, theta, tol, reduced, kappa, psi_nodes):
    n = u.n
    s_col = s[:, None]
    sig_col = sigma[:, None]
    log_sig = np.log(sig_col)
    gamma, ell = complex(u.gamma), u.ell

    def integrand(tau, dist):
        # dist = 1 - tau, exact
        one_minus_t2 = dist * (2.0 - dist)
        log_fib = np.log(one_minus_t2)
        log_rho = log_sig + log_fib
        vals = _power_log(log_rho, gamma, ell)
        if kappa != 0:
            vals = vals * np.exp(kappa * log_fib)
        if u.cutoff is not None:
            vals = vals * u.cutoff(sig_col * one_minus_t2)
        if n > 2:
            vals = vals * tau ** (n - 2)
        return vals * fiber_values(u, s_col, sig_col, theta, tau, psi_nodes)

    if u.cutoff is None:
        t_plateau = np.zeros_like(sigma)
        t_support = np.zeros_like(sigma)
    else:
        t_plateau = np.sqrt(np.maximum(0.0, 1.0 - u.cutoff.plateau_end / sigma))
        t_support = np.sqrt(np.maximum(0.0, 1.0 - u.cutoff.support_end / sigma))

    plateau, err_p, mass_p = _tanh_sinh_full(lambda x, left, right: integrand(x, right), t_plateau, np.ones_like(sigma), tol)
    value, err = plateau, err_p
    mass = mass_p
    active = t_plateau > t_support
    if np.any(active):
        idx = np.nonzero(active)[0]
        sub = (s[idx][:, None], sigma[idx][:, None], theta[idx])

        def smooth_part(tau):
            one_minus_t2 = (1.0 - tau) * (1.0 + tau)
            log_fib = np.log(one_minus_t2)
            vals = _power_log(np.log(sub[1]) + log_fib, gamma, ell) * u.cutoff(sub[1] * one_minus_t2)
            if kappa != 0:
                vals = vals * np.exp(kappa * log_fib)
            if n > 2:
                vals = vals * tau ** (n - 2)
            return vals * fiber_values(u, sub[0], sub[1], sub[2], tau, psi_nodes)

        mid, err_m = adaptive_gauss_batch(smooth_part, t_support[idx], t_plateau[idx], rtol=tol, start_panels=2, max_panels=256)
        value = value.astype(complex)
        value[idx] += mid
        err = err.copy()
        err[idx] += err_m
        mass = mass.copy()
        mass[idx] += np.abs(mid)
    bad = err > 100 * tol * np.maximum(mass, 1e-300)
    if np.any(bad):
        raise QuadratureError("radon quadrature did not converge", float(np.max(err[bad])))
    return value, err


def _tanh_sinh_full(f, a, b, tol):
    """Batch tanh-sinh returning value, error estimate and L1 mass."""
    value, err = tanh_sinh_batch(f, a, b, rtol=tol, min_level=3, max_level=10)
    mass, _ = tanh_sinh_batch(lambda x, l, r: np.abs(f(x, l, r)), a, b, rtol=1e-3, min_level=3, max_level=3)
    return value, err, np.maximum(mass, np.abs(value))


def radon(u: PhgComponentBall, s: float, theta, tol: float = 1e-12, *, sigma=None) -> complex:
    """Ru(s, theta) for a single hyperplane."""
    if not abs(s) < 1:
        raise ValueError("radon needs |s| < 1")
    sig = None if sigma is None else [sigma]
    return complex(radon_batch(u, [s], np.asarray(theta, dtype=float), sigma=sig, tol=tol)[0])


# --------------------------------------------------------------------------
# backprojection
# --------------------------------------------------------------------------


CylinderFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def backproject_ray(
    v: CylinderFunction,
    rho: float,
    theta_hat,
    tol: float = 1e-12,
    *,
    theta_independent: bool = False,
    psi_nodes: int = 64,
) -> tuple[complex, float]:
    """(R* v)(sqrt(1-rho) theta_hat) with its error estimate.

    ``v(s, sigma, theta)`` is evaluated on arrays; sigma = 1 - s^2 is always
    supplied from an accurate formula.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_hat = theta_hat / np.linalg.norm(theta_hat)
    n = theta_hat.size
    if not 0.0 < rho <= 1.0:
        raise ValueError("backprojection point must satisfy 0 < rho <= 1")
    r = math.sqrt(1.0 - rho)
    root = math.sqrt(rho)
    basis = orthonormal_complement(theta_hat[None, :])[0]
    if n == 2:
        dirs, w = np.array([basis[0], -basis[0]]), np.array([1.0, 1.0])
    elif theta_independent:
        dirs, w = basis[:1], np.array([sphere_volume(n - 2)])
    else:
        coords, w = great_circle(n, psi_nodes)
        dirs = coords @ basis

    def sphere_sum(s, sigma, cos_phi, sin_phi):
        theta = cos_phi[:, None, None] * theta_hat + sin_phi[:, None, None] * dirs[None, :, :]
        m, p = theta.shape[:2]
        vals = v(np.repeat(s, p), np.repeat(sigma, p), theta.reshape(m * p, n))
        return np.asarray(vals, dtype=complex).reshape(m, p) @ w

    def cap(sign):
        def f(u):
            u = u[0]
            t = root * np.sinh(u)
            c = 1.0 / np.sqrt(1.0 + t * t)
            sn = t * c
            sigma = rho * c * c * np.cosh(u) ** 2
            jac = root * np.cosh(u) * c * c
            if n > 2:
                jac = jac * sn ** (n - 2)
            return (jac * sphere_sum(sign * r * c, sigma, sign * c, sn))[None, :]

        return f

    def middle(phi):
        phi = phi[0]
        c, sn = np.cos(phi), np.sin(phi)
        sigma = sn * sn + rho * c * c
        jac = sn ** (n - 2) if n > 2 else 1.0
        return (jac * sphere_sum(r * c, sigma, c, sn))[None, :]

    top = math.asinh(1.0 / root)
    total, err_total, mass = 0j, 0.0, 0.0
    for f, a, b in ((cap(1.0), 0.0, top), (middle, math.pi / 4, 3 * math.pi / 4), (cap(-1.0), 0.0, top)):
        val, err = adaptive_gauss_batch(f, a, b, rtol=tol, start_panels=4, max_panels=1024)
        total += val[0]
        err_total += float(err[0])
        mass += abs(val[0])
    if err_total > 100 * tol * max(mass, 1e-300):
        raise QuadratureError("backprojection quadrature did not converge", err_total)
    return complex(total), err_total


def backproject(v, x, tol: float = 1e-12, **kwargs) -> complex:
    """(R* v)(x) for an interior point x; ``v`` is a cylinder callable or PhgComponentCyl."""
    x = np.asarray(x, dtype=float)
    radius = float(np.linalg.norm(x))
    if radius >= 1:
        raise ValueError("backprojection point must lie inside the unit ball")
    direction = x / radius if radius > 0 else np.eye(x.size)[0]
    if isinstance(v, PhgComponentCyl):
        kwargs.setdefault("theta_independent", v.theta_independent)
    return backproject_ray(v, (1.0 - radius) * (1.0 + radius), direction, tol, **kwargs)[0]


class Backprojected:
    """The function R* v on the ball, evaluable at points or along rays."""

    def __init__(self, v, tol: float = 1e-12, theta_independent: bool | None = None, psi_nodes: int = 64):
        self.v = v
        self.tol = tol
        if theta_independent is None:
            theta_independent = bool(getattr(v, "theta_independent", False))
        self.theta_independent = theta_independent
        self.psi_nodes = psi_nodes

    def on_ray(self, rho: float, theta_hat) -> tuple[complex, float]:
        return backproject_ray(
            self.v, rho, theta_hat, self.tol, theta_independent=self.theta_independent, psi_nodes=self.psi_nodes
        )

    def __call__(self, x) -> complex:
        x = np.asarray(x, dtype=float)
        radius = float(np.linalg.norm(x))
        direction = x / radius if radius > 0 else np.eye(x.size)[0]
        return self.on_ray((1.0 - radius) * (1.0 + radius), direction)[0]


class NormalOperator(Backprojected):
    """R* R u, with the inner Radon transform at one tenth of the outer tolerance."""

    def __init__(self, u: PhgComponentBall, tol: float = 1e-11, psi_nodes: int = 64):
        inner = max(tol / 10, 1e-13)

        def ru(s, sigma, theta):
            return radon_batch(u, s, theta, sigma=sigma, tol=inner, psi_nodes=psi_nodes)

        super().__init__(ru, tol, theta_independent=u.radial, psi_nodes=psi_nodes)


class WeightedNormalOperator(Backprojected):
    """R* sigma^{-(n-1)/2-gamma_w} R rho^{gamma_w} u.

    The sigma weight is never applied numerically: the Radon integral is
    evaluated in reduced form with (1 - tau^2)^gamma_w in the fibre integrand.
    """

    def __init__(self, u: PhgComponentBall, gamma_w: complex, tol: float = 1e-11, psi_nodes: int = 64):
        if complex(gamma_w).real < 0:
            raise ValueError("weighted normal operator needs Re gamma_w >= 0")
        inner = max(tol / 10, 1e-13)

        def weighted(s, sigma, theta):
            return radon_batch(u, s, theta, sigma=sigma, tol=inner, reduced=True, fiber_exponent=gamma_w, psi_nodes=psi_nodes)

        super().__init__(weighted, tol, theta_independent=u.radial, psi_nodes=psi_nodes)


def normal(u: PhgComponentBall, x, tol: float = 1e-11) -> complex:
    return NormalOperator(u, tol)(x)


def weighted_normal(u: PhgComponentBall, gamma_w, x, tol: float = 1e-11) -> complex:
    return WeightedNormalOperator(u, gamma_w, tol)(x)


def boundary_profile(op, theta_hat, grid: GeometricGrid | np.ndarray) -> ProfileSamples:
    """Samples of op at sqrt(1 - rho_j) theta_hat.

    Operators with an ``on_ray`` method receive rho exactly; plain callables
    are evaluated at the point.  Grid rows run on ``PHGRADON_THREADS`` threads
    and are collected in grid order.
    """
    rho = grid.points() if hasattr(grid, "points") else np.asarray(grid, dtype=float)
    if np.any(rho <= 0) or np.any(rho > 0.5):
        raise ValueError("profile grid points must lie in (0, 1/2]")
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_hat = theta_hat / np.linalg.norm(theta_hat)

    def one(r):
        if hasattr(op, "on_ray"):
            return op.on_ray(float(r), theta_hat)
        return complex(op(math.sqrt(1.0 - r) * theta_hat)), 0.0

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, rho))
    else:
        results = [one(r) for r in rho]
    return ProfileSamples(rho, [v for v, _ in results], [e for _, e in results])


# --------------------------------------------------------------------------
# pairing kernel
# --------------------------------------------------------------------------


def b_kernel(
    h: BoundaryWeight,
    s: float,
    theta,
    z,
    *,
    sigma: float | None = None,
    cutoff: CutoffSpec = DEFAULT_CUTOFF,
    depth: int | None = None,
    tol: float = 1e-12,
    psi_nodes: int = 64,
    method: str = "auto",
) -> MeromorphicValue:
    """B(s, theta; z) = int over the unit fibre ball of h~ chi(rho) (1 - tau^2)^{z-1} dv.

    For Re z > 1/4 this is a reduced Radon integral.  Elsewhere (or with
    ``method="continued"``) it is continued through the beta functional when
    n is even and through the Mellin functional when n is odd.
    """
    z = complex(z)
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    sig = (1.0 - s) * (1.0 + s) if sigma is None else float(sigma)
    if method == "auto":
        method = "direct" if z.real > 0.25 else "continued"
    if method == "direct":
        if z.real <= 0:
            raise ValueError("direct kernel integral needs Re z > 0")
        comp = PhgComponentBall(h, 0.0, 0, cutoff)
        val = radon_batch(comp, [s], theta, sigma=[sig], tol=tol, reduced=True, fiber_exponent=z - 1.0, psi_nodes=psi_nodes)
        return MeromorphicValue.regular(complex(val[0]))
    if depth is None:
        depth = max(0, math.floor(-z.real) + 1)
    sampled = _kernel_density(h, float(s), sig, tuple(float(t) for t in theta), cutoff, psi_nodes)
    if n % 2 == 0:
        out = beta_functional(sampled, z, depth)
        scale = 4.0 ** (z - 1.0)
        if out.pole_flag:
            return MeromorphicValue.pole(scale * out.value, out.pole_order)
        return MeromorphicValue.regular(scale * out.value)

    regular, pole = 0j, 0j
    has_pole = False
    top = (n - 3) // 2
    for q in range(top + 1):
        coeff = 0.5 * math.comb(top, q) * (-1) ** q
        part = mellin_functional(sampled, z + q, max(0, depth - q))
        if part.pole_flag:
            has_pole = True
            pole += coeff * part.value
        else:
            regular += coeff * part.value
    if has_pole:
        return MeromorphicValue.pole(pole, 1)
    return MeromorphicValue.regular(regular)


@lru_cache(maxsize=4096)
def _kernel_density(h, s, sigma, theta, cutoff, psi_nodes) -> SampledFunction01:
    """The z-independent function whose beta (n even) or Mellin (n odd) functional gives B.

    n even: t -> chi(sigma xi) G(1-2t) (1-2t)^{n-2} with xi = 4t(1-t);
    n odd:  xi -> chi(sigma xi) G(sqrt(1-xi)).
    G is the fibre-sphere sum of h~ and is even in tau.
    """
    n = len(theta)
    comp = PhgComponentBall(h, 0.0, 0, cutoff)
    s_col = np.array([[s]])
    sig_col = np.array([[sigma]])
    th = np.array(theta)[None, :]

    def fiber(tau):
        tau = np.atleast_1d(tau)
        return fiber_values(comp, s_col, sig_col, th, np.abs(tau)[None, :], psi_nodes)[0]

    if n % 2 == 0:

        def f(t):
            xi = 4.0 * t * (1.0 - t)
            centred = 1.0 - 2.0 * t
            return cutoff(sigma * xi) * fiber(centred) * centred ** (n - 2)

        return SampledFunction01(f, smoothness=16)

    def big_h(xi):
        return cutoff(sigma * xi) * fiber(np.sqrt(np.maximum(0.0, 1.0 - xi)))

    return SampledFunction01(big_h, smoothness=16)


def component_from_names(weight: str, n: int, gamma=0.0, ell: int = 0, cutoff=DEFAULT_CUTOFF) -> PhgComponentBall:
    return PhgComponentBall(weight_from_name(weight, n), gamma, ell, cutoff)
