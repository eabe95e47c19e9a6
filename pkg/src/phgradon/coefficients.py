"""Explicit expansion coefficients for the Radon transform and backprojection.

* fibre-sphere Taylor coefficients of a boundary weight,
* the coefficients of the Radon expansion of a simple ball component,
* the leading term of the Mellin pairing kernel,
* the leading coefficient of the backprojection of a cylinder component.

Boundary weights are smooth functions on the unit sphere; a small named
catalog ("const", "linear:i", "quadratic:ij", "harmonic:l,m") is what the
command line uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.special import sph_harm_y

from ._numerics import great_circle, orthonormal_complement, sphere_volume
from .index_calculus import as_exponent, case_classify, integer_gap
from .special_fn import MeromorphicValue, beta, beta_deriv, gamma_fn

__all__ = [
    "BoundaryWeight",
    "FiberTaylor",
    "weight_from_name",
    "register_weight",
    "weight_catalog",
    "fiber_sphere_taylor",
    "fiber_integral",
    "radon_coefficient",
    "b0_kernel",
    "leading_backprojection_coefficient",
    "generalized_binom",
]


@dataclass(frozen=True)
class BoundaryWeight:
    """Smooth weight on S^{n-1}; ``func`` maps points shaped (..., n) to values."""

    n: int
    func: Callable[[np.ndarray], np.ndarray]
    even: bool = False
    name: str = "custom"
    constant: complex | None = field(default=None, compare=False)

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.n:
            raise ValueError(f"weight lives on S^{self.n - 1}, got points of dimension {theta.shape[-1]}")
        if self.constant is not None:
            return np.full(theta.shape[:-1], self.constant, dtype=complex)
        return np.asarray(self.func(theta), dtype=complex)

    def check(self, samples: int = 10_000, seed: int = 0) -> None:
        """Verify boundedness (and evenness when flagged) on a quasi-uniform sample."""
        pts = _quasi_uniform_sphere(self.n, samples, seed)
        vals = self(pts)
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"weight {self.name} is not finite on the sphere")
        if self.even:
            gap = np.max(np.abs(vals - self(-pts)))
            if gap > 1e-12 * max(1.0, np.max(np.abs(vals))):
                raise ValueError(f"weight {self.name} is flagged even but differs by {gap:.2e}")


def _quasi_uniform_sphere(n, count, seed):
    if n == 2:
        a = 2 * math.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    if n == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        a = math.pi * (1 + 5**0.5) * i
        r = np.sqrt(1 - z**2)
        return np.stack([r * np.cos(a), r * np.sin(a), z], axis=1)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _const(n, args):
    return BoundaryWeight(n, lambda th: np.ones(th.shape[:-1]), True, "const", 1.0)


def _linear(n, args):
    i = int(args) - 1
    if not 0 <= i < n:
        raise ValueError(f"linear weight index must be in 1..{n}")
    return BoundaryWeight(n, lambda th: th[..., i], False, f"linear:{args}")


def _quadratic(n, args):
    digits = args.replace(",", "")
    if len(digits) != 2:
        raise ValueError("quadratic weight needs two indices, e.g. quadratic:11")
    i, j = int(digits[0]) - 1, int(digits[1]) - 1
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"quadratic weight indices must be in 1..{n}")
    return BoundaryWeight(n, lambda th: th[..., i] * th[..., j], True, f"quadratic:{args}")


def _harmonic(n, args):
    if n != 3:
        raise ValueError("harmonic weights are defined on S^2 only (n=3)")
    deg, order = (int(x) for x in args.split(","))
    if abs(order) > deg:
        raise ValueError("harmonic weight needs |m| <= l")

    def real_harmonic(th):
        polar = np.arccos(np.clip(th[..., 2], -1.0, 1.0))
        az = np.arctan2(th[..., 1], th[..., 0])
        y = sph_harm_y(deg, abs(order), polar, az)
        if order > 0:
            return math.sqrt(2) * (-1) ** order * y.real
        if order < 0:
            return math.sqrt(2) * (-1) ** order * y.imag
        return y.real

    return BoundaryWeight(3, real_harmonic, deg % 2 == 0, f"harmonic:{args}")


_CATALOG: dict[str, tuple[Callable, str]] = {
    "const": (_const, "constant weight 1"),
    "linear": (_linear, "linear:i is the coordinate theta_i (odd)"),
    "quadratic": (_quadratic, "quadratic:ij is theta_i*theta_j (even)"),
    "harmonic": (_harmonic, "harmonic:l,m is the real spherical harmonic Y_lm (n=3)"),
}


def register_weight(name: str, factory: Callable[[int, str], BoundaryWeight], description: str = "") -> None:
    """Add a named weight family; ``factory(n, args)`` builds the weight."""
    _CATALOG[name] = (factory, description or name)


def weight_catalog() -> dict[str, str]:
    return {k: v[1] for k, v in _CATALOG.items()}


def weight_from_name(name: str, n: int) -> BoundaryWeight:
    family, _, args = name.partition(":")
    if family not in _CATALOG:
        raise ValueError(f"unknown weight {name!r}; catalog: {sorted(_CATALOG)}")
    return _CATALOG[family][0](n, args)


# --------------------------------------------------------------------------
# fibre-sphere Taylor coefficients
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FiberTaylor:
    theta: tuple
    coeffs: tuple
    residual: float = 0.0


def fiber_integral(a: BoundaryWeight, theta, q) -> np.ndarray:
    """F(q; theta): integral of a((theta + q phi)/sqrt(1+q^2)) over phi in the unit sphere of theta-perp."""
    theta = np.asarray(theta, dtype=float)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    basis = orthonormal_complement(theta[None, :])[0]
    coords, weights = great_circle(a.n)
    phis = coords @ basis
    pts = (theta[None, None, :] + q[:, None, None] * phis[None, :, :]) / np.sqrt(1 + q**2)[:, None, None]
    return a(pts) @ weights


_Q_HALF_WIDTH = 0.4
_Q_NODES = 33
_FIT_TERMS = 13


def fiber_sphere_taylor(a: BoundaryWeight, theta, P: int, tol: float = 1e-10) -> FiberTaylor:
    """Even Taylor coefficients A_0..A_P of q -> F(q; theta).

    F is sampled at 33 Chebyshev nodes in [-0.4, 0.4] and fitted by least
    squares with the even Chebyshev polynomials T_0, T_2, ..., T_24; the fit is
    then rewritten in powers of q.  Extracting Taylor data from real samples
    costs accuracy at every order: for weights of unit size A_0 and A_1 are
    good to about 1e-13, A_2 to 1e-11, and from there roughly two digits are
    lost per order (A_5 near 1e-5).
    """
    if not 0 <= P <= 8:
        raise ValueError("P must lie in 0..8")
    j = np.arange(_Q_NODES)
    q = _Q_HALF_WIDTH * np.cos((2 * j + 1) * math.pi / (2 * _Q_NODES))
    values = fiber_integral(a, theta, q)
    x = q / _Q_HALF_WIDTH
    design = np.stack([np.cos(2 * k * np.arccos(x)) for k in range(_FIT_TERMS)], axis=1)
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = float(np.max(np.abs(design @ coef - values)))
    scale = max(1.0, float(np.max(np.abs(values))))
    if residual > tol * scale:
        raise ValueError(f"insufficient q-grid: fibre Taylor fit residual {residual:.2e}")
    cheb = np.zeros(2 * _FIT_TERMS - 1, dtype=complex)
    cheb[::2] = coef
    power = np.polynomial.chebyshev.cheb2poly(cheb)
    out = tuple(complex(power[2 * p] / _Q_HALF_WIDTH ** (2 * p)) for p in range(P + 1))
    return FiberTaylor(tuple(float(t) for t in theta), out, residual)


# --------------------------------------------------------------------------
# Radon expansion coefficients
# --------------------------------------------------------------------------


def generalized_binom(top: int, bottom: int) -> int:
    """Binomial with C(-1, -1) = 1 and C(m, -1) = 0 for m != -1."""
    if bottom == -1:
        return 1 if top == -1 else 0
    if bottom < 0 or top < bottom:
        return 0
    return math.comb(top, bottom)


def radon_coefficient(m: int, k: int, gamma, ell: int, n: int, a: BoundaryWeight, theta, s_sign: int = 1) -> complex:
    """Coefficient of sigma^{(n-1)/2+gamma+m} log^k(sigma) in R u near the s_sign face.

    Includes the factor 1/2 coming from the polar volume element of the
    fibre ball (see the module docs of :mod:`phgradon.transforms`).
    """
    g = complex(gamma)
    if g.real <= -1:
        raise ValueError("integrability error: Re gamma must exceed -1")
    if not 0 <= k <= ell:
        raise ValueError("need 0 <= k <= ell")
    th = s_sign * np.asarray(theta, dtype=float)
    taylor = fiber_sphere_taylor(a, th, min(m, 8)).coeffs if m > 0 else (complex(fiber_integral(a, th, 0.0)[0]),)
    total = 0j
    for p in range(m + 1):
        c = generalized_binom(m - 1, p - 1)
        if c:
            total += taylor[p] * c * beta_deriv(ell - k, g, 0.5 * (n - 1) + p)
    return 0.5 * math.comb(ell, k) * total


# --------------------------------------------------------------------------
# Mellin kernel and backprojection coefficients
# --------------------------------------------------------------------------


def b0_kernel(theta, z, n: int, h: BoundaryWeight) -> MeromorphicValue:
    """Most singular term of the Mellin pairing kernel at a point theta of S^{n-1}."""
    hv = complex(h(np.asarray(theta, dtype=float))) if np.ndim(theta) == 1 else h(theta)
    pref = 0.5 * sphere_volume(n - 2) * math.gamma(0.5 * (n - 1)) * hv
    if n % 2 == 0:
        num = gamma_fn(z)
        den = gamma_fn(complex(z) + 0.5 * (n - 1))
        order = int(num.pole_flag) - int(den.pole_flag)
        lead = num.value / den.value
        if order > 0:
            return MeromorphicValue.pole(pref * lead, order)
        if order < 0:
            return MeromorphicValue.regular(0.0)
        return MeromorphicValue.regular(pref * lead)
    prod = 1.0 + 0j
    poles = 0
    for k in range((n - 3) // 2 + 1):
        d = complex(z) + k
        if abs(d) <= 1e-13:
            poles += 1
        else:
            prod /= d
    if poles:
        return MeromorphicValue.pole(pref * prod, poles)
    return MeromorphicValue.regular(pref * prod)


def _factorial_of(e) -> float:
    m = integer_gap(e, Fraction(0))
    if m is None or m < 0:
        raise ValueError(f"factorial of non-integer {e}")
    return float(math.factorial(m))


def leading_backprojection_coefficient(
    gamma, ell: int, n: int, a: BoundaryWeight, theta, s_sign: int = 1, normalization: str = "tabulated"
) -> tuple[int, complex]:
    """Log power p and coefficient b of the leading singular term of R* u.

    ``normalization="tabulated"`` returns the closed-form case-table value.
    ``normalization="derived"`` halves it: the Mellin pairing carries a factor
    1/2 from 2 ds = dsigma/sqrt(1-sigma) that the tabulated value drops, and
    the halved value is what direct numerical backprojection reproduces.
    """
    g = as_exponent(gamma)
    gc = complex(g)
    tag = case_classify(g, ell, n)
    c = 0.5 * (n - 1) + gc
    c_exact = as_exponent(c)
    if tag.case == "A":
        p = ell - 1
    elif tag.case in ("B", "C") and tag.branch_nonneg:
        p = ell + 1
    else:
        p = ell
    if tag.case == "A" and ell == 0:
        return -1, 0j
    weight = complex(a(s_sign * np.asarray(theta, dtype=float)))
    pref = weight * sphere_volume(n - 2) * math.gamma(0.5 * (n - 1))
    if n % 2 == 0:
        if tag.case == "A":
            gam = int(round(gc.real))
            factor = ell * gamma_fn(-c).finite() * (-1) ** (gam + 1) * math.factorial(gam)
        elif tag.case == "B" and tag.branch_nonneg:
            cm = int(round(c.real))
            factor = (-1) ** (cm + 1) / ((ell + 1) * _factorial_of(c_exact) * gamma_fn(-gc).finite())
        else:
            factor = gamma_fn(-c).finite() / gamma_fn(-gc).finite()
    else:
        top = (n - 3) // 2
        if tag.case == "C" and tag.branch_nonneg:
            skip = int(round(c.real))
            factor = -1.0 / (ell + 1)
            for k in range(top + 1):
                if k != skip:
                    factor *= -1.0 / (c - k)
        else:
            factor = 1.0 + 0j
            for k in range(top + 1):
                factor *= -1.0 / (c - k)
    b = pref * factor
    if normalization == "derived":
        b *= 0.5
    elif normalization != "tabulated":
        raise ValueError("normalization must be 'tabulated' or 'derived'")
    return p, complex(b)


def beta_value(alpha, b) -> complex:
    return beta(alpha, b).finite()
