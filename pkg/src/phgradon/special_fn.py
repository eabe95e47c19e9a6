"""Complex Gamma-family functions and meromorphic continuation of two functionals.

Gamma uses the 15-term Lanczos approximation (g = 607/128) with reflection;
digamma and polygamma use upward recurrence followed by the Stirling-type
asymptotic series.  Poles are values, not errors: functions that may sit on a
pole return a :class:`MeromorphicValue` whose ``value`` is the leading Laurent
coefficient when ``pole_flag`` is set.

The two functionals continued here are

    beta[f](z)   = int_0^1 f(t) t^(z-1) (1-t)^(z-1) dt    (f symmetric under t -> 1-t)
    mellin[f](z) = int_0^1 f(x) x^(z-1) dx

Both are handled through a Chebyshev interpolant of ``f`` on [0, 1], which
provides the derivatives the continuations need.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.special import bernoulli


__all__ = [
    "MeromorphicValue",
    "SampledFunction01",
    "gamma_fn",
    "gamma_values",
    "loggamma",
    "digamma",
    "polygamma",
    "gamma_residue",
    "beta",
    "beta_deriv",
    "beta_functional",
    "mellin_functional",
    "interval_identity",
]

_LANCZOS_G = 607.0 / 128.0
_LANCZOS = np.array(
    [
        0.99999999999999709182,
        57.156235665862923517,
        -59.597960355475491248,
        14.136097974741747174,
        -0.49191381609762019978,
        0.33994649984811888699e-4,
        0.46523628927048575665e-4,
        -0.98374475304879564677e-4,
        0.15808870322491248884e-3,
        -0.21026444172410488319e-3,
        0.21743961811521264320e-3,
        -0.16431810653676389022e-3,
        0.84418223983852743293e-4,
        -0.26190838401581408670e-4,
        0.36899182659531622704e-5,
    ]
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_POLE_TOL = 1e-13
_BERNOULLI = bernoulli(30)


@dataclass(frozen=True)
class MeromorphicValue:
    """Value of a meromorphic function, or its leading Laurent coefficient at a pole."""

    value: complex
    pole_flag: bool = False
    pole_order: int = 0

    @classmethod
    def regular(cls, value) -> "MeromorphicValue":
        return cls(complex(value))

    @classmethod
    def pole(cls, leading, order: int = 1) -> "MeromorphicValue":
        return cls(complex(leading), True, order)

    def finite(self) -> complex:
        if self.pole_flag:
            raise ZeroDivisionError(f"value requested at a pole of order {self.pole_order}")
        return self.value


@dataclass(frozen=True)
class SampledFunction01:
    """A function on [0, 1] with a declared order of smoothness."""

    func: Callable[[np.ndarray], np.ndarray]
    smoothness: int = 8
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.smoothness < 0:
            raise ValueError("smoothness order must be non-negative")

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    def chebyshev(self, tol: float = 2.2e-16, max_degree: int = 512) -> Chebyshev:
        """Chebyshev interpolant on [0, 1], degree doubled until the tail is negligible.

        The interpolant is computed once per (tol, max_degree) and reused.
        """
        key = (tol, max_degree)
        if key not in self._cache:
            self._cache[key] = _interpolate(self.func, tol, max_degree)
        return self._cache[key]

    def local_chebyshev(self, width: float, tol: float = 2.2e-16) -> Chebyshev:
        """Chebyshev interpolant on [0, width], for Taylor data at 0."""
        key = ("local", width, tol)
        if key not in self._cache:
            self._cache[key] = _interpolate(self.func, tol, 512, width)
        return self._cache[key]


_PLATEAU_CEILING = 1e-9


def _interpolate(func, tol=2.2e-16, max_degree=512, width: float = 1.0) -> Chebyshev:
    """Chebyshev interpolant on [0, width] with the round-off plateau chopped.

    The degree doubles until the tail drops below 32 tol relative to the
    largest coefficient, or until the tail stops decaying: samples carrying
    absolute noise above that level (cancellation inside ``func``) end in a
    flat plateau, which is chopped at ten times its height when it lies below
    ``_PLATEAU_CEILING`` relative (slow algebraic decay is not a plateau).  Plateau
    coefficients would otherwise be amplified by every derivative taken later.
    """
    degree = 32
    while True:
        p = Chebyshev.interpolate(lambda t: np.asarray(func(t), dtype=complex), degree, domain=[0, width])
        c = np.abs(p.coef)
        scale = max(c.max(), 1e-300)
        threshold = 32 * tol * scale
        eighth = max(4, c.size // 8)
        tail, before = c[-eighth:].max(), c[-2 * eighth : -eighth].max()
        if threshold < tail < _PLATEAU_CEILING * scale and tail > 0.1 * before:
            threshold = max(threshold, 10 * tail)
        elif c[-4:].max() > threshold and degree < max_degree:
            degree *= 2
            continue
        significant = np.nonzero(c > threshold)[0]
        last = significant[-1] if significant.size else 0
        return Chebyshev(p.coef[: last + 1], domain=[0, width])


def _pole_index(z) -> int | None:
    """m when z is (within round-off) the non-positive integer -m."""
    if isinstance(z, (int, Fraction)):
        return int(-z) if z <= 0 and Fraction(z).denominator == 1 else None
    z = complex(z)
    if abs(z.imag) > _POLE_TOL:
        return None
    r = round(z.real)
    if r <= 0 and abs(z.real - r) <= _POLE_TOL * max(1.0, abs(r)):
        return int(-r)
    return None


def gamma_residue(m: int) -> Fraction:
    """Residue of Gamma at -m."""
    return Fraction((-1) ** m, math.factorial(m))


def loggamma(z) -> np.ndarray:
    """Log-Gamma (principal branch for Re z >= 1/2) via the Lanczos sum; vectorised."""
    z = np.asarray(z, dtype=complex)
    x = z - 1.0
    series = _LANCZOS[0] + sum(_LANCZOS[k] / (x + k) for k in range(1, len(_LANCZOS)))
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * np.log(t) - t + np.log(series)


def gamma_values(z) -> np.ndarray:
    """Gamma on an array of non-pole complex arguments (reflection for Re z < 1/2)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    right = z.real >= 0.5
    out[right] = np.exp(loggamma(z[right]))
    zl = z[~right]
    out[~right] = np.pi / (np.sin(np.pi * zl) * np.exp(loggamma(1.0 - zl)))
    return out


def gamma_fn(z) -> MeromorphicValue:
    m = _pole_index(z)
    if m is not None:
        return MeromorphicValue.pole(float(gamma_residue(m)), 1)
    return MeromorphicValue.regular(gamma_values(np.array([complex(z)]))[0])


def _shift_count(z: complex, target: float) -> int:
    return max(0, math.ceil(target - z.real))


def polygamma(m: int, z) -> complex:
    """m-th derivative of the digamma function at a non-pole point (m >= 0)."""
    if m < 0:
        raise ValueError("polygamma order must be non-negative")
    if _pole_index(z) is not None:
        raise ZeroDivisionError(f"polygamma({m}) has a pole at {z}")
    z = complex(z)
    target = 16.0 + 1.5 * m
    shifts = _shift_count(z, target)
    if m == 0:
        correction = sum(1.0 / (z + k) for k in range(shifts))
    else:
        correction = (-1) ** m * math.factorial(m) * sum((z + k) ** (-(m + 1)) for k in range(shifts))
    w = z + shifts
    if m == 0:
        total = cmath.log(w) - 0.5 / w
        for k in range(1, 12):
            total -= float(_BERNOULLI[2 * k]) / (2 * k * w ** (2 * k))
        return total - correction
    total = math.factorial(m - 1) / w**m + math.factorial(m) / (2.0 * w ** (m + 1))
    for k in range(1, 12):
        total += (
            float(_BERNOULLI[2 * k])
            * math.factorial(2 * k + m - 1)
            / (math.factorial(2 * k) * w ** (2 * k + m))
        )
    return (-1) ** (m + 1) * total - correction


def digamma(z) -> complex:
    return polygamma(0, z)


def beta(alpha, beta_) -> MeromorphicValue:
    """Gamma(a)Gamma(b)/Gamma(a+b) with pole and zero bookkeeping.

    At poles the leading coefficient is taken with the other argument held
    fixed; a pole of the denominator alone gives the value 0.
    """
    a, b = _as_number(alpha), _as_number(beta_)
    factors = [gamma_fn(a), gamma_fn(b)]
    denom = gamma_fn(_sum(a, b))
    order = sum(f.pole_flag for f in factors) - int(denom.pole_flag)
    lead = factors[0].value * factors[1].value / denom.value
    if order > 0:
        return MeromorphicValue.pole(lead, order)
    if order < 0:
        return MeromorphicValue.regular(0.0)
    return MeromorphicValue.regular(lead)


def _as_number(x):
    return x if isinstance(x, (int, Fraction)) else complex(x)


def _sum(a, b):
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) + Fraction(b)
    return complex(a) + complex(b)


def beta_deriv(j: int, eta, b) -> complex:
    """j-th derivative in eta of B(eta + 1, b).

    With L = log B, L' = psi(eta+1) - psi(eta+1+b) and higher derivatives of L
    are polygamma differences; B^(j+1) = sum_i C(j, i) B^(i) L^(j+1-i).
    """
    a = _sum(_as_number(eta), 1)
    s = _sum(a, _as_number(b))
    if _pole_index(a) is not None or _pole_index(b) is not None or _pole_index(s) is not None:
        raise ZeroDivisionError("derivative at pole")
    derivs = [beta(a, b).finite()]
    logd = [0j] + [polygamma(r - 1, a) - polygamma(r - 1, s) for r in range(1, j + 1)]
    for i in range(j):
        derivs.append(sum(math.comb(i, t) * derivs[t] * logd[i + 1 - t] for t in range(i + 1)))
    return derivs[j]


# --------------------------------------------------------------------------
# functionals
# --------------------------------------------------------------------------


def _mellin_power_integral(p: Chebyshev, w: complex) -> complex:
    """int_0^1 p(t) t^(w-1) dt for Re w > 0, exact for the polynomial p.

    With t = (1 + x)/2 the moments mu_k = int_{-1}^1 (1+x)^a T_k(x) dx,
    a = w - 1, obey the forward-stable recurrence
    (a + k + 2) mu_{k+1} = 2 a mu_k + (k - a - 2) mu_{k-1}
    (integrate d/dx[(1+x)^{a+1} (1-x) T_k] over [-1, 1]).
    """
    coef = np.asarray(p.coef, dtype=complex)
    a = complex(w) - 1.0
    mu = np.empty(max(2, coef.size), dtype=complex)
    mu[0] = 2.0 ** (a + 1.0) / (a + 1.0)
    mu[1] = 2.0 ** (a + 2.0) / (a + 2.0) - mu[0]
    for k in range(1, coef.size - 1):
        mu[k + 1] = (2.0 * a * mu[k] + (k - a - 2.0) * mu[k - 1]) / (a + k + 2.0)
    return complex(coef @ mu[: coef.size]) * 2.0 ** (-complex(w))


def _beta_direct(p: Chebyshev, z: complex) -> complex:
    """int_0^1 p(t) (t(1-t))^(z-1) dt for Re z > 0, exact for the polynomial p.

    Odd Chebyshev modes integrate to zero; the even moments
    I_j = int_{-1}^1 T_{2j}(x) (1-x^2)^{z-1} dx satisfy
    I_{j+1} / I_j = (j + 1/2 - z) / (j + 1/2 + z).
    """
    coef = np.asarray(p.coef, dtype=complex)
    z = complex(z)
    moment = complex(gamma_values(0.5)) * complex(gamma_values(z)) / complex(gamma_values(z + 0.5))
    total = 0j
    for j in range(0, (coef.size + 1) // 2):
        total += coef[2 * j] * moment
        moment *= (j + 0.5 - z) / (j + 0.5 + z)
    return total * 4.0 ** (1.0 - z) / 2.0


def _beta_residue(p: Chebyshev, m: int) -> complex:
    if m == 0:
        return complex(p(0.0) + p(1.0))
    g = _beta_lift(p)
    return (2.0 / (-m)) * ((1 - 2 * m) * _beta_residue(p, m - 1) + _beta_residue(g, m - 1))


def _beta_lift(p: Chebyshev) -> Chebyshev:
    """(t - 1/2) p'(t), the second function in the functional relation."""
    t = Chebyshev.identity(domain=[0, 1])
    return (t - 0.5) * p.deriv()


def _beta_rec(p: Chebyshev, z: complex, depth: int) -> MeromorphicValue:
    if z.real > 0.5 or (z.real > 0 and depth == 0):
        return MeromorphicValue.regular(_beta_direct(p, z))
    m = _pole_index(z)
    if m is not None:
        return MeromorphicValue.pole(_beta_residue(p, m), 1)
    if depth == 0:
        raise ValueError(f"depth exhausted at Re z = {z.real}; increase depth")
    first = _beta_rec(p, z + 1, depth - 1).finite()
    second = _beta_rec(_beta_lift(p), z + 1, depth - 1).finite()
    return MeromorphicValue.regular((2.0 / z) * ((2 * z + 1) * first + second))


def beta_functional(f: SampledFunction01, z, depth: int = 0) -> MeromorphicValue:
    """Meromorphic continuation of int_0^1 f(t) (t(1-t))^(z-1) dt.

    Applies beta[f](z) = (2/z)((2z+1) beta[f](z+1) + beta[(t-1/2) f'](z+1))
    until the shifted argument has real part above 1/2, where the integral is
    evaluated directly.
    """
    z = complex(z)
    if depth > f.smoothness:
        raise ValueError(f"depth {depth} exceeds the smoothness order {f.smoothness} of f")
    if z.real <= -depth:
        raise ValueError(f"need Re z > -depth, got Re z = {z.real}, depth = {depth}")
    probe = np.linspace(0.0, 1.0, 17)
    fv, fr = f(probe), f(1.0 - probe)
    if np.max(np.abs(fv - fr)) > 1e-10 * max(1.0, np.max(np.abs(fv))):
        raise ValueError("beta functional needs f symmetric under t -> 1 - t")
    return _beta_rec(f.chebyshev(), z, depth)


def mellin_functional(f: SampledFunction01, z, depth: int = 0) -> MeromorphicValue:
    """Meromorphic continuation of int_0^1 f(x) x^(z-1) dx.

    Splits off the Taylor polynomial of f at 0: the terms f^(q)(0)/q! give the
    explicit poles 1/(z+q).  The Taylor data come from a low-degree
    interpolant on [0, 1/8], where the remainder is divided exactly by x^Q and
    integrated against x^(z+Q-1) by exact moments; on [1/8, 1] the remainder
    f - P is integrated directly by Gauss-Legendre.  The split depth Q is at
    least ``depth`` and large enough that Re z + Q >= 1/2.
    """
    z = complex(z)
    if depth > f.smoothness:
        raise ValueError(f"depth {depth} exceeds the smoothness order {f.smoothness} of f")
    if z.real <= -depth:
        raise ValueError(f"need Re z > -depth, got Re z = {z.real}, depth = {depth}")
    local = f.local_chebyshev(_LOCAL_WIDTH)
    m = _pole_index(z)
    if m is not None:
        return MeromorphicValue.pole(_taylor(local, m), 1)
    split = max(depth, math.ceil(0.5 - z.real), 0)
    x = Chebyshev.identity(domain=[0, _LOCAL_WIDTH])
    head = Chebyshev([0.0], domain=[0, _LOCAL_WIDTH])
    taylor = []
    total = 0j
    for q in range(split):
        c = _taylor(local, q)
        taylor.append(c)
        total += c / (z + q)
        head = head + c * x**q
    # near part: (f - head) / x^split on [0, width], an exact polynomial division
    rest = local - head
    if split:
        rest, _ = divmod(rest, x**split)
    w = z + split
    near = _mellin_power_integral(Chebyshev(rest.coef, domain=[0, 1]), w) * _LOCAL_WIDTH**w
    # far part: x^(z-1) is analytic on [width, 1], so Gauss-Legendre converges fast
    p = f.chebyshev()
    nodes, weights = np.polynomial.legendre.leggauss(p.coef.size // 2 + 64)
    xs = _LOCAL_WIDTH + 0.5 * (1.0 - _LOCAL_WIDTH) * (nodes + 1.0)
    poly = sum(c * xs**q for q, c in enumerate(taylor)) if taylor else 0.0
    far = 0.5 * (1.0 - _LOCAL_WIDTH) * np.sum(weights * (p(xs) - poly) * np.exp((z - 1.0) * np.log(xs)))
    return MeromorphicValue.regular(total + near + complex(far))


_LOCAL_WIDTH = 0.125


def _taylor(p: Chebyshev, q: int) -> complex:
    return complex(p.deriv(q)(0.0)) / math.factorial(q) if q else complex(p(0.0))


def interval_identity(t, ell: int):
    """sum_q C(ell, q) (-4)^q (t(1-t))^q, which equals (2t-1)^(2 ell)."""
    t = np.asarray(t, dtype=float)
    u = t * (1.0 - t)
    return sum(math.comb(ell, q) * (-4.0) ** q * u**q for q in range(ell + 1))
