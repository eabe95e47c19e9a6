"""Expansion fitting and Mellin pole probing for sampled boundary profiles.

A profile f(rho) sampled on a geometric grid toward rho = 0 is fitted by
least squares against a finite model sum_i c_i rho^{e_i} log^{k_i}(rho).
Presence of a single term is decided by comparing the fit with and without
it.  Mellin probes continue mu(z) = int_0^1 chi(rho) rho^{z-1} f(rho) drho to a
small circle around a candidate pole and read the Laurent coefficients off a
discrete Fourier transform on that circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.optimize import minimize_scalar

from ._numerics import DEFAULT_CUTOFF, CutoffSpec, adaptive_gauss, sphere_rule, sphere_volume, tanh_sinh
from .coefficients import BoundaryWeight
from .index_calculus import IndexSet
from .profiles import GeometricGrid, ProfileSamples
from .transforms import PhgComponentBall, PhgComponentCyl, b_kernel, radon_batch

__all__ = [
    "GeometricGrid",
    "ProfileSamples",
    "ExpansionModel",
    "ExpansionFit",
    "IllConditionedModel",
    "ProbeInconclusive",
    "fit_expansion",
    "detect_presence",
    "fit_leading_exponent",
    "leading_log_power",
    "MellinProbe",
    "mellin_probe",
    "laurent_ring",
    "PairingValues",
    "pairing_decomposition",
    "pairing_probe",
    "mellin_of_term",
    "kernel_scan",
]

CONDITION_LIMIT = 1e10


class IllConditionedModel(ValueError):
    """The scaled design matrix is too ill-conditioned; coarsen the model."""


class ProbeInconclusive(RuntimeError):
    """A Mellin ring fit could not separate the Laurent coefficients."""


# --------------------------------------------------------------------------
# models and fits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionModel:
    terms: tuple[tuple[complex, int], ...]

    def __post_init__(self):
        cleaned = []
        for e, k in self.terms:
            if k < 0:
                raise ValueError("log powers must be non-negative")
            e = complex(e)
            if any(abs(e - f) <= 1e-9 and k == j for f, j in cleaned):
                raise ValueError(f"duplicate model term ({e}, {k})")
            cleaned.append((e, int(k)))
        cleaned.sort(key=lambda t: (t[0].real, t[0].imag, t[1]))
        object.__setattr__(self, "terms", tuple(cleaned))

    @classmethod
    def of(cls, terms: Iterable[tuple]) -> "ExpansionModel":
        return cls(tuple((complex(e), int(k)) for e, k in terms))

    @classmethod
    def from_index_set(cls, index_set: IndexSet, t_max: float) -> "ExpansionModel":
        return cls.of((complex(i.gamma), i.k) for i in index_set.members_below(t_max))

    def with_term(self, term) -> "ExpansionModel":
        return ExpansionModel.of(list(self.terms) + [(complex(term[0]), int(term[1]))])

    def without(self, term) -> "ExpansionModel":
        e, k = complex(term[0]), int(term[1])
        return ExpansionModel.of(t for t in self.terms if not (abs(t[0] - e) <= 1e-9 and t[1] == k))

    def index_of(self, term) -> int:
        e, k = complex(term[0]), int(term[1])
        for i, (f, j) in enumerate(self.terms):
            if abs(f - e) <= 1e-9 and j == k:
                return i
        raise KeyError(term)

    def __len__(self):
        return len(self.terms)

    def design(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        log_rho = np.log(rho)
        cols = [np.exp(e * log_rho) * log_rho**k for e, k in self.terms]
        return np.stack(cols, axis=1).astype(complex)

    def evaluate(self, coefficients, rho) -> np.ndarray:
        return self.design(rho) @ np.asarray(coefficients, dtype=complex)

    def to_json(self) -> list:
        return [[e.real, e.imag, k] for e, k in self.terms]


@dataclass
class ExpansionFit:
    model: ExpansionModel
    coefficients: np.ndarray
    stderr: np.ndarray
    residual_order: float
    condition: float
    residual_rms: float
    noise_floor: bool
    reliable: bool

    def coefficient(self, term) -> complex:
        return complex(self.coefficients[self.model.index_of(term)])

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coefficients],
            "stderr": [float(s) for s in self.stderr],
            "residual_order": None if math.isinf(self.residual_order) else float(self.residual_order),
            "residual_at_noise_floor": self.noise_floor,
            "condition": float(self.condition),
            "reliable": self.reliable,
        }


def _noise_level(samples: ProfileSamples) -> float:
    scale = float(np.max(np.abs(samples.values))) if samples.values.size else 0.0
    return max(256 * np.finfo(float).eps * scale, 10 * float(np.max(samples.errors, initial=0.0)), 1e-300)


def fit_expansion(samples: ProfileSamples, model: ExpansionModel) -> ExpansionFit:
    """Least-squares fit of the profile against the model terms.

    Columns are scaled to unit sup-norm before solving; coefficients are
    returned in the original scale.  ``residual_order`` is the slope of
    log|residual| against log(rho) over the finest third of the grid, or
    infinity when those residuals are indistinguishable from round-off.
    """
    rho = samples.rho
    m = len(model)
    if rho.size < 2 * m:
        raise ValueError(f"grid of {rho.size} points is too small for a {m}-term model")
    design = model.design(rho)
    scale = np.max(np.abs(design), axis=0)
    scaled = design / scale
    sv = np.linalg.svd(scaled, compute_uv=False)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if condition > CONDITION_LIMIT:
        raise IllConditionedModel(f"ill-conditioned model: condition {condition:.3e} exceeds {CONDITION_LIMIT:.0e}")
    coef_scaled, *_ = np.linalg.lstsq(scaled, samples.values, rcond=None)
    residual = samples.values - scaled @ coef_scaled
    dof = max(rho.size - m, 1)
    rms = float(np.sqrt(np.sum(np.abs(residual) ** 2) / dof))
    floor = _noise_level(samples)
    sigma_hat = max(rms, floor / 10)
    gram_inv = np.linalg.pinv(scaled.conj().T @ scaled)
    stderr = sigma_hat * np.sqrt(np.abs(np.diag(gram_inv))) / scale
    coefficients = coef_scaled / scale

    order_idx = np.argsort(rho)[: max(3, rho.size // 3)]
    fine = np.abs(residual[order_idx])
    noise = bool(np.all(fine <= floor))
    if noise:
        slope = math.inf
    else:
        keep = fine > 0
        x = np.log(rho[order_idx][keep])
        y = np.log(fine[keep])
        slope = float(np.polyfit(x, y, 1)[0]) if keep.sum() >= 2 else math.inf
    top = max(e.real for e, _ in model.terms)
    reliable = slope >= top - 0.5
    return ExpansionFit(model, coefficients, stderr, slope, condition, rms, noise, reliable)


def detect_presence(
    samples: ProfileSamples,
    base_model: ExpansionModel,
    probe_term,
    *,
    improvement: float = 1e3,
    significance: float = 10.0,
) -> tuple[bool, complex]:
    """Decide whether ``probe_term`` is needed on top of ``base_model``.

    Present means the residual improves by at least ``improvement`` when the
    term is added and its coefficient exceeds ``significance`` standard errors.
    The fitted coefficient is returned in both cases.
    """
    term = (complex(probe_term[0]), int(probe_term[1]))
    try:
        base_model.index_of(term)
    except KeyError:
        pass
    else:
        raise ValueError("probe term already belongs to the base model")
    base = fit_expansion(samples, base_model)
    extended_model = base_model.with_term(term)
    extended = fit_expansion(samples, extended_model)
    i = extended_model.index_of(term)
    coef = complex(extended.coefficients[i])
    floor = _noise_level(samples)
    ratio = max(base.residual_rms, floor) / max(extended.residual_rms, floor)
    present = ratio >= improvement and abs(coef) > significance * extended.stderr[i]
    return bool(present), coef


def _shifted_model(exponent: complex, logs: int, extra_orders: int, extra_logs: int) -> ExpansionModel:
    terms = [(exponent, k) for k in range(logs + 1)]
    terms += [(exponent + j, k) for j in range(1, extra_orders + 1) for k in range(extra_logs + 1)]
    return ExpansionModel.of(terms)


def fit_leading_exponent(
    samples: ProfileSamples,
    guess: float,
    logs: int = 0,
    *,
    half_width: float = 0.2,
    extra_orders: int = 2,
    tol: float = 1e-9,
    scan_points: int = 41,
) -> float:
    """Real leading exponent e of the profile, found by variable projection.

    For each trial e the linear fit against rho^{e+j} log^k(rho) (k <= logs at
    j = 0, and the same log range for j = 1..extra_orders) is solved, and the
    residual is minimised over e in [guess - half_width, guess + half_width]:
    first on ``scan_points`` equally spaced trials, then by bounded Brent
    iteration between the neighbours of the best trial.
    """
    def residual(e):
        model = _shifted_model(e, logs, extra_orders, logs)
        try:
            fit = fit_expansion(samples, model)
        except IllConditionedModel:
            return math.inf
        return math.log(max(fit.residual_rms, 1e-300))

    # with log terms a wrong exponent can mimic part of the profile, so the
    # residual has side minima; a coarse scan picks the basin before Brent
    trial = np.linspace(guess - half_width, guess + half_width, scan_points)
    values = [residual(e) for e in trial]
    best = int(np.argmin(values))
    step = trial[1] - trial[0]
    low, high = max(trial[0], trial[best] - step), min(trial[-1], trial[best] + step)
    res = minimize_scalar(residual, bounds=(low, high), method="bounded", options={"xatol": tol})
    return float(res.x)


def leading_log_power(
    samples: ProfileSamples,
    exponent,
    background: ExpansionModel,
    *,
    max_log: int = 3,
    improvement: float = 1e3,
    significance: float = 10.0,
) -> tuple[int, complex]:
    """Highest log power carried by the profile at ``exponent``.

    Works downward from ``max_log``: the answer is the first k for which
    (exponent, k) is detected on top of ``background`` plus the lower log
    powers 0..k-1 at the same exponent.  Returns -1 (and the coefficient of
    the plain power) when even rho^exponent is absent.  Log powers whose
    model is ill-conditioned are skipped.
    """
    e = complex(exponent)
    if any(abs(f - e) <= 1e-9 for f, _ in background.terms):
        raise ValueError("background model already contains the probed exponent")
    coef = 0j
    for k in range(max_log, -1, -1):
        model = ExpansionModel.of(list(background.terms) + [(e, j) for j in range(k)])
        try:
            present, coef = detect_presence(samples, model, (e, k), improvement=improvement, significance=significance)
        except IllConditionedModel:
            continue
        if present:
            return k, coef
    return -1, coef


# --------------------------------------------------------------------------
# Mellin probes
# --------------------------------------------------------------------------


@dataclass
class MellinProbe:
    z_center: complex
    radius: float
    ring_samples: list
    laurent: dict
    est_order: int
    est_leading: complex

    def to_json(self) -> dict:
        return {
            "z_center": [self.z_center.real, self.z_center.imag],
            "radius": self.radius,
            "est_order": self.est_order,
            "est_leading": [self.est_leading.real, self.est_leading.imag],
            "laurent": {str(k): [v.real, v.imag] for k, v in sorted(self.laurent.items())},
        }


def laurent_ring(
    func: Callable[[complex], complex],
    z_center: complex,
    radius: float,
    nodes: int = 32,
    *,
    rel_tol: float = 1e-8,
    significance: float = 1e-5,
    max_order: int = 6,
) -> MellinProbe:
    """Laurent coefficients of ``func`` at ``z_center`` from samples on a circle.

    The pole order is the largest m whose Fourier mode c_{-m} r^{-m} exceeds
    ``significance`` times the largest ring value.  If the modes
    near the Nyquist index are not negligible the ring is too coarse (or
    encloses another pole) and the probe is inconclusive.
    """
    z_center = complex(z_center)
    angles = 2 * math.pi * np.arange(nodes) / nodes
    zs = z_center + radius * np.exp(1j * angles)
    vals = np.array([complex(func(z)) for z in zs])
    modes = np.fft.fft(vals) / nodes
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    alias = max(abs(modes[nodes // 2 + j]) for j in (-1, 0, 1))
    if alias > rel_tol * scale:
        raise ProbeInconclusive(f"probe inconclusive: aliased modes {alias / scale:.2e} of ring scale")
    laurent = {}
    for k in range(-max_order, max_order + 1):
        laurent[k] = complex(modes[k % nodes] / radius**k)
    order = 0
    for m in range(max_order, 0, -1):
        if abs(modes[(-m) % nodes]) > significance * scale:
            order = m
            break
    leading = laurent[-order] if order else laurent[0]
    return MellinProbe(z_center, radius, list(zip(zs.tolist(), vals.tolist())), laurent, order, leading)


def _partial_mellin(w: complex, k: int, upper: float) -> complex:
    """int_0^upper rho^{w-1} log^k(rho) drho in closed form."""
    log_u = math.log(upper)
    total = 0j
    for j in range(k + 1):
        total += (-1) ** j * math.factorial(k) / math.factorial(k - j) * log_u ** (k - j) / w ** (j + 1)
    return upper**w * total


def _tail_integral(func: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> complex:
    if b <= a:
        return 0j
    val, _ = adaptive_gauss(lambda x: np.asarray(func(x), dtype=complex), a, b, rtol=1e-14, max_panels=256)
    return complex(val)


def mellin_of_term(w: complex, k: int, cutoff: CutoffSpec = DEFAULT_CUTOFF) -> complex:
    """int_0^1 chi(rho) rho^{w-1} log^k(rho) drho, continued to all w != 0.

    Equals (-1)^k k!/w^{k+1} minus the smooth integral of (1-chi) over
    [plateau_end, 1].
    """
    w = complex(w)
    head = (-1) ** k * math.factorial(k) / w ** (k + 1)

    def tail(x):
        return (1.0 - cutoff(x)) * np.exp((w - 1.0) * np.log(x)) * np.log(x) ** k

    return head - _tail_integral(tail, cutoff.plateau_end, 1.0)


def _default_probe_model(exponent: complex) -> ExpansionModel:
    terms = [(exponent + j, k) for j in range(2) for k in range(4)]
    return ExpansionModel.of(terms + [(exponent + 2, 0), (exponent + 2, 1)])


def mellin_probe(
    f: Callable[[np.ndarray], np.ndarray],
    z_center: complex,
    radius: float = 0.25,
    nodes: int = 32,
    *,
    model: ExpansionModel | None = None,
    grid: GeometricGrid | None = None,
    cutoff: CutoffSpec = DEFAULT_CUTOFF,
    samples: ProfileSamples | None = None,
) -> MellinProbe:
    """Probe the pole of mu(z) = int_0^1 chi(rho) rho^{z-1} f(rho) drho at z_center.

    The profile is fitted on the grid against ``model`` (by default the
    exponents -z_center and -z_center+1 with log powers 0..3, plus
    -z_center+2 with log powers 0..1).  The
    model terms at exponent -z_center are peeled off with their exact Mellin
    transforms; the rest of the model stands in for f below the top grid
    point, and f itself is integrated numerically above it.
    """
    z_center = complex(z_center)
    exponent = -z_center
    grid = grid or GeometricGrid()
    model = model or _default_probe_model(exponent)
    if samples is None:
        samples = ProfileSamples.from_function(f, grid)
    fit = fit_expansion(samples, model)
    split = float(np.max(samples.rho))
    if split >= cutoff.plateau_end:
        raise ValueError("profile grid must stay inside the cutoff plateau")
    peeled = [(e, k, c) for (e, k), c in zip(model.terms, fit.coefficients) if abs(e - exponent) <= 1e-9]
    background = [(e, k, c) for (e, k), c in zip(model.terms, fit.coefficients) if abs(e - exponent) > 1e-9]
    for e, _, _ in background:
        if (e - exponent).real <= radius:
            raise ValueError(f"model term with exponent {e} lies too close to the probed pole")

    def peeled_sum(x):
        x = np.asarray(x, dtype=float)
        lx = np.log(x)
        return sum(c * np.exp(e * lx) * lx**k for e, k, c in peeled) if peeled else np.zeros_like(x, dtype=complex)

    def mu(z):
        total = sum(c * mellin_of_term(z + e, k, cutoff) for e, k, c in peeled)
        total += sum(c * _partial_mellin(z + e, k, split) for e, k, c in background)

        def upper(x):
            return cutoff(x) * np.exp((z - 1.0) * np.log(x)) * (np.asarray(f(x), dtype=complex) - peeled_sum(x))

        total += _tail_integral(upper, split, cutoff.plateau_end)
        total += _tail_integral(upper, cutoff.plateau_end, cutoff.support_end)
        return total

    return laurent_ring(mu, z_center, radius, nodes)


# --------------------------------------------------------------------------
# pairing with the backprojection of a cylinder component
# --------------------------------------------------------------------------


@dataclass
class PairingValues:
    z: complex
    direct: complex | None
    decomposed: complex
    remainder: complex
    terms: list = field(default_factory=list)

    def to_json(self) -> dict:
        def pair(c):
            return None if c is None else [c.real, c.imag]

        return {
            "z": pair(self.z),
            "direct": pair(self.direct),
            "decomposed": pair(self.decomposed),
            "remainder": pair(self.remainder),
        }




class _KernelAverage:
    """K(sigma; z) = int a(theta) B(s(sigma), theta; z) dtheta, on the component's side."""

    def __init__(self, u: PhgComponentCyl, h: BoundaryWeight, z: complex, cutoff: CutoffSpec, sphere_size: int):
        self.u, self.h, self.z, self.cutoff = u, h, complex(z), cutoff
        n = u.n
        if u.weight.constant is not None and h.constant is not None:
            self.points = np.eye(n)[:1]
            self.weights = np.array([u.weight.constant * sphere_volume(n - 1)])
        else:
            pts, w = sphere_rule(n, sphere_size)
            self.points = pts
            self.weights = w * u.weight(pts)

    def __call__(self, sigma: float, s: float | None = None) -> complex:
        if s is None:
            s = self.u.side * math.sqrt(1.0 - sigma)
        total = 0j
        direct = self.z.real > 0.25
        if direct:
            comp = PhgComponentBall(self.h, 0.0, 0, self.cutoff)
            m = len(self.points)
            vals = radon_batch(
                comp, np.full(m, s), self.points, sigma=np.full(m, sigma), reduced=True, fiber_exponent=self.z - 1.0
            )
            return complex(vals @ self.weights)
        for pt, w in zip(self.points, self.weights):
            if w == 0:
                continue
            total += w * b_kernel(self.h, s, pt, self.z, sigma=sigma, cutoff=self.cutoff).finite()
        return total


def _sigma_of_distance(d: float) -> float:
    """sigma at which 1 - s reaches d on the side s > 0."""
    return 1.0 - (1.0 - d) ** 2


def _a1(w: complex, ell: int, tilde_chi, plateau: float) -> complex:
    """int_0^1 sigma^{w-1} log^ell(sigma) chi~(sigma) dsigma, continued in w.

    chi~ equals 1 below ``plateau``, so only the smooth piece above it needs
    quadrature.
    """
    head = (-1) ** ell * math.factorial(ell) / w ** (ell + 1)

    def tail(x):
        return (1.0 - tilde_chi(x)) * np.exp((w - 1.0) * np.log(x)) * np.log(x) ** ell

    return head - _tail_integral(tail, plateau, 1.0)


def pairing_decomposition(
    u: PhgComponentCyl,
    h: BoundaryWeight,
    z,
    m: int = 1,
    *,
    cutoff: CutoffSpec = DEFAULT_CUTOFF,
    sphere_size: int = 16,
    branch: str = "both",
) -> PairingValues:
    """<h, mu_M>(z) for mu = R* u dx / rho, evaluated two ways.

    (i) ``direct``: the pairing integral over s with the kernel B, valid for
    Re z > max(0, -(n-1)/2 - Re gamma).
    (ii) ``decomposed``: (1/2) sum_{q<m} A1_q(z) A2_q(z) plus a remainder,
    where A2_q are the sigma-Taylor coefficients of the averaged kernel and
    A1_q are Mellin transforms of sigma^{w+q} log^ell(sigma) against chi~;
    this continues the pairing to Re z > -(n-1)/2 - Re gamma - m.
    """
    z = complex(z)
    n = u.n
    gamma = complex(u.gamma)
    ell = u.ell
    w = 0.5 * (n - 1) + z + gamma
    kernel = _KernelAverage(u, h, z, cutoff, sphere_size)

    def tilde_chi(x):
        x = np.asarray(x, dtype=float)
        return u.cutoff(x / (1.0 + np.sqrt(1.0 - x))) if u.cutoff is not None else np.ones_like(x)

    direct = None
    if branch in ("both", "direct"):
        if not (z.real > 0 and w.real > 0):
            if branch == "direct":
                raise ValueError("direct pairing needs Re z > max(0, -(n-1)/2 - Re gamma)")
        else:
            direct = _pairing_direct(u, kernel, w, ell)
    if branch == "direct":
        return PairingValues(z, direct, direct, 0j)

    if (w + m).real <= 0:
        raise ValueError("decomposition needs Re(w) > -m; raise m")
    if u.cutoff is None:
        raise ValueError("decomposition needs a component with a cutoff")
    plateau = _sigma_of_distance(u.cutoff.plateau_end)
    top = _sigma_of_distance(u.cutoff.support_end)
    cheb = _kernel_interpolant(kernel, top)
    x = Chebyshev.identity(domain=[0, top])
    head = Chebyshev([0.0], domain=[0, top])
    a2 = []
    derivative = cheb
    for q in range(m):
        c = complex(derivative(0.0)) / math.factorial(q)
        a2.append(c)
        head = head + c * x**q
        derivative = derivative.deriv()
    rest = cheb - head
    if m:
        rest, _ = divmod(rest, x**m)
    terms = [0.5 * _a1(w + q, ell, tilde_chi, plateau) * a2[q] for q in range(m)]

    def integrand(t, left=None, right=None):
        lt = np.log(t if left is None else left)
        return rest(t) * np.exp((w + m - 1.0) * lt) * lt**ell * tilde_chi(t)

    near_val, _ = tanh_sinh(integrand, 0.0, min(plateau, top), rtol=1e-13, max_level=10)
    far_val = 0j
    if top > plateau:
        far_val, _ = adaptive_gauss(integrand, plateau, top, rtol=1e-13, start_panels=4, max_panels=256)
    remainder = 0.5 * (complex(near_val) + complex(far_val))
    return PairingValues(z, direct, sum(terms) + remainder, remainder, terms)


def _kernel_interpolant(kernel: _KernelAverage, top: float, tol: float = 1e-13, max_nodes: int = 256) -> Chebyshev:
    """Chebyshev interpolant of K(sigma) / sqrt(1 - sigma) on [0, top], nodes doubled until the tail is small."""
    count = 32
    while True:
        j = np.arange(count)
        nodes = 0.5 * top * (1 - np.cos((2 * j + 1) * math.pi / (2 * count)))
        vals = np.array([kernel(sg) / math.sqrt(1.0 - sg) for sg in nodes])
        cheb = Chebyshev.fit(nodes, vals, count - 1, domain=[0, top])
        coef = np.abs(cheb.coef)
        tail = coef[-max(4, count // 8):].max()
        if tail <= tol * max(coef.max(), 1e-300) or count >= max_nodes:
            return cheb
        count *= 2


def _pairing_direct(u: PhgComponentCyl, kernel: _KernelAverage, w: complex, ell: int) -> complex:
    """int_0^1 sigma^{w-1} log^ell(sigma) chi(1-s) K ds over the component's half line."""

    def plateau(s, left, right):
        dist = right  # 1 - s, exact
        sigma = dist * (2.0 - dist)
        kv = np.array([kernel(sg, u.side * ss) for sg, ss in zip(sigma, s)])
        ls = np.log(sigma)
        return np.exp((w - 1.0) * ls) * ls**ell * kv

    cut = u.cutoff or DEFAULT_CUTOFF
    lo = 1.0 - cut.plateau_end
    val, _ = tanh_sinh(plateau, lo, 1.0, rtol=1e-12, max_level=8)

    def transition(s):
        s = np.asarray(s, dtype=float)
        sigma = (1.0 - s) * (1.0 + s)
        kv = np.array([kernel(sg, u.side * ss) for sg, ss in zip(sigma, s)])
        ls = np.log(sigma)
        return np.exp((w - 1.0) * ls) * ls**ell * cut(1.0 - s) * kv

    mid, _ = adaptive_gauss(transition, 1.0 - cut.support_end, lo, rtol=1e-12, start_panels=2, max_panels=32)
    return complex(val) + complex(mid)


def pairing_probe(u: PhgComponentCyl, h: BoundaryWeight, z_center, radius: float = 0.025, nodes: int = 16, m: int = 1) -> MellinProbe:
    """Laurent data of the continued pairing around ``z_center``."""

    def value(z):
        return pairing_decomposition(u, h, z, m, branch="decomposed").decomposed

    return laurent_ring(value, z_center, radius, nodes, rel_tol=1e-7)


def kernel_scan(h: BoundaryWeight, s: float, theta, zs: Sequence[complex]) -> np.ndarray:
    """|B(s, theta; z)| over a list of z (infinity at detected poles)."""
    out = []
    for z in zs:
        val = b_kernel(h, s, theta, z)
        out.append(math.inf if val.pole_flag else abs(val.value))
    return np.array(out)

