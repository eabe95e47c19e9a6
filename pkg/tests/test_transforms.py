import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from phgradon.coefficients import weight_from_name
from phgradon.profiles import GeometricGrid, ProfileSamples
from phgradon.transforms import (
    Backprojected,
    PhgComponentBall,
    PhgComponentCyl,
    b_kernel,
    backproject,
    boundary_profile,
    normal,
    radon,
    radon_batch,
    weighted_normal,
)


def _ones(n, gamma=0.0):
    return PhgComponentBall(weight_from_name("const", n), gamma, 0, cutoff=None)


# -- Radon transform --------------------------------------------------------------


def test_radon_of_one_is_the_chord_length():
    assert radon(_ones(2), 0.6, [1.0, 0.0]) == pytest.approx(1.6, rel=1e-13)


def test_radon_of_one_in_three_dimensions_is_the_disk_area():
    assert radon(_ones(3), 0.0, [0.0, 0.0, 1.0]) == pytest.approx(math.pi, rel=1e-13)


@pytest.mark.parametrize("s", [0.0, 0.5, -0.9, 0.999])
def test_radon_of_rho(s):
    got = radon(_ones(2, 1.0), s, [0.6, 0.8])
    assert got == pytest.approx(4 / 3 * (1 - s * s) ** 1.5, rel=1e-12)


def test_radon_accepts_an_accurate_sigma():
    # sigma = 1 - s^2 would be lost to round-off this close to the boundary
    s, sigma = 1 - 1e-14, 2e-14 - 1e-28
    got = radon(_ones(2), s, [1.0, 0.0], sigma=sigma)
    assert got == pytest.approx(2 * math.sqrt(sigma), rel=1e-12)


def _chord_oracle(u, s, theta):
    """Ru(s, theta) in n = 2 by mpmath along the chord s theta + t theta_perp."""
    theta = np.asarray(theta, dtype=float)
    perp = np.array([-theta[1], theta[0]])
    half = math.sqrt(1 - s * s)

    def f(phi):
        # t = half sin(phi): rho = half^2 cos^2(phi) keeps full relative accuracy at the ends
        c = mpmath.cos(phi)
        rho = float(half**2 * c * c)
        if rho <= 0:
            return 0j
        x = s * theta + float(half * mpmath.sin(phi)) * perp
        return complex(u.profile(rho) * u.weight(x / np.linalg.norm(x))) * half * float(c)

    with mpmath.workdps(20):
        return complex(mpmath.quad(f, [-mpmath.pi / 2, 0, mpmath.pi / 2]))


@pytest.mark.parametrize("weight, gamma, ell", [("linear:1", 0.5, 0), ("quadratic:12", 0.0, 1), ("linear:2", -0.5, 2)])
@pytest.mark.parametrize("s", [0.2, 0.8])
def test_radon_against_chord_quadrature(weight, gamma, ell, s):
    u = PhgComponentBall(weight_from_name(weight, 2), gamma, ell)
    theta = np.array([0.6, 0.8])
    assert radon(u, s, theta) == pytest.approx(_chord_oracle(u, s, theta), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("weight, n", [("linear:1", 2), ("quadratic:12", 3), ("harmonic:2,1", 3)])
def test_radon_is_even_on_the_cylinder(weight, n, rng):
    u = PhgComponentBall(weight_from_name(weight, n), 0.5, 1)
    theta = rng.standard_normal(n)
    theta /= np.linalg.norm(theta)
    assert radon(u, 0.4, theta) == pytest.approx(radon(u, -0.4, -theta), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("weight, n", [("linear:1", 2), ("quadratic:12", 3)])
def test_radon_is_stable_under_quadrature_refinement(weight, n):
    u = PhgComponentBall(weight_from_name(weight, n), 0.5 + 0.3j, 1)
    s = np.array([0.1, 0.6, 0.95])
    theta = np.ones(n) / math.sqrt(n)
    base = radon_batch(u, s, theta, tol=1e-12)
    finer = radon_batch(u, s, theta, tol=1e-13, psi_nodes=128)
    assert np.max(np.abs(base - finer) / np.abs(finer)) <= 1e-12


def test_radon_batch_matches_single_calls():
    u = PhgComponentBall(weight_from_name("linear:1", 2), 0.5, 0)
    s = np.array([0.1, 0.5, 0.9])
    theta = np.array([0.6, 0.8])
    batch = radon_batch(u, s, theta)
    assert batch == pytest.approx([radon(u, x, theta) for x in s], rel=1e-13)


def test_radon_preconditions():
    with pytest.raises(ValueError):
        radon(_ones(2), 1.0, [1.0, 0.0])
    with pytest.raises(ValueError, match="tolerance"):
        radon_batch(_ones(2), [0.1], [1.0, 0.0], tol=1e-15)
    with pytest.raises(ValueError, match="non-integrable"):
        PhgComponentBall(weight_from_name("const", 2), -1.0)
    with pytest.raises(ValueError, match="constant weight"):
        PhgComponentBall(weight_from_name("linear:1", 2), cutoff=None)


# -- backprojection ------------------------------------------------------------------


def _cyl(func):
    return lambda s, sigma, theta: func(s, theta).astype(complex)


def test_backprojection_of_one_is_the_sphere_area():
    v = _cyl(lambda s, theta: np.ones_like(s))
    assert backproject(v, [0.3, -0.4]) == pytest.approx(2 * math.pi, rel=1e-12)
    assert backproject(v, [0.1, 0.2, 0.3]) == pytest.approx(4 * math.pi, rel=1e-12)


@pytest.mark.parametrize("x", [[0.3, -0.4], [0.1, 0.5, -0.2]])
def test_backprojection_of_s_vanishes(x):
    v = _cyl(lambda s, theta: s)
    assert abs(backproject(v, x)) < 1e-13


@pytest.mark.parametrize("x", [[0.3, -0.4], [0.0, 0.999]])
def test_backprojection_of_s_squared(x):
    v = _cyl(lambda s, theta: s * s)
    assert backproject(v, x) == pytest.approx(math.pi * float(np.dot(x, x)), rel=1e-11)


def test_backprojection_accepts_cylinder_components():
    v = PhgComponentCyl(weight_from_name("const", 2), 0.0, 0, cutoff=None)
    assert backproject(v, [0.2, 0.2]) == pytest.approx(2 * math.pi, rel=1e-12)


def test_backprojection_point_must_be_interior():
    with pytest.raises(ValueError):
        backproject(_cyl(lambda s, theta: s), [1.0, 0.0])


def test_duality_between_radon_and_backprojection():
    """<R u, v> on the cylinder equals <u, R* v> on the disk; both are pi^2 / 6 here."""
    u = _ones(2, 1.0)
    v = _cyl(lambda s, theta: s * s)
    # u and R* v are radial, so both sides reduce to one-dimensional integrals
    left = 2 * math.pi * quad(lambda s: radon(u, s, [1.0, 0.0]).real * s * s, -1, 1, epsabs=1e-14, limit=200)[0]
    back = Backprojected(v)
    right = 2 * math.pi * quad(lambda r: (1 - r * r) * back([r, 0.0]).real * r, 0, 1, epsabs=1e-14)[0]
    assert left == pytest.approx(right, rel=1e-10)
    assert left == pytest.approx(math.pi**2 / 6, rel=1e-10)


# -- normal operators ----------------------------------------------------------------


@pytest.mark.parametrize("n, value", [(2, 4 * math.pi), (3, 4 * math.pi**2)])
def test_normal_operator_at_the_centre(n, value):
    assert normal(_ones(n), np.zeros(n)) == pytest.approx(value, rel=1e-10)


@pytest.mark.parametrize("n, value", [(2, 4 * math.pi), (3, 4 * math.pi**2)])
def test_weighted_normal_operator_at_the_centre(n, value):
    assert weighted_normal(_ones(n), 0, np.zeros(n)) == pytest.approx(value, rel=1e-10)


def test_weighted_normal_operator_rejects_negative_weights():
    with pytest.raises(ValueError):
        weighted_normal(_ones(2), -0.5, np.zeros(2))


# -- profiles ---------------------------------------------------------------------------


def test_boundary_profile_of_constant_and_of_rho():
    grid = GeometricGrid(1e-2, 0.5, 6)
    flat = boundary_profile(lambda x: 3.0, [0.0, 1.0], grid)
    assert np.allclose(flat.values, 3.0)
    rho = boundary_profile(lambda x: 1 - float(np.dot(x, x)), [1.0, 1.0], grid)
    assert rho.values.real == pytest.approx(grid.points(), rel=1e-12)


def test_boundary_profile_grid_must_stay_near_the_boundary():
    with pytest.raises(ValueError):
        boundary_profile(lambda x: 1.0, [1.0, 0.0], np.array([0.7]))


def test_profile_threads_give_identical_samples(monkeypatch):
    v = PhgComponentCyl(weight_from_name("const", 2), 0.0, 1)
    grid = GeometricGrid(1e-2, 0.6, 6)
    serial = boundary_profile(Backprojected(v), [1.0, 0.0], grid)
    monkeypatch.setenv("PHGRADON_THREADS", "3")
    threaded = boundary_profile(Backprojected(v), [1.0, 0.0], grid)
    assert np.array_equal(serial.values, threaded.values)


def test_samples_csv_round_trip():
    samples = ProfileSamples([0.1, 0.01], [1 + 2j, 3.0])
    lines = samples.to_csv().splitlines()
    assert lines[0] == "rho,re_value,im_value,est_error"
    assert [float(x) for x in lines[1].split(",")] == [0.1, 1.0, 2.0, 0.0]


# -- pairing kernel ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "weight, n, s", [("const", 2, 0.5), ("linear:1", 2, -0.7), ("const", 3, 0.3), ("quadratic:12", 3, 0.9)]
)
@pytest.mark.parametrize("z", [0.6, 1.5 + 0.5j])
def test_kernel_continuation_agrees_with_the_direct_integral(weight, n, s, z):
    h = weight_from_name(weight, n)
    theta = np.ones(n) / math.sqrt(n)
    direct = b_kernel(h, s, theta, z, method="direct").value
    continued = b_kernel(h, s, theta, z, method="continued").value
    assert continued == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_kernel_has_poles_only_on_the_lattice():
    h = weight_from_name("const", 2)
    theta = np.array([1.0, 0.0])
    assert b_kernel(h, 0.5, theta, 0).pole_flag
    assert b_kernel(h, 0.5, theta, -1).pole_flag
    assert not b_kernel(h, 0.5, theta, -0.5).pole_flag
