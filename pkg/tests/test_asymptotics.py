import math

import mpmath
import numpy as np
import pytest

from phgradon._numerics import DEFAULT_CUTOFF
from phgradon.asymptotics import (
    ExpansionModel,
    IllConditionedModel,
    ProbeInconclusive,
    detect_presence,
    fit_expansion,
    fit_leading_exponent,
    laurent_ring,
    leading_log_power,
    mellin_of_term,
    mellin_probe,
    pairing_decomposition,
    pairing_probe,
)
from phgradon.coefficients import weight_from_name
from phgradon.index_calculus import generate
from phgradon.profiles import GeometricGrid, ProfileSamples
from phgradon.transforms import PhgComponentCyl

GRID = GeometricGrid(1e-2, 0.8, 40)


def _samples(f):
    return ProfileSamples.from_function(f, GRID)


# -- models and fits -------------------------------------------------------------


def test_model_terms_are_sorted_and_deduplicated():
    model = ExpansionModel.of([(1, 0), (0.5, 1), (0.5, 0)])
    assert [t[1] for t in model.terms] == [0, 1, 0]
    with pytest.raises(ValueError, match="duplicate"):
        ExpansionModel.of([(0, 0), (0, 0)])
    with pytest.raises(ValueError):
        ExpansionModel.of([(0, -1)])


def test_model_from_index_set():
    model = ExpansionModel.from_index_set(generate([(0.5, 1)]), 2.0)
    assert len(model) == 4
    assert model.index_of((1.5, 1)) == 3


def test_fit_recovers_an_exact_expansion():
    f = lambda r: 2 + 3 * np.sqrt(r) * np.log(r) - r
    model = ExpansionModel.of([(0, 0), (0.5, 0), (0.5, 1), (1, 0)])
    fit = fit_expansion(_samples(f), model)
    assert fit.coefficient((0, 0)) == pytest.approx(2, abs=1e-10)
    assert fit.coefficient((0.5, 1)) == pytest.approx(3, abs=1e-10)
    assert fit.coefficient((1, 0)) == pytest.approx(-1, abs=1e-8)
    assert abs(fit.coefficient((0.5, 0))) < 1e-9
    assert fit.noise_floor and fit.reliable


def test_fit_with_a_missing_term_is_flagged_unreliable():
    # the least-squares error spreads over the grid instead of decaying like rho^(1/2)
    fit = fit_expansion(_samples(lambda r: 1 + np.sqrt(r)), ExpansionModel.of([(0, 0), (1, 0)]))
    assert not fit.noise_floor
    assert not fit.reliable


def test_nearly_dependent_columns_are_refused():
    with pytest.raises(IllConditionedModel):
        fit_expansion(_samples(np.ones_like), ExpansionModel.of([(j * 1e-3, 0) for j in range(5)]))


def test_small_grids_are_refused():
    samples = ProfileSamples.from_function(np.ones_like, GeometricGrid(1e-2, 0.5, 3))
    with pytest.raises(ValueError, match="too small"):
        fit_expansion(samples, ExpansionModel.of([(0, 0), (1, 0)]))


# -- presence, exponents and log powers ---------------------------------------------------


def test_presence_of_a_genuine_term():
    samples = _samples(lambda r: 1 + 1e-3 * np.sqrt(r) + r)
    present, coef = detect_presence(samples, ExpansionModel.of([(0, 0), (1, 0), (2, 0)]), (0.5, 0))
    assert present
    assert coef == pytest.approx(1e-3, rel=1e-6)


def test_absence_of_a_missing_term():
    samples = _samples(lambda r: 1 + r + r * r)
    present, coef = detect_presence(samples, ExpansionModel.of([(0, 0), (1, 0), (2, 0)]), (0.5, 0))
    assert not present
    assert abs(coef) < 1e-10


def test_presence_probe_must_be_new():
    with pytest.raises(ValueError):
        detect_presence(_samples(np.ones_like), ExpansionModel.of([(0, 0)]), (0, 0))


@pytest.mark.parametrize("exponent, logs", [(0.37, 0), (-0.25, 1), (1.2, 0)])
def test_leading_exponent(exponent, logs):
    f = lambda r: r**exponent * np.log(r) ** logs * (1 + r)
    assert fit_leading_exponent(_samples(f), exponent - 0.1, logs) == pytest.approx(exponent, abs=1e-6)


@pytest.mark.parametrize("logs", [0, 1, 2, 3])
def test_leading_log_power(logs):
    f = lambda r: 1 + 0.5 * np.sqrt(r) * np.log(r) ** logs + r
    k, coef = leading_log_power(_samples(f), 0.5, ExpansionModel.of([(0, 0), (1, 0), (1, 1)]))
    assert k == logs
    assert coef == pytest.approx(0.5, rel=1e-6)


def test_leading_log_power_of_an_absent_exponent():
    k, coef = leading_log_power(_samples(lambda r: 1 + r), 0.5, ExpansionModel.of([(0, 0), (1, 0), (1, 1)]))
    assert k == -1
    assert abs(coef) < 1e-10


def test_leading_log_power_background_must_skip_the_exponent():
    with pytest.raises(ValueError):
        leading_log_power(_samples(np.ones_like), 0, ExpansionModel.of([(0, 0)]))


# -- Laurent data ----------------------------------------------------------------


def test_laurent_ring_on_a_known_function():
    g = lambda z: 3 / (z - 1) ** 2 + 2 / (z - 1) + np.exp(z)
    probe = laurent_ring(g, 1.0, 0.3)
    assert probe.est_order == 2
    assert probe.est_leading == pytest.approx(3, rel=1e-12)
    assert probe.laurent[-1] == pytest.approx(2, rel=1e-12)
    assert probe.laurent[0] == pytest.approx(math.e, rel=1e-12)
    assert probe.laurent[3] == pytest.approx(math.e / 6, rel=1e-10)


def test_laurent_ring_of_a_regular_point():
    probe = laurent_ring(np.cos, 0.2, 0.3)
    assert probe.est_order == 0
    assert probe.est_leading == pytest.approx(math.cos(0.2), rel=1e-13)


def test_laurent_ring_enclosing_a_far_pole_is_inconclusive():
    with pytest.raises(ProbeInconclusive):
        laurent_ring(lambda z: 1 / (z - 0.29), 0.0, 0.3, nodes=16)


def _mellin_oracle(w, k, cutoff=DEFAULT_CUTOFF):
    def f(x):
        x = float(x)
        return complex(cutoff(x)) * complex(x) ** (w - 1) * math.log(x) ** k

    with mpmath.workdps(25):
        return complex(mpmath.quad(f, [0, cutoff.plateau_end, cutoff.support_end]))


@pytest.mark.parametrize("w, k", [(0.7, 0), (0.7, 2), (1.5 + 0.5j, 1), (3.0, 3)])
def test_mellin_of_term_against_quadrature(w, k):
    assert mellin_of_term(w, k) == pytest.approx(_mellin_oracle(w, k), rel=1e-11)


def test_mellin_of_term_continues_below_zero():
    # the continuation differs from (-1)^k k! / w^(k+1) by an entire function of w
    gap = [mellin_of_term(w, 1) - 1 / w**2 * -1 for w in (-0.5, -0.49)]
    assert abs(gap[0] - gap[1]) < 0.1


@pytest.mark.parametrize("logs", [0, 1, 2])
def test_mellin_probe_reads_the_pole_of_a_log_power(logs):
    # int chi rho^(z - 1) rho^(1/2) log^k rho has a pole of order k + 1 at z = -1/2 with (-1)^k k!
    f = lambda r: np.sqrt(r) * np.log(r) ** logs
    probe = mellin_probe(f, -0.5)
    assert probe.est_order == logs + 1
    assert probe.est_leading == pytest.approx((-1) ** logs * math.factorial(logs), abs=1e-8)


def test_mellin_probe_without_a_term_at_the_probed_exponent():
    # the profile only carries exponents 3/2 and 5/2, so mu is regular at -1/2
    probe = mellin_probe(lambda r: r**1.5 - 2 * r**2.5, -0.5)
    assert probe.est_order == 0


def test_probe_json_lists_the_laurent_data():
    data = mellin_probe(lambda r: np.sqrt(r), -0.5).to_json()
    assert data["est_order"] == 1
    assert set(data["laurent"]) >= {"-1", "0", "1"}


# -- pairing ------------------------------------------------------------------------------


@pytest.mark.parametrize("z", [2.0, 0.5 + 0.2j])
@pytest.mark.parametrize("gamma, ell", [(0.0, 1), (0.5, 0)])
def test_pairing_routes_agree(z, gamma, ell):
    h = weight_from_name("const", 2)
    u = PhgComponentCyl(h, gamma, ell)
    out = pairing_decomposition(u, h, z, m=1)
    assert out.decomposed == pytest.approx(out.direct, rel=1e-12, abs=1e-13)


def test_pairing_decomposition_preconditions():
    h = weight_from_name("const", 2)
    with pytest.raises(ValueError, match="raise m"):
        pairing_decomposition(PhgComponentCyl(h, 0.0, 1), h, -1.6, m=1, branch="decomposed")
    with pytest.raises(ValueError, match="cutoff"):
        pairing_decomposition(PhgComponentCyl(h, 0.0, 1, cutoff=None), h, 0.5, branch="decomposed")


@pytest.mark.slow
def test_pairing_has_a_simple_pole_at_minus_one_half():
    """Residue = 1/2 * (leading Mellin coefficient -1) * (slope of the averaged kernel at sigma = 0).

    For n = 2 the boundary kernel is Gamma(1/2) Gamma(z) / Gamma(z + 1/2); it
    vanishes linearly at z = -1/2 with slope Gamma(1/2) Gamma(-1/2), and the
    average over the circle multiplies that by 2 pi.
    """
    h = weight_from_name("const", 2)
    slope = 2 * math.pi * math.gamma(0.5) * math.gamma(-0.5)
    residue = 0.5 * -1 * slope
    probe = pairing_probe(PhgComponentCyl(h, 0.0, 1), h, -0.5)
    assert probe.est_order == 1
    assert probe.est_leading == pytest.approx(residue, rel=1e-6)


# -- profiles ----------------------------------------------------------------------------


@pytest.mark.parametrize("kwargs", [{"ratio": 1.0}, {"rho0": 0.6}, {"count": 1}])
def test_bad_grids(kwargs):
    with pytest.raises(ValueError):
        GeometricGrid(**kwargs)


def test_grid_points_are_geometric():
    assert GeometricGrid(0.5, 0.5, 3).points() == pytest.approx([0.5, 0.25, 0.125])
