import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from hkcollapse import gibbons_hawking as gh
from hkcollapse import ooguri_vafa as ov
from hkcollapse.errors import ConfigError, DomainError, PositivityError, SingularPointError

finite = dict(allow_nan=False, allow_infinity=False)
# 30-digit mpmath nsum of the paired lattice series at (u, |y|, eps) = (0.1, 0.3, 0.5)
V0_REF = 0.385953184111133781


def test_v0_lattice_frozen():
    assert ov.v0_lattice(0.1, 0.3, 0.5) == pytest.approx(V0_REF, abs=1e-14)
    assert float(ov.v0_bessel(0.1, 0.3, 0.5)) == pytest.approx(V0_REF, abs=1e-14)


@given(st.floats(-2, 2, **finite), st.floats(0.2, 0.9), st.floats(0, 6.3), st.sampled_from([0.05, 0.2, 0.5]))
def test_v0_periodic_and_symmetric(u, r, th, eps):
    y = r * np.exp(1j * th)
    a = ov.v0_lattice(u, y, eps)
    assert ov.v0_lattice(u + eps, y, eps) == pytest.approx(a, rel=1e-12, abs=1e-12)
    assert ov.v0_lattice(-u, y, eps) == pytest.approx(a, rel=1e-12, abs=1e-12)
    assert ov.v0_lattice(u, r, eps) == pytest.approx(a, rel=1e-12, abs=1e-12)


@given(st.floats(0, 1, **finite), st.floats(0.16, 0.9))
def test_lattice_vs_bessel(u, r):
    eps = 0.5
    assert ov.v0_lattice(u, r, eps) == pytest.approx(float(ov.v0_bessel(u, r, eps)), abs=1e-10)


def test_crossover_continuity():
    eps = 0.3
    r = eps / np.pi
    u = np.linspace(0, eps, 7)
    pot = ov.OVPotential(ov.OVConfig(eps, (0.0,)))
    inside = pot.value(u, np.full(7, r * (1 - 1e-12) + 0j))
    outside = pot.value(u, np.full(7, r * (1 + 1e-12) + 0j))
    assert np.max(np.abs(inside - outside)) < 1e-9


@pytest.mark.parametrize("m", [1, 2, 3])
def test_fourier_modes_by_quadrature(m):
    eps, r = 0.5, 0.2
    f = lambda u: ov.v0_lattice(u, r, eps) * math.cos(2 * math.pi * m * u / eps)
    c = 2 / eps * integrate.quad(f, 0, eps, limit=200, epsabs=1e-13)[0]
    from scipy.special import k0
    assert c == pytest.approx(k0(2 * math.pi * m * r / eps) / (math.pi * eps), rel=1e-8, abs=1e-13)


def test_fibre_mean():
    eps, r = 0.5, 0.2
    mean = integrate.quad(lambda u: ov.v0_lattice(u, r, eps), 0, eps, epsabs=1e-13)[0] / eps
    assert mean == pytest.approx(-math.log(r * r) / (4 * math.pi * eps), rel=1e-10)


def test_on_axis_closed_form():
    eps, u = 0.4, 0.13
    assert ov.v0_on_axis(u, eps) == pytest.approx(ov.v0_lattice(u, 1e-9, eps), rel=1e-9)
    with pytest.raises(SingularPointError):
        ov.v0_on_axis(2 * eps, eps)
    with pytest.raises(SingularPointError):
        ov.v0_lattice(eps, 0.0, eps)


def test_profile_constant():
    assert ov.profile_constant() == pytest.approx(-2.2318630313, abs=1e-10)


@pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.8])
def test_profile_matches_axis_value(s):
    eps = 0.3
    ref = 4 * math.pi * eps * ov.v0_on_axis(s * eps, eps)
    assert ov.singular_fibre_profile(s, eps) == pytest.approx(ref, abs=1e-8)


def test_profile_domain():
    with pytest.raises(DomainError):
        ov.singular_fibre_profile(1.0, 0.3)


@pytest.mark.parametrize("u,y", [(0.03, 0.5 + 0.2j), (0.01, 0.02j), (0.07, 0.0)])
def test_rescaled_identity(u, y):
    cfg = ov.OVConfig(0.1, (1.0, 0.3j))
    assert ov.rescaled_identity_error(u, y, cfg) < 1e-9


def test_period_monodromy_and_anchor():
    cfg = ov.OVConfig(0.2, (0.0,))
    _, t = ov.ov_periods(math.exp(-2 * math.pi), cfg)
    assert t.imag == pytest.approx(1.0, abs=1e-14)
    _, above = ov.ov_periods(-0.5 + 1e-12j, cfg)
    _, below = ov.ov_periods(-0.5 - 1e-12j, cfg)
    assert abs(above - below) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("y", [0.5, 0.5 + 0.3j, -0.2 + 0.6j])
def test_period_by_quadrature(y):
    cfg = ov.OVConfig(0.1, (1.0, 0.2 + 0.1j))
    _, t2 = ov.ov_periods(y, cfg)
    assert ov.period_by_quadrature(y, cfg) == pytest.approx(t2, abs=1e-7)


def test_positivity_error():
    with pytest.raises(PositivityError):
        ov.check_positivity(ov.OVConfig(5.0, (0.0,)))
    assert ov.check_positivity(ov.OVConfig(0.1, (1.0,))) > 0


def test_positivity_threshold_bracket():
    e = ov.positivity_threshold((0.0,), 0.9)
    assert 0 < e < 5
    assert ov.boundary_minimum(ov.OVConfig(0.9 * e, (0.0,)))[0] > 0


def test_config_rejects_bad_input():
    with pytest.raises(ConfigError):
        ov.OVConfig(-1.0)
    with pytest.raises(ConfigError):
        ov.OVConfig(0.1, (-1.0,))


def test_potential_is_harmonic():
    g = ov.ov_metric(ov.OVConfig(0.2, (1.0, 0.2j)))
    for u in ([0.3, 0.1, 0.05], [0.02, 0.01, 0.07]):
        jv = g.jet(np.array(u))
        assert abs(np.trace(jv[2])) < 1e-8 * float(g.value(np.array(u)))


def test_jet_matches_finite_differences():
    g = ov.ov_metric(ov.OVConfig(0.2, (1.0,)))
    u = np.array([0.3, 0.2, 0.05])
    a, b = g.jet(u), gh.fd_jet(g.V, u, 0.01)
    assert np.allclose(a[1], b[1], rtol=1e-7)
    assert np.allclose(a[2], b[2], rtol=1e-5, atol=1e-6)


def test_triple_algebra_ov():
    g = ov.ov_metric(ov.OVConfig(0.2, (1.0,)))
    u = np.array([[0.3, 0.1, 0.05], [0.01, -0.02, 0.11], [0.5, 0.4, 0.19]])
    off, diag = gh.triple_algebra_errors(gh.triple_arrays(g, u))
    assert off < 1e-12 and diag < 1e-12


def test_harnack_deviation_decreases():
    devs = [ov.harnack_deviation(ov.OVConfig(e, (1.0,)), 0.5 + 0.2j) for e in (0.4, 0.2, 0.1)]
    assert devs[0] > devs[1] > devs[2]
    with pytest.raises(DomainError):
        ov.harnack_deviation(ov.OVConfig(0.4, (1.0,)), 0.05)


def test_decay_constant_stable():
    c = [ov.decay_check(e)[0] for e in (0.2, 0.1, 0.05)]
    assert max(c) / min(c) <= 2.0


def test_fibre_diameter_shrinks():
    d = [ov.fibre_diameter(0.5, ov.OVConfig(e, (1.0,))) for e in (0.4, 0.2, 0.1)]
    assert d[0] > d[1] > d[2]


def test_smooth_fibre_diameter_scales_like_sqrt_eps():
    c = [ov.fibre_diameter(0.5, ov.OVConfig(e, (1.0,))) / math.sqrt(e) for e in (0.4, 0.1, 0.05)]
    assert max(c) / min(c) < 1.01


def test_total_diameter_constant_stable():
    c = [ov.total_diameter(0.5, ov.OVConfig(e, (1.0,))) * math.sqrt(e / 0.5) for e in (0.4, 0.2, 0.1, 0.05)]
    assert max(c) / min(c) < 2.0


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_radial_lift_outer_regime(eps):
    # beyond r = eps the lift sees the semi-flat density (-log r / 2pi + 1) / eps
    _, outer = ov.radial_lift(0.5, 0.0, ov.OVConfig(eps, (1.0,)))
    ref = integrate.quad(lambda r: math.sqrt((-math.log(r) / (2 * math.pi) + 1) / eps), eps, 0.5)[0]
    assert outer == pytest.approx(ref, rel=0.2)


def test_total_diameter_domain():
    with pytest.raises(DomainError):
        ov.total_diameter(0.1, ov.OVConfig(0.2, (1.0,)))
