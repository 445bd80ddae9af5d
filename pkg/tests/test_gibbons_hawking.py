import numpy as np
import pytest
from hypothesis import given, strategies as st

from hkcollapse import gibbons_hawking as gh
from hkcollapse.errors import AperiodicityError, DomainError, HarmonicityError
from hkcollapse.geometry_core import riemann_norm
from hkcollapse.semiflat import SemiFlatMetric, i1_periods, semiflat_curvature

finite = dict(allow_nan=False, allow_infinity=False)
away = st.tuples(*[st.floats(-1, 1, **finite)] * 3).filter(lambda u: np.linalg.norm(u) > 0.1)
# the monopole connection is singular on the string u1 = u2 = 0, u3 < 0
off_string = away.filter(lambda u: np.linalg.norm(u) + u[2] > 0.05)


def test_constant_field_metric():
    G = gh.gh_metric(gh.constant_field(1.0), [0.1, 0.2, 0.3]).g
    assert np.allclose(G, np.diag([1, 1, 1, 1 / (2 * np.pi) ** 2]), atol=1e-15)


def test_constant_field_flat():
    assert float(gh.curvature_norm(gh.constant_field(2.5), [0.3, -0.1, 0.2])) == 0.0


@given(off_string)
def test_triple_algebra_taub_nut(u):
    off, diag = gh.triple_algebra_errors(gh.triple_arrays(gh.taub_nut(1.0), np.array(u)))
    assert off < 1e-12 and diag < 1e-12


def test_triple_closed_for_harmonic_v():
    assert gh.closedness_residual(gh.taub_nut(1.0), [0.2, 0.1, 0.3]) < 1e-6


def test_closedness_flags_non_harmonic_v():
    f = gh.GHField(V=lambda u: np.sum(np.asarray(u) ** 2, axis=-1) + 0.5)
    assert gh.closedness_residual(f, [0.2, 0.1, 0.3]) > 0.1


def test_laplacian_residual():
    assert abs(gh.laplacian_residual(gh.taub_nut(1.0), [0.3, 0.2, 0.1])) < 1e-3
    f = gh.GHField(V=lambda u: np.sum(np.asarray(u) ** 2, axis=-1) + 0.5)
    assert gh.laplacian_residual(f, [0.3, 0.2, 0.1]) == pytest.approx(6.0, rel=1e-6)


def test_complex_structure_squares_to_minus_one():
    for i in (1, 2, 3):
        J = gh.complex_structure(gh.taub_nut(1.0), [0.3, 0.2, -0.4], i)
        assert np.allclose(J @ J, -np.eye(4), atol=1e-12)


def test_nonpositive_v_rejected():
    with pytest.raises(DomainError):
        gh.constant_field(-1.0).value([0.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        gh.taub_nut(1.0).value([0.0, 0.0, 0.0])


def test_poincare_chart_maps_axis():
    assert np.allclose(gh.poincare_chart(1.0, 1, 0).u, [0, 0, 1])


@given(st.complex_numbers(max_magnitude=2, **finite), st.complex_numbers(max_magnitude=2, **finite))
def test_poincare_flat_for_e0(z1, z2):
    if abs(z1) + abs(z2) < 0.05:
        return
    assert gh.poincare_chart(0.0, z1, z2).flat_error < 1e-12


def test_poincare_origin():
    with pytest.raises(DomainError):
        gh.poincare_chart(1.0, 0, 0)


@given(away)
def test_compact_vs_expanded(u):
    g = gh.taub_nut(1.0)
    a = float(gh.curvature_norm(g, u))
    b = float(gh.curvature_norm_expanded(g, u))
    assert a == pytest.approx(b, rel=1e-9)


def test_curvature_against_pulled_back_metric():
    # |R| from the compact formula uses the 2-form norm, which is 1/sqrt 2 of sqrt(R_abcd R^abcd)
    c = np.array([0.3, 0.2, 0.25, -0.1])
    u = gh.poincare_map(complex(c[0], c[1]), complex(c[2], c[3]))
    fd = riemann_norm(gh.poincare_metric_fn(1.0), c, 5e-3) / np.sqrt(2)
    assert float(gh.curvature_norm(gh.taub_nut(1.0), u)) == pytest.approx(fd, rel=1e-3)


def test_taub_nut_e0_flat():
    # e = 0 is flat R^4; |R|^2 cancels only to rounding, so compare squares
    u = [0.3, 0.4, 0.5]
    ref = float(gh.curvature_norm(gh.taub_nut(1.0), u))
    assert float(gh.curvature_norm(gh.taub_nut(0.0), u)) ** 2 < 1e-9 * ref ** 2


def test_harmonicity_checked():
    f = gh.GHField(V=lambda u: np.sum(np.asarray(u) ** 2, axis=-1) + 0.5)
    with pytest.raises(HarmonicityError):
        gh.curvature_norm(f, [0.2, 0.1, 0.3])


def test_fd_jet_matches_analytic():
    g = gh.taub_nut(1.0)
    u = np.array([0.4, 0.3, -0.5])
    a, b = gh.fd_jet(g.V, u, 0.02), g.jet(u)
    for k in range(3):
        assert np.allclose(a[k], b[k], rtol=1e-6, atol=1e-6)


def test_semiflat_field_curvature():
    m = SemiFlatMetric(i1_periods(1.0), 0.2)
    y = 0.4 + 0.3j
    ref = semiflat_curvature(m, y)
    assert float(gh.curvature_norm(gh.semiflat_field(m), [y.real, y.imag, 0.05])) == pytest.approx(ref, rel=1e-6)


def test_semiflat_field_periodic():
    m = SemiFlatMetric(i1_periods(1.0), 0.2)
    gh.check_periodic(gh.semiflat_field(m), [0.5, 0.3j])
    with pytest.raises(AperiodicityError):
        gh.check_periodic(gh.taub_nut(1.0), [0.5])


def test_holomorphic_chart_round_trip():
    m = SemiFlatMetric(i1_periods(1.0), 0.2)
    chart = gh.HolomorphicChart(gh.semiflat_field(m))
    y = 0.5 + 0.2j
    u3 = chart.u3_of(0.1 - 0.03j, y)
    W, b = chart.frame_at(y, u3)
    V = float(gh.semiflat_field(m).value(np.array([y.real, y.imag, u3])))
    assert W == pytest.approx(1 / V, rel=1e-14)
    assert gh.canonical_relation_residual(chart, y, u3) < 1e-8


def test_chart_quadrature_primitives_match_closed_form():
    m = SemiFlatMetric(i1_periods(1.0), 0.2)
    g = gh.semiflat_field(m)
    bare = gh.GHField(V=g.V, period=g.period)
    y, u3 = 0.5 + 0.2j, 0.07
    a = gh.HolomorphicChart(g).frame_at(y, u3)
    b = gh.HolomorphicChart(bare).frame_at(y, u3)
    assert a[0] == pytest.approx(b[0], rel=1e-13)
    assert a[1] == pytest.approx(b[1], abs=1e-8)


def test_harnack_check_exact_on_semiflat():
    p = i1_periods(1.0)
    eps = [0.4, 0.2, 0.1]
    fam = [gh.semiflat_field(SemiFlatMetric(p, e)) for e in eps]
    y0 = 0.5 + 0.2j
    rows = gh.harnack_collapse_check(fam, eps, float(np.imag(p.tau2(y0))), y0)
    assert all(d < 1e-14 for _, d in rows)
