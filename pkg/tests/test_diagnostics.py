import numpy as np
import pytest
from hypothesis import given, strategies as st

from hkcollapse import diagnostics as D
from hkcollapse import ooguri_vafa as ov
from hkcollapse.errors import DomainError
from hkcollapse.semiflat import PeriodPair, PeriodSeries

FLAT = D.McLeanBase(PeriodPair(PeriodSeries(0.0, (1.0,)), PeriodSeries(0.0, (1j,))), (), 0.9)
LATTICE = [(1, 0, 0, 0), (0, 1, 0, 0)]


def _line(xs):
    xs = np.asarray(xs, dtype=float)
    return D.SampledMetricSpace(list(xs), np.abs(xs[:, None] - xs[None, :]))


def test_distortion_identity():
    X = _line([0, 0.3, 1.2])
    assert D.gh_distortion(X, X, [0, 1, 2], [0, 1, 2]) == 0.0


def test_distortion_two_points():
    X, Y = _line([0, 1]), _line([0, 1.1])
    assert D.gh_distortion(X, Y, [0, 1], [0, 1]) == pytest.approx(0.1)


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=6),
       st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=6), st.randoms())
def test_distortion_symmetric(a, b, rnd):
    X, Y = _line(a), _line(b)
    f = [rnd.randrange(len(b)) for _ in a]
    g = [rnd.randrange(len(a)) for _ in b]
    assert D.gh_distortion(X, Y, f, g) == D.gh_distortion(Y, X, g, f)


def test_metric_space_validation():
    with pytest.raises(ValueError):
        D.SampledMetricSpace([0, 1], [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        D.SampledMetricSpace([0, 1], [[1, 1], [1, 0]])


def test_triangle_inequality_on_base_graph():
    ys = D.sample_base(30, 0.85, 3)
    base = D.McLeanBase(ov.ov_period_pair(ov.OVConfig(0.1, (1.0,))))
    d = D.base_distance_matrix(ys, base, 48)
    assert np.allclose(d, d.T)
    assert D.triangle_violation(d) <= 1e-12


def test_flat_base_distance():
    # the graph stencil overestimates straight lines slightly
    d = D.base_distance(0.1, 0.5 + 0.3j, FLAT)
    assert 0.5 <= d <= 0.5 * 1.02


def test_radial_oracle():
    base = D.McLeanBase(ov.ov_period_pair(ov.OVConfig(0.1, (1.0,))))
    assert D.base_distance(0.0, 0.8, base) == pytest.approx(D.radial_distance_oracle(base, 0.8), rel=0.02)


def test_base_distance_symmetric():
    base = D.McLeanBase(ov.ov_period_pair(ov.OVConfig(0.1, (1.0, 0.2j))))
    a = D.base_distance(0.3 + 0.1j, -0.4 + 0.2j, base, 48)
    b = D.base_distance(-0.4 + 0.2j, 0.3 + 0.1j, base, 48)
    assert a == pytest.approx(b, rel=1e-12)


def test_density_must_be_positive():
    bad = D.McLeanBase(PeriodPair(PeriodSeries(0.0, (1.0,)), PeriodSeries(0.0, (-1j,))), (), 0.9)
    with pytest.raises(DomainError):
        bad.density(0.5)


def test_flat_total_space_distance():
    eps = 0.25
    fm = D.FlatModel(eps)
    box = ((0, 1), (0, 1), (-0.2, 0.2), (-0.2, 0.2))
    # eps g = eps^2 |dx|^2 + |dy|^2 here; x1 = 0.05 and 0.95 are 0.1 apart on the torus
    d = D.total_space_distance([0.05, 0.5, 0, 0], [0.95, 0.5, 0, 0], fm.hermitian, eps, box,
                               n=(10, 10, 5, 5), lattice=LATTICE)
    assert d.value == pytest.approx(0.1 * eps, rel=1e-9)
    d = D.total_space_distance([0.2, 0.5, 0, 0], [0.2, 0.5, 0.1, 0.05], fm.hermitian, eps, box,
                               n=(10, 10, 5, 5), lattice=LATTICE)
    assert d.value == pytest.approx(np.hypot(0.1, 0.05), rel=1e-9)


def test_via_section_bounds_graph_distance():
    eps = 0.25
    fm = D.FlatModel(eps)
    box = ((0, 1), (0, 1), (-0.2, 0.2), (-0.2, 0.2))
    p, q = [0.3, 0.4, 0.0, 0.0], [0.6, 0.1, 0.1, 0.1]
    g = D.total_space_distance(p, q, fm.hermitian, eps, box, n=(10, 10, 5, 5), lattice=LATTICE)
    v = D.via_section_distance(fm, p, q)
    assert v.value >= g.value * (1 - 1e-9)


def test_fibre_distance_flat():
    fm = D.FlatModel(0.25)
    a = D.fibre_distance_to_section(fm, [0.0, 0.3, 0.9], [0.0, 0.0, 0.0], [0.1, 0.1, 0.1])
    assert np.allclose(a, [0.0, 0.3 * 0.25, 0.1 * 0.25])


def test_sample_base_reproducible():
    a, b = D.sample_base(50, 0.85, 7), D.sample_base(50, 0.85, 7)
    assert np.array_equal(a, b) and np.all(np.abs(a) <= 0.85)


def test_flat_collapse_linear_in_eps():
    eps = [0.4, 0.2, 0.1]
    rows = D.collapse_scan(eps, n_samples=300, flat=True, n_grid=32)
    deltas = [r.delta for r in rows]
    slope = np.polyfit(np.log(eps), np.log(deltas), 1)[0]
    assert deltas[0] > deltas[1] > deltas[2]
    assert slope == pytest.approx(1.0, abs=0.05)
