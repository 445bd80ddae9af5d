import numpy as np
import pytest
from hypothesis import given, strategies as st

from hkcollapse.errors import DomainError, OutOfPatchError, TypeMismatchError
from hkcollapse.geometry_core import (FieldSampler, FrameMetric, MetricTensor, Point, TwoForm,
                                      array_to_hermitian, frame_decompose, frame_hermitian,
                                      frame_reconstruct, hermitian_to_array, holomorphic_form_parts,
                                      kahler_form, kahler_ricci_form, metric_from_hermitian,
                                      numerical_ricci, ricci_flat_residuals, riemann_norm, wedge)
from hkcollapse.semiflat import PeriodPair, PeriodSeries, SemiFlatMetric, semiflat_fields

finite = dict(allow_nan=False, allow_infinity=False)
coord = st.floats(-2, 2, **finite)


def one_form_wedge(a, b):
    return np.outer(a, b) - np.outer(b, a)


def test_flat_kahler_form():
    m = kahler_form(FrameMetric(1.0, 0j)).m
    ref = np.zeros((4, 4))
    ref[0, 1], ref[2, 3] = 1.0, 1.0
    assert np.allclose(m, ref - ref.T, atol=1e-15)


def test_kahler_form_by_hand():
    # theta = dx + (1+i) dy = R + i I with R = dx1 + dy1 - dy2, I = dx2 + dy1 + dy2;
    # (i/2) theta ^ conj(theta) = R ^ I and (i/2) dy ^ dybar = dy1 ^ dy2
    R = np.array([1.0, 0.0, 1.0, -1.0])
    I = np.array([0.0, 1.0, 1.0, 1.0])
    dy = one_form_wedge(np.eye(4)[2], np.eye(4)[3])
    ref = 2.0 * one_form_wedge(R, I) + 0.5 * dy
    assert np.allclose(kahler_form(FrameMetric(2.0, 1 + 1j)).m, ref, atol=1e-14)


def test_frame_metric_needs_positive_w():
    with pytest.raises(DomainError):
        FrameMetric(0.0, 0j)


@given(st.floats(0.1, 10), coord, coord)
def test_frame_hermitian_unimodular(W, b1, b2):
    H = frame_hermitian(W, complex(b1, b2))
    assert np.linalg.det(H).real == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(H, H.conj().T)


@given(st.floats(0.1, 10), coord, coord)
def test_volume_form_identity(W, b1, b2):
    # omega^2 = 2 det(H) dvol and (Re Omega)^2 = 2 dvol, so for frame data they agree
    w = kahler_form(FrameMetric(W, complex(b1, b2)))
    re, _ = holomorphic_form_parts()
    assert w.wedge(w) == pytest.approx(re.wedge(re), rel=1e-12)


@given(st.floats(0.1, 10), coord, coord, st.floats(-3, 3), coord, coord, st.floats(-3, 3))
def test_decompose_round_trip(W, b1, b2, a, c1, c2, g):
    fm = FrameMetric(W, complex(b1, b2))
    om = frame_reconstruct(a, complex(c1, c2), g, fm)
    a2, c, g2 = frame_decompose(om, fm)
    assert a2 == pytest.approx(a, abs=1e-9)
    assert c == pytest.approx(complex(c1, c2), abs=1e-9)
    assert g2 == pytest.approx(g, abs=1e-9)


@given(st.floats(0.1, 10), coord, coord)
def test_decompose_kahler_form(W, b1, b2):
    fm = FrameMetric(W, complex(b1, b2))
    a, c, g = frame_decompose(kahler_form(fm), fm)
    assert a == pytest.approx(1 / W, rel=1e-9)
    assert abs(c) < 1e-9 * max(1.0, W * W)
    assert g == pytest.approx(1 / W, rel=1e-9)


def test_decompose_zero():
    assert frame_decompose(TwoForm(np.zeros((4, 4))), FrameMetric(1.5, 0.2j)) == (0.0, 0j, 0.0)


def test_type_mismatch():
    re, _ = holomorphic_form_parts()
    with pytest.raises(TypeMismatchError):
        array_to_hermitian(re.m)


def test_hermitian_round_trip():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(5, 2, 2)) + 1j * rng.normal(size=(5, 2, 2))
    H = A + np.conj(np.swapaxes(A, -1, -2))
    assert np.allclose(array_to_hermitian(hermitian_to_array(H)), H)


def test_wedge_antisymmetric_top_form():
    e = np.eye(4)
    a = one_form_wedge(e[0], e[1])
    b = one_form_wedge(e[2], e[3])
    assert wedge(a, b) == 1.0
    assert wedge(b, a) == 1.0
    assert wedge(a, a) == 0.0


def test_metric_tensor_checks():
    with pytest.raises(ValueError):
        MetricTensor(-np.eye(4))
    with pytest.raises(ValueError):
        MetricTensor(np.eye(3))
    g = metric_from_hermitian(frame_hermitian(2.0, 0.5 + 0.1j))
    assert np.linalg.eigvalsh(MetricTensor(g).g).min() > 0


def test_point_must_be_finite():
    with pytest.raises(DomainError):
        Point(complex("nan"), 0j)


def test_out_of_patch():
    fs = FieldSampler(1e-2, lambda x, y: (1.0, 0j), ((0, 1),) * 4)
    with pytest.raises(OutOfPatchError):
        ricci_flat_residuals(fs, Point(0.005 + 0.5j, 0.5 + 0.5j))


def test_residuals_constant_data():
    fs = FieldSampler(1e-3, lambda x, y: (1.7, 0.3 - 0.2j))
    r1, r2 = ricci_flat_residuals(fs, Point(0.1 + 0.2j, 0.3 + 0.4j))
    assert r1 == 0 and r2 == 0


def _upper_half_plane(eps=1.0):
    # tau1 = 1, tau2 = y on Im y > 0
    return SemiFlatMetric(PeriodPair(PeriodSeries(0.0, (1.0,)), PeriodSeries(0.0, (0.0, 1.0))), eps)


def _sampler(m, h, perturb=0.0):
    def ev(x, y):
        W, b = semiflat_fields(m, x, y)
        return float(W) * (1 + perturb * np.real(x)), complex(b)
    return FieldSampler(h, ev)


def test_residuals_semiflat_are_second_order():
    m = _upper_half_plane()
    at = Point(0.3 + 0.1j, 0.2 + 1.0j)
    e1 = max(map(abs, ricci_flat_residuals(_sampler(m, 1e-2), at)))
    e2 = max(map(abs, ricci_flat_residuals(_sampler(m, 5e-3), at)))
    assert e1 < 1e-3
    assert e2 < 1e-10 or e1 / e2 == pytest.approx(4.0, rel=0.1)


def test_residuals_detect_perturbation():
    m = _upper_half_plane()
    at = Point(0.3 + 0.1j, 0.2 + 1.0j)
    r = max(map(abs, ricci_flat_residuals(_sampler(m, 1e-3, perturb=1e-2), at)))
    assert r >= 1e-3


def test_numerical_ricci_flat():
    fs = FieldSampler(1e-3, lambda x, y: (1.0, 0j))
    assert numerical_ricci(fs, Point(0j, 0j)) == 0.0


def test_numerical_ricci_semiflat_log_period():
    m = SemiFlatMetric(PeriodPair(PeriodSeries(0.0, (1.0,)), PeriodSeries(1 / (2j * np.pi), (1j,))), 1.0)
    at = Point(0.1 + 0.05j, 0.5 + 0.0j)
    vals = [numerical_ricci(_sampler(m, h), at) for h in (1e-2, 5e-3)]
    assert vals[0] < 1e-3
    assert vals[0] / vals[1] == pytest.approx(4.0, rel=0.1)


def test_riemann_norm_flat():
    assert riemann_norm(lambda v: np.eye(4), np.zeros(4), 1e-2) == 0.0


def test_ricci_form_vanishes_for_frame_data():
    m = _upper_half_plane()

    def H(x, y):
        W, b = semiflat_fields(m, x, y)
        return frame_hermitian(float(W), complex(b))
    rho = kahler_ricci_form(H, Point(0.2j, 0.1 + 1.0j), 1e-3)
    assert np.abs(rho).max() < 1e-8
