import numpy as np
import pytest
from hypothesis import given, strategies as st

from hkcollapse import gluing as G
from hkcollapse import ooguri_vafa as ov
from hkcollapse.errors import ConfigError, NonHolomorphicError, ObstructionError
from hkcollapse.geometry_core import Point
from hkcollapse.semiflat import SemiFlatMetric, semiflat_fields


@pytest.fixture(scope="module")
def glued():
    return G.glue(0.1, (1.0,), 0.4, 0.6, 0.9)


def _grid_points(grid, periods):
    T, _ = G.semiflat_background(periods, grid.y)
    return grid.Q * T[None], np.broadcast_to(grid.y[None], grid.shape)


@given(st.floats(0, 1))
def test_smoothstep(s):
    v = float(G.smoothstep(s))
    assert 0.0 <= v <= 1.0
    assert float(G.smoothstep(s, 1)) >= 0.0
    assert float(G.smoothstep(1 - s)) == pytest.approx(1 - v, abs=1e-12)


def test_smoothstep_flat_ends():
    for k in range(4):
        assert abs(float(G.smoothstep(1e-9, k))) < 1e-6 or k == 0
        assert abs(float(G.smoothstep(1 - 1e-9, k))) < 1e-6 or k == 0
    assert float(G.smoothstep(-1.0)) == 0.0 and float(G.smoothstep(2.0)) == 1.0


def test_glue_config_validation():
    with pytest.raises(ConfigError):
        G.GlueConfig(0.1, 0.6, 0.4)
    with pytest.raises(ConfigError):
        G.glue(0.1, (1.0,), 0.01, 0.6)


def test_frame_difference_of_semiflat_is_zero():
    cfg = ov.OVConfig(0.2, (1.0,))
    m = SemiFlatMetric(ov.ov_period_pair(cfg), cfg.eps)
    W, b = semiflat_fields(m, 0.03j, 0.5 + 0.1j)
    a, be, g = G.frame_difference_fields(W, b, W / cfg.eps, b, cfg.eps)
    assert abs(a) < 1e-15 and abs(be) < 1e-15 and abs(g) < 1e-15


def test_frame_round_trip():
    rng = np.random.default_rng(1)
    H00, H11, T = rng.random(3) + 0.5
    H10 = complex(*rng.normal(size=2))
    b0 = complex(*rng.normal(size=2))
    back = G.from_frame(*G.to_frame(H00, H10, H11, T, b0), T, b0)
    assert np.allclose(back, (H00, H10, H11))


def test_closed_form_matches_spectral_solver():
    eps = 0.3
    cfg = ov.OVConfig(eps, (1.0,))
    per = ov.ov_period_pair(cfg)
    grid = G.AnnulusGrid(0.4, 0.6, 16, 16, 16)
    x2, y = _grid_points(grid, per)
    sol = G.solve_potential(*G.frame_difference(cfg, x2, y), grid, per, eps)
    phi = G.ClosedFormPotential(cfg, 0.4, 0.6).values(x2, y)[0]
    assert sol.residual < 1e-6
    assert np.abs(sol.phi - phi).max() < 1e-6 * np.abs(phi).max()


def test_spectral_solver_manufactured():
    cfg = ov.OVConfig(0.2, (1.0,))
    per = ov.ov_period_pair(cfg)
    grid = G.AnnulusGrid(0.4, 0.6, 20, 16, 16)
    R, TH, Q = grid.R, grid.TH, grid.Q
    g = (1 + 0.2 * np.cos(TH)) * R ** 2
    p0 = (R - 0.4) * (0.6 - R) * (1 + 0.3 * np.sin(2 * TH))
    phi = g * (1 - np.cos(2 * np.pi * Q)) + p0
    bg = G._Background(grid, per)
    frame = G.to_frame(*G.hermitian_of_potential(phi, grid, bg), bg.T, bg.b0)
    sol = G.solve_potential(*frame, grid, per, 0.2)
    assert np.abs(sol.phi - phi).max() < 1e-8
    assert sol.residual < 1e-8


def test_obstruction():
    cfg = ov.OVConfig(0.2, (1.0,))
    grid = G.AnnulusGrid(0.4, 0.6, 8, 8, 8)
    a = np.ones(grid.shape)
    with pytest.raises(ObstructionError):
        G.solve_potential(a, 0 * a, 0 * a, grid, ov.ov_period_pair(cfg), 0.2)


def test_model_zero_sections_match():
    cfg = ov.OVConfig(0.2, (1.0, 0.2j))
    ys = np.array([0.45, 0.5j, -0.55 + 0.1j])
    beta0 = G.beta_fibre_mode(cfg, ys)
    coef, res = G.translation_section(beta0, ys, ov.ov_period_pair(cfg), cfg.eps)
    assert np.all(coef == 0) and res < 1e-9


def test_translation_section_round_trip():
    cfg = ov.OVConfig(0.2, (1.0,))
    per = ov.ov_period_pair(cfg)
    ys = 0.5 * np.exp(2j * np.pi * np.arange(12) / 12)
    sigma = np.array([0.3j, 0.1 - 0.05j, 0.02j])
    beta0 = G.section_shift(sigma, ys, per, cfg.eps)
    coef, res = G.translation_section(beta0, ys, per, cfg.eps, degree=3)
    assert res < 1e-10
    assert np.allclose(G.section_shift(coef, ys, per, cfg.eps), beta0, atol=1e-12)
    # only the real part of the constant term is free
    assert coef[0].imag == pytest.approx(0.3, abs=1e-10)


def test_translation_section_rejects_noise():
    cfg = ov.OVConfig(0.2, (1.0,))
    ys = 0.5 * np.exp(2j * np.pi * np.arange(40) / 40)
    noise = np.random.default_rng(0).normal(size=40) * 1e-3
    with pytest.raises(NonHolomorphicError):
        G.translation_section(noise + 0j, ys, ov.ov_period_pair(cfg), cfg.eps, degree=2)


def test_defect_exactly_zero_off_annulus(glued):
    assert float(G.ricci_defect_at(glued, 0.02, 0.3 + 0.1j)) == 0.0
    assert float(G.ricci_defect_at(glued, 0.05, 0.7j)) == 0.0
    assert abs(float(G.ricci_defect_at(glued, 0.05, 0.5))) > 0


def test_positive_at_small_eps(glued):
    low, _ = G.positivity_scan(glued, n_y=32, n_q=8)
    assert low > 0


def test_fibre_volume(glued):
    vol = G.fibre_volume(glued, np.array([0.3, 0.5 + 0.1j, 0.75j]))
    assert np.allclose(vol, 0.1, rtol=1e-9)


def test_closed_form(glued):
    assert G.closedness_residual(glued, Point(0.03j, 0.45 + 0.2j)) < 1e-5


def test_volume_normalization(glued):
    mism, ref = G.volume_mismatch(glued)
    fixed = G.volume_normalization(glued)
    after, _ = G.volume_mismatch(fixed)
    assert abs(after) < 1e-6 * abs(ref) + 1e-3 * abs(mism)


def test_decay_fit_exact_line():
    eps = np.array([0.4, 0.2, 0.1])
    slope, icpt, r2 = G.decay_fit(eps, np.exp(1.5 - 0.7 / eps))
    assert slope == pytest.approx(-0.7) and icpt == pytest.approx(1.5) and r2 == pytest.approx(1.0)
