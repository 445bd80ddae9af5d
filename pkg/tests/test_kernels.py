import importlib

import numpy as np
import pytest

from hkcollapse import _lattice_py, kernels

compiled = pytest.importorskip("hkcollapse._lattice")


@pytest.mark.parametrize("N,kmax", [(8, 0), (64, 2), (256, 4)])
def test_backends_agree(N, kmax):
    rng = np.random.default_rng(N + kmax)
    eps = 0.3
    u = rng.uniform(-0.5 * eps, 0.5 * eps, 50)
    rho2 = rng.uniform(0.01, 0.8, 50) ** 2
    a = _lattice_py.lattice_moments(u, rho2, eps, N, kmax)
    b = compiled.lattice_moments(u, rho2, eps, N, kmax)
    assert a.shape == b.shape
    assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1.0)) < 1e-12


def test_env_forces_fallback(monkeypatch):
    monkeypatch.setenv("HKCOLLAPSE_PURE_PYTHON", "1")
    k = importlib.reload(kernels)
    try:
        assert k.BACKEND == "python"
        assert k.lattice_moments is _lattice_py.lattice_moments
    finally:
        monkeypatch.delenv("HKCOLLAPSE_PURE_PYTHON")
        importlib.reload(kernels)
    assert kernels.BACKEND == "cython"
