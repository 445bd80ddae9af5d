import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hkcollapse.errors import DomainError, PoleError
from hkcollapse.special_functions import (bessel_k0, bessel_k1, bessel_kn_sequence, digamma,
                                          euler_gamma, power_tail, zeta_odd)

# frozen from mpmath at 30 digits
K0_1 = 0.42102443824070834
ZETA3 = 1.2020569031595943
GAMMA = 0.5772156649015329


def test_k0_at_one():
    assert bessel_k0(1.0) == pytest.approx(K0_1, rel=1e-15, abs=0)


def test_k0_quadrature_oracle():
    # K0(x) = int_0^inf cos(x v) / sqrt(v^2 + 1) dv
    val = mpmath.quadosc(lambda v: mpmath.cos(v) / mpmath.sqrt(v * v + 1), [0, mpmath.inf], omega=1)
    assert float(val) == pytest.approx(bessel_k0(1.0), rel=1e-13)


@given(st.floats(1e-3, 700.0))
def test_k0_k1_match_mpmath(x):
    for ours, ref in ((bessel_k0(x), mpmath.besselk(0, x)), (bessel_k1(x), mpmath.besselk(1, x))):
        assert ours == pytest.approx(float(ref), rel=2e-13)


def test_k_underflow_is_zero():
    assert bessel_k0(800.0) == 0.0
    assert bessel_k1(1000.0) == 0.0


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
def test_k_domain(x):
    with pytest.raises(DomainError):
        bessel_k0(x)


def test_k_arrays_keep_shape():
    x = np.linspace(0.1, 5.0, 12).reshape(3, 4)
    out = bessel_k1(x)
    assert out.shape == (3, 4)
    assert out[1, 2] == pytest.approx(float(mpmath.besselk(1, x[1, 2])), rel=1e-13)


@given(st.floats(0.05, 30.0))
def test_kn_recurrence_matches_mpmath(x):
    seq = bessel_kn_sequence(x, 6)
    for n in range(7):
        assert seq[n] == pytest.approx(float(mpmath.besselk(n, x)), rel=1e-11)


def test_digamma_values():
    assert digamma(1.0) == pytest.approx(-GAMMA, abs=1e-13)
    assert digamma(2.0) == pytest.approx(1.0 - GAMMA, abs=1e-13)


@given(st.floats(-20.0, 50.0).filter(lambda x: abs(x - round(x)) > 1e-3))
def test_digamma_matches_mpmath(x):
    assert digamma(x) == pytest.approx(float(mpmath.digamma(x)), rel=1e-12, abs=1e-12)


@given(st.floats(0.01, 40.0))
def test_digamma_recurrence(x):
    assert digamma(x + 1) - digamma(x) == pytest.approx(1.0 / x, rel=1e-11, abs=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_digamma_poles(x):
    with pytest.raises(PoleError):
        digamma(x)


def test_digamma_reflection_series():
    # -(psi(1+s) + psi(1-s)) = 2 gamma + sum 2 (zeta(2n+1) - 1) s^2n + 2 s^2/(1 - s^2) - ... in closed form
    s = 0.5
    lhs = -(digamma(1 + s) + digamma(1 - s))
    series = 2 * GAMMA + 2 * sum(float(mpmath.zeta(2 * n + 1)) * s ** (2 * n) for n in range(1, 80))
    assert lhs == pytest.approx(series, abs=1e-13)
    alt = 2 / (1 - s * s) + 2 * GAMMA - 2 + 2 * sum((zeta_odd(2 * n + 1) - 1) * s ** (2 * n)
                                                   for n in range(1, 60))
    assert lhs == pytest.approx(alt, abs=1e-13)


def test_zeta_values():
    assert zeta_odd(3) == pytest.approx(ZETA3, rel=1e-15)
    assert 0 < zeta_odd(15) - 1 < 1e-4


@given(st.integers(1, 30))
def test_zeta_matches_mpmath(k):
    n = 2 * k + 1
    assert zeta_odd(n) == pytest.approx(float(mpmath.zeta(n)), rel=1e-15)


@pytest.mark.parametrize("n", [2, 1, 4, 3.0])
def test_zeta_domain(n):
    with pytest.raises(DomainError):
        zeta_odd(n)


def test_euler_gamma():
    assert euler_gamma() == pytest.approx(float(mpmath.euler), rel=1e-16)
    # a0 = 2(log 2 eps - gamma)/eps at eps = 1/2
    eps = 0.5
    assert 2 * (math.log(2 * eps) - euler_gamma()) / eps == pytest.approx(-4 * GAMMA)


@given(st.integers(2, 14), st.integers(16, 2000))
def test_power_tail(p, N):
    ref = mpmath.zeta(p) - mpmath.fsum(mpmath.mpf(n) ** -p for n in range(1, N + 1)) \
        if N < 400 else mpmath.zeta(p, N + 1)
    assert power_tail(p, N) == pytest.approx(float(ref), rel=1e-12)


def test_power_tail_domain():
    with pytest.raises(DomainError):
        power_tail(3, 8)
