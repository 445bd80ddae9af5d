"""Modified Bessel functions K0/K1, digamma, odd zeta values and Euler's constant.

All functions accept scalars; ``bessel_k0`` and ``bessel_k1`` also accept
numpy arrays and evaluate elementwise.
"""
import math

import numpy as np

from .errors import DomainError, PoleError

_EULER_GAMMA = 0.5772156649015329

# Series/integral crossover for K0 and K1.
_K_SWITCH = 2.0
# Beyond this e^{-x} underflows (smallest subnormal is ~4.9e-324 = e^{-744.4}).
_K_UNDERFLOW = 745.0

# Trapezoid rule for K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt after
# the substitution w = 2 sqrt(x) sinh(t/2), which turns the kernel into
# exp(-x) x^{-1/2} exp(-w^2/2) / sqrt(1 + w^2/(4x)) dw (times cosh t for K1).
# For x >= 2 the nearest singularity sits at |Im w| = 2 sqrt(x) >= 2.8, so
# with h = 0.25 the discretisation error is about exp(-2 pi 2.8 / h) ~ 1e-30;
# the Gaussian tail beyond w = 10 is below exp(-50).
_TRAP_H = 0.25
_TRAP_W = np.arange(0.0, 10.0 + _TRAP_H, _TRAP_H)
_TRAP_WT = np.full_like(_TRAP_W, _TRAP_H)
_TRAP_WT[0] = 0.5 * _TRAP_H
_TRAP_G = np.exp(-0.5 * _TRAP_W ** 2) * _TRAP_WT

# Small-argument series: terms (x^2/4)^k / (k!)^2 at x < 2 fall below 1e-20
# by k = 14; 24 terms leave a wide margin.
_NSER = 24
_K = np.arange(_NSER)
_FACT2 = np.array([math.factorial(k) ** 2 for k in range(_NSER)], dtype=float)
_FACT_K_K1 = np.array([math.factorial(k) * math.factorial(k + 1) for k in range(_NSER)], dtype=float)
_HARM = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, _NSER))])


def euler_gamma():
    """Euler's constant."""
    return _EULER_GAMMA


def _k0_series(x):
    q = (0.25 * x * x)[..., None] ** _K
    i0 = (q / _FACT2).sum(axis=-1)
    tail = (q * _HARM / _FACT2).sum(axis=-1)
    return -(np.log(0.5 * x) + _EULER_GAMMA) * i0 + tail


def _k1_series(x):
    q = (0.25 * x * x)[..., None] ** _K
    i1 = 0.5 * x * (q / _FACT_K_K1).sum(axis=-1)
    # psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
    psi_sum = 2.0 * _HARM + 1.0 / (_K + 1.0) - 2.0 * _EULER_GAMMA
    s = (q * psi_sum / _FACT_K_K1).sum(axis=-1)
    return 1.0 / x + np.log(0.5 * x) * i1 - 0.25 * x * s


def _k_trapezoid(x, nu):
    w2 = (_TRAP_W ** 2)[None, :] / x[..., None]
    f = 1.0 / np.sqrt(1.0 + 0.25 * w2)
    if nu == 1:
        f = f * (1.0 + 0.5 * w2)
    return np.exp(-x) / np.sqrt(x) * (f @ _TRAP_G)


def _bessel_k(x, nu):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError("K_%d requires x > 0" % nu)
    flat = arr.reshape(-1)
    out = np.zeros_like(flat)
    small = flat < _K_SWITCH
    mid = (~small) & (flat < _K_UNDERFLOW)
    if small.any():
        out[small] = _k0_series(flat[small]) if nu == 0 else _k1_series(flat[small])
    if mid.any():
        out[mid] = _k_trapezoid(flat[mid], nu)
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_k0(x):
    """Modified Bessel function K0 for x > 0 (scalar or array)."""
    return _bessel_k(x, 0)


def bessel_k1(x):
    """Modified Bessel function K1 for x > 0 (scalar or array)."""
    return _bessel_k(x, 1)


def bessel_kn_sequence(x, nmax):
    """K_0 .. K_nmax at x by upward recurrence K_{n+1} = K_{n-1} + (2n/x) K_n.

    Upward recurrence is stable for K. Returns an array with a leading axis
    of length nmax + 1.
    """
    x = np.asarray(x, dtype=float)
    ks = [np.asarray(bessel_k0(x)), np.asarray(bessel_k1(x))]
    for n in range(1, nmax):
        ks.append(ks[n - 1] + (2.0 * n / x) * ks[n])
    return np.stack(ks[: nmax + 1])


# Bernoulli numbers B_2 .. B_20 for the digamma asymptotic series.
_BERN = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6,
         -3617 / 510, 43867 / 798, -174611 / 330]


def digamma(x):
    """psi(x) for real x not a non-positive integer.

    Lifts x to >= 6 with psi(x) = psi(x+1) - 1/x, then applies the
    asymptotic series through B_20, whose first omitted term is below 1e-15
    at x = 6.
    """
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError("digamma has a pole at %r" % x)
    acc = 0.0
    while x < 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for k, b in enumerate(_BERN, start=1):
        series += b / (2 * k) * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - series


def zeta_odd(n):
    """Riemann zeta at odd n >= 3.

    Direct sum to N = 32 plus the Euler-Maclaurin tail
    int_N^inf + f(N)/2 - sum B_2k/(2k)! f^(2k-1)(N). With the tail carried
    through B_10 the remainder is bounded by the next term, below 1e-17.
    """
    if not isinstance(n, (int, np.integer)) or n < 3 or n % 2 == 0:
        raise DomainError("zeta_odd needs an odd integer n >= 3, got %r" % (n,))
    n = int(n)
    N = 32
    head = math.fsum(k ** -float(n) for k in range(N, 0, -1))
    return head + power_tail(n, N)


def power_tail(p, N):
    """sum_{n > N} n^-p for integer p >= 2 and N >= 16, by Euler-Maclaurin.

    Starting at M = N + 1: int_M^inf f + f(M)/2 - sum B_2k/(2k)! f^(2k-1)(M),
    carried through B_10.
    """
    if p < 2 or N < 16:
        raise DomainError("power_tail needs p >= 2 and N >= 16")
    M = float(N + 1)
    tail = M ** (1.0 - p) / (p - 1) + 0.5 * M ** (-float(p))
    for k, b in enumerate(_BERN[:5], start=1):
        j = 2 * k - 1
        # f^(j)(M) = -p (p+1) ... (p+j-1) M^(-p-j) for odd j
        deriv = -math.prod(range(p, p + j)) * M ** (-float(p + j))
        tail -= b / math.factorial(2 * k) * deriv
    return tail
