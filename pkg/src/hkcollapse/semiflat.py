"""Semi-flat metrics on torus fibrations from a pair of holomorphic periods."""
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BranchError, DomainError
from .geometry_core import (FrameMetric, Point, TwoForm, frame_hermitian,
                            hermitian_to_array, metric_from_hermitian)


@dataclass(frozen=True)
class PeriodSeries:
    """tau(y) = c log y + sum_n a[n] y^n on the plane slit along arg y = cut.

    The logarithm uses the branch with arg y in (cut - 2 pi, cut]. Points
    within ``cut_tol`` radians of the slit raise BranchError when c != 0,
    since a value there depends on which side it is approached from.
    """

    c: complex = 0.0
    a: Sequence[complex] = (0.0,)
    cut: float = np.pi
    cut_tol: float = 0.0

    def _log(self, y):
        y = np.asarray(y, dtype=complex)
        if np.any(y == 0):
            raise BranchError("log branch point y = 0")
        ang = np.angle(y)
        arg = ang - 2 * np.pi * np.floor((ang - self.cut) / (2 * np.pi) + 1.0)
        # arg now lies in (cut - 2 pi, cut]
        if self.cut_tol > 0:
            d = np.abs(np.angle(np.exp(1j * (ang - self.cut))))
            if np.any(d < self.cut_tol):
                raise BranchError("y is within %.3g rad of the branch cut" % self.cut_tol)
        return np.log(np.abs(y)) + 1j * arg

    def __call__(self, y):
        y = np.asarray(y, dtype=complex)
        val = np.polynomial.polynomial.polyval(y, np.asarray(self.a, dtype=complex))
        if self.c != 0:
            val = val + self.c * self._log(y)
        return val

    def derivative(self, y):
        y = np.asarray(y, dtype=complex)
        a = np.asarray(self.a, dtype=complex)
        val = np.polynomial.polynomial.polyval(y, np.polynomial.polynomial.polyder(a)) if a.size > 1 else 0.0 * y
        if self.c != 0:
            val = val + self.c / y
        return val

    def nth_derivative(self, y, k):
        if k == 0:
            return self(y)
        y = np.asarray(y, dtype=complex)
        a = np.asarray(self.a, dtype=complex)
        val = np.polynomial.polynomial.polyval(y, np.polynomial.polynomial.polyder(a, k)) if a.size > k else 0.0 * y
        if self.c != 0:
            val = val + self.c * (-1) ** (k - 1) * math.factorial(k - 1) / y ** k
        return val

    def antiderivative(self, y):
        """Primitive vanishing at y = 0 (y = 1 for the log part's constant)."""
        y = np.asarray(y, dtype=complex)
        a = np.asarray(self.a, dtype=complex)
        val = np.polynomial.polynomial.polyval(y, np.polynomial.polynomial.polyint(a))
        if self.c != 0:
            val = val + self.c * (y * self._log(y) - y)
        return val

    def continued(self, path):
        """Values along a path with the logarithm continued continuously."""
        path = np.asarray(path, dtype=complex)
        if np.any(path == 0):
            raise BranchError("path passes through y = 0")
        a = np.asarray(self.a, dtype=complex)
        poly = np.polynomial.polynomial.polyval(path, a)
        if self.c == 0:
            return poly
        arg = np.unwrap(np.angle(path))
        arg = arg - arg[0] + np.imag(self._log(path[0]))
        return poly + self.c * (np.log(np.abs(path)) + 1j * arg)


@dataclass(frozen=True)
class PeriodPair:
    tau1: PeriodSeries
    tau2: PeriodSeries

    def im_pairing(self, y):
        """Im(conj(tau1) tau2), the fibre area of the unit-volume lattice."""
        return np.imag(np.conj(self.tau1(y)) * self.tau2(y))


def i1_periods(f0=1.0, cut=np.pi):
    """Periods (1, (1/2 pi i) log y + i f0) of the local model near an I1 fibre."""
    return PeriodPair(PeriodSeries(0.0, (1.0,)),
                      PeriodSeries(1.0 / (2j * np.pi), (1j * f0,), cut=cut))


@dataclass(frozen=True)
class SemiFlatMetric:
    periods: PeriodPair
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("fibre area eps must be positive")


def semiflat_fields(m: SemiFlatMetric, x, y):
    """Vectorised (W, b) at arrays x, y."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    t1, t2 = m.periods.tau1(y), m.periods.tau2(y)
    d1, d2 = m.periods.tau1.derivative(y), m.periods.tau2.derivative(y)
    area = np.imag(np.conj(t1) * t2)
    if np.any(area <= 0):
        raise DomainError("Im(conj(tau1) tau2) must be positive on the patch")
    W = m.eps / area
    b = -(W / m.eps) * (np.imag(t2 * np.conj(x)) * d1 + np.imag(np.conj(t1) * x) * d2)
    return W, b


def semiflat_data(m: SemiFlatMetric, at: Point) -> FrameMetric:
    """W = eps / Im(conj(tau1) tau2), b = -(W/eps)[Im(tau2 xbar) tau1' + Im(conj(tau1) x) tau2']."""
    W, b = semiflat_fields(m, at.x, at.y)
    return FrameMetric(float(W), complex(b))


def semiflat_hermitian(m, x, y):
    W, b = semiflat_fields(m, x, y)
    return frame_hermitian(W, b)


def fibre_volume(m: SemiFlatMetric, y: complex, order: int = 8) -> float:
    """Integral of omega over the fundamental parallelogram of the fibre at y.

    Gauss-Legendre quadrature in lattice coordinates x = s tau1 + t tau2.
    """
    t1, t2 = complex(m.periods.tau1(y)), complex(m.periods.tau2(y))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    S, T = np.meshgrid(s, s, indexing="ij")
    x = S * t1 + T * t2
    H = semiflat_hermitian(m, x, np.full_like(x, y))
    M = hermitian_to_array(H)
    e1 = np.array([t1.real, t1.imag, 0.0, 0.0])
    e2 = np.array([t2.real, t2.imag, 0.0, 0.0])
    vals = np.einsum("a,...ab,b->...", e1, M, e2)
    return float(np.einsum("i,j,ij->", w, w, vals))


def semiflat_potential(m: SemiFlatMetric, at: Point) -> float:
    """Kähler potential phi with (i/2) d dbar phi = omega_SF.

    phi = eps/A (-xbar^2/2 tau1/conj(tau1) + |x|^2 - x^2/2 conj(tau1)/tau1)
          - Im(phi1 conj(phi2)) / eps,   A = Im(conj(tau1) tau2),
    with phi_i the primitives of tau_i from PeriodSeries.antiderivative.
    Valid on the slit plane, where those primitives are single valued.
    """
    x, y = complex(at.x), complex(at.y)
    p = m.periods
    t1 = complex(p.tau1(y))
    area = float(p.im_pairing(y))
    q = t1 / np.conj(t1)
    fib = -0.5 * np.conj(x) ** 2 * q + abs(x) ** 2 - 0.5 * x ** 2 / q
    f1, f2 = complex(p.tau1.antiderivative(y)), complex(p.tau2.antiderivative(y))
    return float((m.eps / area * fib).real - (f1 * np.conj(f2)).imag / m.eps)


class TranslationResult(NamedTuple):
    point: Point
    pullback_error: float


def flat_translation(m: SemiFlatMetric, a1: float, a2: float, at: Point) -> TranslationResult:
    """Translate by the flat section sigma = a1 tau1 + a2 tau2 and compare
    the pulled-back form with omega_SF at the original point."""
    p = m.periods
    y = complex(at.y)
    sigma = a1 * complex(p.tau1(y)) + a2 * complex(p.tau2(y))
    dsigma = a1 * complex(p.tau1.derivative(y)) + a2 * complex(p.tau2.derivative(y))
    moved = Point(at.x + sigma, at.y)
    H_moved = semiflat_hermitian(m, moved.x, moved.y)
    # T*(dx) = dx + sigma' dy
    J = np.array([[1.0, dsigma], [0.0, 1.0]], dtype=complex)
    pulled = J.T @ H_moved @ np.conj(J)
    H0 = semiflat_hermitian(m, at.x, at.y)
    err = float(np.abs(hermitian_to_array(pulled) - hermitian_to_array(H0)).max())
    return TranslationResult(moved, err)


def reduce_to_fundamental(m: SemiFlatMetric, at: Point) -> Point:
    """Representative of x modulo the lattice Z tau1 + Z tau2 at y."""
    t1, t2 = complex(m.periods.tau1(at.y)), complex(m.periods.tau2(at.y))
    A = np.array([[t1.real, t2.real], [t1.imag, t2.imag]])
    s, t = np.linalg.solve(A, [at.x.real, at.x.imag])
    s -= np.floor(s)
    t -= np.floor(t)
    return Point(s * t1 + t * t2, at.y)


# Sixth-order central second-difference weights at offsets -3..3.
_D2_6 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0


def _laplacian_grid(F, h):
    n = F.shape[0]
    out = np.zeros((n - 6, n - 6))
    for k, c in enumerate(_D2_6):
        out += c * F[k:n - 6 + k, 3:n - 3]
        out += c * F[3:n - 3, k:n - 6 + k]
    return out / (h * h)


def semiflat_curvature(m: SemiFlatMetric, y: complex, h: float = 0.01) -> float:
    """|R| of the semi-flat metric from |R|^2 = (eps^2/2) F DD F, F = 1/Im tau2.

    Requires the normalisation tau1 = 1. The bi-Laplacian is taken with two
    passes of a sixth-order seven-point stencil on a 13 x 13 grid.
    """
    t1 = m.periods.tau1
    if t1.c != 0 or len(t1.a) != 1 or t1.a[0] != 1:
        raise DomainError("semiflat_curvature needs the coordinate with tau1 = 1")
    off = np.arange(-6, 7) * h
    Y = y + off[:, None] + 1j * off[None, :]
    F = 1.0 / np.imag(m.periods.tau2(Y))
    bil = _laplacian_grid(_laplacian_grid(F, h), h)
    sq = 0.5 * m.eps ** 2 * F[6, 6] * bil[0, 0]
    return float(np.sqrt(max(sq, 0.0)))


def semiflat_metric_fn(m: SemiFlatMetric):
    """Metric field on R^4 (x1, x2, y1, y2) for finite-difference curvature."""
    def metric(v):
        W, b = semiflat_fields(m, complex(v[0], v[1]), complex(v[2], v[3]))
        return metric_from_hermitian(frame_hermitian(W, b))
    return metric


def kahler_form_at(m: SemiFlatMetric, at: Point) -> TwoForm:
    return TwoForm(hermitian_to_array(semiflat_hermitian(m, at.x, at.y)))
