"""Glue the Ooguri-Vafa model into the semi-flat metric across an annulus.

Everything here is invariant under x1 translation. The semi-flat frame
uses W0 = 1/Im tau (tau1 = 1), so the semi-flat metric at fibre area eps
has W = eps W0. A form that only depends on x2 and y is described by its
Hermitian matrix H in (dx, dy), or by (alpha, beta, gamma) in the coframe
theta_v = W0 (dx + b0 dy), theta_h = dy.

Two routes to the potential phi with 2 d dbar phi = H_SF - H_OV:
``ClosedFormPotential`` integrates the fibre moment map explicitly and
solves the base equation with the Bessel modes, while ``solve_potential``
works from sampled (alpha, beta, gamma) with Fourier modes in the fibre
coordinate q = x2 / Im tau and a Chebyshev x Fourier Poisson solve on the
annulus.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import (ConfigError, DomainError, NonHolomorphicError, ObstructionError,
                     PositivityError)
from .geometry_core import Point, TwoForm, frame_hermitian, hessian_fd, hermitian_to_array
from .ooguri_vafa import (DEFAULT_JMAX, OVConfig, OVPotential, bessel_mode_count,
                          check_positivity, ov_period_pair)
from .semiflat import PeriodPair, SemiFlatMetric, semiflat_fields

OBSTRUCTION_TOL = 1e-7

# 1 - S(s) with S the septic smoothstep 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7 (C^3 at s = 0, 1)
_SEPTIC = np.array([0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0])


def smoothstep(s, k=0):
    """k-th derivative of the septic smoothstep, clamped outside [0, 1]."""
    s = np.asarray(s, dtype=float)
    c = np.polynomial.polynomial.polyder(_SEPTIC, k) if k else _SEPTIC
    val = np.polynomial.polynomial.polyval(np.clip(s, 0.0, 1.0), c)
    if k == 0:
        return np.where(s >= 1.0, 1.0, np.where(s <= 0.0, 0.0, val))
    return np.where((s <= 0.0) | (s >= 1.0), 0.0, val)


@dataclass(frozen=True)
class GlueConfig:
    """Annulus r1 < |y| < r2 inside the patch |y| < r; cutoff in t = |y|^2."""

    eps: float
    r1: float = 0.4
    r2: float = 0.6
    r: float = 0.9

    def __post_init__(self):
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if not 0 < self.r1 < self.r2 < self.r < 1:
            raise ConfigError("radii must satisfy 0 < r1 < r2 < r < 1")

    def _s(self, t):
        return (np.asarray(t, dtype=float) - self.r1 ** 2) / (self.r2 ** 2 - self.r1 ** 2)

    def psi(self, t, k=0):
        """k-th t-derivative of psi(t), psi = 1 for t <= r1^2 and 0 for t >= r2^2."""
        scale = (self.r2 ** 2 - self.r1 ** 2) ** -k
        v = smoothstep(self._s(t), k) * scale
        return 1.0 - v if k == 0 else -v


# --- frame algebra for x1-invariant forms ----------------------------------------

def semiflat_background(periods: PeriodPair, y):
    """T = Im tau and tau' with tau1 = 1; T must be positive."""
    t1 = periods.tau1
    if t1.c != 0 or len(t1.a) != 1 or t1.a[0] != 1:
        raise DomainError("the gluing frame needs the coordinate with tau1 = 1")
    T = np.imag(periods.tau2(y))
    if np.any(T <= 0):
        raise DomainError("Im tau must be positive on the annulus")
    return T, periods.tau2.derivative(y)


def to_frame(H00, H10, H11, T, b0):
    """(alpha, beta, gamma) of H in the coframe (W0 (dx + b0 dy), dy), W0 = 1/T."""
    alpha = T * T * H00
    beta = T * (H10 - b0 * H00)
    gamma = np.abs(b0) ** 2 * H00 - 2.0 * np.real(np.conj(b0) * H10) + H11
    return alpha, beta, gamma


def from_frame(alpha, beta, gamma, T, b0):
    H00 = alpha / (T * T)
    H10 = beta / T + b0 * H00
    H11 = gamma - np.abs(b0) ** 2 * H00 + 2.0 * np.real(np.conj(b0) * H10)
    return H00, H10, H11


def frame_difference_fields(W, b, W0, b0, eps):
    """Coefficients of omega_SF - omega (eps W0, b0 against W, b) in the W0 frame."""
    alpha = eps / W0 - W / W0 ** 2
    beta = (W / W0) * (b0 - b)
    gamma = 1.0 / (eps * W0) - 1.0 / W - W * np.abs(b - b0) ** 2
    return alpha, beta, gamma


def frame_difference(cfg: OVConfig, x2, y, j_max=DEFAULT_JMAX):
    """(alpha, beta, gamma) of omega_SF - omega_OV at arrays (x2, y)."""
    if cfg.n_fold != 1:
        raise ConfigError("gluing is implemented for a single I1 fibre per patch")
    x2, y = np.broadcast_arrays(np.asarray(x2, dtype=float), np.asarray(y, dtype=complex))
    if np.any(y == 0):
        raise DomainError("the frame difference needs y != 0")
    pot = OVPotential(cfg, j_max)
    W, b, _ = pot.frame(x2, y)
    m = SemiFlatMetric(ov_period_pair(cfg), cfg.eps)
    Wsf, b0 = semiflat_fields(m, x2 * 1j, y)
    return frame_difference_fields(W, b, Wsf / cfg.eps, b0, cfg.eps)


# --- annulus grid and spectral operators ------------------------------------------

def _cheb(n):
    """Chebyshev-Gauss-Lobatto nodes on [-1, 1] (descending) and the differentiation matrix."""
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (X + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


class AnnulusGrid:
    """Tensor grid (q, rho, theta): q uniform in [0, 1), rho on Chebyshev
    nodes of [rho_a, rho_b], theta uniform. Arrays have shape (n_q, n_rho+1, n_theta)."""

    def __init__(self, rho_a, rho_b, n_rho=24, n_theta=32, n_q=32):
        if not 0 < rho_a < rho_b:
            raise DomainError("annulus needs 0 < rho_a < rho_b")
        self.rho_a, self.rho_b = float(rho_a), float(rho_b)
        xc, D = _cheb(n_rho)
        half = 0.5 * (rho_b - rho_a)
        self.rho = 0.5 * (rho_a + rho_b) + half * xc
        self.D = D / half
        self.theta = 2 * np.pi * np.arange(n_theta) / n_theta
        self.q = np.arange(n_q) / n_q
        self.kq = np.fft.fftfreq(n_q, 1.0 / n_q)
        self.kt = np.fft.fftfreq(n_theta, 1.0 / n_theta)
        self.Q = self.q[:, None, None]
        self.R = self.rho[None, :, None]
        self.TH = self.theta[None, None, :]
        self.y = self.rho[:, None] * np.exp(1j * self.theta[None, :])
        self.shape = (n_q, n_rho + 1, n_theta)

    def d_rho(self, f):
        return np.einsum("ij,...jk->...ik", self.D, f)

    @staticmethod
    def _spec(f, k, order, axis):
        ik = (2j * np.pi if axis == 0 else 1j) * k
        if order % 2 and k.size % 2 == 0:
            ik = ik.copy()
            ik[k.size // 2] = 0.0
        sh = [1] * f.ndim
        sh[axis] = k.size
        return np.fft.ifft(np.fft.fft(f, axis=axis) * (ik ** order).reshape(sh), axis=axis)

    def d_q(self, f, order=1):
        return self._spec(f, self.kq, order, 0)

    def d_theta(self, f, order=1):
        return self._spec(f, self.kt, order, f.ndim - 1)


class _Background:
    def __init__(self, grid: AnnulusGrid, periods: PeriodPair):
        T, dtau = semiflat_background(periods, grid.y)
        self.T = T[None]
        self.a = (dtau / 2j / T)[None]          # d_y T / T
        self.b0 = -grid.Q * dtau[None]          # b0 at x2 = q T


def hermitian_of_potential(phi, grid: AnnulusGrid, bg: _Background):
    """(H00, H10, H11) of 2 d dbar phi for phi(q, rho, theta) periodic in q.

    Derivatives in y are taken at fixed x2 = q T(y); T is harmonic.
    """
    R, TH, Q = grid.R, grid.TH, grid.Q
    T, a = bg.T, bg.a
    e = np.exp(-1j * TH)

    def Dy(f):
        return 0.5 * e * (grid.d_rho(f) - 1j * grid.d_theta(f) / R)

    def Dyb(f):
        return 0.5 * np.conj(e) * (grid.d_rho(f) + 1j * grid.d_theta(f) / R)

    pq = np.real(grid.d_q(phi))
    pqq = np.real(grid.d_q(phi, 2))
    fr = grid.d_rho(phi)
    lap = grid.d_rho(fr) + fr / R + np.real(grid.d_theta(phi, 2)) / R ** 2
    H00 = pqq / (2 * T * T)
    H10 = 1j * (Dy(pq) - a * pq - Q * a * pqq) / T
    aa = np.abs(a) ** 2
    H11 = 2 * (0.25 * lap + Q * aa * pq - Q * np.conj(a) * Dy(pq) - Q * a * Dyb(pq)
               + Q * aa * (pq + Q * pqq))
    return H00, H10, np.real(H11)


def _poisson_dirichlet(rhs, grid: AnnulusGrid):
    """Solve Delta u = rhs on the annulus with u = 0 on both circles."""
    r = grid.rho
    D = grid.D
    fh = np.fft.fft(rhs, axis=-1)
    out = np.empty_like(fh)
    for j, k in enumerate(grid.kt):
        L = D @ D + np.diag(1.0 / r) @ D - np.diag(k * k / r ** 2)
        g = fh[:, j].copy()
        L[0] = 0.0
        L[-1] = 0.0
        L[0, 0] = L[-1, -1] = 1.0
        g[0] = g[-1] = 0.0
        out[:, j] = np.linalg.solve(L, g)
    return np.real(np.fft.ifft(out, axis=-1))


class PotentialSolution(NamedTuple):
    phi: np.ndarray
    residual: float
    alpha_mean: float
    beta_mean: float


def solve_potential(alpha, beta, gamma, grid: AnnulusGrid, periods: PeriodPair, eps,
                    tol=OBSTRUCTION_TOL):
    """phi on the grid with 2 d dbar phi equal to the form (alpha, beta, gamma).

    The fibre part solves phi_qq = 2 alpha mode by mode and is pinned to
    zero on the section q = 0; the rest is a function on the base solving
    Delta phi_0 = 2 gamma_0 with zero boundary values, which removes the
    harmonic ambiguity. The residual is relative to the largest frame
    coefficient of the target and taken over interior rings: the boundary
    rows of the Chebyshev second derivative amplify rounding in the data by
    about n_rho^4, which swamps the solve there.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    gamma = np.asarray(gamma, dtype=float)
    am = float(np.abs(alpha.mean(axis=0)).max())
    bm = float(np.abs(beta.mean(axis=0)).max())
    if am > tol * eps or bm > tol * eps:
        raise ObstructionError("fibre integrals do not vanish: |<alpha>| = %.3g, |<beta>| = %.3g"
                               % (am, bm))
    bg = _Background(grid, periods)
    target = from_frame(alpha, beta, gamma, bg.T, bg.b0)
    ah = np.fft.fft(alpha, axis=0)
    k = grid.kq.reshape(-1, 1, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ph = np.where(k == 0, 0.0, -2.0 * ah / (2 * np.pi * k) ** 2)
    phi_v = np.real(np.fft.ifft(ph, axis=0))
    phi_v = phi_v - phi_v[:1]
    Hv = hermitian_of_potential(phi_v, grid, bg)
    rem = [t - v for t, v in zip(target, Hv)]
    gamma0 = to_frame(*rem, bg.T, bg.b0)[2].mean(axis=0)
    phi0 = _poisson_dirichlet(2.0 * gamma0, grid)
    phi = phi_v + phi0[None]
    H = hermitian_of_potential(phi, grid, bg)
    got = to_frame(*H, bg.T, bg.b0)
    scale = max(float(np.abs(alpha).max()), float(np.abs(beta).max()), float(np.abs(gamma).max()))
    inner = slice(1, -1)
    err = max(float(np.abs(g - t)[:, inner].max()) for g, t in zip(got, (alpha, beta, gamma)))
    return PotentialSolution(phi, err / scale if scale > 0 else err, am, bm)


# --- closed-form potential for the OV - SF difference ---------------------------

class ClosedFormPotential:
    """phi = phi_v(x2, y) + phi_0(y) for omega_SF - omega_OV with one I1 fibre.

    With V = Vbar + sum c_m cos(lam_m u), c_m = K0(lam_m |y|) / (pi eps), and
    U(x2, y) the fibre height with int_0^U V = -x2,
        phi_v = -2 [-x2^2 / (2 Vbar) + Vbar U^2 / 2 + sum c_m (U sin(lam U)/lam + (cos(lam U) - 1)/lam^2)],
        phi_0 = -(2/(pi eps)) sum K0(lam |y|) / lam^2 - (a + c log|y|),
    with a, c chosen so that phi_0 vanishes on |y| = rho_a and rho_b.
    Valid where the Bessel series is used, |y| >= eps/pi.
    """

    def __init__(self, cfg: OVConfig, rho_a, rho_b, j_max=DEFAULT_JMAX):
        if cfg.n_fold != 1:
            raise ConfigError("gluing is implemented for a single I1 fibre per patch")
        self.cfg = cfg
        self.pot = OVPotential(cfg, j_max)
        self.periods = ov_period_pair(cfg)
        self.rho_a, self.rho_b = float(rho_a), float(rho_b)
        self.m_max = bessel_mode_count(0.5 * self.rho_a, cfg.eps)
        self.lam = 2 * np.pi * np.arange(1, self.m_max + 1) / cfg.eps
        pa, pb = self._particular(rho_a), self._particular(rho_b)
        # a + c log rho matches the particular solution on both circles
        self.c = (pb - pa) / math.log(rho_b / rho_a)
        self.a = pa - self.c * math.log(rho_a)

    def _particular(self, rho):
        return float(-2.0 / (np.pi * self.cfg.eps) * np.sum(special.k0(self.lam * rho) / self.lam ** 2))

    def _modes(self, rho):
        z = self.lam * rho[..., None]
        return special.k0(z), special.k1(z)

    def _check(self, y):
        rho = np.abs(y)
        if np.any(rho < self.cfg.eps / np.pi) or np.any(rho < 0.5 * self.rho_a):
            raise DomainError("closed-form potential needs |y| >= max(eps/pi, rho_a/2)")
        return rho

    def phi0(self, y):
        rho = self._check(np.asarray(y, dtype=complex))
        k0, _ = self._modes(rho)
        part = -2.0 / (np.pi * self.cfg.eps) * np.sum(k0 / self.lam ** 2, axis=-1)
        return part - (self.a + self.c * np.log(rho))

    def values(self, x2, y):
        """(phi, phi_x2, phi_y) at arrays; phi_y is the d/dy derivative at fixed x2."""
        x2, y = np.broadcast_arrays(np.asarray(x2, dtype=float), np.asarray(y, dtype=complex))
        rho = self._check(y)
        eps = self.cfg.eps
        T, dtau = semiflat_background(self.periods, y)
        Vbar = T / eps
        Vbar_y = dtau / 2j / eps
        U = self.pot.solve_u3(x2, y)
        k0, k1 = self._modes(rho)
        lam = self.lam
        cm = k0 / (np.pi * eps)
        # d_y K0(lam rho) = -lam K1 conj(y) / (2 rho)
        cm_y = -lam * k1 / (np.pi * eps) * (np.conj(y) / (2 * rho))[..., None]
        lu = lam * U[..., None]
        cosm1 = np.cos(lu) - 1.0
        F = (-x2 ** 2 / (2 * Vbar) + 0.5 * Vbar * U ** 2
             + np.sum(cm * (U[..., None] * np.sin(lu) / lam + cosm1 / lam ** 2), axis=-1))
        dF = (x2 ** 2 * Vbar_y / (2 * Vbar ** 2) - 0.5 * Vbar_y * U ** 2
              + np.sum(cm_y * cosm1 / lam ** 2, axis=-1))
        phi0 = -2.0 / (np.pi * eps) * np.sum(k0 / lam ** 2, axis=-1) - (self.a + self.c * np.log(rho))
        phi0_y = (2.0 / (np.pi * eps) * np.sum(k1 / lam, axis=-1) * np.conj(y) / (2 * rho)
                  - self.c / (2 * y))
        phi = -2.0 * F + phi0
        phi_x2 = -2.0 * (-x2 / Vbar - U)
        phi_y = -2.0 * dF + phi0_y
        return phi, phi_x2, phi_y


# --- the glued metric -----------------------------------------------------------

def _bump(glue: GlueConfig, t):
    """Radial density chi(t) on the annulus with integral 1 over the base."""
    s = glue._s(t)
    inside = (s > 0) & (s < 1)
    w = np.where(inside, (np.clip(s, 0, 1) * (1 - np.clip(s, 0, 1))) ** 4, 0.0)
    # int_0^1 (s(1-s))^4 ds = 1/630; d^2y = pi dt = pi (r2^2 - r1^2) ds
    return w * 630.0 / (np.pi * (glue.r2 ** 2 - glue.r1 ** 2))


@dataclass
class GluedMetric:
    """omega_new = omega_SF - i d dbar(psi(|y|^2) phi) + a chi(|y|^2) (i/2) dy ^ dybar.

    The zero sections of both models sit at x = 0, so sigma = 0. The form is
    stored as H = H_ref + K with H_ref the frame matrix of the semi-flat
    (outer) or OV (inner) metric, whose determinant is 1 identically; K
    vanishes outside the annulus, so there the defect is zero exactly.
    """

    ov: OVConfig
    glue: GlueConfig
    j_max: int = DEFAULT_JMAX
    vol_shift: float = 0.0
    check: bool = True
    semiflat: SemiFlatMetric = field(init=False)

    def __post_init__(self):
        if abs(self.ov.eps - self.glue.eps) > 0:
            raise ConfigError("OV and gluing eps differ")
        if self.ov.n_fold != 1:
            raise ConfigError("gluing is implemented for a single I1 fibre per patch")
        if self.glue.r1 < self.ov.eps / np.pi:
            raise ConfigError("the annulus must lie in the Bessel region |y| >= eps/pi")
        if self.check:
            check_positivity(self.ov)
        self.semiflat = SemiFlatMetric(ov_period_pair(self.ov), self.ov.eps)
        self.pot = OVPotential(self.ov, self.j_max)
        self.potential = ClosedFormPotential(self.ov, self.glue.r1, self.glue.r2, self.j_max)
        if self.check:
            low, where = positivity_scan(self, n_y=24, n_q=8)
            if not low > 0:
                raise PositivityError("glued form not positive: eigenvalue %.3g at %r"
                                      % (low, where), low, where)

    @property
    def eps(self):
        return self.ov.eps

    @property
    def radius(self):
        return self.glue.r

    def parts(self, x2, y):
        """Reference frame (W, b) and correction K = (K00, K10, K11) at arrays."""
        x2, y = np.broadcast_arrays(np.asarray(x2, dtype=float), np.asarray(y, dtype=complex))
        shape = x2.shape
        x2, y = x2.reshape(-1), y.reshape(-1)
        t = np.abs(y) ** 2
        g = self.glue
        W = np.empty(x2.shape)
        b = np.empty(x2.shape, dtype=complex)
        K00 = np.zeros(x2.shape)
        K10 = np.zeros(x2.shape, dtype=complex)
        K11 = np.zeros(x2.shape)
        inner = t <= g.r1 ** 2
        outer = ~inner
        if inner.any():
            if np.any(y[inner] == 0):
                raise DomainError("the OV frame is singular on y = 0; sample off the axis")
            W[inner], b[inner], _ = self.pot.frame(x2[inner], y[inner])
        if outer.any():
            W[outer], b[outer] = semiflat_fields(self.semiflat, 1j * x2[outer], y[outer])
        ann = (t > g.r1 ** 2) & (t < g.r2 ** 2)
        if ann.any():
            xa, ya, ta = x2[ann], y[ann], t[ann]
            Wo, bo, _ = self.pot.frame(xa, ya)
            Hs = frame_hermitian(W[ann], b[ann])
            Ho = frame_hermitian(Wo, bo)
            phi, phi_x2, phi_y = self.potential.values(xa, ya)
            psi, d1, d2 = g.psi(ta), g.psi(ta, 1), g.psi(ta, 2)
            phi_x = -0.5j * phi_x2
            D = Hs - Ho
            K00[ann] = -psi * np.real(D[:, 0, 0])
            K10[ann] = -psi * D[:, 1, 0] - 2 * d1 * np.conj(ya) * np.conj(phi_x)
            K11[ann] = (-psi * np.real(D[:, 1, 1])
                        - 2 * (2 * d1 * np.real(ya * phi_y) + (d2 * ta + d1) * phi))
            K11[ann] += self.vol_shift * _bump(g, ta)
        return (W.reshape(shape), b.reshape(shape),
                (K00.reshape(shape), K10.reshape(shape), K11.reshape(shape)))

    def hermitian(self, x2, y):
        W, b, (K00, K10, K11) = self.parts(x2, y)
        H = frame_hermitian(W, b)
        H[..., 0, 0] += K00
        H[..., 1, 0] += K10
        H[..., 0, 1] += np.conj(K10)
        H[..., 1, 1] += K11
        return H

    def det_minus_one(self, x2, y):
        """det H - 1, expanded about the unimodular reference frame."""
        W, b, (K00, K10, K11) = self.parts(x2, y)
        H = frame_hermitian(W, b)
        lin = (np.real(H[..., 0, 0]) * K11 + K00 * np.real(H[..., 1, 1])
               - 2 * np.real(np.conj(H[..., 1, 0]) * K10))
        return lin + K00 * K11 - np.abs(K10) ** 2


def glue(eps, h_series=(1.0,), r1=0.4, r2=0.6, r=0.9, j_max=DEFAULT_JMAX, check=True):
    return GluedMetric(OVConfig(eps, tuple(h_series), r), GlueConfig(eps, r1, r2, r), j_max,
                       check=check)


def glued_form(gm: GluedMetric, at: Point) -> TwoForm:
    return TwoForm(hermitian_to_array(gm.hermitian(float(at.x.imag), complex(at.y))))


def ricci_defect_at(gm: GluedMetric, x2, y):
    """F = log(Omega ^ Omega-bar / 2 omega^2) = -log det H."""
    return 0.0 - np.log1p(gm.det_minus_one(x2, y))


def closedness_residual(gm: GluedMetric, at: Point, h=1e-3):
    """max |d omega| by centered differences; the form does not depend on x1."""
    v = at.as_real()

    def form(w):
        return hermitian_to_array(gm.hermitian(w[1], complex(w[2], w[3])))

    grad = np.zeros((4, 4, 4))
    for c in (1, 2, 3):
        e = np.zeros(4)
        e[c] = h
        grad[c] = (form(v + e) - form(v - e)) / (2 * h)
    d = grad + np.transpose(grad, (1, 2, 0)) + np.transpose(grad, (2, 0, 1))
    return float(np.abs(d).max())


def ricci_form_norm(gm: GluedMetric, at: Point, h=1e-3):
    """Largest entry of i d dbar F, the Ricci form of the glued metric, by differences of F."""
    def F(w):
        return float(ricci_defect_at(gm, w[1], complex(w[2], w[3])))

    _, _, hess = hessian_fd(F, at.as_real(), h)
    J = np.array([[1.0, 1.0j, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0j]]) / 2.0
    dd = np.einsum("ja,kb,ab->jk", np.conj(J), J, hess)
    return float(np.abs(2.0 * dd).max())


def _fibre_grid(gm: GluedMetric, y, n_q):
    T, _ = semiflat_background(gm.semiflat.periods, y)
    q = np.arange(n_q) / n_q
    return q[:, None] * T[None, :], np.broadcast_to(y, (n_q, y.size)), T


def positivity_scan(gm: GluedMetric, n_y=64, n_q=16):
    """Smallest eigenvalue of H over an n_y x n_y grid on the disc |y| < r times n_q fibre points."""
    s = (np.arange(n_y) + 0.5) / n_y * 2 - 1
    Y = (s[:, None] + 1j * s[None, :]).reshape(-1) * gm.glue.r
    Y = Y[np.abs(Y) < gm.glue.r]
    X2, YY, _ = _fibre_grid(gm, Y, n_q)
    H = gm.hermitian(X2, YY)
    tr = 0.5 * np.real(H[..., 0, 0] + H[..., 1, 1])
    dif = 0.5 * np.real(H[..., 0, 0] - H[..., 1, 1])
    low = tr - np.sqrt(dif ** 2 + np.abs(H[..., 1, 0]) ** 2)
    i = np.unravel_index(np.argmin(low), low.shape)
    return float(low[i]), Point(complex(0.0, X2[i]), complex(YY[i]))


def ricci_defect(gm: GluedMetric, n_rho=24, n_theta=32, n_q=32):
    """sup |F| over a polar grid of the closed disc |y| <= r (F vanishes off the annulus)."""
    g = gm.glue
    rho = np.concatenate([np.linspace(0.05, g.r1, 4), np.linspace(g.r1, g.r2, n_rho)[1:-1],
                          np.linspace(g.r2, g.r, 4)])
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    Y = (rho[:, None] * np.exp(1j * th[None, :])).reshape(-1)
    X2, YY, _ = _fibre_grid(gm, Y, n_q)
    F = np.abs(ricci_defect_at(gm, X2, YY))
    i = np.unravel_index(np.argmax(F), F.shape)
    return float(F[i]), Point(complex(0.0, X2[i]), complex(YY[i]))


def decay_fit(eps_list, values):
    """Least-squares line log v = c0 + c1 / eps; returns (c1, c0, R^2)."""
    x = 1.0 / np.asarray(eps_list, dtype=float)
    yv = np.log(np.asarray(values, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, yv, rcond=None)
    fit = A @ coef
    ss = float(np.sum((yv - yv.mean()) ** 2))
    r2 = 1.0 - float(np.sum((yv - fit) ** 2)) / ss if ss > 0 else 1.0
    return float(coef[0]), float(coef[1]), r2


def fibre_volume(gm: GluedMetric, y, n_q=256):
    """int over the fibre at y of omega, via the periodic trapezoid rule in x2."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    X2, YY, T = _fibre_grid(gm, y, n_q)
    H = gm.hermitian(X2, YY)
    return np.real(H[..., 0, 0]).mean(axis=0) * T


def _annulus_quadrature(glue: GlueConfig, n_rho, n_theta):
    xs, ws = np.polynomial.legendre.leggauss(n_rho)
    half = 0.5 * (glue.r2 - glue.r1)
    rho = glue.r1 + half * (xs + 1)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    Y = (rho[:, None] * np.exp(1j * th[None, :])).reshape(-1)
    w = np.repeat(ws * half * rho, n_theta) * (2 * np.pi / n_theta)
    return Y, w


def volume_mismatch(gm: GluedMetric, n_rho=24, n_theta=32, n_q=32):
    """(int omega^2 - int (Re Omega)^2, int (Re Omega)^2) over the patch |y| < r.

    Both integrands agree off the annulus, so the difference is an annulus
    integral of 2 (det H - 1); the reference volume is 2 int Im tau d^2y.
    """
    Y, w = _annulus_quadrature(gm.glue, n_rho, n_theta)
    X2, YY, T = _fibre_grid(gm, Y, n_q)
    d = gm.det_minus_one(X2, YY)
    mism = float(np.sum(w * T * 2 * d.mean(axis=0)))
    r = gm.glue.r
    h0 = float(np.real(gm.ov.h[0]))
    ref = 2 * (-(0.5 * r * r * math.log(r) - 0.25 * r * r) + math.pi * r * r * h0)
    return mism, ref


def volume_normalization(gm: GluedMetric, **quad):
    """Add a chi(|y|^2) (i/2) dy ^ dybar, chi a fixed bump on the annulus, so that the
    total volumes match; ([omega] + a E)^2 = [omega]^2 + 2 a eps."""
    mism, _ = volume_mismatch(gm, **quad)
    a = gm.vol_shift - mism / (2 * gm.ov.eps)
    new = GluedMetric(gm.ov, gm.glue, gm.j_max, vol_shift=a, check=gm.check)
    return new


# --- translation sections -------------------------------------------------------

def beta_fibre_mode(cfg: OVConfig, y, shift=0.0, n_q=64, j_max=DEFAULT_JMAX):
    """Fibre average beta_0(y) of beta for omega_SF - T*omega_OV, where T
    translates the OV model by the constant ``shift``. Multiply by Im tau
    for the integral over the fibre."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    T, _ = semiflat_background(ov_period_pair(cfg), y)
    q = np.arange(n_q) / n_q
    x2 = q[:, None] * T[None, :]
    yy = np.broadcast_to(y, x2.shape)
    pot = OVPotential(cfg, j_max)
    W, b, _ = pot.frame(x2 + np.imag(shift), yy)
    m = SemiFlatMetric(ov_period_pair(cfg), cfg.eps)
    Wsf, b0 = semiflat_fields(m, 1j * x2, yy)
    _, beta, _ = frame_difference_fields(W, b, Wsf / cfg.eps, b0, cfg.eps)
    return beta.mean(axis=0)


def section_shift(sigma, y, periods: PeriodPair, eps):
    """Change eps (d_y sigma + b0(sigma(y), y)) of beta_0 under translation by sigma."""
    sigma = np.asarray(sigma, dtype=complex)
    y = np.asarray(y, dtype=complex)
    T, dtau = semiflat_background(periods, y)
    s = np.polynomial.polynomial.polyval(y, sigma)
    ds = np.polynomial.polynomial.polyval(y, np.polynomial.polynomial.polyder(sigma)) \
        if sigma.size > 1 else 0.0 * y
    return eps * (ds - np.imag(s) * dtau / T)


def translation_section(beta0, y, periods: PeriodPair, eps, degree=4, tol=1e-9, rtol=1e-6):
    """Polynomial sigma with beta0 - eps (sigma' + b0(sigma, y)) = 0 on the samples.

    Returns (coefficients, residual). If beta0 is already below ``tol`` the
    zero section is returned. A real constant in sigma is invisible to
    x1-invariant forms; the least-squares solution sets it to zero.
    """
    beta0 = np.asarray(beta0, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if np.abs(beta0).max() <= tol:
        return np.zeros(1, dtype=complex), float(np.abs(beta0).max())
    cols = []
    for k in range(degree + 1):
        for unit in (1.0, 1j):
            c = np.zeros(k + 1, dtype=complex)
            c[k] = unit
            cols.append(section_shift(c, y, periods, eps))
    A = np.array(cols).T
    Ar = np.vstack([A.real, A.imag])
    br = np.concatenate([beta0.real, beta0.imag])
    sol, *_ = np.linalg.lstsq(Ar, br, rcond=None)
    coef = sol[0::2] + 1j * sol[1::2]
    resid = float(np.abs(beta0 - section_shift(coef, y, periods, eps)).max())
    if resid > max(tol, rtol * float(np.abs(beta0).max())):
        raise NonHolomorphicError("beta_0 is not matched by a holomorphic section: residual %.3g"
                                  % resid)
    return coef, resid
