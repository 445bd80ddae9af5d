"""The periodic monopole potential near a nodal fibre and the metric it defines.

A single monopole chain of period E in u has potential

    V0(u, y) = 1/4pi sum_n (1/r_n - a_n),  r_n = |(y, u + nE)|,

with a_n = 1/(|n| E) for n != 0 and a_0 = 2(log 2E - gamma)/E. Two
evaluations are provided: the lattice sum with paired counterterms and an
analytic tail, and the Fourier-Bessel series in u. The full potential is
V = sum_j V0(u - j eps) + f(y)/eps with E = n eps for an I_n fibre (j runs
over 0..n-1), and f = Re h.
"""
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jets
from .errors import (BranchError, ConfigError, DomainError, PositivityError,
                     SingularPointError)
from .gibbons_hawking import GHField, curvature_from_jet, holomorphic_im_jet
from .kernels import lattice_moments
from .semiflat import PeriodPair, PeriodSeries
from .special_functions import (bessel_k0, bessel_k1, bessel_kn_sequence,
                                digamma, euler_gamma, power_tail, zeta_odd)

FOUR_PI = 4.0 * np.pi
DEFAULT_JMAX = 256
TAIL_ORDER = 12
# Bessel modes are kept while K0(2 pi m |y| / E) can matter at double precision
_BESSEL_CUTOFF = 40.0


# --- tail polynomials ----------------------------------------------------------

def _legendre_q(kmax):
    """Q_k(u, s) = R^k P_k(u/R), R^2 = u^2 + s, as arrays C[a, j] of u^a s^j."""
    size = kmax + 2
    Q = [np.zeros((size, size)) for _ in range(kmax + 1)]
    Q[0][0, 0] = 1.0
    if kmax >= 1:
        Q[1][1, 0] = 1.0
    for k in range(1, kmax):
        uq = np.zeros((size, size))
        uq[1:, :] = Q[k][:-1, :]
        r2 = np.zeros((size, size))
        r2[2:, :] += Q[k - 1][:-2, :]
        r2[:, 1:] += Q[k - 1][:, :-1]
        Q[k + 1] = ((2 * k + 1) * uq - k * r2) / (k + 1)
    return Q


_Q = _legendre_q(TAIL_ORDER)


def _tail_coeffs(E, N):
    """C[a, j] with sum_{n > N} (1/r_+ + 1/r_- - 2/(nE)) = sum C[a, j] u^a s^j.

    From the Legendre expansion of 1/|nE e3 -+ x|; only even k survive the
    pairing. Valid for R < (N + 1) E / 2.
    """
    C = np.zeros_like(_Q[0])
    for k in range(2, TAIL_ORDER + 1, 2):
        C += 2.0 * E ** (-k - 1) * power_tail(k + 1, N) * _Q[k]
    return C


def _tail_ok(u, rho2, E, N):
    return N >= 16 and np.all(np.sqrt(u * u + rho2) < 0.5 * (N + 1) * E)


def _coeffs_3d(C):
    """Convert C[a, j] in (u, s = w1^2 + w2^2) to coef[b1, b2, a] in (w1, w2, u)."""
    na, nj = C.shape
    out = np.zeros((2 * nj, 2 * nj, na))
    for a in range(na):
        for j in range(nj):
            if C[a, j] == 0.0:
                continue
            for i in range(j + 1):
                out[2 * i, 2 * (j - i), a] += C[a, j] * math.comb(j, i)
    return out


def a0(E):
    return 2.0 * (math.log(2.0 * E) - euler_gamma()) / E


def _reduce(u, E):
    k = np.round(np.asarray(u, dtype=float) / E)
    return u - k * E, k


# --- single chain: values ------------------------------------------------------

def v0_lattice(u, y, eps, j_max=DEFAULT_JMAX, accelerate=True):
    """Lattice sum of V0 truncated at |n| <= j_max, with the analytic tail.

    Without acceleration the truncation error is O(rho^2 / (j_max eps^3)).
    With the tail through Legendre order 12 the error at j_max = 256 is at
    the rounding level for |y| < 1 and eps in [0.05, 1].
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=complex)
    u, y = np.broadcast_arrays(u, y)
    shape = u.shape
    ur, _ = _reduce(u.reshape(-1), eps)
    rho2 = np.abs(y.reshape(-1)) ** 2
    if np.any((rho2 == 0) & (ur == 0)):
        raise SingularPointError("V0 is singular on {0} x eps Z")
    M = lattice_moments(np.ascontiguousarray(ur), np.ascontiguousarray(rho2), float(eps), int(j_max), 0)
    val = M[:, 0, 0] - a0(eps)
    if accelerate and _tail_ok(ur, rho2, eps, j_max):
        val = val + np.polynomial.polynomial.polyval2d(ur, rho2, _tail_coeffs(eps, j_max))
    val = val / FOUR_PI
    return float(val[0]) if shape == () else val.reshape(shape)


def bessel_mode_count(rho, E):
    return max(1, int(math.ceil(_BESSEL_CUTOFF * E / (2 * math.pi * rho))))


def v0_bessel(u, y, eps, m_max=None, with_bound=False):
    """-(1/4pi eps) log|y|^2 + sum_{m >= 1} (1/pi eps) cos(2 pi m u/eps) K0(2 pi m |y|/eps).

    Each term is the sum of the +-m complex exponentials. With ``with_bound``
    also returns the bound (1/pi eps) K0(x_{M+1}) / (1 - exp(-x_1)) on the
    omitted modes.
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=complex)
    u, y = np.broadcast_arrays(u, y)
    rho = np.abs(y)
    if np.any(rho == 0):
        raise SingularPointError("the Bessel expansion needs y != 0")
    if m_max is None:
        m_max = bessel_mode_count(float(rho.min()), eps)
    val = -np.log(rho * rho) / (FOUR_PI * eps) + v0_oscillation(u, rho, eps, m_max)
    if with_bound:
        x1 = 2 * np.pi * rho / eps
        bound = bessel_k0((m_max + 1) * x1) / (np.pi * eps) / (1.0 - np.exp(-x1))
        return val, bound
    return val


def v0_oscillation(u, rho, eps, m_max=None):
    """V0 minus its fibre average, summed from the Bessel modes."""
    u = np.asarray(u, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if m_max is None:
        m_max = bessel_mode_count(float(np.min(rho)), eps)
    acc = np.zeros(np.broadcast(u, rho).shape)
    for m in range(m_max, 0, -1):
        lam = 2 * np.pi * m / eps
        acc = acc + np.cos(lam * u) * bessel_k0(lam * rho)
    return acc / (np.pi * eps)


def v0_on_axis(u, eps):
    """V0(u, 0) from the digamma closed form; u not in eps Z."""
    s = float(u) / eps
    s -= math.floor(s)
    if s == 0.0:
        raise SingularPointError("V0 is singular on {0} x eps Z")
    if s > 0.5:
        s = 1.0 - s
    val = 1.0 / s - digamma(1.0 + s) - digamma(1.0 - s) - 2.0 * math.log(2.0 * eps)
    return val / (FOUR_PI * eps)


def singular_fibre_profile(s, eps, terms=60):
    """2/(1 - s^2) + 1/s - 2 log eps + G + 2 g(s), G = -2 log 2 + 2 gamma - 2.

    g(s) = sum_{n >= 1} (zeta(2n+1) - 1) s^(2n). The value equals
    4 pi eps V0(s eps, 0).
    """
    s = float(s)
    if not 0.0 < s < 1.0:
        raise DomainError("the profile needs 0 < s < 1")
    G = -2.0 * math.log(2.0) + 2.0 * euler_gamma() - 2.0
    g = 0.0
    for n in range(terms, 0, -1):
        g += (zeta_odd(2 * n + 1) - 1.0) * s ** (2 * n)
    return 2.0 / (1.0 - s * s) + 1.0 / s - 2.0 * math.log(eps) + G + 2.0 * g


def profile_constant():
    return -2.0 * math.log(2.0) + 2.0 * euler_gamma() - 2.0


# --- single chain: jets and primitives ------------------------------------------

_PROJ = np.diag([1.0, 1.0, 0.0])
_ZS = np.arange(-2.0, 3.0)
_ZS_INV = np.linalg.inv(np.vander(_ZS, 5, increasing=True))


def _lattice_jet(ur, y1, y2, E, N):
    """Jet of V0 at reduced points from the lattice moments plus the tail.

    The n = 0 term is taken as an exact radial jet; the other terms enter
    through the moments, each radial-jet entry attached to G_k being a
    polynomial of degree <= k in z, recovered by interpolation at 5 nodes.
    """
    batch = ur.shape
    rho2 = y1 * y1 + y2 * y2
    M = lattice_moments(np.ascontiguousarray(ur), np.ascontiguousarray(rho2), float(E), int(N), 4, False)
    out = jets.zeros(batch)
    samples = []
    for t in _ZS:
        w = np.stack([y1, y2, np.full(batch, t)], axis=-1)
        per_k = []
        for k in range(5):
            g = [np.zeros(batch) for _ in range(5)]
            g[k] = np.ones(batch)
            per_k.append(jets.radial(w, g))
        samples.append(per_k)
    for order in range(5):
        for k in range(5):
            vals = np.stack([samples[i][k][order] for i in range(5)])
            coef = np.tensordot(_ZS_INV, vals, axes=(1, 0))
            for m in range(k + 1):
                mk = M[:, k, m].reshape(batch + (1,) * order)
                out[order] = out[order] + coef[m] * mk
    out[0] = M[:, 0, 0].copy()
    w0 = np.stack([y1, y2, ur], axis=-1)
    r = np.sqrt(rho2 + ur * ur)
    g0 = [1 / r, -1 / r ** 3, 3 / r ** 5, -15 / r ** 7, 105 / r ** 9]
    out = jets.add(out, jets.radial(w0, g0))
    if _tail_ok(ur, rho2, E, N):
        out = jets.add(out, jets.polynomial_jet(_coeffs_3d(_tail_coeffs(E, N)), w0))
    out[0] = out[0] - a0(E)
    return jets.scale(out, 1.0 / FOUR_PI)


def _log_radial(E):
    def g(q):
        c = 1.0 / (FOUR_PI * E)
        return [-c * np.log(2 * q), -c / q, c / q ** 2, -2 * c / q ** 3, 6 * c / q ** 4]
    return g


def _bessel_jet(u, y1, y2, E, m_max):
    batch = u.shape
    w = np.stack([y1, y2, u], axis=-1)
    q = 0.5 * (y1 * y1 + y2 * y2)
    rho = np.sqrt(2 * q)
    out = jets.radial(w, _log_radial(E)(q), _PROJ)
    for m in range(1, m_max + 1):
        lam = 2 * np.pi * m / E
        K = bessel_kn_sequence(lam * rho, 4)
        g = [(-lam) ** n * rho ** (-float(n)) * K[n] for n in range(5)]
        c, s = np.cos(lam * u), np.sin(lam * u)
        h = [c, -lam * s, -lam ** 2 * c, lam ** 3 * s, lam ** 4 * c]
        term = jets.mul_separated(jets.radial(w, g, _PROJ), h, 2)
        out = jets.add(out, jets.scale(term, 1.0 / (np.pi * E)))
    return out


def _chain_primitives_bessel(u, y, E, m_max):
    rho = np.abs(y)
    P = -u * np.log(rho * rho) / (FOUR_PI * E)
    B = -1j * u / (2 * np.pi * E * y)
    phase = np.conj(y) / rho
    for m in range(1, m_max + 1):
        lam = 2 * np.pi * m / E
        x = lam * rho
        P = P + bessel_k0(x) * np.sin(lam * u) / (lam * np.pi * E)
        B = B - 1j * phase * bessel_k1(x) * np.sin(lam * u) / (np.pi * E)
    return P, B


def _chain_primitives_lattice(u, y, E, N, chunk=4096):
    """int_0^u V0 and int_0^u 2i d_y V0 by the lattice, for arrays with y != 0."""
    u = np.asarray(u, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=complex).reshape(-1)
    rho2 = np.abs(y) ** 2
    rho = np.sqrt(rho2)
    ur, k = _reduce(u, E)
    n = np.arange(1, N + 1, dtype=float) * E
    P = np.arcsinh(ur / rho) - a0(E) * ur
    for i in range(0, u.size, chunk):
        sl = slice(i, i + chunk)
        uu, rr = ur[sl, None], rho[sl, None]
        P[sl] += np.sum(np.arcsinh((uu + n) / rr) + np.arcsinh((uu - n) / rr) - 2.0 * uu / n, axis=1)
    M = lattice_moments(np.ascontiguousarray(ur), np.ascontiguousarray(rho2), float(E), int(N), 0)
    S = M[:, 0, 1]
    Bc = np.zeros_like(P)
    if _tail_ok(ur, rho2, E, N):
        C = _tail_coeffs(E, N)
        CP = np.polynomial.polynomial.polyint(C, axis=0)
        P += np.polynomial.polynomial.polyval2d(ur, rho2, CP)
        CB = np.polynomial.polynomial.polyint(np.polynomial.polynomial.polyder(C, axis=1), axis=0)
        Bc = np.polynomial.polynomial.polyval2d(ur, rho2, CB)
    P = P / FOUR_PI - k * np.log(rho2) / FOUR_PI
    B = -1j * S / (FOUR_PI * y) + 2j * np.conj(y) * Bc / FOUR_PI - 1j * k / (2 * np.pi * y)
    return P, B


# --- configuration and the full potential -----------------------------------------

@dataclass(frozen=True)
class OVConfig:
    eps: float
    h_series: Sequence[complex] = (1.0,)
    r: float = 0.9
    n_fold: int = 1

    def __post_init__(self):
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if not 0 < self.r < 1:
            raise ConfigError("patch radius r must lie in (0, 1)")
        if int(self.n_fold) != self.n_fold or self.n_fold < 1:
            raise ConfigError("n_fold must be a positive integer")
        th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        for rr in (self.r, 0.5 * self.r):
            yy = rr * np.exp(1j * th)
            v = -np.log(rr * rr) / FOUR_PI + np.real(np.polynomial.polynomial.polyval(yy, self.h))
            if np.min(v) <= 0:
                raise ConfigError("-(1/4pi) log|y|^2 + f(y) must be positive on the disc")

    @property
    def h(self):
        return np.asarray(self.h_series, dtype=complex)

    @property
    def period(self):
        return self.n_fold * self.eps

    def f(self, y):
        return np.real(np.polynomial.polynomial.polyval(np.asarray(y, dtype=complex), self.h))

    def h_derivs(self, y, kmax=4):
        c = self.h
        out = []
        for k in range(kmax + 1):
            ck = np.polynomial.polynomial.polyder(c, k) if c.size > k else np.zeros(1, dtype=complex)
            out.append(np.polynomial.polynomial.polyval(np.asarray(y, dtype=complex), ck))
        return out


@dataclass
class OVPotential:
    """Evaluator for V = sum_j V0(u - j eps; n eps) + f/eps.

    Points with |y| >= E/pi use the Bessel series; closer ones the lattice;
    y = 0 the digamma closed form.
    """

    config: OVConfig
    j_max: int = DEFAULT_JMAX
    crossover: float = field(default=None)

    def __post_init__(self):
        if self.crossover is None:
            self.crossover = self.config.period / np.pi
        self._mode_cache = (None, None)

    def _modes(self, rho):
        """Wavenumbers and K0, K1 of every Bessel mode at the radii ``rho``.

        Keeps the last table, since Newton solves and scans revisit the same radii.
        """
        key = (rho.shape, rho.tobytes())
        if self._mode_cache[0] == key:
            return self._mode_cache[1]
        m_max = bessel_mode_count(float(rho.min()), self.E)
        lam = 2 * np.pi * np.arange(1, m_max + 1) / self.E
        x = rho[:, None] * lam[None, :]
        k0 = np.zeros_like(x)
        k1 = np.zeros_like(x)
        live = x < 745.0
        k0[live] = bessel_k0(x[live])
        k1[live] = bessel_k1(x[live])
        table = (lam, k0, k1)
        self._mode_cache = (key, table)
        return table

    @property
    def E(self):
        return self.config.period

    def _shifts(self):
        return [j * self.config.eps for j in range(self.config.n_fold)]

    def value(self, u, y):
        u = np.asarray(u, dtype=float)
        y = np.asarray(y, dtype=complex)
        u, y = np.broadcast_arrays(u, y)
        shape = u.shape
        uf, yf = u.reshape(-1), y.reshape(-1)
        rho = np.abs(yf)
        out = self.config.f(yf) / self.config.eps
        far = rho >= self.crossover
        axis = rho == 0
        near = ~far & ~axis
        for s in self._shifts():
            if far.any():
                lam, k0, _ = self._modes(rho[far])
                osc = np.sum(np.cos(lam * (uf[far] - s)[:, None]) * k0, axis=1)
                out[far] += -np.log(rho[far] ** 2) / (FOUR_PI * self.E) + osc / (np.pi * self.E)
            if near.any():
                out[near] += v0_lattice(uf[near] - s, yf[near], self.E, self.j_max)
            for i in np.flatnonzero(axis):
                out[i] += v0_on_axis(uf[i] - s, self.E)
        return float(out[0]) if shape == () else out.reshape(shape)

    def gh_value(self, pts):
        pts = np.asarray(pts, dtype=float)
        return self.value(pts[..., 2], pts[..., 0] + 1j * pts[..., 1])

    def jet(self, pts):
        """Fourth-order jet of V in (u1, u2, u3) at points (..., 3), y != 0 or u off the nodes."""
        pts = np.asarray(pts, dtype=float)
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, 3)
        y1, y2, u = flat[:, 0], flat[:, 1], flat[:, 2]
        rho = np.hypot(y1, y2)
        yv = y1 + 1j * y2
        out = holomorphic_im_jet([1j * d for d in self.config.h_derivs(yv)], flat)
        out = jets.scale(out, 1.0 / self.config.eps)
        far = rho >= self.crossover
        for s in self._shifts():
            if far.any():
                m_max = bessel_mode_count(float(rho[far].min()), self.E)
                jf = _bessel_jet(u[far] - s, y1[far], y2[far], self.E, m_max)
                for k in range(5):
                    out[k][far] += jf[k]
            if (~far).any():
                ur, _ = _reduce(u[~far] - s, self.E)
                if np.any((rho[~far] == 0) & (ur == 0)):
                    raise SingularPointError("jet requested at a monopole")
                jn = _lattice_jet(ur, y1[~far], y2[~far], self.E, self.j_max)
                for k in range(5):
                    out[k][~far] += jn[k]
        return [x.reshape(shape + x.shape[1:]) for x in out]

    def primitives(self, y, u3):
        """(int_0^u3 V, int_0^u3 2i d_y V) at fixed y != 0, scalars or arrays."""
        y = np.asarray(y, dtype=complex)
        u3 = np.asarray(u3, dtype=float)
        y, u3 = np.broadcast_arrays(y, u3)
        shape = y.shape
        yf, uf = y.reshape(-1), u3.reshape(-1)
        if np.any(yf == 0):
            raise SingularPointError("primitives need y != 0")
        P = np.zeros(yf.shape)
        B = np.zeros(yf.shape, dtype=complex)
        far = np.abs(yf) >= self.crossover
        for s in self._shifts():
            if far.any():
                yv = yf[far]
                rr = np.abs(yv)
                lam, k0, k1 = self._modes(rr)
                du = uf[far][:, None]
                # int_0^u of cos(lam (v - s)) = (sin(lam (u - s)) + sin(lam s)) / lam
                sn = (np.sin(lam * (du - s)) + np.sin(lam * s)) / lam
                E = self.E
                P[far] += (-uf[far] * np.log(rr * rr) / (FOUR_PI * E)
                           + np.sum(k0 * sn, axis=1) / (np.pi * E))
                B[far] += (-1j * uf[far] / (2 * np.pi * E * yv)
                           - 1j * (np.conj(yv) / rr) * np.sum(lam * k1 * sn, axis=1) / (np.pi * E))
            if (~far).any():
                p1, b1 = _chain_primitives_lattice(uf[~far] - s, yf[~far], self.E, self.j_max)
                p0, b0 = _chain_primitives_lattice(-s + 0 * uf[~far], yf[~far], self.E, self.j_max)
                P[~far] += p1 - p0
                B[~far] += b1 - b0
        dh = self.config.h_derivs(yf, 1)[1]
        P += self.config.f(yf) * uf / self.config.eps
        B += 1j * uf * dh / self.config.eps
        if shape == ():
            return float(P[0]), complex(B[0])
        return P.reshape(shape), B.reshape(shape)


    def solve_u3(self, x2, y, tol=1e-14, maxit=60):
        """u3 with int_0^u3 V = -x2 at fixed y (arrays), by Newton from the mean slope."""
        x2, y = np.broadcast_arrays(np.asarray(x2, dtype=float), np.asarray(y, dtype=complex))
        target = -x2.reshape(-1)
        yf = y.reshape(-1)
        mean = (-np.log(np.abs(yf) ** 2) / FOUR_PI + self.config.f(yf)) / self.config.eps
        u = target / mean
        for _ in range(maxit):
            P, _ = self.primitives(yf, u)
            step = (P - target) / self.value(u, yf)
            u = u - step
            if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(u))):
                break
        return u.reshape(x2.shape)

    def frame(self, x2, y):
        """(W, b) in canonical coordinates with the zero section at x = 0."""
        u = self.solve_u3(x2, y)
        yb = np.broadcast_to(np.asarray(y, dtype=complex), u.shape)
        _, B = self.primitives(yb, u)
        return 1.0 / self.value(u, yb), B, u


def boundary_minimum(cfg: OVConfig, n_theta=64, n_u=16, j_max=DEFAULT_JMAX):
    """Minimum of V over the circle |y| = r times one period, with its location."""
    pot = OVPotential(cfg, j_max)
    th = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    uu = np.linspace(0, cfg.period, n_u, endpoint=False)
    T, U = np.meshgrid(th, uu, indexing="ij")
    y = cfg.r * np.exp(1j * T)
    v = pot.value(U, y)
    i = np.unravel_index(np.argmin(v), v.shape)
    return float(v[i]), (float(U[i]), complex(y[i]))


def check_positivity(cfg: OVConfig):
    """The minimum of V over the closed disc sits on the boundary circle, so
    positivity there decides positivity everywhere."""
    vmin, where = boundary_minimum(cfg)
    if not vmin > 0:
        raise PositivityError("V = %.6g <= 0 on the boundary circle at (u, y) = %r"
                              % (vmin, where), vmin, where)
    return vmin


def positivity_threshold(h_series=(0.0,), r=0.9, n_fold=1, lo=1e-3, hi=50.0, iters=60):
    """Largest eps (within [lo, hi]) for which the boundary minimum stays positive."""
    def ok(e):
        try:
            return boundary_minimum(OVConfig(e, tuple(h_series), r, n_fold), 32, 8)[0] > 0
        except ConfigError:
            return False
    if not ok(lo):
        return 0.0
    if ok(hi):
        return hi
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def ov_value(u, y, cfg: OVConfig, check=True):
    if check:
        check_positivity(cfg)
    return OVPotential(cfg).value(u, y)


def ov_metric(cfg: OVConfig, j_max=DEFAULT_JMAX) -> GHField:
    """GH field of the potential; the connection comes from the fibre primitives."""
    check_positivity(cfg)
    pot = OVPotential(cfg, j_max)

    def domain(u):
        u = np.asarray(u)
        rr = np.hypot(u[..., 0], u[..., 1])
        s = np.mod(u[..., 2], cfg.eps)
        return (rr > 0) | ((s > 0) & (s < cfg.eps))

    return GHField(V=pot.gh_value, period=cfg.period, jet=pot.jet,
                   primitives=pot.primitives, domain=domain)


def ov_period_pair(cfg: OVConfig, cut=np.pi) -> PeriodPair:
    """(1, n[(1/2 pi i) log y + i h(y)]) with the connection constant set to zero."""
    n = cfg.n_fold
    return PeriodPair(PeriodSeries(0.0, (1.0,)),
                      PeriodSeries(n / (2j * np.pi), tuple(1j * n * cfg.h), cut=cut))


def ov_periods(y, cfg: OVConfig, cut=np.pi, cut_tol=0.0):
    y = complex(y)
    if y == 0:
        raise BranchError("periods are multivalued around y = 0")
    p = ov_period_pair(cfg, cut)
    t2 = PeriodSeries(p.tau2.c, p.tau2.a, cut, cut_tol)
    return 1.0 + 0j, complex(t2(y))


def period_by_quadrature(y, cfg: OVConfig, nodes=64, arc_nodes=64):
    """tau2 rebuilt from the metric: Im part from -int V over a fibre circle,
    Re part by integrating the jump of b across one period along the arc
    from |y| to y, starting from Re tau2(|y|) = -n Im h(|y|) (C = 0)."""
    y = complex(y)
    pot = OVPotential(cfg)
    E = cfg.period
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    # split the fibre circle in two so the nodes avoid the monopoles
    im = 0.0
    for a, b in ((0.0, 0.5 * E), (0.5 * E, E)):
        uu = a + 0.5 * (b - a) * (xs + 1)
        im += 0.5 * (b - a) * float(ws @ pot.value(uu, np.full_like(uu, y, dtype=complex)))
    r = abs(y)
    phi = math.atan2(y.imag, y.real)
    xa, wa = np.polynomial.legendre.leggauss(arc_nodes)
    re = -cfg.n_fold * float(np.imag(np.polynomial.polynomial.polyval(r, cfg.h)))
    if phi != 0.0:
        th = 0.5 * phi * (xa + 1)
        acc = 0.0
        for t, w in zip(th, wa):
            yy = r * np.exp(1j * t)
            jump = pot.primitives(yy, E)[1]
            acc += w * np.real(jump * 1j * yy)
        re += 0.5 * phi * acc
    return complex(re, im)


# --- scans -----------------------------------------------------------------------

def decay_check(eps, r0=0.5, r1=0.9, n_r=9, n_u=16, n_theta=4):
    """Smallest C with |V0 + (1/4 pi eps) log|y|^2| <= (C/eps) exp(-2 pi |y|/eps) on the grid.

    The deviation is the oscillating part, summed from the Bessel modes so
    it stays resolvable when it is far below the size of V0.
    """
    rr = np.linspace(r0, r1, n_r)
    uu = np.linspace(0.0, eps, n_u, endpoint=False)
    th = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    R, U, _ = np.meshgrid(rr, uu, th, indexing="ij")
    dev = np.abs(v0_oscillation(U, R, eps))
    ratio = dev * eps * np.exp(2 * np.pi * R / eps)
    return float(ratio.max()), dev


def fibre_diameter(y, cfg: OVConfig, nodes=64):
    """1/2 int V^(1/2) du over one fibre circle plus the shortest circle orbit, min V^(-1/2).

    The u-integral substitutes u = E t^2 on each half so the inverse square
    root singularity at a monopole is integrated exactly.
    """
    y = complex(y)
    E = cfg.period
    pot = OVPotential(cfg)
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (xs + 1)
    w = 0.5 * ws
    total = 0.0
    vmin = np.inf
    n = cfg.n_fold
    # each gap between monopoles is split at its midpoint
    for j in range(n):
        a = j * cfg.eps
        for sgn in (1, -1):
            base = a if sgn == 1 else a + cfg.eps
            uu = base + sgn * 0.5 * cfg.eps * t ** 2
            v = pot.value(uu, np.full_like(uu, y, dtype=complex))
            total += 0.5 * cfg.eps * float(w @ (np.sqrt(v) * 2 * t))
            vmin = min(vmin, float(np.min(v)))
    if y == 0:
        orbit = 0.0
    else:
        uu = np.linspace(0, E, 257)
        vmax = float(np.max(pot.value(uu, np.full_like(uu, y, dtype=complex))))
        orbit = vmax ** -0.5
    return 0.5 * total + orbit


def radial_lift(a, theta, cfg: OVConfig, nodes=48):
    """int_0^a V(r e^(i theta), E/2)^(1/2) dr, split at r = eps; returns (inner, outer)."""
    pot = OVPotential(cfg)
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    split = min(cfg.eps, a)
    parts = []
    for lo, hi in ((0.0, split), (split, a)):
        if hi <= lo:
            parts.append(0.0)
            continue
        r = lo + 0.5 * (hi - lo) * (xs + 1)
        v = pot.value(np.full_like(r, 0.5 * cfg.period), r * np.exp(1j * theta))
        parts.append(0.5 * (hi - lo) * float(ws @ np.sqrt(v)))
    return tuple(parts)


def total_diameter(a, cfg: OVConfig, n_theta=8, n_r=6):
    """2 max_theta (radial lift length) + max fibre diameter, via the central fibre."""
    if a > cfg.r:
        raise DomainError("a must not exceed the patch radius")
    if cfg.eps > a:
        raise DomainError("total_diameter needs eps <= a")
    lifts = [sum(radial_lift(a, th, cfg)) for th in np.linspace(0, 2 * np.pi, n_theta, endpoint=False)]
    fib = max(fibre_diameter(r, cfg) for r in np.linspace(0.0, a, n_r))
    return 2.0 * max(lifts) + fib


def curvature_grid(eps, a=0.5, n_inner=12, n_outer=24, n_u=16, n_theta=4):
    """Points (..., 3) covering |v| <= 1/2 and 1/2 <= |v| <= a/eps, v = y/eps, s = u/eps."""
    inner = np.linspace(0.0, 0.5, n_inner + 1)[1:]
    outer = np.geomspace(0.5, a / eps, n_outer + 1)[1:]
    vr = np.concatenate([inner, outer])
    ss = np.linspace(0.0, 1.0, n_u, endpoint=False)
    th = np.linspace(0, 2 * np.pi, n_theta, endpoint=False) + 0.1
    R, S, T = np.meshgrid(vr, ss, th, indexing="ij")
    pts = np.stack([eps * R * np.cos(T), eps * R * np.sin(T), eps * S], axis=-1)
    return pts.reshape(-1, 3)


def curvature_sup(cfg: OVConfig, a=0.5, **grid):
    pot = OVPotential(cfg)
    pts = curvature_grid(cfg.eps, a, **grid)
    R = curvature_from_jet(pot.jet(pts))
    i = int(np.argmax(R))
    return float(R[i]), pts[i]


def curvature_window(h_series, eps_list, a=0.5, r=0.9, **grid):
    """Rows (eps, sup |R|, eps sup |R|, lower, upper) with c, c' fitted at eps_list[0].

    lower = c / log(1/eps)^2 and upper = c' log(1/eps) bound eps sup |R|.
    """
    sups = []
    for e in eps_list:
        s, _ = curvature_sup(OVConfig(e, tuple(h_series), r), a, **grid)
        sups.append(s)
    L0 = math.log(1.0 / eps_list[0])
    es0 = eps_list[0] * sups[0]
    c, cp = es0 * L0 ** 2, es0 / L0
    rows = []
    for e, s in zip(eps_list, sups):
        L = math.log(1.0 / e)
        rows.append((e, s, e * s, c / L ** 2, cp * L))
    return rows, (c, cp)


def rescaled_identity_error(u, y, cfg: OVConfig):
    """|eps V(u, y) - (V~0(u/eps, y/eps) - log(eps)/2pi + f(y))| with V~0 at eps = 1."""
    eps = cfg.eps
    lhs = eps * OVPotential(cfg).value(u, y)
    v = complex(y) / eps
    s = float(u) / eps
    if abs(v) >= 1.0 / np.pi:
        t = v0_bessel(s, v, 1.0)
    elif v == 0:
        t = v0_on_axis(s, 1.0)
    else:
        t = v0_lattice(s, v, 1.0)
    rhs = t - math.log(eps) / (2 * np.pi) + float(cfg.f(y))
    return abs(lhs - rhs)


def harnack_deviation(cfg: OVConfig, y, n_u=64, j_max=DEFAULT_JMAX):
    """sup over the fibre at y of |eps^-1 W Im tau - 1| for the OV metric.

    With W = 1/V and Im tau = eps Vbar this is |V - Vbar| / V; the numerator
    is summed from the Bessel modes so it stays accurate far below rounding
    of V itself. Needs |y| >= n eps / pi.
    """
    y = complex(y)
    pot = OVPotential(cfg, j_max)
    if abs(y) < pot.crossover:
        raise DomainError("harnack_deviation needs |y| >= n eps / pi")
    u = (np.arange(n_u) + 0.5) * cfg.period / n_u
    rho = np.full(n_u, abs(y))
    lam, k0, _ = pot._modes(rho)
    osc = np.zeros(n_u)
    for s in pot._shifts():
        osc += np.sum(np.cos(lam * (u - s)[:, None]) * k0, axis=1) / (np.pi * pot.E)
    V = pot.value(u, np.full(n_u, y))
    return float(np.max(np.abs(osc) / V))
