"""Hyperkähler metrics from a positive harmonic function on a domain in R^3.

Points of the base are arrays with trailing axis (u1, u2, u3). The circle
coordinate t has period 2 pi, and theta0 = dt/2pi + A . du. Forms and
metrics on the total space use the basis (du1, du2, du3, dt).
"""
import itertools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import jets
from .errors import AperiodicityError, DomainError, HarmonicityError
from .geometry_core import FieldSampler, MetricTensor, TwoForm, wedge

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GHField:
    """Potential V with optional connection, period, jets and fibre primitives.

    ``V(u)`` and ``A(u)`` accept arrays of shape (..., 3). ``jet(u)`` returns
    the fourth-order jet of V (see ``jets``). ``primitives(y, u3)`` returns
    (int_0^u3 V du, int_0^u3 2i d_y V du) at fixed y = u1 + i u2. When A is
    missing but primitives are given, the connection is read off from them;
    when both are missing A = 0.
    """

    V: Callable
    A: Optional[Callable] = None
    period: Optional[float] = None
    jet: Optional[Callable] = None
    primitives: Optional[Callable] = None
    domain: Optional[Callable] = None

    def __post_init__(self):
        if self.period is not None and not self.period > 0:
            raise DomainError("period must be positive")

    def value(self, u):
        u = np.asarray(u, dtype=float)
        if self.domain is not None and not np.all(self.domain(u)):
            raise DomainError("point outside the domain of V")
        v = np.asarray(self.V(u), dtype=float)
        if np.any(~(v > 0)):
            raise DomainError("V must be positive, min %.3g" % np.nanmin(v))
        return v

    def connection(self, u):
        u = np.asarray(u, dtype=float)
        if self.A is not None:
            return np.asarray(self.A(u), dtype=float)
        out = np.zeros(u.shape)
        if self.primitives is not None:
            _, b = self.primitives(u[..., 0] + 1j * u[..., 1], u[..., 2])
            out[..., 0] = np.real(b)
            out[..., 1] = -np.imag(b)
        return out

    def jet_at(self, u, step=0.02):
        if self.jet is not None:
            return self.jet(np.asarray(u, dtype=float))
        return fd_jet(self.V, u, step)


class HyperkahlerTriple(NamedTuple):
    omega1: TwoForm
    omega2: TwoForm
    omega3: TwoForm


def _wedge1(a, b):
    return a[..., :, None] * b[..., None, :] - b[..., :, None] * a[..., None, :]


def _theta(g, u):
    A = g.connection(u)
    th = np.empty(A.shape[:-1] + (4,))
    th[..., :3] = A
    th[..., 3] = 1.0 / TWO_PI
    return th


def triple_arrays(g: GHField, u):
    """Coefficient arrays of (omega1, omega2, omega3), shape (..., 3, 4, 4)."""
    u = np.asarray(u, dtype=float)
    V = g.value(u)
    th = _theta(g, u)
    e = np.broadcast_to(np.eye(4)[:3], u.shape[:-1] + (3, 4))
    out = np.empty(u.shape[:-1] + (3, 4, 4))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        out[..., i, :, :] = _wedge1(e[..., i, :], th) + V[..., None, None] * _wedge1(e[..., j, :], e[..., k, :])
    return out


def gh_triple(g: GHField, u, t=0.0) -> HyperkahlerTriple:
    """omega_i = du_i ^ theta0 + V du_j ^ du_k for (i, j, k) cyclic.

    Nothing depends on t; it is accepted for symmetry with the total space.
    """
    m = triple_arrays(g, np.asarray(u, dtype=float).reshape(3))
    return HyperkahlerTriple(*(TwoForm(m[i]) for i in range(3)))


def triple_algebra_errors(arrays):
    """(max |w_i ^ w_j| for i != j, max |w_i^2 - w_1^2|), both relative to |w_1^2|."""
    a = np.asarray(arrays)
    sq = wedge(a[..., 0, :, :], a[..., 0, :, :])
    ref = np.abs(sq)
    off = max(np.max(np.abs(wedge(a[..., i, :, :], a[..., j, :, :])) / ref)
              for i, j in ((0, 1), (0, 2), (1, 2)))
    diag = max(np.max(np.abs(wedge(a[..., i, :, :], a[..., i, :, :]) - sq) / ref) for i in (1, 2))
    return float(off), float(diag)


def closedness_residual(g: GHField, u, h=1e-4):
    """Max over i of |d omega_i| by centred differences (nothing depends on t)."""
    u = np.asarray(u, dtype=float).reshape(3)
    d = np.zeros((4, 3, 4, 4))
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        d[a] = (triple_arrays(g, u + e) - triple_arrays(g, u - e)) / (2 * h)
    worst = 0.0
    for i in range(3):
        M = d[:, i]
        for a in range(4):
            for b in range(a + 1, 4):
                for c in range(b + 1, 4):
                    r = M[a, b, c] - M[b, a, c] + M[c, a, b]
                    worst = max(worst, abs(r))
    return worst


def laplacian_residual(g: GHField, u, h=1e-3):
    """Centred seven-point Laplacian of V at u."""
    u = np.asarray(u, dtype=float).reshape(3)
    acc = -6.0 * g.value(u)
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        acc = acc + g.value(u + e) + g.value(u - e)
    return float(acc / (h * h))


def gh_metric_array(g: GHField, u):
    u = np.asarray(u, dtype=float)
    V = g.value(u)
    th = _theta(g, u)
    G = th[..., :, None] * th[..., None, :] / V[..., None, None]
    for a in range(3):
        G[..., a, a] += V
    return G


def gh_metric(g: GHField, u, t=0.0) -> MetricTensor:
    """V du.du + theta0^2 / V in the basis (du1, du2, du3, dt)."""
    return MetricTensor(gh_metric_array(g, np.asarray(u, dtype=float).reshape(3)))


def complex_structure(g: GHField, u, which=3):
    """Endomorphism J with g(a, b) = omega(a, J b) for the chosen omega_i."""
    u = np.asarray(u, dtype=float).reshape(3)
    om = triple_arrays(g, u)[which - 1]
    return np.linalg.solve(om, gh_metric_array(g, u))


# --- curvature -------------------------------------------------------------

def _inverse_jet(jv):
    v = jv[0]
    return jets.compose([1 / v, -1 / v ** 2, 2 / v ** 3, -6 / v ** 4, 24 / v ** 5], jv)


def _check_harmonic(jv, tol):
    lap = jets.laplacian(jv)
    bad = np.abs(lap) > tol * np.abs(jv[0])
    if np.any(bad):
        raise HarmonicityError("Laplacian of V is %.3g, above %.1g |V|"
                               % (np.max(np.abs(lap)), tol))


def curvature_from_jet(jv, tol=1e-6):
    """|R| from |R|^2 = 1/2 V^-1 DD(V^-1)."""
    _check_harmonic(jv, tol)
    inv = _inverse_jet(jv)
    sq = 0.5 * inv[0] * jets.bilaplacian(inv)
    return np.sqrt(np.maximum(sq, 0.0))


def curvature_expanded_from_jet(jv, tol=1e-6):
    """|R| from 12 V^-6 |dV|^4 + V^-4 D|dV|^2 - 6 V^-5 dV . d|dV|^2."""
    _check_harmonic(jv, tol)
    V, d1, d2, d3 = jv[0], jv[1], jv[2], jv[3]
    g2 = np.einsum("...i,...i->...", d1, d1)
    grad_g2 = 2.0 * np.einsum("...i,...ik->...k", d1, d2)
    lap_g2 = 2.0 * (np.einsum("...ik,...ik->...", d2, d2) + np.einsum("...i,...ikk->...", d1, d3))
    sq = (12.0 * g2 ** 2 / V ** 6 + lap_g2 / V ** 4
          - 6.0 * np.einsum("...i,...i->...", d1, grad_g2) / V ** 5)
    return np.sqrt(np.maximum(sq, 0.0))


def curvature_norm(g: GHField, u, tol=1e-6):
    """Curvature norm at u (scalar or batch) via the compact formula."""
    return curvature_from_jet(g.jet_at(u), tol)


def curvature_norm_expanded(g: GHField, u, tol=1e-6):
    return curvature_expanded_from_jet(g.jet_at(u), tol)


def fd_jet(V, u, step=0.02):
    """Jet of V at a single point from a 9^3 finite-difference stencil.

    Used only for fields supplied without analytic jets.
    """
    u = np.asarray(u, dtype=float).reshape(3)
    off = np.arange(-4, 5, dtype=float)
    W = []
    for k in range(5):
        A = np.vander(off, 9, increasing=True).T
        rhs = np.zeros(9)
        rhs[k] = math.factorial(k)
        W.append(np.linalg.solve(A, rhs) / step ** k)
    grid = u + step * np.stack(np.meshgrid(off, off, off, indexing="ij"), axis=-1)
    F = np.asarray(V(grid), dtype=float)
    out = jets.zeros()
    for k in range(5):
        for idx in itertools.product(range(3), repeat=k):
            c = [idx.count(a) for a in range(3)]
            out[k][idx] = np.einsum("i,j,k,ijk->", W[c[0]], W[c[1]], W[c[2]], F)
    return out


# --- standard fields ---------------------------------------------------------

def _taub_nut_jet(e):
    def jet(u):
        u = np.asarray(u, dtype=float)
        r = np.sqrt(np.sum(u * u, axis=-1))
        c = 1.0 / (4 * np.pi)
        # derivatives of e + c (2q)^(-1/2) in q = r^2/2
        g = [e + c / r, -c / r ** 3, 3 * c / r ** 5, -15 * c / r ** 7, 105 * c / r ** 9]
        return jets.radial(u, g)
    return jet


def taub_nut(e=1.0) -> GHField:
    """V = e + 1/(4 pi |u|) with the Dirac monopole connection (string on u3 < 0)."""
    if e < 0:
        raise DomainError("e must be nonnegative")

    def V(u):
        return e + 1.0 / (4 * np.pi * np.sqrt(np.sum(np.asarray(u) ** 2, axis=-1)))

    def A(u):
        u = np.asarray(u, dtype=float)
        r = np.sqrt(np.sum(u * u, axis=-1))
        s = 1.0 / (4 * np.pi * r * (r + u[..., 2]))
        return np.stack([u[..., 1] * s, -u[..., 0] * s, 0.0 * s], axis=-1)

    def domain(u):
        u = np.asarray(u)
        return np.sum(u * u, axis=-1) > 0

    return GHField(V=V, A=A, jet=_taub_nut_jet(e), domain=domain)


def constant_field(c=1.0, period=None) -> GHField:
    def jet(u):
        return jets.constant(c, np.asarray(u).shape[:-1])
    return GHField(V=lambda u: np.full(np.asarray(u).shape[:-1], float(c)), period=period, jet=jet)


def holomorphic_im_jet(derivs, pts):
    """Jet in (u1, u2, u3) of Im F(u1 + i u2) from derivs[k] = F^(k) at the points."""
    pts = np.asarray(pts, dtype=float)
    out = jets.zeros(pts.shape[:-1])
    for k in range(5):
        for idx in itertools.product(range(3), repeat=k):
            if 2 in idx:
                continue
            nb = idx.count(1)
            out[k][(Ellipsis,) + idx] = np.imag((1j) ** nb * derivs[k])
    return out


def semiflat_field(m) -> GHField:
    """V = Im tau2 / eps for a semi-flat metric with tau1 = 1, period eps in u3."""
    t2 = m.periods.tau2
    eps = m.eps

    def V(u):
        u = np.asarray(u, dtype=float)
        return np.imag(t2(u[..., 0] + 1j * u[..., 1])) / eps

    def jet(u):
        u = np.asarray(u, dtype=float)
        y = u[..., 0] + 1j * u[..., 1]
        return jets.scale(holomorphic_im_jet([t2.nth_derivative(y, k) for k in range(5)], u), 1.0 / eps)

    def primitives(y, u3):
        y = np.asarray(y, dtype=complex)
        return np.imag(t2(y)) * u3 / eps, u3 * t2.derivative(y) / eps

    return GHField(V=V, period=eps, jet=jet, primitives=primitives)


# --- holomorphic canonical coordinates ----------------------------------------

def _quad_primitives(g: GHField, nodes=48, dstep=1e-5):
    xs, ws = np.polynomial.legendre.leggauss(nodes)

    def prim(y, u3):
        y = complex(y)
        u3 = float(u3)
        s = 0.5 * u3 * (xs + 1.0)
        pts = np.stack([np.full_like(s, y.real), np.full_like(s, y.imag), s], axis=-1)
        v = g.value(pts)
        e1 = np.array([dstep, 0.0, 0.0])
        e2 = np.array([0.0, dstep, 0.0])
        d1 = (g.V(pts + e1) - g.V(pts - e1)) / (2 * dstep)
        d2 = (g.V(pts + e2) - g.V(pts - e2)) / (2 * dstep)
        w = 0.5 * u3 * ws
        return float(w @ v), complex(w @ (d2 + 1j * d1))
    return prim


def check_periodic(g: GHField, ys: Sequence[complex], samples=7, tol=1e-8):
    if g.period is None:
        raise AperiodicityError("field has no declared period")
    for y in ys:
        u = np.linspace(0.0, g.period, samples, endpoint=False) + 0.137 * g.period
        p = np.stack([np.full_like(u, y.real), np.full_like(u, y.imag), u], axis=-1)
        q = p.copy()
        q[:, 2] += g.period
        a, b = g.value(p), g.value(q)
        err = np.max(np.abs(a - b) / np.abs(a))
        if err > tol:
            raise AperiodicityError("V(u3 + period) differs from V(u3) by %.3g at y = %r" % (err, y))


class HolomorphicChart:
    """Canonical coordinates (x, y) for a periodic GH field.

    x1 = t/2pi - Re S(y), x2 = -int_0^u3 V - Im S(y) with S' = sigma, so the
    zero section x = 0 sits at u3 = 0 when sigma = 0. Then W = 1/V and
    b = sigma(y) + int_0^u3 2i d_y V.
    """

    def __init__(self, g: GHField, sigma=(0.0,)):
        self.g = g
        self.sigma = np.asarray(sigma, dtype=complex)
        self._S = np.polynomial.polynomial.polyint(self.sigma)
        self._prim = g.primitives if g.primitives is not None else _quad_primitives(g)

    def u3_of(self, x, y, tol=1e-14, maxit=60):
        y = complex(y)
        target = -(complex(x).imag + np.polynomial.polynomial.polyval(y, self._S).imag)
        v0 = float(self.g.value(np.array([y.real, y.imag, 0.0])))
        u = target / v0
        for _ in range(maxit):
            P, _ = self._prim(y, u)
            v = float(self.g.value(np.array([y.real, y.imag, u])))
            step = (float(np.real(P)) - target) / v
            u -= step
            if abs(step) <= tol * max(1.0, abs(u)):
                break
        return u

    def frame_at(self, y, u3):
        y = complex(y)
        v = float(self.g.value(np.array([y.real, y.imag, float(u3)])))
        _, B = self._prim(y, float(u3))
        return 1.0 / v, complex(np.polynomial.polynomial.polyval(y, self.sigma) + B)

    def __call__(self, x, y):
        return self.frame_at(y, self.u3_of(x, y))


def gh_to_holomorphic(g: GHField, sigma=(0.0,), h=1e-3, patch=None, check_points=None):
    """FieldSampler (x, y) -> (W, b) in canonical coordinates.

    ``sigma`` lists the coefficients of the section sigma(y). The sampler's
    ``evaluator`` is a HolomorphicChart, which also exposes u3_of and frame_at.
    """
    if patch is None:
        patch = ((-np.inf, np.inf),) * 4
    if check_points is None:
        c = [0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else 0.5 for lo, hi in patch[2:]]
        check_points = [complex(c[0], c[1])]
    check_periodic(g, check_points)
    return FieldSampler(h, HolomorphicChart(g, sigma), patch)


def canonical_relation_residual(chart: HolomorphicChart, y, u3, h=1e-4):
    """|-d_y V - (i/2) d_u3 b|, zero when b is built from V correctly."""
    y = complex(y)
    g = chart.g

    def Vat(yy, uu):
        return float(g.value(np.array([yy.real, yy.imag, uu])))

    dVy = 0.5 * ((Vat(y + h, u3) - Vat(y - h, u3)) - 1j * (Vat(y + 1j * h, u3) - Vat(y - 1j * h, u3))) / (2 * h)
    db = (chart.frame_at(y, u3 + h)[1] - chart.frame_at(y, u3 - h)[1]) / (2 * h)
    return abs(-dVy - 0.5j * db)


# --- the Taub-NUT chart ------------------------------------------------------

class ChartResult(NamedTuple):
    u: np.ndarray
    forms: np.ndarray
    flat_error: float


def _chart_jacobian(c):
    x1, y1, x2, y2 = c
    # rows u1, u2, u3; columns (x1, y1, x2, y2)
    return np.array([[2 * x2, -2 * y2, 2 * x1, -2 * y1],
                     [2 * y2, 2 * x2, 2 * y1, 2 * x1],
                     [2 * x1, 2 * y1, -2 * x2, -2 * y2]])


def _chart_theta(c):
    x1, y1, x2, y2 = c
    n = x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2
    return np.array([-y1, x1, y2, -x2]) / (TWO_PI * n)


def flat_forms():
    """(1/pi)(dx2^dy1 - dx1^dy2), (1/pi)(dx1^dx2 - dy1^dy2), (1/pi)(dx1^dy1 + dx2^dy2)."""
    E = np.eye(4)
    dx1, dy1, dx2, dy2 = E
    return np.array([_wedge1(dx2, dy1) - _wedge1(dx1, dy2),
                     _wedge1(dx1, dx2) - _wedge1(dy1, dy2),
                     _wedge1(dx1, dy1) + _wedge1(dx2, dy2)]) / np.pi


def poincare_map(z1, z2):
    w = z1 * z2
    return np.array([2 * w.real, 2 * w.imag, abs(z1) ** 2 - abs(z2) ** 2])


def poincare_chart(e, z1, z2) -> ChartResult:
    """Pull the Taub-NUT triple back along (z1, z2) -> u, basis (x1, y1, x2, y2)."""
    z1, z2 = complex(z1), complex(z2)
    if z1 == 0 and z2 == 0:
        raise DomainError("the chart is singular at the origin")
    if e < 0:
        raise DomainError("e must be nonnegative")
    c = np.array([z1.real, z1.imag, z2.real, z2.imag])
    u = poincare_map(z1, z2)
    J = _chart_jacobian(c)
    th = _chart_theta(c)
    V = e + 1.0 / (4 * np.pi * np.linalg.norm(u))
    forms = np.array([_wedge1(J[i], th) + V * _wedge1(J[(i + 1) % 3], J[(i + 2) % 3]) for i in range(3)])
    err = float(np.max(np.abs(forms - flat_forms()))) if e == 0 else float("nan")
    return ChartResult(u, forms, err)


def poincare_metric_fn(e):
    """Pulled-back metric on R^4 = C^2 as a function of (x1, y1, x2, y2)."""
    def metric(c):
        c = np.asarray(c, dtype=float)
        u = poincare_map(complex(c[0], c[1]), complex(c[2], c[3]))
        J = _chart_jacobian(c)
        th = _chart_theta(c)
        V = e + 1.0 / (4 * np.pi * np.linalg.norm(u))
        return V * J.T @ J + np.outer(th, th) / V
    return metric


# --- collapse of the fibre metric ---------------------------------------------

def harnack_collapse_check(family, eps_list, im_tau, y0, samples=256):
    """Rows (eps, sup_u |W Im tau / eps - 1|) over the fibre at y0, W = 1/V.

    ``family`` is a list of GHFields with period eps, one per entry of eps_list.
    """
    y0 = complex(y0)
    rows = []
    for g, eps in zip(family, eps_list):
        u = np.linspace(0.0, eps, samples, endpoint=False)
        pts = np.stack([np.full_like(u, y0.real), np.full_like(u, y0.imag), u], axis=-1)
        W = 1.0 / g.value(pts)
        rows.append((float(eps), float(np.max(np.abs(W * im_tau / eps - 1.0)))))
    return rows
