"""Kähler forms in canonical coordinates, frame decompositions and
finite-difference curvature.

Real coordinates are ordered (x1, x2, y1, y2) with x = x1 + i x2 and
y = y1 + i y2. A real two-form is stored as an antisymmetric 4x4 array M
with omega = 1/2 sum_ab M_ab e^a ^ e^b, so M_ab is the coefficient of
e^a ^ e^b for a < b. A (1,1) form is equally described by the Hermitian
2x2 matrix H with omega = (i/2) sum_jk H_jk dz_j ^ conj(dz_k), where
(z_1, z_2) = (x, y).
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError, OutOfPatchError, TypeMismatchError

# dz_j as real covectors in the basis (dx1, dx2, dy1, dy2)
_DZ = np.array([[1.0, 1.0j, 0.0, 0.0],
                [0.0, 0.0, 1.0, 1.0j]])

# real basis in terms of complex covectors (dx, dy, dxbar, dybar)
_REAL_TO_COMPLEX = np.array([
    [0.5, 0.0, 0.5, 0.0],
    [-0.5j, 0.0, 0.5j, 0.0],
    [0.0, 0.5, 0.0, 0.5],
    [0.0, -0.5j, 0.0, 0.5j],
])


@dataclass(frozen=True)
class Point:
    x: complex
    y: complex

    def __post_init__(self):
        if not (np.isfinite(complex(self.x)) and np.isfinite(complex(self.y))):
            raise DomainError("Point components must be finite")

    def as_real(self):
        return np.array([self.x.real, self.x.imag, self.y.real, self.y.imag])

    @staticmethod
    def from_real(v):
        return Point(complex(v[0], v[1]), complex(v[2], v[3]))


@dataclass(frozen=True)
class FrameMetric:
    """Data (W, b) of omega = i/2 (W |dx + b dy|^2 + W^-1 |dy|^2)."""

    W: float
    b: complex

    def __post_init__(self):
        if not self.W > 0:
            raise DomainError("FrameMetric needs W > 0, got %r" % (self.W,))


class TwoForm:
    """Real two-form on R^4 stored as an antisymmetric coefficient array."""

    __slots__ = ("m",)

    def __init__(self, m):
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("TwoForm needs a 4x4 array")
        self.m = 0.5 * (m - m.T)

    def __add__(self, other):
        return TwoForm(self.m + other.m)

    def __sub__(self, other):
        return TwoForm(self.m - other.m)

    def __mul__(self, s):
        return TwoForm(self.m * s)

    __rmul__ = __mul__

    def wedge(self, other):
        """Coefficient of e0^e1^e2^e3 in self ^ other."""
        return wedge(self.m, other.m)

    def __repr__(self):
        return "TwoForm(%r)" % (self.m,)


def wedge(a, b):
    """Top-degree coefficient of the wedge of two batched 2-form arrays."""
    return (a[..., 0, 1] * b[..., 2, 3] - a[..., 0, 2] * b[..., 1, 3]
            + a[..., 0, 3] * b[..., 1, 2] + a[..., 1, 2] * b[..., 0, 3]
            - a[..., 1, 3] * b[..., 0, 2] + a[..., 2, 3] * b[..., 0, 1])


class MetricTensor:
    """Symmetric positive-definite 4x4 matrix."""

    __slots__ = ("g",)

    def __init__(self, g, check=True):
        g = np.asarray(g, dtype=float)
        if check:
            if g.shape != (4, 4):
                raise ValueError("MetricTensor needs a 4x4 array")
            if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
                raise ValueError("metric is not symmetric")
            if np.linalg.eigvalsh(0.5 * (g + g.T)).min() <= 0:
                raise ValueError("metric is not positive definite")
        self.g = 0.5 * (g + g.T)


@dataclass(frozen=True)
class FieldSampler:
    """Evaluator (x, y) -> (W, b) on a rectangular patch, with FD step h.

    ``patch`` is ((x1lo, x1hi), (x2lo, x2hi), (y1lo, y1hi), (y2lo, y2hi)).
    """

    h: float
    evaluator: Callable[[complex, complex], Tuple[float, complex]]
    patch: Tuple[Tuple[float, float], ...] = ((-np.inf, np.inf),) * 4

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("FieldSampler needs h > 0")

    def require_interior(self, at: Point, margin: float):
        v = at.as_real()
        for c, (lo, hi) in zip(v, self.patch):
            if not (lo + margin <= c <= hi - margin):
                raise OutOfPatchError("point %r is not %.3g inside the patch" % (at, margin))

    def __call__(self, x, y):
        return self.evaluator(x, y)


def frame_hermitian(W, b):
    """Hermitian matrix of the frame form; det is 1 identically."""
    W = np.asarray(W, dtype=float)
    b = np.asarray(b, dtype=complex)
    H = np.empty(W.shape + (2, 2), dtype=complex)
    H[..., 0, 0] = W
    H[..., 0, 1] = W * np.conj(b)
    H[..., 1, 0] = W * b
    H[..., 1, 1] = W * np.abs(b) ** 2 + 1.0 / W
    return H


def hermitian_to_array(H):
    """Real antisymmetric array of (i/2) sum H_jk dz_j ^ dzbar_k (batched)."""
    H = np.asarray(H, dtype=complex)
    # dz_j ^ dzbar_k  ->  outer(dz_j, conj dz_k) - outer(conj dz_k, dz_j)
    t = np.einsum("...jk,ja,kb->...ab", H, _DZ, np.conj(_DZ))
    return np.real(0.5j * (t - np.swapaxes(t, -1, -2)))


def array_to_hermitian(m, tol=1e-10):
    """Inverse of hermitian_to_array; raises if the (2,0) part exceeds tol."""
    m = np.asarray(m, dtype=float)
    n = np.einsum("ai,...ab,bj->...ij", _REAL_TO_COMPLEX, m, _REAL_TO_COMPLEX)
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(n[..., 0, 1]).max() > tol * scale:
        raise TypeMismatchError("two-form has a (2,0)+(0,2) part of size %.3g"
                                % np.abs(n[..., 0, 1]).max())
    return -2.0j * n[..., :2, 2:]


def kahler_form(fm: FrameMetric, at: Optional[Point] = None) -> TwoForm:
    """omega = i/2 (W (dx + b dy) ^ conj(dx + b dy) + W^-1 dy ^ dybar).

    The frame data already encode the point, so ``at`` is accepted only for
    interface symmetry.
    """
    return TwoForm(hermitian_to_array(frame_hermitian(fm.W, fm.b)))


def holomorphic_form_parts():
    """(Re Omega, Im Omega) for Omega = dx ^ dy."""
    t = np.outer(_DZ[0], _DZ[1])
    a = t - t.T
    return TwoForm(a.real), TwoForm(a.imag)


def metric_from_hermitian(H):
    """Riemannian metric g = Re sum H_jk dz_j (x) conj(dz_k) (batched)."""
    t = np.einsum("...jk,ja,kb->...ab", np.asarray(H, dtype=complex), _DZ, np.conj(_DZ))
    g = np.real(t)
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def metric_tensor(fm: FrameMetric) -> MetricTensor:
    return MetricTensor(metric_from_hermitian(frame_hermitian(fm.W, fm.b)))


def _coframe(fm):
    # (theta_v, theta_h) = P (dx, dy)
    return np.array([[fm.W, fm.W * fm.b], [0.0, 1.0]], dtype=complex)


def frame_decompose(omega: TwoForm, fm: FrameMetric, at: Optional[Point] = None, tol=1e-10):
    """Coefficients (alpha, beta, gamma) of omega in the theta_v / theta_h coframe.

    omega = i/2 (alpha th_v^th_v* + beta th_h^th_v* + conj(beta) th_v^th_h*
    + gamma th_h^th_h*), with th_v = W (dx + b dy) and th_h = dy.
    """
    H = array_to_hermitian(omega.m, tol=tol)
    Pinv = np.linalg.inv(_coframe(fm))
    A = Pinv.T @ H @ np.conj(Pinv)
    return float(A[0, 0].real), complex(A[1, 0]), float(A[1, 1].real)


def frame_reconstruct(alpha, beta, gamma, fm: FrameMetric) -> TwoForm:
    P = _coframe(fm)
    A = np.array([[alpha, np.conj(beta)], [beta, gamma]], dtype=complex)
    return TwoForm(hermitian_to_array(P.T @ A @ np.conj(P)))


def _wirtinger(fs, at, h):
    """Centered differences of (W, b): returns value, d_x, d_xbar, d_y, d_ybar."""
    def ev(dx, dy):
        W, b = fs(at.x + dx, at.y + dy)
        return np.array([W, b], dtype=complex)

    d1x = (ev(h, 0) - ev(-h, 0)) / (2 * h)
    d2x = (ev(1j * h, 0) - ev(-1j * h, 0)) / (2 * h)
    d1y = (ev(0, h) - ev(0, -h)) / (2 * h)
    d2y = (ev(0, 1j * h) - ev(0, -1j * h)) / (2 * h)
    return (ev(0, 0), 0.5 * (d1x - 1j * d2x), 0.5 * (d1x + 1j * d2x),
            0.5 * (d1y - 1j * d2y), 0.5 * (d1y + 1j * d2y))


def ricci_flat_residuals(fs: FieldSampler, at: Point):
    """R1 = (d_y - b d_x) conj(b) + W^-3 d_x W and R2 = (d_y - b d_x) W - W d_x b.

    Centered second-order differences with the sampler's step h.
    """
    h = fs.h
    fs.require_interior(at, 2 * h)
    val, dx, dxbar, dy, dybar = _wirtinger(fs, at, h)
    W, b = val[0].real, val[1]
    # d conj(b) = conj(dbar b)
    r1 = np.conj(dybar[1]) - b * np.conj(dxbar[1]) + W ** -3 * dx[0]
    r2 = dy[0] - b * dx[0] - W * dx[1]
    return complex(r1), complex(r2)


def hessian_fd(fn, p, h):
    """Value, gradient and Hessian of a tensor-valued fn by centered differences."""
    p = np.asarray(p, dtype=float)
    d = p.size
    f0 = np.asarray(fn(p), dtype=float)
    grad = np.empty((d,) + f0.shape)
    hess = np.empty((d, d) + f0.shape)
    e = np.eye(d) * h
    fp = [np.asarray(fn(p + e[i]), dtype=float) for i in range(d)]
    fm = [np.asarray(fn(p - e[i]), dtype=float) for i in range(d)]
    for i in range(d):
        grad[i] = (fp[i] - fm[i]) / (2 * h)
        hess[i, i] = (fp[i] - 2 * f0 + fm[i]) / (h * h)
        for j in range(i + 1, d):
            v = (np.asarray(fn(p + e[i] + e[j])) - np.asarray(fn(p + e[i] - e[j]))
                 - np.asarray(fn(p - e[i] + e[j])) + np.asarray(fn(p - e[i] - e[j]))) / (4 * h * h)
            hess[i, j] = hess[j, i] = v
    return f0, grad, hess


def riemannian_ricci(metric_fn, p, h):
    """Ricci tensor of the metric field ``metric_fn`` at p (second-order FD).

    Returns (g, Ric). The coordinate dimension is taken from p.
    """
    g, dg, ddg = hessian_fd(metric_fn, p, h)
    gi = np.linalg.inv(g)
    # Christoffel symbols of the first kind: G[d, b, c] = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
    G1 = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    Gam = np.einsum("ad,dbc->abc", gi, G1)
    # derivative of G1 along e: ddg[e, i] is d_e d_i g
    dG1 = 0.5 * (np.einsum("ebdc->edbc", ddg) + np.einsum("ecdb->edbc", ddg) - ddg)
    dgi = -np.einsum("af,efk,kd->ead", gi, dg, gi)
    dGam = np.einsum("ead,dbc->eabc", dgi, G1) + np.einsum("ad,edbc->eabc", gi, dG1)
    ric = (np.einsum("aabc->bc", dGam) - np.einsum("caba->bc", dGam)
           + np.einsum("aad,dbc->bc", Gam, Gam) - np.einsum("acd,dba->bc", Gam, Gam))
    return g, 0.5 * (ric + ric.T)


def riemann_tensor(metric_fn, p, h):
    """Riemann tensor R^a_{bcd} of the metric field at p (second-order FD)."""
    g, dg, ddg = hessian_fd(metric_fn, p, h)
    gi = np.linalg.inv(g)
    G1 = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    Gam = np.einsum("ad,dbc->abc", gi, G1)
    dG1 = 0.5 * (np.einsum("ebdc->edbc", ddg) + np.einsum("ecdb->edbc", ddg) - ddg)
    dgi = -np.einsum("af,efk,kd->ead", gi, dg, gi)
    dGam = np.einsum("ead,dbc->eabc", dgi, G1) + np.einsum("ad,edbc->eabc", gi, dG1)
    # R^a_{bcd} = d_c Gam^a_{db} - d_d Gam^a_{cb} + Gam^a_{ce} Gam^e_{db} - Gam^a_{de} Gam^e_{cb}
    R = (np.einsum("cadb->abcd", dGam) - np.einsum("dacb->abcd", dGam)
         + np.einsum("ace,edb->abcd", Gam, Gam) - np.einsum("ade,ecb->abcd", Gam, Gam))
    return g, R


def riemann_norm(metric_fn, p, h):
    """|Rm| = sqrt(R_abcd R^abcd) by finite differences."""
    g, R = riemann_tensor(metric_fn, p, h)
    gi = np.linalg.inv(g)
    Rl = np.einsum("ae,ebcd->abcd", g, R)
    Ru = np.einsum("abcd,ai,bj,ck,dl->ijkl", Rl, gi, gi, gi, gi)
    return float(np.sqrt(abs(np.einsum("abcd,abcd->", Rl, Ru))))


def operator_norm(g, sym):
    """Largest |eigenvalue| of the symmetric form ``sym`` relative to g."""
    ev = np.linalg.eigvals(np.linalg.solve(g, sym))
    return float(np.max(np.abs(ev.real)))


def sampler_metric(fs: FieldSampler):
    """Metric field on R^4 (x1, x2, y1, y2) from a FieldSampler."""
    def metric(v):
        W, b = fs(complex(v[0], v[1]), complex(v[2], v[3]))
        return metric_from_hermitian(frame_hermitian(W, b))
    return metric


def numerical_ricci(fs: FieldSampler, at: Point) -> float:
    """Operator norm of the Ricci tensor against the metric, by finite differences.

    Uses the Levi-Civita connection of the Riemannian metric built from
    (W, b), with second-order centered differences of step fs.h.
    """
    fs.require_interior(at, 3 * fs.h)
    g, ric = riemannian_ricci(sampler_metric(fs), at.as_real(), fs.h)
    return operator_norm(g, ric)


def kahler_ricci_form(fs_hermitian, at: Point, h):
    """Ricci form -i d dbar log det H by finite differences.

    ``fs_hermitian`` maps (x, y) to the Hermitian matrix H. Returns the
    Hermitian 2x2 matrix rho with Ric = (i/2) sum rho_jk dz_j ^ dzbar_k.
    For metrics built from frame data det H = 1, so this vanishes
    identically there; it is informative for the glued metric.
    """
    def logdet(v):
        H = fs_hermitian(complex(v[0], v[1]), complex(v[2], v[3]))
        return np.log(np.linalg.det(H).real)

    _, _, hess = hessian_fd(logdet, at.as_real(), h)
    # d_j dbar_k of f from the real Hessian
    J = _DZ.conj() / 2.0  # d/dz_j = 1/2 (d/da - i d/db)
    dd = np.einsum("ja,kb,ab->jk", J, np.conj(J), hess)
    return -2.0 * dd
