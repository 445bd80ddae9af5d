"""Distances, Gromov-Hausdorff distortion and the collapse scan.

Base geodesics come from Dijkstra on a radius graph: a square grid with
every neighbour within 3.17 grid steps (32 directions), polar rings of
extra nodes around the singular points, and the query points themselves.
Edge lengths integrate the conformal density with four-point Gauss
quadrature, which never samples an edge midpoint, so a segment through a
singular point is still finite. Graph distances overestimate geodesics
slightly (the stencil's angular gap is at most about 0.4%).
"""
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .errors import DomainError
from .gluing import glue, semiflat_background
from .semiflat import PeriodPair, PeriodSeries, SemiFlatMetric, semiflat_hermitian

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_S = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
STENCIL_RADIUS = 3.17


class SampledMetricSpace:
    """Finite metric space given by its distance matrix."""

    def __init__(self, points, dist, check=True):
        self.points = list(points)
        d = np.asarray(dist, dtype=float)
        if d.shape != (len(self.points),) * 2:
            raise ValueError("distance matrix does not match the point list")
        if check:
            if not np.array_equal(d, d.T):
                raise ValueError("distance matrix must be symmetric")
            if np.any(np.diag(d) != 0) or np.any(d < 0):
                raise ValueError("distances must be nonnegative with zero diagonal")
        self.dist = d

    def __len__(self):
        return len(self.points)


def triangle_violation(dist, sample=200, seed=0):
    """max over triples of d_ij - d_ik - d_kj on a random subsample (<= 0 when metric)."""
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    idx = np.random.default_rng(seed).choice(n, size=min(sample, n), replace=False)
    s = d[np.ix_(idx, idx)]
    worst = -np.inf
    for k in range(s.shape[0]):
        worst = max(worst, float((s - s[:, k:k + 1] - s[k:k + 1, :]).max()))
    return worst


def gh_distortion(X: SampledMetricSpace, Y: SampledMetricSpace, f, g):
    """Largest defect of the maps f: X -> Y and g: Y -> X (index arrays).

    max of sup |d_X(a,b) - d_Y(fa,fb)|, sup |d_Y(a,b) - d_X(ga,gb)|,
    sup d_X(x, g f x) and sup d_Y(y, f g y).
    """
    f = np.asarray(f, dtype=int)
    g = np.asarray(g, dtype=int)
    dx, dy = X.dist, Y.dist
    a = np.abs(dx - dy[np.ix_(f, f)]).max()
    b = np.abs(dy - dx[np.ix_(g, g)]).max()
    c = dx[np.arange(len(X)), g[f]].max()
    d = dy[np.arange(len(Y)), f[g]].max()
    return float(max(a, b, c, d))


# --- base metrics and graph geodesics -----------------------------------------

@dataclass(frozen=True)
class McLeanBase:
    """Base metric Im(conj(tau1) tau2) |dy|^2 on the disc |y| < radius minus Delta."""

    periods: PeriodPair
    singular: Sequence[complex] = (0j,)
    radius: float = 0.9

    def density(self, y):
        y = np.asarray(y, dtype=complex)
        y = np.where(y == 0, 1e-300, y)
        d = self.periods.im_pairing(y)
        if np.any(d <= 0):
            raise DomainError("Im(conj(tau1) tau2) must be positive off Delta")
        return d


class BaseGraph:
    """Radius graph on the disc for a conformal density rho |dy|^2."""

    def __init__(self, density: Callable, radius=0.9, n=64, extra=(), singular=(0j,),
                 rings=6, ring_points=32):
        self.h = 2.0 * radius / (n - 1)
        s = np.linspace(-radius, radius, n)
        grid = (s[:, None] + 1j * s[None, :]).reshape(-1)
        grid = grid[np.abs(grid) <= radius * (1 + 1e-12)]
        pts = [grid]
        th = 2 * np.pi * (np.arange(ring_points) + 0.5) / ring_points
        for c in singular:
            for k in range(1, rings + 1):
                pts.append(c + self.h * 2.0 ** (-k + 1) * np.exp(1j * th))
            pts.append(np.array([c]))
        self.n_fixed = sum(p.size for p in pts)
        extra = np.atleast_1d(np.asarray(extra, dtype=complex))
        pts.append(extra)
        self.nodes = np.concatenate(pts)
        self.density = density
        self._build()

    def _build(self):
        xy = np.column_stack([self.nodes.real, self.nodes.imag])
        tree = cKDTree(xy)
        pairs = tree.query_pairs(STENCIL_RADIUS * self.h, output_type="ndarray")
        a, b = pairs[:, 0], pairs[:, 1]
        za, zb = self.nodes[a], self.nodes[b]
        seg = zb - za
        pts = za[:, None] + seg[:, None] * _GL_S[None, :]
        rho = np.asarray(self.density(pts), dtype=float)
        w = np.abs(seg) * (np.sqrt(rho) @ _GL_W)
        m = len(self.nodes)
        self.edges = (a, b, w)
        self.matrix = coo_matrix((np.concatenate([w, w]), (np.concatenate([a, b]), np.concatenate([b, a]))),
                                 shape=(m, m)).tocsr()

    def extra_index(self):
        """Node indices of the extra points in the order they were given."""
        return self.n_fixed + np.arange(len(self.nodes) - self.n_fixed)

    def distances(self, sources, targets=None):
        d = dijkstra(self.matrix, directed=False, indices=np.asarray(sources))
        if np.isinf(d[:, targets] if targets is not None else d).any():
            raise DomainError("graph is disconnected between the requested nodes")
        return d if targets is None else d[:, targets]


def base_distance(y1, y2, base: McLeanBase, n=96):
    """Geodesic distance for the McLean metric between two base points."""
    g = BaseGraph(base.density, base.radius, n, extra=[y1, y2], singular=base.singular)
    i, j = g.extra_index()
    return float(g.distances([i], [j])[0, 0])


def base_distance_matrix(ys, base: McLeanBase, n=96):
    g = BaseGraph(base.density, base.radius, n, extra=ys, singular=base.singular)
    idx = g.extra_index()
    d = g.distances(idx, idx)
    return 0.5 * (d + d.T)


def radial_distance_oracle(base: McLeanBase, r, nodes=64):
    """int_0^r sqrt(density(t)) dt along the positive axis (t = r s^2 removes the endpoint log)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (x + 1.0)
    t = r * s * s
    return float(0.5 * np.sum(w * np.sqrt(base.density(t + 0j)) * 2 * r * s))


# --- fibre distances and the total space -------------------------------------

class FlatModel:
    """Semi-flat metric with constant periods (1, tau): no singular fibres."""

    def __init__(self, eps, tau=1j, radius=0.9):
        self.eps = float(eps)
        self.radius = radius
        self.semiflat = SemiFlatMetric(PeriodPair(PeriodSeries(0.0, (1.0,)), PeriodSeries(0.0, (tau,))),
                                       self.eps)

    def hermitian(self, x2, y):
        return semiflat_hermitian(self.semiflat, 1j * np.asarray(x2, dtype=float), y)


def _fibre_hermitian00(gm, x2, y):
    return np.real(gm.hermitian(x2, y)[..., 0, 0])


def section_density(gm):
    """Conformal density of eps g pulled back to the zero section x = 0."""
    eps = gm.eps

    def rho(y):
        y = np.asarray(y, dtype=complex)
        shape = y.shape
        yf = np.where(y == 0, 1e-300, y).reshape(-1)
        H = gm.hermitian(np.zeros(yf.shape), yf)
        return (eps * np.real(H[:, 1, 1])).reshape(shape)
    return rho


def fibre_distance_to_section(gm, x1, x2, y, nodes=24):
    """Length in eps g of the shortest L-shaped path inside the fibre from
    (x1, x2) to a lattice point n tau + m (n in {-1, 0, 1}).

    The fibre metric is eps H00 (dx1^2 + dx2^2) with H00 depending only on
    x2, so each L path is a vertical segment at fixed x1 and a horizontal
    one at the start or end height.
    """
    eps = gm.eps
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    T, _ = semiflat_background(gm.semiflat.periods, y)
    ret = np.real(gm.semiflat.periods.tau2(y))
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (xs + 1)
    best = np.full(x1.shape, np.inf)
    w_here = np.sqrt(eps * _fibre_hermitian00(gm, x2, y))
    for n in (-1, 0, 1):
        t2 = n * T
        seg = t2 - x2
        pts = x2[:, None] + seg[:, None] * s[None, :]
        dens = np.sqrt(eps * _fibre_hermitian00(gm, pts, np.broadcast_to(y[:, None], pts.shape)))
        vert = np.abs(seg) * (dens @ (0.5 * ws))
        dx1 = x1 - n * ret
        dx1 = np.abs(dx1 - np.round(dx1))
        w_there = np.sqrt(eps * _fibre_hermitian00(gm, t2, y))
        best = np.minimum(best, vert + dx1 * np.minimum(w_here, w_there))
    return best


class TotalDistance(NamedTuple):
    value: float
    method: str


def total_space_distance(p1, p2, hermitian: Callable, eps, box, n=(8, 8, 10, 10), lattice=()):
    """Graph geodesic in eps g on a product grid over ``box`` in (x1, x2, y1, y2).

    ``hermitian(x2, y)`` returns H; the metric is eps Re sum H dz dzbar. The
    two points are added as nodes. ``lattice`` lists real 4-vectors by which
    the fibre is identified (for constant periods); grid axes along such
    directions should then exclude their right endpoint. Returns the
    distance tagged 'graph'.
    """
    axes = []
    for (lo, hi), k in zip(box, n):
        axes.append(np.linspace(lo, hi, k))
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    pts = np.vstack([mesh, np.asarray(p1, dtype=float)[None], np.asarray(p2, dtype=float)[None]])
    m = len(pts)
    shifts = [np.zeros(4)]
    for v in lattice:
        v = np.asarray(v, dtype=float)
        shifts += [v, -v]
    allp = np.vstack([pts + s for s in shifts])
    scale = np.array([(hi - lo) / (k - 1) for (lo, hi), k in zip(box, n)])
    tree = cKDTree(allp / scale)
    pairs = tree.query_pairs(2.3, output_type="ndarray")
    a, b = pairs[:, 0], pairs[:, 1]
    # keep edges with at least one end in the original copy, then fold ghosts back
    keep = (a < m) | (b < m)
    a, b = a[keep], b[keep]
    seg = allp[b] - allp[a]
    start = allp[a]
    a, b = a % m, b % m
    ok = a != b
    a, b, seg, start = a[ok], b[ok], seg[ok], start[ok]
    total = np.zeros(len(a))
    dz = np.stack([seg[:, 0] + 1j * seg[:, 1], seg[:, 2] + 1j * seg[:, 3]], axis=-1)
    for s, w in zip(_GL_S, _GL_W):
        q = start + s * seg
        H = hermitian(q[:, 1], q[:, 2] + 1j * q[:, 3])
        quad = np.real(np.einsum("ij,ijk,ik->i", dz, H, np.conj(dz)))
        total += w * np.sqrt(np.maximum(eps * quad, 0.0))
    # an edge can arise from several ghost pairs; coo would add them up
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    keys, inv = np.unique(lo * m + hi, return_inverse=True)
    w = np.full(keys.size, np.inf)
    np.minimum.at(w, inv, total)
    a, b = keys // m, keys % m
    M = coo_matrix((np.concatenate([w, w]), (np.concatenate([a, b]), np.concatenate([b, a]))),
                   shape=(m, m)).tocsr()
    d = dijkstra(M, directed=False, indices=[m - 2])[0, m - 1]
    if not np.isfinite(d):
        raise DomainError("product grid is disconnected")
    return TotalDistance(float(d), "graph")


def via_section_distance(gm, p1, p2, n=64):
    """Upper bound a(p1) + d_section(y1, y2) + a(p2) along the zero section."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    y1, y2 = complex(p1[2], p1[3]), complex(p2[2], p2[3])
    graph = BaseGraph(section_density(gm), gm.radius, n, extra=[y1, y2])
    i, j = graph.extra_index()
    dz = float(graph.distances([i], [j])[0, 0])
    a1 = fibre_distance_to_section(gm, p1[0], p1[1], y1)[0]
    a2 = fibre_distance_to_section(gm, p2[0], p2[1], y2)[0]
    return TotalDistance(float(a1 + dz + a2), "via_section")


# --- collapse scan -----------------------------------------------------------

class CollapseRow(NamedTuple):
    eps: float
    delta: float
    max_fibre: float
    max_pair_defect: float
    section_rel_error: float


def sample_base(n_base, radius, seed, near=0.1, near_frac=0.1):
    """Stratified base points: annular sectors of equal area plus a share within ``near`` of y = 0."""
    rng = np.random.default_rng(seed)
    n_near = int(round(near_frac * n_base))
    n_far = n_base - n_near
    k = int(np.ceil(np.sqrt(n_far)))
    cells = np.arange(n_far)
    ti, ri = cells // k, cells % k
    u = (ri + rng.random(n_far)) / k
    th = 2 * np.pi * (ti + rng.random(n_far)) / k
    r = np.sqrt(near ** 2 + u * (radius ** 2 - near ** 2))
    far = r * np.exp(1j * th)
    rn = near * np.sqrt(rng.random(n_near))
    close = rn * np.exp(2j * np.pi * rng.random(n_near))
    return np.concatenate([far, close])


def collapse_scan(eps_list, n_samples=2000, seed=0, h_series=(1.0,), per_base=10, n_grid=64,
                  base_radius=0.85, far=0.1, r1=0.4, r2=0.6, r=0.9, flat=False):
    """Distortion of the projection / zero-section maps between (X, eps g) and the McLean base.

    X is sampled as n_samples / per_base base points, each carrying its
    zero-section point and per_base - 1 random fibre points. Distances in X
    use the route through the zero section, d = a(p) + d_Z + a(q), with a
    the fibre distance to the section and d_Z the graph distance for the
    pulled-back metric. ``flat`` swaps in the model without singular fibres.
    """
    n_base = n_samples // per_base
    ys = sample_base(n_base, base_radius, seed)
    rng = np.random.default_rng(seed + 1)
    rows = []
    singular = () if flat else (0j,)
    for eps in eps_list:
        gm = FlatModel(eps, radius=r) if flat else glue(eps, h_series, r1, r2, r)
        base = McLeanBase(gm.semiflat.periods, singular, radius=r)
        dB = base_distance_matrix(ys, base, n_grid)
        gz = BaseGraph(section_density(gm), r, n_grid, extra=ys, singular=singular)
        idx = gz.extra_index()
        dZ = gz.distances(idx, idx)
        dZ = 0.5 * (dZ + dZ.T)
        T, _ = semiflat_background(gm.semiflat.periods, ys)
        x1 = rng.random((n_base, per_base))
        x2 = rng.random((n_base, per_base)) * T[:, None]
        x1[:, 0] = 0.0
        x2[:, 0] = 0.0
        yy = np.repeat(ys, per_base)
        a = fibre_distance_to_section(gm, x1.reshape(-1), x2.reshape(-1), yy).reshape(n_base, per_base)
        a[:, 0] = 0.0
        # sup over pairs of |a_p + dZ + a_q - dB| by blocks of base points
        amax = a.max(axis=1)
        amin = a.min(axis=1)
        diff = dZ - dB
        hi = np.abs(diff + amax[:, None] + amax[None, :])
        lo = np.abs(diff + amin[:, None] + amin[None, :])
        pair = np.maximum(hi, lo)
        # points over the same base location: d_X(p, q) <= a_p + a_q, d_B = 0
        same = 2 * amax
        np.fill_diagonal(pair, same)
        delta = float(max(pair.max(), a.max()))
        keep = np.abs(ys) >= far
        sub = np.ix_(keep, keep)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(dZ[sub] - dB[sub]) / dB[sub]
        rel = float(np.nanmax(np.where(dB[sub] > 0, rel, 0.0)))
        rows.append(CollapseRow(float(eps), delta, float(a.max()), float(np.abs(diff).max()), rel))
    return rows
