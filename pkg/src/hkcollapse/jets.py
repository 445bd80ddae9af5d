"""Fourth-order derivative jets of scalar fields on R^3.

A jet is a list ``[f, d1, d2, d3, d4]`` where ``dk`` holds the symmetric
k-th derivative tensor with trailing shape ``(3,) * k``. Leading axes are
batch axes.
"""
import itertools
import math

import numpy as np

ORDER = 4
DIM = 3


def _sym(t, k):
    """Full symmetrisation over the last k axes."""
    if k < 2:
        return t
    lead = t.ndim - k
    acc = np.zeros_like(t)
    perms = list(itertools.permutations(range(k)))
    for p in perms:
        acc = acc + np.transpose(t, tuple(range(lead)) + tuple(lead + i for i in p))
    return acc / len(perms)


def _tensor(a, b, ka, kb):
    """Outer product of batched tensors of orders ka and kb."""
    a2 = a.reshape(a.shape + (1,) * kb)
    b2 = b.reshape(b.shape[: b.ndim - kb] + (1,) * ka + b.shape[b.ndim - kb:])
    return a2 * b2


def _binom_sym(a, b, ka, kb):
    """C(ka+kb, ka) times the symmetrised outer product: the Leibniz term."""
    return math.comb(ka + kb, ka) * _sym(_tensor(a, b, ka, kb), ka + kb)


def zeros(batch_shape=()):
    return [np.zeros(batch_shape + (DIM,) * k) for k in range(ORDER + 1)]


def constant(c, batch_shape=()):
    j = zeros(batch_shape)
    j[0] = j[0] + c
    return j


def add(a, b):
    return [x + y for x, y in zip(a, b)]


def scale(a, s):
    s = np.asarray(s)
    return [x * s.reshape(s.shape + (1,) * k) for k, x in enumerate(a)]


def mul(a, b):
    """Leibniz product of two jets."""
    out = []
    for n in range(ORDER + 1):
        acc = 0.0
        for ka in range(n + 1):
            acc = acc + _binom_sym(a[ka], b[n - ka], ka, n - ka)
        out.append(acc)
    return out


def compose(fd, a):
    """Jet of f(a) given fd = [f(a0), f'(a0), ..., f''''(a0)] (Faa di Bruno)."""
    f0, f1, f2, f3, f4 = [np.asarray(v) for v in fd]
    v1, v2, v3, v4 = a[1], a[2], a[3], a[4]

    def s(x, k):
        return x.reshape(x.shape + (1,) * k)

    out = [f0 * np.ones_like(a[0])]
    out.append(s(f1, 1) * v1)
    out.append(s(f2, 2) * _tensor(v1, v1, 1, 1) + s(f1, 2) * v2)
    t11 = _tensor(v1, v1, 1, 1)
    out.append(s(f3, 3) * _tensor(t11, v1, 2, 1)
               + s(f2, 3) * _binom_sym(v2, v1, 2, 1)
               + s(f1, 3) * v3)
    t111 = _tensor(t11, v1, 2, 1)
    out.append(s(f4, 4) * _tensor(t111, v1, 3, 1)
               + s(f3, 4) * 6.0 * _sym(_tensor(v2, t11, 2, 2), 4)
               + s(f2, 4) * (3.0 * _sym(_tensor(v2, v2, 2, 2), 4)
                             + 4.0 * _sym(_tensor(v3, v1, 3, 1), 4))
               + s(f1, 4) * v4)
    return out


def radial(w, g, proj=None):
    """Jet of G(|Pw|^2 / 2) at w, given g = [G, G', G'', G''', G''''].

    ``proj`` is the orthogonal projector P (defaults to the identity); with
    P = diag(1, 1, 0) this builds jets of functions of (w1, w2) only.
    """
    w = np.asarray(w, dtype=float)
    if proj is None:
        proj = np.eye(DIM)
    pw = w @ proj
    batch = pw.shape[:-1]
    delta = np.broadcast_to(proj, batch + (DIM, DIM))
    g = [np.asarray(x, dtype=float) for x in g]

    def s(x, k):
        return x.reshape(x.shape + (1,) * k)

    ww = _tensor(pw, pw, 1, 1)
    www = _tensor(ww, pw, 2, 1)
    wwww = _tensor(www, pw, 3, 1)
    out = [g[0] * np.ones(batch),
           s(g[1], 1) * pw,
           s(g[2], 2) * ww + s(g[1], 2) * delta,
           s(g[3], 3) * www + s(g[2], 3) * 3.0 * _sym(_tensor(delta, pw, 2, 1), 3),
           s(g[4], 4) * wwww
           + s(g[3], 4) * 6.0 * _sym(_tensor(delta, ww, 2, 2), 4)
           + s(g[2], 4) * 3.0 * _sym(_tensor(delta, delta, 2, 2), 4)]
    return out


def along_axis(h, axis=2, batch_shape=()):
    """Jet of a function of the single coordinate ``axis`` given its derivatives h[0..4]."""
    out = zeros(batch_shape)
    for k in range(ORDER + 1):
        idx = (Ellipsis,) + (axis,) * k
        out[k][idx] = h[k]
    return out


def laplacian(j):
    """Value of the Laplacian from a jet."""
    return np.einsum("...ii->...", j[2])


def bilaplacian(j):
    return np.einsum("...iikk->...", j[4])


def _index_tuples(k):
    return list(itertools.product(range(DIM), repeat=k))


def polynomial_jet(coef, pts):
    """Jet of the polynomial sum coef[a,b,c] w1^a w2^b w3^c at pts (..., 3).

    All derivatives are taken on the monomial basis, so the evaluation is a
    single matrix product.
    """
    coef = np.asarray(coef, dtype=float)
    pts = np.asarray(pts, dtype=float)
    batch = pts.shape[:-1]
    flat = pts.reshape(-1, DIM)
    nz = np.argwhere(coef != 0.0)
    if nz.size == 0:
        return zeros(batch)
    top = nz.sum(axis=1).max()
    grid = np.indices(coef.shape).reshape(DIM, -1).T
    mons = grid[grid.sum(axis=1) <= top]
    deg = mons.max(axis=0)
    powers = [np.cumprod(np.concatenate([np.ones((flat.shape[0], 1)),
                                         np.repeat(flat[:, a:a + 1], deg[a], axis=1)], axis=1), axis=1)
              for a in range(DIM)]
    basis = powers[0][:, mons[:, 0]] * powers[1][:, mons[:, 1]] * powers[2][:, mons[:, 2]]
    index = {tuple(m): i for i, m in enumerate(mons)}
    cvals = coef[tuple(mons.T)]
    out = zeros(batch)
    for k in range(ORDER + 1):
        cache = {}
        for idx in _index_tuples(k):
            counts = tuple(idx.count(a) for a in range(DIM))
            if counts not in cache:
                D = np.zeros(len(mons))
                for i, m in enumerate(mons):
                    if np.all(m >= counts):
                        target = tuple(m - np.array(counts))
                        f = 1.0
                        for a in range(DIM):
                            f *= math.perm(int(m[a]), counts[a])
                        D[index[target]] += f * cvals[i]
                cache[counts] = basis @ D
            out[k][(Ellipsis,) + idx] = cache[counts].reshape(batch)
    return out


def mul_separated(a, h, axis=2):
    """Product of a jet independent of coordinate ``axis`` with a function of it.

    ``h`` lists that function's derivatives h[0..4]; no Leibniz sum is needed
    since the variables separate.
    """
    out = zeros(np.shape(h[0]))
    for k in range(ORDER + 1):
        for idx in _index_tuples(k):
            c = idx.count(axis)
            rest = tuple(i for i in idx if i != axis)
            out[k][(Ellipsis,) + idx] = a[k - c][(Ellipsis,) + rest] * h[c]
    return out
