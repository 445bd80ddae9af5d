"""Pure numpy implementation of the lattice-moment kernel.

Same contract and summation order as the compiled ``_lattice`` module:
M[k, m] = sum_{|n| <= N} G_k(r_n) z_n^m with the +-n terms paired and the
2/(n eps) counterterms folded into M[0, 0]; ``centre=False`` drops n = 0.
"""
import numpy as np

KMAX = 4


def _radial(z, rho2, kmax):
    inv = 1.0 / np.sqrt(z * z + rho2)
    inv2 = inv * inv
    g = [inv]
    for k in range(1, kmax + 1):
        g.append(-g[-1] * inv2 * (2 * k - 1))
    return g


def lattice_moments(u, rho2, eps, nmax, kmax, centre=True):
    if kmax < 0 or kmax > KMAX:
        raise ValueError("kmax must be in [0, %d]" % KMAX)
    u = np.ascontiguousarray(u, dtype=np.float64)
    rho2 = np.ascontiguousarray(rho2, dtype=np.float64)
    out = np.zeros((u.shape[0], KMAX + 1, KMAX + 2))
    ne = eps * np.arange(1, nmax + 1, dtype=np.float64)
    for p in range(u.shape[0]):
        u0, r2 = u[p], rho2[p]
        g0 = _radial(np.array([u0]), r2, kmax) if centre else [np.zeros(1)] * (kmax + 1)
        zp = u0 + ne
        zm = u0 - ne
        gp = _radial(zp, r2, kmax)
        gm = _radial(zm, r2, kmax)
        # numpy sums pairwise, so results match the compiled loop to rounding only
        out[p, 0, 0] = g0[0][0] + np.sum((gp[0] + gm[0]) - 2.0 / ne)
        out[p, 0, 1] = g0[0][0] * u0 + np.sum(gp[0] * zp + gm[0] * zm)
        for k in range(1, kmax + 1):
            for m in range(k + 1):
                out[p, k, m] = g0[k][0] * u0 ** m + np.sum(gp[k] * zp ** m + gm[k] * zm ** m)
    return out
