# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice-moment kernel.

For each point (u, rho^2) accumulates M[k, m] = sum_n G_k(r_n) z_n^m over
|n| <= N, where z_n = u + n eps, r_n^2 = z_n^2 + rho^2 and
G_k = (-1)^k (2k-1)!! r^-(2k+1) are the derivatives of 1/r with respect to
r^2/2. M[0, 0] carries the counterterms 2/(n eps) for each +-n pair.
With centre=False the n = 0 term is left out, which keeps the moments
accurate when that term is huge.
Summation runs over n = 0, 1, ..., N with the +-n terms paired.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef enum:
    KMAX = 4


cdef inline void _radial(double z, double rho2, int kmax, double* g) noexcept nogil:
    cdef double inv = 1.0 / sqrt(z * z + rho2)
    cdef double inv2 = inv * inv
    cdef int k
    g[0] = inv
    for k in range(1, kmax + 1):
        g[k] = -g[k - 1] * inv2 * (2 * k - 1)


def lattice_moments(double[::1] u, double[::1] rho2, double eps, long nmax, int kmax, bint centre=True):
    cdef Py_ssize_t npts = u.shape[0]
    cdef Py_ssize_t p
    cdef long n
    cdef int k, m
    cdef double gp[KMAX + 1]
    cdef double gm[KMAX + 1]
    cdef double acc[KMAX + 1][KMAX + 2]
    cdef double zp, zm, pp, pm, ne, rr2, u0
    if kmax < 0 or kmax > KMAX:
        raise ValueError("kmax must be in [0, %d]" % KMAX)
    out = np.zeros((npts, KMAX + 1, KMAX + 2), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    with nogil:
        for p in range(npts):
            for k in range(KMAX + 1):
                for m in range(KMAX + 2):
                    acc[k][m] = 0.0
            rr2 = rho2[p]
            u0 = u[p]
            if centre:
                _radial(u0, rr2, kmax, gp)
                acc[0][0] = gp[0]
                acc[0][1] = gp[0] * u0
                for k in range(1, kmax + 1):
                    pp = 1.0
                    for m in range(k + 1):
                        acc[k][m] = gp[k] * pp
                        pp = pp * u0
            for n in range(1, nmax + 1):
                ne = n * eps
                zp = u0 + ne
                zm = u0 - ne
                _radial(zp, rr2, kmax, gp)
                _radial(zm, rr2, kmax, gm)
                acc[0][0] += (gp[0] + gm[0]) - 2.0 / ne
                acc[0][1] += gp[0] * zp + gm[0] * zm
                for k in range(1, kmax + 1):
                    pp = 1.0
                    pm = 1.0
                    for m in range(k + 1):
                        acc[k][m] += gp[k] * pp + gm[k] * pm
                        pp = pp * zp
                        pm = pm * zm
            for k in range(KMAX + 1):
                for m in range(KMAX + 2):
                    o[p, k, m] = acc[k][m]
    return out
