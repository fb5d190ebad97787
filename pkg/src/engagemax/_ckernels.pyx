# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (see ``_pykernels`` for the reference)."""

import numpy as np
from libc.math cimport fabs, INFINITY
from libc.stdint cimport uint64_t, int64_t

BACKEND = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double unit(uint64_t seed, uint64_t path, uint64_t draw) nogil:
    cdef uint64_t key = mix64(seed + (path + 1) * GOLDEN)
    cdef uint64_t v = mix64(key + (draw + 1) * GOLDEN)
    return (<double>(v >> 11) + 0.5) * TWO_M53


def uniforms(seed, paths, draw):
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t d = <uint64_t>int(draw)
    cdef uint64_t[:] p = np.ascontiguousarray(paths, dtype=np.uint64)
    out = np.empty(p.shape[0], dtype=np.float64)
    cdef double[:] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(p.shape[0]):
            o[i] = unit(s, p[i], d)
    return out


def sample_dilution(seed, long long start, long long n, double alpha, cumw):
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef double[:] cw = np.ascontiguousarray(cumw, dtype=np.float64)
    cdef Py_ssize_t k = cw.shape[0]
    tau = np.empty(n, dtype=np.float64)
    idx = np.empty(n, dtype=np.int64)
    cdef double[:] t = tau
    cdef int64_t[:] ix = idx
    cdef Py_ssize_t i, lo, hi, mid
    cdef uint64_t path
    cdef double u1
    with nogil:
        for i in range(n):
            path = <uint64_t>(start + i)
            t[i] = unit(s, path, 0)
            u1 = unit(s, path, 1)
            # first index with cw[idx] > u1
            lo = 0
            hi = k
            while lo < hi:
                mid = (lo + hi) // 2
                if cw[mid] <= u1:
                    lo = mid + 1
                else:
                    hi = mid
            if lo > k - 1:
                lo = k - 1
            ix[i] = lo
    # numpy's log keeps jump times bit-identical to the fallback backend
    np.log(tau, out=tau)
    tau /= -alpha
    return tau, idx


def blahut_arimoto(expu, prior, p0, double tol, long long maxiter):
    cdef double[:, :] E = np.ascontiguousarray(expu, dtype=np.float64)
    cdef double[:] q0 = np.ascontiguousarray(prior, dtype=np.float64)
    p_arr = np.array(p0, dtype=np.float64)
    cdef double[:] p = p_arr
    cdef Py_ssize_t nx = E.shape[0], na = E.shape[1]
    cdef double[:] D = np.empty(nx)
    cdef double[:] r = np.empty(nx)
    cdef double[:] pn = np.empty(na)
    cdef double delta = INFINITY, s, tot, diff
    cdef long long it = 0
    cdef Py_ssize_t x, a
    with nogil:
        while it < maxiter:
            for x in range(nx):
                s = 0.0
                for a in range(na):
                    s = s + E[x, a] * p[a]
                D[x] = s
                r[x] = q0[x] / s if s > 0.0 else 0.0
            tot = 0.0
            for a in range(na):
                s = 0.0
                for x in range(nx):
                    s = s + r[x] * E[x, a]
                pn[a] = p[a] * s
                tot = tot + pn[a]
            delta = 0.0
            for a in range(na):
                pn[a] = pn[a] / tot
                diff = fabs(pn[a] - p[a])
                if diff > delta:
                    delta = diff
                p[a] = pn[a]
            it += 1
            if delta < tol:
                break
    return p_arr, it, delta


def upper_hull(x, y):
    cdef double[:] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:] Y = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], i, j, k, top = 0
    hull = np.empty(n, dtype=np.int64)
    cdef int64_t[:] h = hull
    with nogil:
        for i in range(n):
            while top >= 2:
                j = h[top - 2]
                k = h[top - 1]
                if (X[k] - X[j]) * (Y[i] - Y[j]) - (Y[k] - Y[j]) * (X[i] - X[j]) >= 0.0:
                    top -= 1
                else:
                    break
            h[top] = i
            top += 1
    return hull[:top].copy()


def rk4_linear_backward(t, a_end, a_mid, a_start, b_end, b_mid, b_start, double y_end):
    cdef double[:] T = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[:] a1 = np.ascontiguousarray(a_end, dtype=np.float64)
    cdef double[:] a2 = np.ascontiguousarray(a_mid, dtype=np.float64)
    cdef double[:] a3 = np.ascontiguousarray(a_start, dtype=np.float64)
    cdef double[:] b1 = np.ascontiguousarray(b_end, dtype=np.float64)
    cdef double[:] b2 = np.ascontiguousarray(b_mid, dtype=np.float64)
    cdef double[:] b3 = np.ascontiguousarray(b_start, dtype=np.float64)
    cdef Py_ssize_t m = T.shape[0], i
    out = np.empty(m, dtype=np.float64)
    cdef double[:] y = out
    cdef double yi = y_end, h, k1, k2, k3, k4
    y[m - 1] = y_end
    with nogil:
        for i in range(m - 2, -1, -1):
            h = T[i] - T[i + 1]
            k1 = a1[i] * yi + b1[i]
            k2 = a2[i] * (yi + 0.5 * h * k1) + b2[i]
            k3 = a2[i] * (yi + 0.5 * h * k2) + b2[i]
            k4 = a3[i] * (yi + h * k3) + b3[i]
            yi = yi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            y[i] = yi
    return out
