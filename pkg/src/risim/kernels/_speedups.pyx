# cython: boundscheck=False, wraparound=False, cdivision=True
# Compiled hot path: per-trial candidate synthesis plus exhaustive ML scan.
# Contract mirrors kernels.reference.detect_received_block.

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

NAME = "cython"


def detect_received_block(
    const cnp.complex128_t[:, ::1] h1,
    const cnp.complex128_t[:, :, ::1] h2_est,
    const cnp.complex128_t[:, :, ::1] h2_true,
    const cnp.complex128_t[:, ::1] noise,
    double sqrt_n0,
    const cnp.int32_t[:, ::1] targets,
    const cnp.complex128_t[::1] points,
    const cnp.int64_t[::1] r_true,
    const cnp.int64_t[::1] k_true,
):
    cdef Py_ssize_t trials = h1.shape[0]
    cdef Py_ssize_t n = h1.shape[1]
    cdef Py_ssize_t n_r = h2_est.shape[1]
    cdef Py_ssize_t d = targets.shape[0]
    cdef Py_ssize_t m = points.shape[0]
    cdef bint same = &h2_true[0, 0, 0] == &h2_est[0, 0, 0]

    r_hat_arr = np.empty(trials, dtype=np.int64)
    k_hat_arr = np.empty(trials, dtype=np.int64)
    cdef cnp.int64_t[::1] r_hat = r_hat_arr
    cdef cnp.int64_t[::1] k_hat = k_hat_arr

    scratch = np.empty(3 * n_r * n + d * n_r + n_r, dtype=np.complex128)
    cdef cnp.complex128_t[::1] buf = scratch
    cdef cnp.complex128_t *ce
    cdef cnp.complex128_t *ct
    cdef cnp.complex128_t *u
    cdef cnp.complex128_t *cand
    cdef cnp.complex128_t *y

    cdef Py_ssize_t t, i, j, r, k, tgt, rt, br, bk
    cdef cnp.complex128_t c, w, x, diff
    cdef double mag, dist, best

    with nogil:
        ce = &buf[0]
        ct = ce + n_r * n
        u = ct + n_r * n
        cand = u + n_r * n
        y = cand + d * n_r
        for t in range(trials):
            for j in range(n_r):
                for i in range(n):
                    c = h2_est[t, j, i] * h1[t, i]
                    ce[j * n + i] = c
                    mag = sqrt(c.real * c.real + c.imag * c.imag)
                    u[j * n + i] = c.conjugate() / mag
                    if not same:
                        ct[j * n + i] = h2_true[t, j, i] * h1[t, i]
            for r in range(d):
                for j in range(n_r):
                    cand[r * n_r + j] = 0
                for i in range(n):
                    tgt = targets[r, i]
                    if tgt >= 0:
                        w = u[tgt * n + i]
                        for j in range(n_r):
                            cand[r * n_r + j] = cand[r * n_r + j] + ce[j * n + i] * w
            rt = r_true[t]
            x = points[k_true[t]]
            if same:
                for j in range(n_r):
                    y[j] = cand[rt * n_r + j] * x + sqrt_n0 * noise[t, j]
            else:
                for j in range(n_r):
                    y[j] = 0
                for i in range(n):
                    tgt = targets[rt, i]
                    if tgt >= 0:
                        w = u[tgt * n + i]
                        for j in range(n_r):
                            y[j] = y[j] + ct[j * n + i] * w
                for j in range(n_r):
                    y[j] = y[j] * x + sqrt_n0 * noise[t, j]
            best = 1e300
            br = 0
            bk = 0
            for r in range(d):
                for k in range(m):
                    x = points[k]
                    dist = 0
                    for j in range(n_r):
                        diff = y[j] - cand[r * n_r + j] * x
                        dist += diff.real * diff.real + diff.imag * diff.imag
                    if dist < best:
                        best = dist
                        br = r
                        bk = k
            r_hat[t] = br
            k_hat[t] = bk
    return r_hat_arr, k_hat_arr
