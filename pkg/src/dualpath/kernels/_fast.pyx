# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementation of the hot kernels; see reference.py for semantics."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double[17][17] _BINOM
cdef double[65] _ISQRT2


cdef void _init_tables() noexcept:
    cdef int n, k
    for n in range(17):
        for k in range(17):
            _BINOM[n][k] = 0.0
        _BINOM[n][0] = 1.0
    for n in range(1, 17):
        for k in range(1, n + 1):
            _BINOM[n][k] = _BINOM[n - 1][k - 1] + _BINOM[n - 1][k]
    for n in range(65):
        _ISQRT2[n] = 2.0 ** (-0.5 * n)


_init_tables()


def correction_sum(double complex[:, :] signal, double complex[:, :] ancilla,
                   double complex[:, :] noise1, double complex[:, :] noise2,
                   int l1, int m1, int l2, int m2,
                   bint skip_signal_full=False, bint skip_ancilla_full=False,
                   bint skip_noise_full=False):
    cdef double complex total = 0
    cdef double complex term
    cdef double c1, c2, c3, coeff
    cdef int k1, k1p, j1, j1p, k2, k2p, j2, j2p
    for k1 in range(l1 + 1):
        for k1p in range(l1 - k1 + 1):
            c1 = _BINOM[l1][k1] * _BINOM[l1 - k1][k1p]
            for j1 in range(m1 + 1):
                for j1p in range(m1 - j1 + 1):
                    c2 = c1 * _BINOM[m1][j1] * _BINOM[m1 - j1][j1p]
                    for k2 in range(l2 + 1):
                        for k2p in range(l2 - k2 + 1):
                            c3 = c2 * _BINOM[l2][k2] * _BINOM[l2 - k2][k2p]
                            for j2 in range(m2 + 1):
                                for j2p in range(m2 - j2 + 1):
                                    if (skip_signal_full and k1 == l1 and j1 == m1
                                            and k2 == l2 and j2 == m2):
                                        continue
                                    if (skip_ancilla_full and k1p == l1 and j1p == m1
                                            and k2p == l2 and j2p == m2):
                                        continue
                                    if skip_noise_full and (k1 | k1p | j1 | j1p
                                            | k2 | k2p | j2 | j2p) == 0:
                                        continue
                                    coeff = (c3 * _BINOM[m2][j2] * _BINOM[m2 - j2][j2p]
                                             * _ISQRT2[k1 + k1p + j1 + j1p
                                                       + k2 + k2p + j2 + j2p])
                                    if (k2 + j2) & 1:
                                        coeff = -coeff
                                    term = (signal[k1 + k2, j1 + j2]
                                            * ancilla[k1p + k2p, j1p + j2p]
                                            * noise1[l1 - k1 - k1p, m1 - j1 - j1p]
                                            * noise2[l2 - k2 - k2p, m2 - j2 - j2p])
                                    total = total + coeff * term
    return total


def channel_power_sums(samples, int max_order):
    cdef double complex[::1] s = np.ascontiguousarray(samples, dtype=np.complex128)
    cdef int K = max_order
    out_arr = np.zeros((K + 1, K + 1), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex pw[9]
    cdef Py_ssize_t i
    cdef int l, m
    cdef double complex val, cl
    if K > 8:
        raise ValueError("max_order above 8 is not supported")
    for i in range(s.shape[0]):
        val = s[i]
        pw[0] = 1
        for l in range(1, K + 1):
            pw[l] = pw[l - 1] * val
        for l in range(K + 1):
            cl = pw[l].conjugate()
            for m in range(K + 1 - l):
                out[l, m] = out[l, m] + cl * pw[m]
    return out_arr


def joint_power_sums(samples1, samples2, int max_order):
    cdef double complex[::1] s1 = np.ascontiguousarray(samples1, dtype=np.complex128)
    cdef double complex[::1] s2 = np.ascontiguousarray(samples2, dtype=np.complex128)
    cdef int K = max_order
    if s1.shape[0] != s2.shape[0]:
        raise ValueError("channel sample arrays must have equal length")
    if K > 8:
        raise ValueError("max_order above 8 is not supported")
    out_arr = np.zeros((K + 1, K + 1, K + 1, K + 1), dtype=np.complex128)
    cdef double complex[:, :, :, ::1] out = out_arr
    cdef double complex p1[9]
    cdef double complex c1[9]
    cdef double complex p2[9]
    cdef double complex c2[9]
    cdef Py_ssize_t i
    cdef int l1, m1, l2, m2
    cdef double complex v1, v2, t1, t2
    for i in range(s1.shape[0]):
        v1 = s1[i]
        v2 = s2[i]
        p1[0] = 1
        p2[0] = 1
        c1[0] = 1
        c2[0] = 1
        for l1 in range(1, K + 1):
            p1[l1] = p1[l1 - 1] * v1
            p2[l1] = p2[l1 - 1] * v2
            c1[l1] = p1[l1].conjugate()
            c2[l1] = p2[l1].conjugate()
        for l1 in range(K + 1):
            for m1 in range(K + 1 - l1):
                t1 = c1[l1] * p1[m1]
                for l2 in range(K + 1 - l1 - m1):
                    t2 = t1 * c2[l2]
                    for m2 in range(K + 1 - l1 - m1 - l2):
                        out[l1, m1, l2, m2] = out[l1, m1, l2, m2] + t2 * p2[m2]
    return out_arr
