# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Isserlis recursion for two-mode complex Gaussian moments."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def gaussian_moments(cnp.ndarray[cnp.complex128_t, ndim=2] Q, int cutoff):
    """Moments E[z0^k0 z1^k1 z2^k2 z3^k3] for all k_i <= cutoff.

    ``Q[i, j] = E[z_i z_j]`` for a zero-mean Gaussian vector z of length 4.
    """
    cdef int n = cutoff + 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=4] M = np.zeros((n, n, n, n), dtype=np.complex128)
    cdef double complex[:, :, :, ::1] m = M
    cdef double complex[:, ::1] q = np.ascontiguousarray(Q)
    cdef int k[4]
    cdef int i, j, a, b, c, d
    cdef double complex acc
    m[0, 0, 0, 0] = 1.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    if (a + b + c + d) & 1 or (a + b + c + d) == 0:
                        continue
                    k[0] = a; k[1] = b; k[2] = c; k[3] = d
                    i = 0
                    while k[i] == 0:
                        i += 1
                    k[i] -= 1
                    acc = 0.0
                    for j in range(4):
                        if k[j] == 0:
                            continue
                        k[j] -= 1
                        acc = acc + q[i, j] * (k[j] + 1) * m[k[0], k[1], k[2], k[3]]
                        k[j] += 1
                    m[a, b, c, d] = acc
    return M
