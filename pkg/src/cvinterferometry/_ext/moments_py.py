"""Pure-Python Isserlis recursion, used when the compiled module is absent."""

import numpy as np


def gaussian_moments(Q, cutoff):
    """Moments E[z0^k0 z1^k1 z2^k2 z3^k3] for all k_i <= cutoff.

    ``Q[i, j] = E[z_i z_j]`` for a zero-mean Gaussian vector z of length 4.
    """
    n = cutoff + 1
    q = np.asarray(Q, dtype=complex).tolist()
    M = np.zeros((n, n, n, n), dtype=complex)
    M[0, 0, 0, 0] = 1.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    total = a + b + c + d
                    if total & 1 or total == 0:
                        continue
                    k = [a, b, c, d]
                    i = 0
                    while k[i] == 0:
                        i += 1
                    k[i] -= 1
                    acc = 0j
                    qi = q[i]
                    for j in range(4):
                        kj = k[j]
                        if kj == 0:
                            continue
                        k[j] = kj - 1
                        acc += qi[j] * kj * M[k[0], k[1], k[2], k[3]]
                        k[j] = kj
                    M[a, b, c, d] = acc
    return M
