# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise-separation kernel.

Same interface as ``_kernels_py``; selected at import by ``saddlekit.kernels``
when the extension was built.
"""

import numpy as np

cimport cython
from libc.math cimport sqrt

HAVE_COMPILED = True


def max_separation_pair(points, block=None):
    """Indices and distance of the farthest-apart pair among ``points``."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("expected an (N, k) array")
    cdef double[:, ::1] p = pts
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t k = p.shape[1]
    if n < 2:
        return -1, -1, 0.0
    cdef Py_ssize_t i, j, c, bi = 0, bj = 1
    cdef double best = -1.0, d2, diff
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                d2 = 0.0
                for c in range(k):
                    diff = p[i, c] - p[j, c]
                    d2 += diff * diff
                if d2 > best:
                    best = d2
                    bi = i
                    bj = j
    return int(bi), int(bj), float(sqrt(best))
