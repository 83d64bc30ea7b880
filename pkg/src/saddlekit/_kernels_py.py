"""Pure-numpy fallback for the hot pairwise-separation kernel.

The compiled extension in ``_kernels.pyx`` implements the same interface;
``saddlekit.kernels`` picks whichever is importable.
"""

import numpy as np

HAVE_COMPILED = False


def max_separation_pair(points, block=512):
    """Indices and distance of the farthest-apart pair among ``points``.

    ``points`` is an (N, k) array.  Works in blocks so the full N x N
    distance matrix is never materialized.  Returns ``(i, j, dist)`` with
    ``i < j``; ``(-1, -1, 0.0)`` when fewer than two points are given.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    n = pts.shape[0]
    if n < 2:
        return -1, -1, 0.0
    sq = np.einsum("ij,ij->i", pts, pts)
    best = -1.0
    bi = bj = -1
    for start in range(0, n, block):
        stop = min(start + block, n)
        chunk = pts[start:stop]
        # |p - q|^2 = |p|^2 + |q|^2 - 2 p.q, rows restricted to j > i below
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (chunk @ pts.T)
        cols = np.arange(n)[None, :]
        rows = np.arange(start, stop)[:, None]
        d2[cols <= rows] = -np.inf
        flat = int(np.argmax(d2))
        r, c = divmod(flat, n)
        if d2[r, c] > best:
            best = float(d2[r, c])
            bi, bj = start + r, c
    if best < 0.0:
        return -1, -1, 0.0
    return bi, bj, float(np.sqrt(max(best, 0.0)))
