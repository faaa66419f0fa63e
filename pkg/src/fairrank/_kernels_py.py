"""Pure-Python versions of the hot loops.

Used when the compiled extension is unavailable or ``FAIRRANK_PURE_PYTHON``
is set.  Results match ``_kernels_ext`` exactly for the counting kernel and
to floating-point round-off for the walk.
"""
import numpy as np


def count_columns_direct(k, lower, upper):
    """Columns ``0..ell`` of the counting table, summing each window directly.

    ``cols[i][kp]`` is the number of ways the first ``i`` groups can hold
    ``kp`` ranks within their bounds.  Cost is O(k^2 ell) additions.
    """
    prev = [1] + [0] * k
    cols = [prev]
    for L, U in zip(lower, upper):
        col = [0] * (k + 1)
        for kp in range(L, k + 1):
            col[kp] = sum(prev[max(0, kp - U):kp - L + 1])
        cols.append(col)
        prev = col
    return cols


def hit_and_run(z, directions, uniforms, lo, hi, thin, out):
    """Advance a hit-and-run chain inside the box ``lo <= z <= hi``.

    ``directions[s]`` must lie in the walk's subspace (the chain never leaves
    it) and ``uniforms[s]`` picks the point on the chord.  ``z`` is updated in
    place; every ``thin``-th iterate is written to consecutive rows of ``out``.
    """
    row = 0
    for s in range(directions.shape[0]):
        a = directions[s]
        pos = a > 0
        neg = a < 0
        tmin = -np.inf
        tmax = np.inf
        if pos.any():
            tmin = max(tmin, ((lo[pos] - z[pos]) / a[pos]).max())
            tmax = min(tmax, ((hi[pos] - z[pos]) / a[pos]).min())
        if neg.any():
            tmin = max(tmin, ((hi[neg] - z[neg]) / a[neg]).max())
            tmax = min(tmax, ((lo[neg] - z[neg]) / a[neg]).min())
        if tmax > tmin:
            t = tmin + uniforms[s] * (tmax - tmin)
            z += t * a
        if thin > 0 and (s + 1) % thin == 0:
            out[row] = z
            row += 1
