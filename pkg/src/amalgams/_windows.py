"""Box-window reductions on regular lattices (prefix sums and sliding maxima).

Every ball of a grid space is an index box around its center, so sums and
maxima over balls reduce to separable 1-D window passes along each axis.
"""

import numpy as np
from scipy import ndimage


def _centered_sum_1d(a, k, axis, periodic):
    n = a.shape[axis]
    a = np.moveaxis(a, axis, -1)
    if periodic and 2 * k + 1 >= n:
        total = a.sum(axis=-1, keepdims=True, dtype=np.longdouble)
        out = np.broadcast_to(total, a.shape)
    elif periodic:
        ext = np.concatenate([a[..., n - k:], a, a[..., :k]], axis=-1)
        c = np.cumsum(ext, axis=-1, dtype=np.longdouble)
        c = np.concatenate([np.zeros(c.shape[:-1] + (1,), c.dtype), c], axis=-1)
        out = c[..., 2 * k + 1:] - c[..., : n]
    else:
        c = np.cumsum(a, axis=-1, dtype=np.longdouble)
        c = np.concatenate([np.zeros(c.shape[:-1] + (1,), c.dtype), c], axis=-1)
        idx = np.arange(n)
        hi = np.minimum(idx + k + 1, n)
        lo = np.maximum(idx - k, 0)
        out = c[..., hi] - c[..., lo]
    return np.moveaxis(np.asarray(out, dtype=np.longdouble), -1, axis)


def centered_sum(arr, ks, periodic=False):
    """Sum of ``arr`` over the index box ``[i-k, i+k]`` (per axis) around each index.

    Truncated at the array edge unless ``periodic``; a periodic box wider
    than the axis covers it exactly once. Accumulation is done in extended precision.
    """
    out = np.asarray(arr, dtype=np.longdouble)
    for axis, k in enumerate(ks):
        out = _centered_sum_1d(out, int(k), axis, periodic)
    return np.asarray(out, dtype=float)


def centered_max(arr, ks, periodic=False):
    """Maximum of a nonnegative array over the index box ``[i-k, i+k]``."""
    arr = np.asarray(arr, dtype=float)
    size = []
    for axis, k in enumerate(ks):
        n = arr.shape[axis]
        size.append(min(2 * int(k) + 1, 2 * n + 1))
    if periodic:
        return ndimage.maximum_filter(arr, size=size, mode="wrap")
    return ndimage.maximum_filter(arr, size=size, mode="constant", cval=0.0)


def sliding_sum(arr, sizes):
    """Sums over every run of ``sizes[axis]`` consecutive indices that fits in the array.

    A window longer than the axis collapses to the whole axis.
    """
    out = np.asarray(arr, dtype=np.longdouble)
    for axis, m in enumerate(sizes):
        out = np.moveaxis(out, axis, -1)
        n = out.shape[-1]
        m = min(int(m), n)
        c = np.cumsum(out, axis=-1)
        c = np.concatenate([np.zeros(c.shape[:-1] + (1,), c.dtype), c], axis=-1)
        out = np.moveaxis(c[..., m:] - c[..., : n - m + 1], -1, axis)
    return np.asarray(out, dtype=float)


def sliding_max(arr, sizes):
    """Maxima over every run of ``sizes[axis]`` consecutive indices (``valid`` windows)."""
    out = np.asarray(arr, dtype=float)
    for axis, m in enumerate(sizes):
        out = np.moveaxis(out, axis, -1)
        n = out.shape[-1]
        m = min(int(m), n)
        win = np.lib.stride_tricks.sliding_window_view(out, m, axis=-1)
        out = np.moveaxis(win.max(axis=-1), -1, axis)
    return out
