"""Pure NumPy/SciPy kernel implementations.

This is the fallback path (and the reference the numba backend is
checked against). All functions take float64 time-major arrays with
pixels flattened to the trailing axis.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d

from ._common import GAUSS_KERNEL, GAUSS_RADIUS

NAME = "numpy"


def ols_distances(tn: np.ndarray, pn: np.ndarray, valid: np.ndarray):
    """Per-pixel trend-slope distance |b_pred - b_targ| / 2 in [0, 1].

    tn, pn: (T, P) NDVI series for target and prediction.
    valid:  (T, P) 1 where the target frame is usable.

    The target slope is fitted over valid frames only; the prediction
    slope over every frame between the first and last valid index. Both
    regressors are the frame indices mapped affinely onto [0, 2].
    Pixels with fewer than two valid frames are not computable.

    Returns (dist, ok), each (P,); dist is 0 where ok is False.
    """
    T, P = tn.shape
    v = valid.astype(np.float64)
    n = v.sum(axis=0)
    vb = valid.astype(bool)
    fmin = np.argmax(vb, axis=0)
    fmax = T - 1 - np.argmax(vb[::-1], axis=0)
    ok = n >= 2.0

    span = np.maximum(fmax - fmin, 1)
    scale = 2.0 / span
    idx = np.arange(T, dtype=np.float64)[:, None]
    x = scale[None, :] * (idx - fmin[None, :])

    def _slope(w: np.ndarray, y: np.ndarray) -> np.ndarray:
        sw = w.sum(axis=0)
        sx = (w * x).sum(axis=0)
        sy = (w * y).sum(axis=0)
        sxx = (w * x * x).sum(axis=0)
        sxy = (w * x * y).sum(axis=0)
        sw_safe = np.maximum(sw, 1.0)
        den = sxx - sx * sx / sw_safe
        num = sxy - sx * sy / sw_safe
        safe = den != 0.0
        return np.where(safe, num / np.where(safe, den, 1.0), 0.0), safe

    b_targ, safe_t = _slope(v, tn)
    w_pred = ((idx >= fmin[None, :]) & (idx <= fmax[None, :])).astype(np.float64)
    b_pred, safe_p = _slope(w_pred, pn)

    ok = ok & safe_t & safe_p
    dist = np.abs(b_pred - b_targ) / 2.0
    dist = np.clip(dist, 0.0, 1.0)
    return np.where(ok, dist, 0.0), ok


def _w1_segments(n: int, m: int):
    """Quantile segments for empirical sizes (n, m): index pairs and widths."""
    ia = np.empty(n + m, dtype=np.int64)
    ib = np.empty(n + m, dtype=np.int64)
    dq = np.empty(n + m, dtype=np.float64)
    i = j = k = 0
    q = 0.0
    while i < n and j < m:
        qa = (i + 1) / n
        qb = (j + 1) / m
        qn = qa if qa < qb else qb
        ia[k] = i
        ib[k] = j
        dq[k] = qn - q
        if qa == qn:
            i += 1
        if qb == qn:
            j += 1
        q = qn
        k += 1
    return ia[:k], ib[:k], dq[:k]


def w1_scalar(a: np.ndarray, b: np.ndarray) -> float:
    """Wasserstein-1 distance between two empirical distributions."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    ia, ib, dq = _w1_segments(len(a), len(b))
    total = 0.0
    for k in range(len(dq)):
        total += abs(a[ia[k]] - b[ib[k]]) * dq[k]
    return total


def w1_pixels(tn: np.ndarray, pn: np.ndarray, valid: np.ndarray):
    """Per-pixel W1 between valid target values and all predicted values.

    Returns (w1, ok), each (P,); pixels with no valid target frame have
    ok False and w1 0. Vectorized by grouping pixels with equal valid
    counts, whose quantile segmentation is identical.
    """
    T, P = tn.shape
    counts = valid.astype(np.int64).sum(axis=0)
    ok = counts > 0
    w1 = np.zeros(P, dtype=np.float64)

    ps = np.sort(pn, axis=0)
    ts = np.sort(np.where(valid.astype(bool), tn, np.inf), axis=0)

    for n in np.unique(counts):
        if n == 0:
            continue
        cols = np.nonzero(counts == n)[0]
        ia, ib, dq = _w1_segments(int(n), T)
        seg = np.abs(ts[ia][:, cols] - ps[ib][:, cols]) * dq[:, None]
        w1[cols] = seg.sum(axis=0)
    return w1, ok


def gauss_valid(img: np.ndarray) -> np.ndarray:
    """Separable 11-tap Gaussian filter, cropped to fully-supported pixels."""
    r = GAUSS_RADIUS
    tmp = correlate1d(img, GAUSS_KERNEL, axis=0, mode="constant")
    out = correlate1d(tmp, GAUSS_KERNEL, axis=1, mode="constant")
    return out[r:-r, r:-r]
