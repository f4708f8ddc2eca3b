"""The four masked subscores and their harmonic-mean composition.

Each subscore maps a (target, mask, prediction) triple to a value in
[0, 1] (1 best) or to "missing" when no valid data exists; missing is
represented as ``None`` and excluded from the composition. Raw distances
are rescaled by fixed exponents so the four components land in a
comparable difficulty range before the harmonic mean is taken.

All functions here are pure; parallelism lives in the evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .cubes import ndvi, ndvi_mask
from .errors import GeometryMismatchError, ShapeMismatchError
from .tracks import TrackSpec

# Difficulty-rescaling exponents. Each was calibrated so that a chosen
# worst-case reference distance (or, for the structural term, a raw
# index of 0.8) maps to a subscore of 0.1.
SF_MAD = 0.0665
SF_NDVI = 0.1008
SF_SSIM = 10.3188

# Structural-similarity internals: 11x11 Gaussian window (sigma 1.5),
# Wang et al. stability constants, unit data range.
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_DATA_RANGE = 1.0
SSIM_WINDOW = 2 * kernels.GAUSS_RADIUS + 1
SSIM_SIGMA = kernels.GAUSS_SIGMA

# A frame enters the structural subscore only when strictly less than
# this fraction of its target pixels is masked.
SSIM_MASK_LIMIT = 0.3


@dataclass(frozen=True)
class RescaleFactors:
    sf_mad: float = SF_MAD
    sf_ndvi: float = SF_NDVI
    sf_ssim: float = SF_SSIM

    def __post_init__(self):
        if min(self.sf_mad, self.sf_ndvi, self.sf_ssim) <= 0:
            raise ValueError("rescale factors must be strictly positive")

    def to_dict(self) -> dict:
        return {"sf_mad": self.sf_mad, "sf_ndvi": self.sf_ndvi, "sf_ssim": self.sf_ssim}


DEFAULT_FACTORS = RescaleFactors()


@dataclass(frozen=True)
class SubscoreSet:
    """The four component scores plus their composition; None = missing."""

    mad: float | None
    ols: float | None
    emd: float | None
    ssim: float | None
    ens: float | None

    def to_dict(self) -> dict:
        return {
            "mad": self.mad,
            "ols": self.ols,
            "emd": self.emd,
            "ssim": self.ssim,
            "ens": self.ens,
        }


def harmonic_mean(values: list) -> float | None:
    """n / sum(1/v) over present values; 0 dominates; all-missing -> None."""
    present = [v for v in values if v is not None]
    if not present:
        return None
    if any(v == 0.0 for v in present):
        return 0.0
    return len(present) / sum(1.0 / v for v in present)


def compose_ens(
    mad: float | None, ols: float | None, emd: float | None, ssim: float | None
) -> SubscoreSet:
    """Compose the harmonic-mean total from the four components."""
    return SubscoreSet(mad, ols, emd, ssim, harmonic_mean([mad, ols, emd, ssim]))


def _as_f64(name: str, arr) -> np.ndarray:
    return np.asarray(arr, dtype=np.float64)


def _check_same_shape(**arrays) -> None:
    shapes = {k: np.asarray(v).shape for k, v in arrays.items()}
    if len(set(shapes.values())) != 1:
        raise ShapeMismatchError(f"shape mismatch: {shapes}")


def mad_score(target, mask, pred, factors: RescaleFactors = DEFAULT_FACTORS) -> float | None:
    """1 - d^sf where d is the median absolute prediction error over
    unmasked cells; None when every cell is masked."""
    _check_same_shape(target=target, mask=mask, pred=pred)
    t = _as_f64("target", target)
    p = _as_f64("pred", pred)
    valid = np.asarray(mask) == 0
    if not valid.any():
        return None
    d = float(np.median(np.abs(p[valid] - t[valid])))
    return float(1.0 - d**factors.sf_mad)


def _check_windows(windows, t: int) -> None:
    if not windows:
        raise ValueError("windows must be non-empty")
    pos = 0
    for start, stop in windows:
        if start != pos or stop <= start:
            raise ValueError(f"windows must partition [0, {t}) contiguously: {windows}")
        pos = stop
    if pos != t:
        raise ValueError(f"windows must cover [0, {t}): {windows}")


def ols_score(
    target_ndvi,
    ndvi_mask_arr,
    pred_ndvi,
    windows: list[tuple[int, int]],
    factors: RescaleFactors = DEFAULT_FACTORS,
) -> float | None:
    """Trend agreement of pixelwise NDVI series, per window.

    For every pixel and window the target slope is fitted over unmasked
    frames and the predicted slope over all frames between the first and
    last unmasked one; regressors are mapped onto [0, 2] so slopes of
    series in [-1, 1] stay within [-1, 1]. The per-fit distance is
    |b_pred - b_targ| / 2 clamped to [0, 1]; pixel-windows with fewer
    than two usable frames are skipped.
    """
    _check_same_shape(target_ndvi=target_ndvi, ndvi_mask=ndvi_mask_arr, pred_ndvi=pred_ndvi)
    tn = _as_f64("target_ndvi", target_ndvi)
    pn = _as_f64("pred_ndvi", pred_ndvi)
    t = tn.shape[0]
    _check_windows(windows, t)
    valid = (np.asarray(ndvi_mask_arr) == 0).astype(np.uint8)

    tn2 = tn.reshape(t, -1)
    pn2 = pn.reshape(t, -1)
    v2 = valid.reshape(t, -1)
    pooled = []
    for start, stop in windows:
        dist, ok = kernels.ols_distances(tn2[start:stop], pn2[start:stop], v2[start:stop])
        if ok.any():
            pooled.append(dist[ok])
    if not pooled:
        return None
    dist_all = np.concatenate(pooled)
    return float(1.0 - np.mean(dist_all**factors.sf_ndvi))


def wasserstein1_1d(a, b) -> float:
    """Exact W1 between the empirical distributions of two sample lists."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("wasserstein1_1d requires non-empty samples")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("wasserstein1_1d requires finite samples")
    return kernels.w1_scalar(a, b)


def emd_score(
    target_ndvi, ndvi_mask_arr, pred_ndvi, factors: RescaleFactors = DEFAULT_FACTORS
) -> float | None:
    """Distributional agreement of pixelwise NDVI series.

    Per pixel: W1 between unmasked target values and all predicted
    values, clamped to [0, 1] before rescaling (NDVI spans [-1, 1], so
    raw W1 can reach 2). Pixels without any unmasked target frame are
    skipped; None if every pixel is skipped.
    """
    _check_same_shape(target_ndvi=target_ndvi, ndvi_mask=ndvi_mask_arr, pred_ndvi=pred_ndvi)
    tn = _as_f64("target_ndvi", target_ndvi)
    pn = _as_f64("pred_ndvi", pred_ndvi)
    t = tn.shape[0]
    valid = (np.asarray(ndvi_mask_arr) == 0).astype(np.uint8)

    w1, ok = kernels.w1_pixels(tn.reshape(t, -1), pn.reshape(t, -1), valid.reshape(t, -1))
    if not ok.any():
        return None
    w1 = np.minimum(w1[ok], 1.0)
    return float(1.0 - np.mean(w1**factors.sf_ndvi))


def _ssim_frame(x: np.ndarray, y: np.ndarray) -> float:
    """Mean structural similarity of one frame pair (unit data range).

    Frames too small to host the filter window fall back to whole-frame
    statistics (a single global window).
    """
    c1 = (SSIM_K1 * SSIM_DATA_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_DATA_RANGE) ** 2
    if min(x.shape) < SSIM_WINDOW:
        mu_x = np.mean(x)
        mu_y = np.mean(y)
        sxx = np.mean(x * x) - mu_x * mu_x
        syy = np.mean(y * y) - mu_y * mu_y
        sxy = np.mean(x * y) - mu_x * mu_y
    else:
        mu_x = kernels.gauss_valid(x)
        mu_y = kernels.gauss_valid(y)
        sxx = kernels.gauss_valid(x * x) - mu_x * mu_x
        syy = kernels.gauss_valid(y * y) - mu_y * mu_y
        sxy = kernels.gauss_valid(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def ssim_rescale(raw: float, factors: RescaleFactors = DEFAULT_FACTORS) -> float:
    """Difficulty rescale for the structural term; negatives clamp to 0
    (fractional powers of negatives are undefined)."""
    return float(max(raw, 0.0) ** factors.sf_ssim)


def ssim_score(target, mask, pred, factors: RescaleFactors = DEFAULT_FACTORS) -> float | None:
    """Masked structural similarity over (time, channel) frames.

    Frames whose target is >= 30% masked are skipped. On kept frames,
    masked target pixels are substituted with the prediction's pixels so
    only observed structure is compared. Score is the frame mean raised
    to the rescale exponent; None when every frame is skipped.
    """
    _check_same_shape(target=target, mask=mask, pred=pred)
    t = _as_f64("target", target)
    p = _as_f64("pred", pred)
    m = np.asarray(mask) != 0
    nt, nc = t.shape[0], t.shape[1]

    per_frame = []
    for i in range(nt):
        for c in range(nc):
            frame_mask = m[i, c]
            if frame_mask.mean() >= SSIM_MASK_LIMIT:
                continue
            x = np.where(frame_mask, p[i, c], t[i, c])
            per_frame.append(_ssim_frame(x, p[i, c]))
    if not per_frame:
        return None
    raw = float(np.mean(per_frame))
    return ssim_rescale(raw, factors)


def score_cube(
    target,
    mask,
    pred,
    spec: TrackSpec,
    factors: RescaleFactors = DEFAULT_FACTORS,
) -> SubscoreSet:
    """All four subscores plus composition for one prediction member.

    ``target``/``mask`` are the cube's target-frame views, ``pred`` one
    forecast of the same geometry.
    """
    target = np.asarray(target)
    mask = np.asarray(mask)
    pred = np.asarray(pred)
    if target.shape != mask.shape or target.shape != pred.shape:
        raise GeometryMismatchError(
            f"target {target.shape}, mask {mask.shape}, pred {pred.shape}"
        )
    if target.ndim != 4 or target.shape[0] != spec.target_frames:
        raise GeometryMismatchError(
            f"expected [{spec.target_frames}, c, h, w] for track {spec.name!r}, "
            f"got {target.shape}"
        )

    mad = mad_score(target, mask, pred, factors)
    tn = ndvi(target)
    pn = ndvi(pred)
    nm = ndvi_mask(mask)
    ols = ols_score(tn, nm, pn, spec.windows(), factors)
    emd = emd_score(tn, nm, pn, factors)
    ssim = ssim_score(target, mask, pred, factors)
    return compose_ens(mad, ols, emd, ssim)
