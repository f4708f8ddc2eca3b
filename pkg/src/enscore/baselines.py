"""Reference predictors exercising the full pipeline.

The persistence baseline forecasts each pixel/channel as the mean of its
cloud-free context observations, held constant over the target frames.
Deep models are external: they interoperate by writing prediction
archives in the same container format.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cubes import CUBE_SUFFIX, PRED_SUFFIX, PredictionSet, load_minicube, save_prediction_set
from .tracks import TrackSpec

log = logging.getLogger(__name__)

FALLBACKS = ("channel_mean", "mid_gray")


@dataclass(frozen=True)
class PersistenceConfig:
    """fallback: value for pixels with zero cloud-free context observations.

    channel_mean: mean of the channel's unmasked context pixels;
    mid_gray: 0.5. A channel with no unmasked context at all (fully
    clouded cube) falls back to 0.5 either way.
    """

    fallback: str = "channel_mean"

    def __post_init__(self):
        if self.fallback not in FALLBACKS:
            raise ValueError(f"fallback {self.fallback!r}; expected one of {FALLBACKS}")


def persistence_predict(
    context: np.ndarray,
    context_mask: np.ndarray,
    t_target: int,
    cfg: PersistenceConfig = PersistenceConfig(),
) -> np.ndarray:
    """Constant forecast: per-pixel/channel mean of unmasked context values.

    Returns float32 [t_target, c, h, w]; every value lies in the convex
    hull of the pixel's unmasked observations (fallback pixels excepted).
    """
    ctx = np.asarray(context, dtype=np.float64)
    valid = np.asarray(context_mask) == 0
    counts = valid.sum(axis=0)
    sums = (ctx * valid).sum(axis=0)
    mean = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)

    if cfg.fallback == "mid_gray":
        fill = np.full(ctx.shape[1], 0.5)
    else:
        ch_counts = counts.sum(axis=(1, 2))
        ch_sums = sums.sum(axis=(1, 2))
        fill = np.divide(ch_sums, ch_counts, out=np.full_like(ch_sums, 0.5), where=ch_counts > 0)
    frame = np.where(counts > 0, mean, fill[:, None, None])
    out = np.broadcast_to(frame.astype(np.float32), (t_target, *frame.shape))
    return np.ascontiguousarray(out)


def run_baseline(
    test_dir, out_dir, spec: TrackSpec, cfg: PersistenceConfig = PersistenceConfig()
) -> int:
    """Write one single-member persistence archive per cube; returns count."""
    test_dir = Path(test_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = 0
    for cube_path in sorted(test_dir.glob(f"*{CUBE_SUFFIX}")):
        cube = load_minicube(cube_path)
        c = spec.context_frames
        pred = persistence_predict(cube.hires[:c], cube.mask[:c], spec.target_frames, cfg)
        preds = PredictionSet(cube_id=cube.meta.cube_id, members=(pred,))
        save_prediction_set(preds, out_dir / f"{cube.meta.cube_id}{PRED_SUFFIX}")
        n += 1
    log.info("persistence baseline wrote %d prediction archives to %s", n, out_dir)
    return n
