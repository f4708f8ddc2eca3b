"""Desk-scale synthetic data.

The generator fabricates valid minicubes with plausible dynamics: a
sinusoidal seasonal NDVI cycle modulated per pixel, an anomaly coupled
to (lagged) synthetic temperature, pixel noise, and cumulus-like
rectangular cloud masks. Red/near-infrared reflectances are back-solved
from NDVI under a static brightness field, so the vegetation signal is
recoverable exactly. Everything derives from per-cube seeded RNG
streams: identical config means identical bytes.

The splitter consumes metadata manifests and reproduces the iterative
quality-loosening, stratum-balancing admission scheme with a spatially
held-out tile set.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cubes import (
    CUBE_SUFFIX,
    HIRES_HW,
    MESO_CHANNELS,
    MESO_HW,
    CubeMetadata,
    Minicube,
    quality_fraction,
    save_minicube,
)
from .errors import InvalidValueError, SplitInfeasibleError
from .jsonio import REPR, canon_dump_bytes
from .tracks import MESO_STEPS_PER_FRAME, TrackSpec

log = logging.getLogger(__name__)

CUBES_PER_TILE = 4
MANIFEST_NAME = "manifest.json"

_YEAR = 365.0
_CLOUD_VALUE = 0.9  # reflectance written under synthetic clouds
_RECT_MEAN_AREA = 28.0 * 28.0  # rectangle sides drawn uniformly from 8..48


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    n_cubes: int
    track: TrackSpec
    cloud_cover_mean: float = 0.3
    seasonal_amplitude: float = 0.35
    noise_sd: float = 0.02

    def __post_init__(self):
        if self.n_cubes < 0:
            raise ValueError("n_cubes must be >= 0")
        if not 0.0 <= self.cloud_cover_mean <= 1.0:
            raise ValueError("cloud_cover_mean must be in [0, 1]")
        if self.noise_sd < 0.0:
            raise ValueError("noise_sd must be >= 0")


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def _lowres_field(rng, shape_hw, factor, lo, hi):
    """Smooth spatial field: low-res noise upsampled by block replication."""
    base = rng.random((shape_hw[0] // factor, shape_hw[1] // factor))
    return lo + (hi - lo) * np.kron(base, np.ones((factor, factor)))


def _smooth_series(rng, length, sd, knots=12):
    """Low-frequency 1-D noise via linear interpolation between knots."""
    k = max(2, knots)
    xs = np.linspace(0.0, length - 1.0, k)
    ys = rng.normal(0.0, sd, k)
    return np.interp(np.arange(length, dtype=np.float64), xs, ys)


def _cloud_mask(rng, t, cover):
    """Per-frame random rectangles targeting ~cover total fraction."""
    mask = np.zeros((t, HIRES_HW, HIRES_HW), dtype=np.uint8)
    if cover <= 0.0:
        return mask
    lam = cover * HIRES_HW * HIRES_HW / _RECT_MEAN_AREA
    for i in range(t):
        for _ in range(rng.poisson(lam)):
            h = int(rng.integers(8, 49))
            w = int(rng.integers(8, 49))
            y = int(rng.integers(0, HIRES_HW - h + 1))
            x = int(rng.integers(0, HIRES_HW - w + 1))
            mask[i, y : y + h, x : x + w] = 1
    return mask


def _generate_one(cfg: SynthConfig, index: int) -> Minicube:
    rng = _rng(cfg.seed, index)
    t = cfg.track.hires_frames
    days = MESO_STEPS_PER_FRAME * t

    start_month = int(rng.integers(1, 13))
    band = "north" if rng.random() < 0.5 else "south"
    tile_idx = index // CUBES_PER_TILE
    tile_id = f"tile{tile_idx:03d}"
    cube_id = f"c{cfg.seed % (1 << 32):08x}-{index:04d}"

    day0 = (start_month - 1) * 30
    doy_day = (day0 + np.arange(days)) % _YEAR
    warm = 0.05 if band == "south" else 0.0

    # Daily meteorology, normalized to [0, 1].
    tg = 0.45 + warm + 0.25 * np.sin(2.0 * np.pi * (doy_day - 120.0) / _YEAR)
    tg = np.clip(tg + _smooth_series(rng, days, 0.02), 0.0, 1.0)
    tn = np.clip(tg - 0.08 + _smooth_series(rng, days, 0.01), 0.0, 1.0)
    tx = np.clip(tg + 0.08 + _smooth_series(rng, days, 0.01), 0.0, 1.0)
    pp = np.clip(0.5 + _smooth_series(rng, days, 0.04), 0.0, 1.0)
    wet = rng.random(days) < 0.3
    rr = np.clip(wet * rng.random(days) * 0.6, 0.0, 1.0)

    meso = np.empty((days, MESO_CHANNELS, MESO_HW, MESO_HW), dtype=np.float32)
    for c, series in enumerate((rr, pp, tg, tn, tx)):
        pattern = _lowres_field(rng, (MESO_HW, MESO_HW), 8, -0.02, 0.02)
        meso[:, c] = np.clip(series[:, None, None] + pattern[None], 0.0, 1.0)

    # Frame-level NDVI: seasonal cycle + lagged temperature anomaly + noise.
    frame_days = np.arange(t) * MESO_STEPS_PER_FRAME
    doy_f = (day0 + frame_days) % _YEAR
    season = np.sin(2.0 * np.pi * (doy_f - 150.0) / _YEAR)
    tg_frames = tg[frame_days]
    tg_lagged = np.concatenate([tg_frames[:2], tg_frames[:-2]])
    anomaly = 0.5 * (tg_lagged - (0.45 + warm))

    veg = _lowres_field(rng, (HIRES_HW, HIRES_HW), 8, 0.3, 1.0)
    base_v = _lowres_field(rng, (HIRES_HW, HIRES_HW), 16, 0.0, 0.4)
    ndvi = (
        base_v[None]
        + cfg.seasonal_amplitude * veg[None] * season[:, None, None]
        + anomaly[:, None, None]
    )
    ndvi = np.clip(ndvi, -0.95, 0.95)

    brightness = _lowres_field(rng, (HIRES_HW, HIRES_HW), 16, 0.3, 0.9)
    nir = brightness[None] * (1.0 + ndvi) / 2.0
    red = brightness[None] * (1.0 - ndvi) / 2.0
    green = 0.8 * red + 0.08 * veg[None]
    blue = 0.7 * red + 0.04

    hires = np.stack([blue, green, red, nir], axis=1)
    if cfg.noise_sd > 0.0:
        hires = hires + rng.normal(0.0, cfg.noise_sd, hires.shape)
    hires = np.clip(hires, 0.0, 1.0).astype(np.float32)

    cloud = _cloud_mask(rng, t, cfg.cloud_cover_mean)
    mask = np.broadcast_to(cloud[:, None], hires.shape)
    hires = np.where(mask, np.float32(_CLOUD_VALUE), hires)

    tile_rng = _rng(cfg.seed, 1_000_000 + tile_idx)
    dem_hires = np.clip(_lowres_field(tile_rng, (HIRES_HW, HIRES_HW), 16, 0.05, 0.85), 0, 1)
    dem_meso = np.clip(_lowres_field(tile_rng, (MESO_HW, MESO_HW), 8, 0.05, 0.85), 0, 1)

    meta = CubeMetadata(
        cube_id=cube_id,
        tile_id=tile_id,
        start_month=start_month,
        latitude_band=band,
        quality_fraction=quality_fraction(mask),
    )
    return Minicube(
        hires=hires,
        mask=np.ascontiguousarray(mask),
        meso=meso,
        dem_hires=dem_hires.astype(np.float32),
        dem_meso=dem_meso.astype(np.float32),
        meta=meta,
    )


def write_manifest(path, metas: list[CubeMetadata]) -> None:
    doc = {"cubes": [m.to_dict() for m in sorted(metas, key=lambda m: m.cube_id)]}
    Path(path).write_bytes(canon_dump_bytes(doc, float_mode=REPR))


def read_manifest(path) -> list[CubeMetadata]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if "cubes" not in doc:
        raise InvalidValueError(f"{path}: manifest missing 'cubes'")
    return [CubeMetadata.from_dict(d) for d in doc["cubes"]]


def generate_cubes(cfg: SynthConfig, out_dir) -> list[CubeMetadata]:
    """Write ``cfg.n_cubes`` archives plus a manifest; returns metadata."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metas = []
    for i in range(cfg.n_cubes):
        cube = _generate_one(cfg, i)
        save_minicube(cube, out_dir / f"{cube.meta.cube_id}{CUBE_SUFFIX}")
        metas.append(cube.meta)
    write_manifest(out_dir / MANIFEST_NAME, metas)
    log.info("generated %d cubes in %s", len(metas), out_dir)
    return metas


@dataclass(frozen=True)
class SplitConfig:
    """Admission policy for the balanced dataset split.

    quality_thresholds are tried strictly descending: each pass admits
    cubes whose quality passes the current cutoff, round-robin over
    unfilled (month, band) strata, until every quota is met. A seeded
    fraction of tiles is held out entirely as the spatial OOD test set.
    """

    target_count: int
    quality_thresholds: tuple = (0.9, 0.5, 0.0)
    strata: dict = field(default_factory=dict)  # (month, band) -> quota
    ood_tile_fraction: float = 0.2
    seed: int = 0
    train_fraction: float = 0.85

    def __post_init__(self):
        ts = tuple(self.quality_thresholds)
        if not ts or any(b >= a for a, b in zip(ts, ts[1:])) or ts[0] > 1.0:
            raise ValueError("quality_thresholds must be strictly descending, <= 1")
        if not 0.0 <= self.ood_tile_fraction <= 1.0:
            raise ValueError("ood_tile_fraction must be in [0, 1]")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.strata and sum(self.strata.values()) != self.target_count:
            raise ValueError("strata quotas must sum to target_count")

    @classmethod
    def from_json_dict(cls, d: dict) -> "SplitConfig":
        strata = {
            (int(s["month"]), str(s["band"])): int(s["quota"]) for s in d.get("strata", [])
        }
        return cls(
            target_count=int(d["target_count"]),
            quality_thresholds=tuple(float(x) for x in d.get("quality_thresholds", (0.9, 0.5, 0.0))),
            strata=strata,
            ood_tile_fraction=float(d.get("ood_tile_fraction", 0.2)),
            seed=int(d.get("seed", 0)),
            train_fraction=float(d.get("train_fraction", 0.85)),
        )


def split_dataset(meta: list[CubeMetadata], cfg: SplitConfig) -> dict:
    """Partition cube ids into train / iid_test / ood_test.

    Deterministic given (meta set, cfg); independent of input ordering.
    Cubes outside every configured stratum are never admitted.
    """
    if not meta:
        raise InvalidValueError("empty metadata manifest")
    records = sorted(meta, key=lambda m: m.cube_id)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed]))

    tiles = sorted({m.tile_id for m in records})
    n_ood = int(round(cfg.ood_tile_fraction * len(tiles)))
    order = rng.permutation(len(tiles))
    ood_tiles = {tiles[j] for j in order[:n_ood]}
    ood_ids = [m.cube_id for m in records if m.tile_id in ood_tiles]
    pool = [m for m in records if m.tile_id not in ood_tiles]

    strata_keys = sorted(cfg.strata)
    buckets: dict = {k: [] for k in strata_keys}
    for m in pool:
        key = (m.start_month, m.latitude_band)
        if key in buckets:
            buckets[key].append(m)
    for k in strata_keys:
        rng.shuffle(buckets[k])  # seeded admission order within the stratum

    admitted: dict = {k: [] for k in strata_keys}
    taken: dict = {k: np.zeros(len(buckets[k]), dtype=bool) for k in strata_keys}
    for threshold in cfg.quality_thresholds:
        cursors = {k: 0 for k in strata_keys}
        progress = True
        while progress:
            progress = False
            for k in strata_keys:
                if len(admitted[k]) >= cfg.strata[k]:
                    continue
                bucket = buckets[k]
                i = cursors[k]
                while i < len(bucket) and (
                    taken[k][i] or bucket[i].quality_fraction < threshold
                ):
                    i += 1
                cursors[k] = i
                if i < len(bucket):
                    taken[k][i] = True
                    admitted[k].append(bucket[i].cube_id)
                    cursors[k] = i + 1
                    progress = True

    unfilled = {
        f"{k[0]}:{k[1]}": cfg.strata[k] - len(admitted[k])
        for k in strata_keys
        if len(admitted[k]) < cfg.strata[k]
    }
    if unfilled:
        raise SplitInfeasibleError(unfilled)

    admitted_ids = sorted(cid for ids in admitted.values() for cid in ids)
    order = rng.permutation(len(admitted_ids))
    n_train = int(round(cfg.train_fraction * len(admitted_ids)))
    train = sorted(admitted_ids[j] for j in order[:n_train])
    iid_test = sorted(admitted_ids[j] for j in order[n_train:])
    return {"train": train, "iid_test": iid_test, "ood_test": sorted(ood_ids)}
