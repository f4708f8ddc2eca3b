from __future__ import annotations

import numpy as np
import pytest

from enscore import baselines, synthcube
from enscore.cubes import (
    CUBE_SUFFIX,
    PRED_SUFFIX,
    PredictionSet,
    load_minicube,
    save_prediction_set,
)
from enscore.tracks import get_track


def make_toy(rng, t=20, hw=16, mask_p=0.25, noise=0.08):
    """Random (target, mask, pred) arrays for direct metric-level tests."""
    target = rng.random((t, 4, hw, hw)).astype(np.float32)
    mask = (rng.random((t, 4, hw, hw)) < mask_p).astype(np.uint8)
    pred = np.clip(target + rng.normal(0.0, noise, target.shape), 0, 1).astype(np.float32)
    return target, mask, pred


def _write_perfect_predictions(cube_dir, out_dir, spec):
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in sorted(cube_dir.glob(f"*{CUBE_SUFFIX}")):
        cube = load_minicube(path)
        target = cube.hires[spec.context_frames :]
        preds = PredictionSet(cube_id=cube.meta.cube_id, members=(target,))
        save_prediction_set(preds, out_dir / f"{cube.meta.cube_id}{PRED_SUFFIX}")


@pytest.fixture(scope="session")
def iid_spec():
    return get_track("iid")


@pytest.fixture(scope="session")
def clean_suite16(tmp_path_factory, iid_spec):
    """16 cloud-free cubes + perfect and persistence prediction dirs."""
    root = tmp_path_factory.mktemp("clean16")
    cube_dir = root / "cubes"
    cfg = synthcube.SynthConfig(seed=161, n_cubes=16, track=iid_spec, cloud_cover_mean=0.0)
    synthcube.generate_cubes(cfg, cube_dir)
    perfect_dir = root / "perfect"
    _write_perfect_predictions(cube_dir, perfect_dir, iid_spec)
    persist_dir = root / "persist"
    baselines.run_baseline(cube_dir, persist_dir, iid_spec)
    return {"cubes": cube_dir, "perfect": perfect_dir, "persist": persist_dir}


@pytest.fixture(scope="session")
def cloudy_suite64(tmp_path_factory, iid_spec):
    """64 cloudy cubes + persistence predictions (determinism workload)."""
    root = tmp_path_factory.mktemp("cloudy64")
    cube_dir = root / "cubes"
    cfg = synthcube.SynthConfig(seed=640, n_cubes=64, track=iid_spec, cloud_cover_mean=0.3)
    synthcube.generate_cubes(cfg, cube_dir)
    persist_dir = root / "persist"
    baselines.run_baseline(cube_dir, persist_dir, iid_spec)
    return {"cubes": cube_dir, "persist": persist_dir}


@pytest.fixture(scope="session")
def small_suite(tmp_path_factory, iid_spec):
    """3 cloudy cubes + persistence predictions for cheap pipeline tests."""
    root = tmp_path_factory.mktemp("small")
    cube_dir = root / "cubes"
    cfg = synthcube.SynthConfig(seed=31, n_cubes=3, track=iid_spec, cloud_cover_mean=0.25)
    metas = synthcube.generate_cubes(cfg, cube_dir)
    persist_dir = root / "persist"
    baselines.run_baseline(cube_dir, persist_dir, iid_spec)
    return {"cubes": cube_dir, "persist": persist_dir, "metas": metas}
