import numpy as np
import pytest

from enscore.baselines import PersistenceConfig, persistence_predict, run_baseline
from enscore.cubes import load_prediction_set
from enscore.tracks import get_track


def test_mean_of_clear_observations():
    # pixel series [0.4 (clear), 0.6 (clear), masked] -> 0.5 everywhere
    ctx = np.zeros((3, 1, 1, 1), dtype=np.float32)
    ctx[:, 0, 0, 0] = [0.4, 0.6, 0.9]
    mask = np.zeros_like(ctx, dtype=np.uint8)
    mask[2] = 1
    out = persistence_predict(ctx, mask, 5)
    assert out.shape == (5, 1, 1, 1)
    assert np.allclose(out, 0.5)


def test_fully_clear_constant_cube():
    ctx = np.full((4, 4, 8, 8), 0.3, dtype=np.float32)
    mask = np.zeros_like(ctx, dtype=np.uint8)
    out = persistence_predict(ctx, mask, 7)
    assert np.allclose(out, 0.3)


def test_channel_mean_fallback():
    # channel unmasked mean 0.42; one pixel fully masked picks it up
    ctx = np.full((2, 1, 2, 2), 0.42, dtype=np.float32)
    mask = np.zeros_like(ctx, dtype=np.uint8)
    mask[:, 0, 0, 0] = 1
    out = persistence_predict(ctx, mask, 3, PersistenceConfig("channel_mean"))
    assert out[0, 0, 0, 0] == pytest.approx(0.42, abs=1e-7)


def test_mid_gray_fallback():
    ctx = np.full((2, 1, 2, 2), 0.42, dtype=np.float32)
    mask = np.zeros_like(ctx, dtype=np.uint8)
    mask[:, 0, 0, 0] = 1
    out = persistence_predict(ctx, mask, 3, PersistenceConfig("mid_gray"))
    assert out[0, 0, 0, 0] == pytest.approx(0.5)
    assert out[0, 0, 1, 1] == pytest.approx(0.42, abs=1e-7)


def test_entirely_masked_channel_falls_back_to_mid_gray():
    ctx = np.full((2, 1, 2, 2), 0.42, dtype=np.float32)
    mask = np.ones_like(ctx, dtype=np.uint8)
    out = persistence_predict(ctx, mask, 2, PersistenceConfig("channel_mean"))
    assert np.allclose(out, 0.5)


def test_constant_along_time_axis():
    rng = np.random.default_rng(0)
    ctx = rng.random((6, 4, 10, 10)).astype(np.float32)
    mask = (rng.random(ctx.shape) < 0.4).astype(np.uint8)
    out = persistence_predict(ctx, mask, 9)
    assert np.all(out == out[0])


def test_output_within_convex_hull_of_observations():
    rng = np.random.default_rng(1)
    ctx = rng.random((8, 4, 12, 12)).astype(np.float32)
    mask = (rng.random(ctx.shape) < 0.3).astype(np.uint8)
    out = persistence_predict(ctx, mask, 2)
    valid = mask == 0
    counts = valid.sum(axis=0)
    lo = np.where(valid, ctx, np.inf).min(axis=0)
    hi = np.where(valid, ctx, -np.inf).max(axis=0)
    observed = counts > 0
    assert np.all(out[0][observed] >= lo[observed] - 1e-6)
    assert np.all(out[0][observed] <= hi[observed] + 1e-6)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_invalid_fallback_rejected():
    with pytest.raises(ValueError):
        PersistenceConfig("median")


def test_run_baseline_empty_dir(tmp_path):
    out = tmp_path / "preds"
    n = run_baseline(tmp_path, out, get_track("iid"))
    assert n == 0
    assert not list(out.glob("*.pred.zip"))


def test_run_baseline_writes_loadable_archives(small_suite, tmp_path, iid_spec):
    out = tmp_path / "preds"
    n = run_baseline(small_suite["cubes"], out, iid_spec)
    assert n == 3
    files = sorted(out.glob("*.pred.zip"))
    assert len(files) == 3
    preds = load_prediction_set(files[0])
    assert len(preds.members) == 1
    assert preds.members[0].shape == (20, 4, 128, 128)


def test_run_baseline_reruns_byte_identical(small_suite, tmp_path, iid_spec):
    out1, out2 = tmp_path / "p1", tmp_path / "p2"
    run_baseline(small_suite["cubes"], out1, iid_spec)
    run_baseline(small_suite["cubes"], out2, iid_spec)
    for f1 in sorted(out1.iterdir()):
        assert f1.read_bytes() == (out2 / f1.name).read_bytes()


def test_persistence_is_perfect_on_constant_cloud_free_data(tmp_path, iid_spec):
    # temporally constant reflectance: the context mean reproduces every
    # target frame bit-exactly, so the whole pipeline scores 1
    from enscore.cubes import CubeMetadata, Minicube, save_minicube
    from enscore.evaluator import evaluate_dataset

    rng = np.random.default_rng(77)
    field = rng.random((1, 4, 128, 128)).astype(np.float32)
    hires = np.broadcast_to(field, (30, 4, 128, 128))
    cube = Minicube(
        hires=np.ascontiguousarray(hires),
        mask=np.zeros((30, 4, 128, 128), dtype=np.uint8),
        meso=np.full((150, 5, 80, 80), 0.5, dtype=np.float32),
        dem_hires=np.zeros((128, 128), dtype=np.float32),
        dem_meso=np.zeros((80, 80), dtype=np.float32),
        meta=CubeMetadata("const-0", "tile-c", 3, "north", 1.0),
    )
    test_dir = tmp_path / "cubes"
    test_dir.mkdir()
    save_minicube(cube, test_dir / "const-0.mc.zip")
    pred_dir = tmp_path / "preds"
    assert run_baseline(test_dir, pred_dir, iid_spec) == 1
    report = evaluate_dataset(test_dir, pred_dir, iid_spec, workers=1)
    assert report.aggregate["ens"] == 1.0
