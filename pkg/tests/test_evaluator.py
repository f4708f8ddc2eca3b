import json

import numpy as np
import pytest

from enscore.errors import InvalidValueError, MissingPredictionError
from enscore.evaluator import (
    CubeResult,
    EvaluationReport,
    emit_report,
    evaluate_dataset,
    select_best_member,
)
from enscore.metrics import SubscoreSet, harmonic_mean, score_cube

from conftest import make_toy


class TestSelectBestMember:
    def test_single_member(self, iid_spec):
        rng = np.random.default_rng(0)
        target, mask, pred = make_toy(rng)
        idx, scores = select_best_member(target, mask, [pred], iid_spec)
        assert idx == 0
        assert scores == score_cube(target, mask, pred, iid_spec)

    def test_perfect_copy_dominates(self, iid_spec):
        rng = np.random.default_rng(1)
        target, _, _ = make_toy(rng)
        mask = np.zeros_like(target, dtype=np.uint8)
        noisy = np.clip(target + rng.normal(0, 0.1, target.shape), 0, 1).astype(np.float32)
        idx, scores = select_best_member(target, mask, [noisy, target], iid_spec)
        assert idx == 1
        assert scores.ens == 1.0

    def test_returns_argmax_of_independent_scoring(self, iid_spec):
        rng = np.random.default_rng(2)
        target, mask, _ = make_toy(rng)
        members = [
            np.clip(target + rng.normal(0, s, target.shape), 0, 1).astype(np.float32)
            for s in (0.12, 0.03, 0.3)
        ]
        ens = [score_cube(target, mask, m, iid_spec).ens for m in members]
        idx, scores = select_best_member(target, mask, members, iid_spec)
        assert idx == int(np.argmax(ens))
        assert scores.ens == max(ens)

    def test_tie_breaks_to_lowest_index(self, iid_spec):
        rng = np.random.default_rng(3)
        target, mask, pred = make_toy(rng)
        idx, _ = select_best_member(target, mask, [pred, pred.copy(), pred.copy()], iid_spec)
        assert idx == 0

    def test_missing_ranks_below_present(self, iid_spec):
        rng = np.random.default_rng(4)
        target, _, pred = make_toy(rng)
        mask = np.ones_like(target, dtype=np.uint8)  # everything missing
        idx, scores = select_best_member(target, mask, [pred, pred], iid_spec)
        assert idx == 0
        assert scores.ens is None

    def test_empty_ensemble_rejected(self, iid_spec):
        rng = np.random.default_rng(5)
        target, mask, _ = make_toy(rng)
        with pytest.raises(InvalidValueError):
            select_best_member(target, mask, [], iid_spec)

    def test_removing_worst_member_never_decreases_choice(self, iid_spec):
        rng = np.random.default_rng(6)
        for _ in range(5):
            target, mask, _ = make_toy(rng, hw=16)
            members = [
                np.clip(target + rng.normal(0, s, target.shape), 0, 1).astype(np.float32)
                for s in rng.uniform(0.02, 0.3, 4)
            ]
            _, full = select_best_member(target, mask, members, iid_spec)
            ens = [score_cube(target, mask, m, iid_spec).ens for m in members]
            worst = int(np.argmin(ens))
            reduced = [m for i, m in enumerate(members) if i != worst]
            _, sub = select_best_member(target, mask, reduced, iid_spec)
            assert sub.ens >= full.ens - 1e-15


class TestEvaluateDataset:
    def test_report_structure_and_aggregates(self, small_suite, iid_spec):
        report = evaluate_dataset(small_suite["cubes"], small_suite["persist"], iid_spec, workers=1)
        assert report.track == "iid"
        ids = [r.cube_id for r in report.per_cube]
        assert ids == sorted(ids) and len(ids) == 3
        for comp in ("mad", "ols", "emd", "ssim"):
            values = [getattr(r.scores, comp) for r in report.per_cube]
            assert report.aggregate[f"mean_{comp}"] == pytest.approx(
                float(np.mean(values)), abs=1e-15
            )
        means = [report.aggregate[f"mean_{c}"] for c in ("mad", "ols", "emd", "ssim")]
        assert report.aggregate["ens"] == harmonic_mean(means)
        assert min(means) - 1e-12 <= report.aggregate["ens"] <= float(np.mean(means)) + 1e-12
        assert report.provenance["version"]
        assert report.provenance["backend"] in ("numba", "numpy")

    def test_worker_count_invariance(self, small_suite, iid_spec, tmp_path):
        reports = {}
        for w in (1, 2):
            r = evaluate_dataset(small_suite["cubes"], small_suite["persist"], iid_spec, workers=w)
            path = tmp_path / f"r{w}.json"
            emit_report(r, path)
            reports[w] = path.read_bytes()
        assert reports[1] == reports[2]

    def test_missing_prediction_aborts_with_cube_id(self, small_suite, iid_spec, tmp_path):
        pred_dir = tmp_path / "partial"
        pred_dir.mkdir()
        files = sorted(small_suite["persist"].glob("*.pred.zip"))
        for f in files[:-1]:
            (pred_dir / f.name).write_bytes(f.read_bytes())
        missing_id = files[-1].name[: -len(".pred.zip")]
        with pytest.raises(MissingPredictionError) as e:
            evaluate_dataset(small_suite["cubes"], pred_dir, iid_spec, workers=1)
        assert e.value.cube_id == missing_id

    def test_empty_test_dir_rejected(self, tmp_path, iid_spec):
        (tmp_path / "preds").mkdir()
        with pytest.raises(InvalidValueError):
            evaluate_dataset(tmp_path, tmp_path / "preds", iid_spec, workers=1)

    def test_extreme_track_end_to_end(self, tmp_path):
        from enscore.baselines import run_baseline
        from enscore.synthcube import SynthConfig, generate_cubes
        from enscore.tracks import get_track

        spec = get_track("extreme")
        cube_dir = tmp_path / "cubes"
        generate_cubes(SynthConfig(seed=8, n_cubes=2, track=spec, cloud_cover_mean=0.2), cube_dir)
        pred_dir = tmp_path / "preds"
        assert run_baseline(cube_dir, pred_dir, spec) == 2
        report = evaluate_dataset(cube_dir, pred_dir, spec, workers=1)
        assert report.track == "extreme"
        assert len(report.per_cube) == 2
        assert 0.0 < report.aggregate["ens"] < 1.0

    def test_mismatched_prediction_cube_id(self, small_suite, iid_spec, tmp_path):
        pred_dir = tmp_path / "swapped"
        pred_dir.mkdir()
        files = sorted(small_suite["persist"].glob("*.pred.zip"))
        # swap two archives so filenames and embedded ids disagree
        (pred_dir / files[0].name).write_bytes(files[1].read_bytes())
        (pred_dir / files[1].name).write_bytes(files[0].read_bytes())
        (pred_dir / files[2].name).write_bytes(files[2].read_bytes())
        with pytest.raises(InvalidValueError):
            evaluate_dataset(small_suite["cubes"], pred_dir, iid_spec, workers=1)


def _fake_report(**aggregate_overrides):
    scores = SubscoreSet(0.5, None, 0.25, 1.0, harmonic_mean([0.5, None, 0.25, 1.0]))
    aggregate = {
        "mean_mad": 0.5,
        "mean_ols": None,
        "mean_emd": 0.25,
        "mean_ssim": 1.0,
        "ens": harmonic_mean([0.5, 0.25, 1.0]),
    }
    aggregate.update(aggregate_overrides)
    return EvaluationReport(
        track="iid",
        per_cube=(CubeResult("c1", 0, scores),),
        aggregate=aggregate,
        provenance={"toolkit": "enscore", "version": "0.0-test"},
        workers=4,
    )


class TestEmitReport:
    def test_emit_twice_identical(self, tmp_path):
        r = _fake_report()
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        emit_report(r, p1)
        emit_report(r, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_serializes_as_null(self, tmp_path):
        p = tmp_path / "r.json"
        emit_report(_fake_report(), p)
        doc = json.loads(p.read_text())
        assert doc["aggregate"]["mean_ols"] is None
        assert doc["per_cube"][0]["scores"]["ols"] is None

    def test_round_trip_reproduces_aggregates(self, tmp_path):
        r = _fake_report()
        p = tmp_path / "r.json"
        emit_report(r, p)
        doc = json.loads(p.read_text())
        for key, value in r.aggregate.items():
            if value is None:
                assert doc["aggregate"][key] is None
            else:
                assert doc["aggregate"][key] == float(format(value, ".6g"))

    def test_worker_count_not_serialized(self, tmp_path):
        p = tmp_path / "r.json"
        emit_report(_fake_report(), p)
        assert b"workers" not in p.read_bytes()

    def test_lf_line_endings(self, tmp_path):
        p = tmp_path / "r.json"
        emit_report(_fake_report(), p)
        data = p.read_bytes()
        assert b"\r" not in data and data.endswith(b"\n")
