import json
import subprocess
import sys

import numpy as np
import pytest

from enscore import synthcube
from enscore.cli import build_parser, main
from enscore.cubes import PredictionSet, load_minicube, save_prediction_set
from enscore.tracks import get_track


def _run(capfd, argv):
    code = main(argv)
    out, err = capfd.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def pipeline_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    test_dir = root / "test"
    pred_dir = root / "pred"
    code = main(
        ["synth", "--out", str(test_dir), "--track", "iid", "--seed", "77", "--n", "2"]
    )
    assert code == 0
    code = main(
        ["baseline", "--test", str(test_dir), "--out", str(pred_dir), "--track", "iid"]
    )
    assert code == 0
    return {"root": root, "test": test_dir, "pred": pred_dir}


def test_synth_baseline_evaluate_pipeline(pipeline_dirs, capfd):
    report_path = pipeline_dirs["root"] / "report.json"
    code, out, err = _run(
        capfd,
        [
            "evaluate",
            "--test", str(pipeline_dirs["test"]),
            "--pred", str(pipeline_dirs["pred"]),
            "--track", "iid",
            "--workers", "2",
            "--out", str(report_path),
        ],
    )
    assert code == 0
    doc = json.loads(report_path.read_text())
    assert 0.0 < doc["aggregate"]["ens"] < 1.0
    assert len(doc["per_cube"]) == 2


def test_evaluate_idempotent_bytes(pipeline_dirs):
    p1 = pipeline_dirs["root"] / "r1.json"
    p2 = pipeline_dirs["root"] / "r2.json"
    for p in (p1, p2):
        code = main(
            [
                "evaluate",
                "--test", str(pipeline_dirs["test"]),
                "--pred", str(pipeline_dirs["pred"]),
                "--track", "iid",
                "--workers", "1",
                "--out", str(p),
            ]
        )
        assert code == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_score_identical_prediction_gives_unit_ens(tmp_path, capfd):
    cube_dir = tmp_path / "cubes"
    cfg = synthcube.SynthConfig(
        seed=5, n_cubes=1, track=get_track("iid"), cloud_cover_mean=0.0
    )
    metas = synthcube.generate_cubes(cfg, cube_dir)
    cube_path = cube_dir / f"{metas[0].cube_id}.mc.zip"
    cube = load_minicube(cube_path)
    pred_path = tmp_path / f"{metas[0].cube_id}.pred.zip"
    save_prediction_set(
        PredictionSet(cube_id=metas[0].cube_id, members=(cube.hires[10:],)), pred_path
    )
    code, out, err = _run(
        capfd,
        ["score", "--cube", str(cube_path), "--pred", str(pred_path), "--track", "iid"],
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["ens"] == 1.0
    assert doc["member_index"] == 0
    assert doc["cube_id"] == metas[0].cube_id


def test_inspect_reports_quality(pipeline_dirs, capfd):
    cube_path = sorted(pipeline_dirs["test"].glob("*.mc.zip"))[0]
    code, out, err = _run(capfd, ["inspect", "--cube", str(cube_path)])
    assert code == 0
    doc = json.loads(out)
    assert doc["frames"] == 30
    assert 0.0 <= doc["quality_fraction"] <= 1.0
    assert doc["masked_fraction"]["min"] <= doc["masked_fraction"]["max"]


def test_split_subcommand(pipeline_dirs, tmp_path, capfd):
    manifest = pipeline_dirs["test"] / "manifest.json"
    metas = synthcube.read_manifest(manifest)
    strata = sorted({(m.start_month, m.latitude_band) for m in metas})
    config = {
        "target_count": len(metas),
        "quality_thresholds": [0.5, 0.0],
        "strata": [
            {
                "month": m,
                "band": b,
                "quota": sum(1 for x in metas if (x.start_month, x.latitude_band) == (m, b)),
            }
            for m, b in strata
        ],
        "ood_tile_fraction": 0.0,
        "seed": 3,
    }
    cfg_path = tmp_path / "split.json"
    cfg_path.write_text(json.dumps(config))
    code, out, err = _run(
        capfd, ["split", "--manifest", str(manifest), "--config", str(cfg_path)]
    )
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"train", "iid_test", "ood_test"}
    assert len(doc["train"]) + len(doc["iid_test"]) == len(metas)


def test_runtime_error_exit_one_with_json_stderr(tmp_path, capfd):
    empty1, empty2 = tmp_path / "a", tmp_path / "b"
    empty1.mkdir()
    empty2.mkdir()
    code, out, err = _run(
        capfd,
        ["evaluate", "--test", str(empty1), "--pred", str(empty2), "--track", "iid"],
    )
    assert code == 1
    doc = json.loads(err)
    assert "error" in doc and "message" in doc


def test_usage_error_exit_two(capfd):
    with pytest.raises(SystemExit) as e:
        main(["score", "--cube", "x"])  # missing required flags
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_unknown_track_rejected(capfd):
    with pytest.raises(SystemExit) as e:
        main(["synth", "--out", "d", "--track", "mars"])
    assert e.value.code == 2


def test_every_flag_documented_in_help(capfd):
    expected = {
        "score": ["--cube", "--pred", "--track", "--out"],
        "evaluate": ["--test", "--pred", "--track", "--workers", "--out"],
        "baseline": ["--test", "--out", "--track", "--config"],
        "synth": ["--out", "--track", "--seed", "--n", "--config"],
        "split": ["--manifest", "--config", "--out"],
        "inspect": ["--cube", "--out"],
    }
    for sub, flags in expected.items():
        with pytest.raises(SystemExit) as e:
            main([sub, "--help"])
        assert e.value.code == 0
        out, _ = capfd.readouterr()
        for flag in flags:
            assert flag in out, f"{sub} help missing {flag}"


def test_parser_knows_exactly_six_subcommands():
    parser = build_parser()
    actions = [a for a in parser._actions if hasattr(a, "choices") and a.choices]
    subs = set(next(iter(actions)).choices)
    assert subs == {"score", "evaluate", "baseline", "synth", "split", "inspect"}


def test_log_env_writes_to_stderr_only():
    out = subprocess.run(
        [sys.executable, "-m", "enscore", "synth", "--out", "/tmp/enscore-log-test",
         "--track", "iid", "--n", "0", "--seed", "1"],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "ENSCORE_LOG": "info", "ENSCORE_BACKEND": "numpy"},
    )
    assert out.returncode == 0
    json.loads(out.stdout)  # stdout stays machine-readable
    assert "generated 0 cubes" in out.stderr
