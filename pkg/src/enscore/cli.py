"""Command-line entry point binding all modules.

Subcommands: score, evaluate, baseline, synth, split, inspect. All
machine output is canonical JSON (6 significant digits) on stdout;
diagnostics go to stderr only, controlled by ENSCORE_LOG
(error|info|debug). Exit codes: 0 success, 2 usage error, 1 runtime
error (with a machine-readable error JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import PersistenceConfig, run_baseline
from .cubes import load_minicube, load_prediction_set, split_context_target
from .errors import EnscoreError
from .evaluator import emit_report, evaluate_dataset, select_best_member
from .jsonio import canon_dump_bytes
from .synthcube import SplitConfig, SynthConfig, generate_cubes, read_manifest, split_dataset
from .tracks import TRACKS, get_track

log = logging.getLogger("enscore")


def _setup_logging() -> None:
    level = os.environ.get("ENSCORE_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        stream=sys.stderr,
        level=levels.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _emit(doc: dict, out: str | None) -> None:
    data = canon_dump_bytes(doc)
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _cmd_score(args) -> int:
    spec = get_track(args.track)
    cube = load_minicube(args.cube)
    preds = load_prediction_set(args.pred)
    _, target, target_mask = split_context_target(cube, spec)
    idx, scores = select_best_member(target, target_mask, preds, spec)
    _emit({"cube_id": cube.meta.cube_id, "member_index": idx, **scores.to_dict()}, args.out)
    return 0


def _cmd_evaluate(args) -> int:
    spec = get_track(args.track)
    report = evaluate_dataset(args.test, args.pred, spec, workers=args.workers)
    if args.out:
        emit_report(report, args.out)
    else:
        _emit(report.to_dict(), None)
    return 0


def _cmd_baseline(args) -> int:
    cfg_doc = _load_config(args.config)
    cfg = PersistenceConfig(**cfg_doc) if cfg_doc else PersistenceConfig()
    spec = get_track(args.track)
    n = run_baseline(args.test, args.out, spec, cfg)
    sys.stdout.buffer.write(canon_dump_bytes({"cubes": n, "out": str(args.out)}))
    return 0


def _cmd_synth(args) -> int:
    doc = _load_config(args.config)
    cfg = SynthConfig(
        seed=args.seed if args.seed is not None else int(doc.get("seed", 0)),
        n_cubes=args.n if args.n is not None else int(doc.get("n_cubes", 8)),
        track=get_track(args.track),
        cloud_cover_mean=float(doc.get("cloud_cover_mean", 0.3)),
        seasonal_amplitude=float(doc.get("seasonal_amplitude", 0.35)),
        noise_sd=float(doc.get("noise_sd", 0.02)),
    )
    metas = generate_cubes(cfg, args.out)
    sys.stdout.buffer.write(
        canon_dump_bytes({"cubes": len(metas), "manifest": str(Path(args.out) / "manifest.json")})
    )
    return 0


def _cmd_split(args) -> int:
    cfg = SplitConfig.from_json_dict(_load_config(args.config))
    metas = read_manifest(args.manifest)
    result = split_dataset(metas, cfg)
    _emit(result, args.out)
    return 0


def _cmd_inspect(args) -> int:
    cube = load_minicube(args.cube)
    frame_masked = cube.mask.mean(axis=(1, 2, 3))
    doc = {
        **cube.meta.to_dict(),
        "frames": cube.frames,
        "meso_steps": int(cube.meso.shape[0]),
        "masked_fraction": {
            "min": float(frame_masked.min()),
            "mean": float(frame_masked.mean()),
            "max": float(frame_masked.max()),
        },
        "hires_range": [float(cube.hires.min()), float(cube.hires.max())],
    }
    _emit(doc, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enscore",
        description="Masked scoring harness for Earth-surface forecasts.",
    )
    parser.add_argument("--version", action="version", version=f"enscore {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    track_names = sorted(TRACKS)

    p = sub.add_parser("score", help="score one cube/prediction pair")
    p.add_argument("--cube", required=True, help="minicube archive (*.mc.zip)")
    p.add_argument("--pred", required=True, help="prediction archive (*.pred.zip)")
    p.add_argument("--track", required=True, choices=track_names)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("evaluate", help="score a whole test directory")
    p.add_argument("--test", required=True, help="directory of *.mc.zip archives")
    p.add_argument("--pred", required=True, help="directory of *.pred.zip archives")
    p.add_argument("--track", required=True, choices=track_names)
    p.add_argument("--workers", type=int, default=None, help="default: available CPUs")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("baseline", help="write persistence predictions for a test directory")
    p.add_argument("--test", required=True, help="directory of *.mc.zip archives")
    p.add_argument("--out", required=True, help="output directory for *.pred.zip")
    p.add_argument("--track", required=True, choices=track_names)
    p.add_argument("--config", help="JSON persistence config (fallback)")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--track", required=True, choices=track_names)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n", type=int, default=None, help="number of cubes")
    p.add_argument("--config", help="JSON synth config (cloud_cover_mean, ...)")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("split", help="balanced train/test split from a manifest")
    p.add_argument("--manifest", required=True, help="manifest JSON from synth")
    p.add_argument("--config", required=True, help="JSON split config")
    p.add_argument("--out", help="write split JSON here instead of stdout")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("inspect", help="print cube metadata and quality stats")
    p.add_argument("--cube", required=True, help="minicube archive (*.mc.zip)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EnscoreError, OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        err = {"error": type(e).__name__, "message": str(e)}
        sys.stderr.write(canon_dump_bytes(err).decode("utf-8"))
        log.debug("runtime failure", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
