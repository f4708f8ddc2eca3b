"""Track-aware dataset evaluation.

Scores every (cube, prediction-ensemble) pair in a test directory,
keeping per cube only the ensemble member whose composed score is
highest, then aggregates per-component arithmetic means over cubes and
composes the dataset total from those means. Work is split statically
over worker processes by sorted cube id, so the emitted report is
byte-identical for any worker count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__, kernels, metrics
from .cubes import (
    CUBE_SUFFIX,
    PRED_SUFFIX,
    PredictionSet,
    load_minicube,
    load_prediction_set,
    split_context_target,
)
from .errors import GeometryMismatchError, InvalidValueError, MissingPredictionError
from .jsonio import canon_dump_bytes
from .metrics import SubscoreSet, harmonic_mean
from .tracks import TrackSpec, get_track

log = logging.getLogger(__name__)

_COMPONENTS = ("mad", "ols", "emd", "ssim")


@dataclass(frozen=True)
class CubeResult:
    cube_id: str
    member_index: int
    scores: SubscoreSet


@dataclass(frozen=True)
class EvaluationReport:
    track: str
    per_cube: tuple
    aggregate: dict
    provenance: dict
    workers: int  # informational; excluded from emitted bytes

    def to_dict(self) -> dict:
        return {
            "track": self.track,
            "per_cube": [
                {
                    "cube_id": r.cube_id,
                    "member_index": r.member_index,
                    "scores": r.scores.to_dict(),
                }
                for r in self.per_cube
            ],
            "aggregate": dict(self.aggregate),
            "provenance": dict(self.provenance),
        }


def select_best_member(
    target, mask, predictions, spec: TrackSpec
) -> tuple[int, SubscoreSet]:
    """Score every ensemble member; return the one with maximal composed
    score. Ties break to the lowest index; missing ranks below present.

    ``predictions`` is a PredictionSet or any sequence of member arrays.
    """
    members = predictions.members if isinstance(predictions, PredictionSet) else tuple(predictions)
    if not 1 <= len(members) <= 10:
        raise InvalidValueError(f"ensemble size {len(members)} not in 1..10")
    best_idx = 0
    best_scores: SubscoreSet | None = None
    best_key = -float("inf")
    for i, member in enumerate(members):
        scores = metrics.score_cube(target, mask, member, spec)
        key = -float("inf") if scores.ens is None else scores.ens
        if best_scores is None or key > best_key:
            best_idx, best_scores, best_key = i, scores, key
    return best_idx, best_scores


def _score_one(cube_path: str, pred_path: str, track_name: str) -> CubeResult:
    spec = get_track(track_name)
    cube = load_minicube(cube_path)
    preds = load_prediction_set(pred_path)
    if preds.cube_id != cube.meta.cube_id:
        raise InvalidValueError(
            f"prediction archive {pred_path} is for cube {preds.cube_id!r}, "
            f"not {cube.meta.cube_id!r}"
        )
    if preds.members[0].shape[0] != spec.target_frames:
        raise GeometryMismatchError(
            f"{pred_path}: {preds.members[0].shape[0]} frames, track "
            f"{spec.name!r} needs {spec.target_frames}"
        )
    _, target, target_mask = split_context_target(cube, spec)
    idx, scores = select_best_member(target, target_mask, preds, spec)
    return CubeResult(cube.meta.cube_id, idx, scores)


def _score_chunk(args) -> list[CubeResult]:
    pairs, track_name = args
    return [_score_one(c, p, track_name) for c, p in pairs]


def _collect_pairs(test_dir, pred_dir) -> list[tuple[str, str]]:
    test_dir = Path(test_dir)
    pred_dir = Path(pred_dir)
    cube_paths = sorted(test_dir.glob(f"*{CUBE_SUFFIX}"))
    if not cube_paths:
        raise InvalidValueError(f"no cube archives (*{CUBE_SUFFIX}) in {test_dir}")
    pairs = []
    for cube_path in cube_paths:
        cube_id = cube_path.name[: -len(CUBE_SUFFIX)]
        pred_path = pred_dir / f"{cube_id}{PRED_SUFFIX}"
        if not pred_path.exists():
            raise MissingPredictionError(cube_id)
        pairs.append((str(cube_path), str(pred_path)))
    return pairs


def evaluate_dataset(
    test_dir, pred_dir, spec: TrackSpec, workers: int | None = None
) -> EvaluationReport:
    """Score all cubes under ``test_dir`` against ``pred_dir``.

    Aborts (rather than silently skipping) when any cube lacks a
    prediction archive: a score over a partial test set would mislead.
    Component means skip cubes where that component is missing.
    """
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, int(workers))
    pairs = _collect_pairs(test_dir, pred_dir)
    log.info("evaluating %d cubes on track %s with %d workers", len(pairs), spec.name, workers)

    if workers == 1 or len(pairs) == 1:
        results = [_score_one(c, p, spec.name) for c, p in pairs]
    else:
        # Static partition of the sorted cube list keeps results
        # independent of scheduling.
        nchunks = min(workers, len(pairs))
        chunks = [pairs[i::nchunks] for i in range(nchunks)]
        with ProcessPoolExecutor(max_workers=nchunks) as pool:
            chunk_results = list(pool.map(_score_chunk, [(c, spec.name) for c in chunks]))
        by_id = {r.cube_id: r for chunk in chunk_results for r in chunk}
        results = [by_id[cid] for cid in sorted(by_id)]

    results.sort(key=lambda r: r.cube_id)

    aggregate: dict[str, float | None] = {}
    means = []
    for comp in _COMPONENTS:
        values = [getattr(r.scores, comp) for r in results if getattr(r.scores, comp) is not None]
        mean = float(sum(values) / len(values)) if values else None
        aggregate[f"mean_{comp}"] = mean
        means.append(mean)
    aggregate["ens"] = harmonic_mean(means)

    provenance = {
        "toolkit": "enscore",
        "version": __version__,
        "backend": kernels.BACKEND,
        "rescale": metrics.DEFAULT_FACTORS.to_dict(),
        "ssim": {
            "window": metrics.SSIM_WINDOW,
            "sigma": metrics.SSIM_SIGMA,
            "k1": metrics.SSIM_K1,
            "k2": metrics.SSIM_K2,
            "data_range": metrics.SSIM_DATA_RANGE,
            "mask_limit": metrics.SSIM_MASK_LIMIT,
        },
    }
    return EvaluationReport(
        track=spec.name,
        per_cube=tuple(results),
        aggregate=aggregate,
        provenance=provenance,
        workers=workers,
    )


def emit_report(report: EvaluationReport, path) -> None:
    """Write the canonical JSON report; identical reports give identical
    bytes (the worker count is deliberately not serialized)."""
    Path(path).write_bytes(canon_dump_bytes(report.to_dict()))
