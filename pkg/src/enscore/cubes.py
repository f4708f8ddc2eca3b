"""Minicube samples and their binary container format.

A minicube is one self-contained sample: a high-resolution spectral
image time series with a per-pixel/per-channel quality mask, mesoscale
daily meteorology, and static elevation at both resolutions. The
canonical axis order is (time, channel, height, width) everywhere.

Containers are plain ZIP archives (deflate) holding one NPY v1.0 entry
per tensor plus a ``meta.json`` document. Loading validates and rejects,
it never clamps or repairs: a scorer must not silently alter input.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass

import numpy as np

from .errors import (
    GeometryMismatchError,
    InvalidValueError,
    MissingArrayError,
    ShapeMismatchError,
)
from .jsonio import REPR, canon_dump_bytes
from .tracks import MESO_STEPS_PER_FRAME, TrackSpec

CHANNELS = ("blue", "green", "red", "nir")
RED = 2
NIR = 3

HIRES_HW = 128
MESO_HW = 80
MESO_CHANNELS = 5  # RR, PP, TG, TN, TX
HIRES_FRAME_COUNTS = (30, 60, 210)  # main/robustness, extreme, seasonal

CUBE_SUFFIX = ".mc.zip"
PRED_SUFFIX = ".pred.zip"
MAX_ENSEMBLE = 10

LATITUDE_BANDS = ("north", "south")

# Fixed ZIP entry timestamp so identical cubes produce identical bytes.
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
_FLOAT_DTYPE = np.dtype("<f4")
_MASK_DTYPE = np.dtype("u1")


def _frozen(arr: np.ndarray, dtype: np.dtype) -> np.ndarray:
    """Return a C-contiguous read-only array, copying only when needed."""
    a = np.asarray(arr)
    if a.dtype == dtype and a.flags.c_contiguous and not a.flags.writeable:
        return a
    a = np.array(a, dtype=dtype, order="C")
    a.flags.writeable = False
    return a


def _check_unit_range(name: str, arr: np.ndarray) -> None:
    if not np.isfinite(arr).all():
        raise InvalidValueError(f"{name}: non-finite value")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidValueError(f"{name}: value outside [0, 1]")


def _check_binary(name: str, arr: np.ndarray) -> None:
    if not np.isin(arr, (0, 1)).all():
        raise InvalidValueError(f"{name}: mask value outside {{0, 1}}")


def quality_fraction(mask: np.ndarray) -> float:
    """Fraction of unmasked cells: 1 - (count of mask==1) / cells."""
    return float(1.0 - np.count_nonzero(mask) / mask.size)


@dataclass(frozen=True)
class CubeMetadata:
    """Per-cube stratification and quality record."""

    cube_id: str
    tile_id: str
    start_month: int
    latitude_band: str
    quality_fraction: float

    def validate(self) -> None:
        if not self.cube_id:
            raise InvalidValueError("meta: empty cube_id")
        if not 1 <= int(self.start_month) <= 12:
            raise InvalidValueError(f"meta: start_month {self.start_month} not in 1..12")
        if self.latitude_band not in LATITUDE_BANDS:
            raise InvalidValueError(f"meta: latitude_band {self.latitude_band!r}")
        if not 0.0 <= self.quality_fraction <= 1.0:
            raise InvalidValueError("meta: quality_fraction outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "cube_id": self.cube_id,
            "tile_id": self.tile_id,
            "start_month": int(self.start_month),
            "latitude_band": self.latitude_band,
            "quality_fraction": float(self.quality_fraction),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CubeMetadata":
        try:
            meta = cls(
                cube_id=str(d["cube_id"]),
                tile_id=str(d["tile_id"]),
                start_month=int(d["start_month"]),
                latitude_band=str(d["latitude_band"]),
                quality_fraction=float(d["quality_fraction"]),
            )
        except KeyError as e:
            raise InvalidValueError(f"meta.json missing field {e.args[0]!r}") from None
        meta.validate()
        return meta


@dataclass(frozen=True)
class Minicube:
    """One sample. Immutable after construction; safe to share across workers.

    hires     [t, 4, 128, 128] float32 reflectance in [0, 1] (blue, green, red, nir)
    mask      [t, 4, 128, 128] uint8, 1 = contaminated/invalid, 0 = valid
    meso      [5t, 5, 80, 80]  float32 meteorology in [0, 1] (RR, PP, TG, TN, TX)
    dem_hires [128, 128]       float32 elevation in [0, 1]
    dem_meso  [80, 80]         float32 elevation in [0, 1]
    """

    hires: np.ndarray
    mask: np.ndarray
    meso: np.ndarray
    dem_hires: np.ndarray
    dem_meso: np.ndarray
    meta: CubeMetadata

    def __post_init__(self):
        object.__setattr__(self, "hires", _frozen(self.hires, _FLOAT_DTYPE))
        object.__setattr__(self, "mask", _frozen(self.mask, _MASK_DTYPE))
        object.__setattr__(self, "meso", _frozen(self.meso, _FLOAT_DTYPE))
        object.__setattr__(self, "dem_hires", _frozen(self.dem_hires, _FLOAT_DTYPE))
        object.__setattr__(self, "dem_meso", _frozen(self.dem_meso, _FLOAT_DTYPE))
        self.validate()

    @property
    def frames(self) -> int:
        return self.hires.shape[0]

    def validate(self) -> None:
        t = self.hires.shape[0] if self.hires.ndim == 4 else -1
        if t not in HIRES_FRAME_COUNTS:
            raise ShapeMismatchError(
                f"hires: frame count {t} not one of {HIRES_FRAME_COUNTS}"
            )
        expect = {
            "hires": (t, len(CHANNELS), HIRES_HW, HIRES_HW),
            "mask": (t, len(CHANNELS), HIRES_HW, HIRES_HW),
            "meso": (MESO_STEPS_PER_FRAME * t, MESO_CHANNELS, MESO_HW, MESO_HW),
            "dem_hires": (HIRES_HW, HIRES_HW),
            "dem_meso": (MESO_HW, MESO_HW),
        }
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ShapeMismatchError(f"{name}: shape {arr.shape}, expected {shape}")
        for name in ("hires", "meso", "dem_hires", "dem_meso"):
            _check_unit_range(name, getattr(self, name))
        _check_binary("mask", self.mask)
        self.meta.validate()
        stored = self.meta.quality_fraction
        actual = quality_fraction(self.mask)
        if abs(stored - actual) > 1e-9:
            raise InvalidValueError(
                f"meta: quality_fraction {stored} does not match mask ({actual})"
            )


@dataclass(frozen=True)
class PredictionSet:
    """Up to 10 candidate forecasts of one cube's target frames."""

    cube_id: str
    members: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "members", tuple(_frozen(m, _FLOAT_DTYPE) for m in self.members)
        )
        self.validate()

    def validate(self) -> None:
        k = len(self.members)
        if not 1 <= k <= MAX_ENSEMBLE:
            raise InvalidValueError(f"ensemble size {k} not in 1..{MAX_ENSEMBLE}")
        shape0 = self.members[0].shape
        for i, m in enumerate(self.members):
            name = f"pred_{i}"
            if m.ndim != 4 or m.shape[1] != len(CHANNELS) or m.shape[2:] != (HIRES_HW, HIRES_HW):
                raise ShapeMismatchError(f"{name}: shape {m.shape}")
            if m.shape != shape0:
                raise ShapeMismatchError(f"{name}: shape {m.shape} differs from pred_0 {shape0}")
            _check_unit_range(name, m)


def _write_npy_entry(zf: zipfile.ZipFile, name: str, arr: np.ndarray) -> None:
    buf = io.BytesIO()
    np.lib.format.write_array(buf, np.asarray(arr), version=(1, 0))
    info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    zf.writestr(info, buf.getvalue())


def _write_json_entry(zf: zipfile.ZipFile, name: str, obj: dict) -> None:
    info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    zf.writestr(info, canon_dump_bytes(obj, float_mode=REPR))


def _read_npy_entry(zf: zipfile.ZipFile, name: str, dtype: np.dtype) -> np.ndarray:
    if name not in zf.namelist():
        raise MissingArrayError(name)
    with zf.open(name) as fp:
        try:
            arr = np.lib.format.read_array(io.BytesIO(fp.read()), allow_pickle=False)
        except ValueError as e:
            raise InvalidValueError(f"{name}: not a valid NPY entry ({e})") from None
    if arr.dtype != dtype:
        raise ShapeMismatchError(f"{name}: dtype {arr.dtype}, expected {dtype}")
    return arr


def _read_meta_entry(zf: zipfile.ZipFile) -> dict:
    if "meta.json" not in zf.namelist():
        raise MissingArrayError("meta.json")
    try:
        return json.loads(zf.read("meta.json").decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise InvalidValueError(f"meta.json: {e}") from None


def save_minicube(cube: Minicube, path) -> None:
    """Write ``cube`` to ``path``; byte output is deterministic."""
    cube.validate()
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED, compresslevel=1) as zf:
        for name in ("hires", "mask", "meso", "dem_hires", "dem_meso"):
            _write_npy_entry(zf, name, getattr(cube, name))
        _write_json_entry(zf, "meta.json", cube.meta.to_dict())


def load_minicube(path) -> Minicube:
    """Read and validate a minicube archive; rejects rather than repairs."""
    with zipfile.ZipFile(path, "r") as zf:
        hires = _read_npy_entry(zf, "hires", _FLOAT_DTYPE)
        mask = _read_npy_entry(zf, "mask", _MASK_DTYPE)
        meso = _read_npy_entry(zf, "meso", _FLOAT_DTYPE)
        dem_hires = _read_npy_entry(zf, "dem_hires", _FLOAT_DTYPE)
        dem_meso = _read_npy_entry(zf, "dem_meso", _FLOAT_DTYPE)
        meta = CubeMetadata.from_dict(_read_meta_entry(zf))
    return Minicube(hires, mask, meso, dem_hires, dem_meso, meta)


def save_prediction_set(preds: PredictionSet, path) -> None:
    preds.validate()
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED, compresslevel=1) as zf:
        for i, member in enumerate(preds.members):
            _write_npy_entry(zf, f"pred_{i}", member)
        _write_json_entry(zf, "meta.json", {"cube_id": preds.cube_id})


def load_prediction_set(path) -> PredictionSet:
    with zipfile.ZipFile(path, "r") as zf:
        names = set(zf.namelist())
        k = sum(1 for n in names if n.startswith("pred_"))
        if k == 0:
            raise MissingArrayError("pred_0")
        if k > MAX_ENSEMBLE:
            raise InvalidValueError(f"ensemble size {k} exceeds {MAX_ENSEMBLE}")
        members = []
        for i in range(k):
            members.append(_read_npy_entry(zf, f"pred_{i}", _FLOAT_DTYPE))
        meta = _read_meta_entry(zf)
        if "cube_id" not in meta:
            raise InvalidValueError("meta.json missing field 'cube_id'")
    return PredictionSet(cube_id=str(meta["cube_id"]), members=tuple(members))


def ndvi(cube_or_prediction: np.ndarray) -> np.ndarray:
    """Pixelwise (NIR - RED) / (NIR + RED), defined as 0 where NIR + RED = 0.

    Input is [t, c, h, w] with red at channel 2 and near-infrared at
    channel 3; output is float64 [t, h, w] and lies in [-1, 1] for
    reflectances in [0, 1].
    """
    x = np.asarray(cube_or_prediction)
    if x.ndim != 4 or x.shape[1] < 4:
        raise ShapeMismatchError(f"expected [t, c>=4, h, w], got {x.shape}")
    red = x[:, RED].astype(np.float64)
    nir = x[:, NIR].astype(np.float64)
    den = nir + red
    num = nir - red
    out = np.zeros_like(den)
    np.divide(num, den, out=out, where=den != 0.0)
    return out


def ndvi_mask(mask: np.ndarray) -> np.ndarray:
    """Mask for NDVI series: invalid where red OR near-infrared is invalid."""
    m = np.asarray(mask)
    if m.ndim != 4 or m.shape[1] < 4:
        raise ShapeMismatchError(f"expected [t, c>=4, h, w], got {m.shape}")
    return (m[:, RED] | m[:, NIR]).astype(np.uint8)


def split_context_target(cube: Minicube, spec: TrackSpec):
    """Partition the temporal axis into (context, target, target_mask) views.

    Views are backed by the cube's read-only arrays, so mutation through
    them is impossible.
    """
    if spec.hires_frames != cube.frames:
        raise GeometryMismatchError(
            f"cube has {cube.frames} frames, track {spec.name!r} needs "
            f"{spec.context_frames}+{spec.target_frames}"
        )
    c = spec.context_frames
    return cube.hires[:c], cube.hires[c:], cube.mask[c:]
