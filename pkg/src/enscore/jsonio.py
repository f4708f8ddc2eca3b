"""Canonical JSON emission.

All machine-readable output of the toolkit goes through this module so
that identical data always serializes to identical bytes: keys sorted,
LF line endings, and a fixed float policy. Reports and CLI output use 6
significant digits; archive metadata and manifests use shortest
round-trip floats so stored fractions can be recomputed exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any

SIG6 = "sig6"
REPR = "repr"


def _format_float(x: float, mode: str) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in canonical JSON output")
    if mode == SIG6:
        s = format(x, ".6g")
    else:
        s = repr(x)
    # ".6g" may emit bare integers ("1"); keep them valid JSON as-is.
    return s


def _emit(obj: Any, mode: str, indent: int, level: int, out: list[str]) -> None:
    pad = " " * (indent * level)
    inner = " " * (indent * (level + 1))
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj, mode))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be strings, got {type(k)}")
            out.append(inner)
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(": ")
            _emit(obj[k], mode, indent, level + 1, out)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(inner)
            _emit(v, mode, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot canonically serialize {type(obj)}")


def canon_dumps(obj: Any, *, float_mode: str = SIG6, indent: int = 2) -> str:
    """Serialize ``obj`` to a canonical JSON string (no trailing newline)."""
    out: list[str] = []
    _emit(obj, float_mode, indent, 0, out)
    return "".join(out)


def canon_dump_bytes(obj: Any, *, float_mode: str = SIG6) -> bytes:
    """Canonical JSON document bytes: UTF-8, LF lines, trailing newline."""
    return (canon_dumps(obj, float_mode=float_mode) + "\n").encode("utf-8")
