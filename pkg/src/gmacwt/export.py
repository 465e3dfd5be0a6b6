"""CSV/JSON serialisation with deterministic formatting and atomic writes."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

from .geometry import Polygon2D
from .regions import RegionSpec


def fmt(x: float) -> str:
    # + 0.0 folds -0.0 into 0.0
    return f"{float(x) + 0.0:.12g}"


def polygon_csv(poly: Polygon2D) -> str:
    """Header ``R1,R2`` then the closed vertex ring, one vertex per line."""
    lines = ["R1,R2"] + [f"{fmt(x)},{fmt(y)}" for x, y in poly.closed()]
    return "\n".join(lines) + "\n"


def read_polygon_csv(text: str) -> list[tuple[float, float]]:
    rows = text.strip().split("\n")
    if rows[0] != "R1,R2":
        raise ValueError("missing R1,R2 header")
    return [tuple(float(v) for v in row.split(",")) for row in rows[1:]]  # type: ignore[misc]


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def region_json(region: RegionSpec) -> str:
    return dumps(region.to_dict())


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
