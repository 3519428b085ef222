"""Manifest-driven dataset ingestion and score caching.

A dataset is described by a CSV manifest (UTF-8, header required, '#'
comment lines ignored) with one row per evaluated image pair:

    database_id,reference_path,distorted_path,distortion_type,mos,mos_is_dmos

Relative image paths are resolved against the manifest's directory.
"""

from __future__ import annotations

import csv
import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .attributes import GrayImage, to_grayscale
from .errors import DecodeError, ManifestSchemaError, RecordError

MANIFEST_COLUMNS = (
    "database_id",
    "reference_path",
    "distorted_path",
    "distortion_type",
    "mos",
    "mos_is_dmos",
)

_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no", ""}


@dataclass(frozen=True)
class EvalRecord:
    """One (reference, distorted, distortion type, MOS) dataset row."""

    database_id: str
    reference_path: str
    distorted_path: str
    distortion_type: str
    mos: float
    mos_is_dmos: bool = False

    @property
    def key(self) -> str:
        return "|".join(
            (self.database_id, self.reference_path, self.distorted_path, self.distortion_type)
        )


def load_manifest(path: str | Path) -> list[EvalRecord]:
    """Read and validate a manifest CSV; resolve image paths."""
    path = Path(path)
    base = path.parent
    rows: list[tuple[int, list[str]]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.lstrip().startswith("#") or not line.strip():
                continue
            parsed = next(csv.reader([line]))
            rows.append((lineno, parsed))
    if not rows:
        raise ManifestSchemaError(f"{path}: no header row")
    header = [c.strip() for c in rows[0][1]]
    missing = [c for c in MANIFEST_COLUMNS if c not in header]
    if missing:
        raise ManifestSchemaError(f"{path}: missing columns {missing}")
    idx = {c: header.index(c) for c in MANIFEST_COLUMNS}

    records = []
    for lineno, cells in rows[1:]:
        if len(cells) < len(header):
            raise RecordError(f"expected {len(header)} cells, got {len(cells)}", lineno)
        get = lambda col: cells[idx[col]].strip()
        ref, dist = get("reference_path"), get("distorted_path")
        if not ref or not dist:
            raise RecordError("empty image path", lineno)
        try:
            mos = float(get("mos"))
        except ValueError:
            raise RecordError(f"unparseable mos {get('mos')!r}", lineno) from None
        if not np.isfinite(mos):
            raise RecordError(f"non-finite mos {mos}", lineno)
        dmos_raw = get("mos_is_dmos").lower()
        if dmos_raw in _TRUE:
            dmos = True
        elif dmos_raw in _FALSE:
            dmos = False
        else:
            raise RecordError(f"unparseable mos_is_dmos {dmos_raw!r}", lineno)
        records.append(
            EvalRecord(
                database_id=get("database_id"),
                reference_path=str(_resolve(base, ref)),
                distorted_path=str(_resolve(base, dist)),
                distortion_type=get("distortion_type"),
                mos=mos,
                mos_is_dmos=dmos,
            )
        )
    return records


def _resolve(base: Path, rel: str) -> Path:
    p = Path(rel)
    return p if p.is_absolute() else (base / p)


def save_manifest(records: list[EvalRecord], path: str | Path) -> Path:
    """Write records back to manifest CSV (absolute paths, full-precision mos)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.database_id,
                    r.reference_path,
                    r.distorted_path,
                    r.distortion_type,
                    repr(r.mos),
                    "true" if r.mos_is_dmos else "false",
                ]
            )
    return path


def load_image(path: str | Path) -> GrayImage:
    """Decode a PNG/BMP file to a grayscale image.

    8-bit grayscale files pass through unchanged; color images are
    converted with BT.601 luma weights.
    """
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode == "L":
                return GrayImage(np.asarray(img, dtype=np.float64))
            rgb = img.convert("RGB")
            return to_grayscale(np.asarray(rgb, dtype=np.uint8))
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc


def group_records(
    records: list[EvalRecord],
) -> dict[tuple[str, str], list[EvalRecord]]:
    """Partition records by (database, distortion type), preserving order."""
    groups: dict[tuple[str, str], list[EvalRecord]] = {}
    for rec in records:
        groups.setdefault((rec.database_id, rec.distortion_type), []).append(rec)
    return groups


def params_hash(payload: dict) -> str:
    """Stable short hash of a parameter dictionary."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


class ScoreCache:
    """JSON-lines store of pooled scores keyed by (record, attribute, pooling).

    Entries are versioned by a parameter hash so stale configurations miss.
    Writes are serialized; hits return the cached float bit-identically
    (JSON round-trips Python floats exactly).
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._store: dict[tuple[str, str, str, str], tuple[float, bool]] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    entry = json.loads(line)
                    key = (entry["record"], entry["attribute"], entry["pooling"], entry["params"])
                    self._store[key] = (float(entry["value"]), bool(entry.get("degenerate", False)))

    def get(
        self, record: str, attribute: str, pooling: str, params: str
    ) -> tuple[float, bool] | None:
        with self._lock:
            return self._store.get((record, attribute, pooling, params))

    def put(
        self,
        record: str,
        attribute: str,
        pooling: str,
        params: str,
        value: float,
        degenerate: bool = False,
    ) -> None:
        entry = {
            "record": record,
            "attribute": attribute,
            "pooling": pooling,
            "params": params,
            "value": value,
            "degenerate": degenerate,
        }
        with self._lock:
            if (record, attribute, pooling, params) in self._store:
                return
            self._store[(record, attribute, pooling, params)] = (value, degenerate)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def __len__(self) -> int:
        return len(self._store)
