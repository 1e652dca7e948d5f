"""On-disk interchange formats.

Descriptors travel as a small binary format: an 8-byte magic, u64 row
count, u32 dimension, and u32 flags (bit 0 marks composite rows holding
left then right halves), followed by row-major little-endian float32
values. Traverses, ground truth, and match results travel as CSV.
"""

from __future__ import annotations

import csv
import math
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .descriptors import CompositeDescriptor, DescriptorSet
from .evaluation import COORDINATE_KINDS, GroundTruth, Traverse
from .sequence import MatchResult

MAGIC = b"NSDVPR01"
FLAG_COMPOSITE = 0x1
_HEADER = struct.Struct("<8sQII")

TRAVERSE_HEADER = ["frame_id", "timestamp", "lat_or_x", "lon_or_y"]
GROUND_TRUTH_HEADER = ["query_index", "reference_index"]
MATCH_HEADER = ["query_index", "best_reference", "seq_cost", "uniqueness"]


class FormatError(ValueError):
    """Raised when a file fails structural validation."""


def write_descriptors(
    obj: DescriptorSet | Sequence[CompositeDescriptor], path
) -> None:
    """Write a descriptor set or composite list; round-trips bit-exactly."""
    path = Path(path)
    if isinstance(obj, DescriptorSet):
        count, dim, flags = obj.count, obj.dim, 0
        payload = np.ascontiguousarray(obj.data, dtype="<f4")
    else:
        comps = list(obj)
        if not comps:
            raise ValueError("cannot write an empty composite list (dimension unknown)")
        dim = comps[0].half_dim
        if any(c.half_dim != dim for c in comps):
            raise ValueError("composite half dimensions are inconsistent")
        count, flags = len(comps), FLAG_COMPOSITE
        payload = np.ascontiguousarray(
            np.stack([c.combined for c in comps]), dtype="<f4"
        )
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, count, dim, flags))
            fh.write(payload.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write descriptor file {path}: {exc}") from exc


def read_descriptors(path) -> DescriptorSet | list[CompositeDescriptor]:
    """Read and validate a descriptor file written by write_descriptors."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read descriptor file {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: not a descriptor file (shorter than the header)")
    magic, count, dim, flags = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: not a descriptor file (bad magic)")
    if flags & ~FLAG_COMPOSITE:
        raise FormatError(f"{path}: unsupported flags 0x{flags:x}")
    if dim < 1:
        raise FormatError(f"{path}: corrupt descriptor file (dimension 0)")
    rowlen = 2 * dim if flags & FLAG_COMPOSITE else dim
    expected = count * rowlen * 4
    payload = blob[_HEADER.size:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: corrupt descriptor file "
            f"(payload {len(payload)} bytes, expected {expected})"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(count, rowlen)
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise FormatError(
            f"{path}: non-finite descriptor at row {row}, dimension {col}"
        )
    if flags & FLAG_COMPOSITE:
        return [
            CompositeDescriptor(values[i, :dim], values[i, dim:])
            for i in range(count)
        ]
    if count == 0:
        return DescriptorSet(np.zeros((0, dim), dtype=np.float32))
    return DescriptorSet(values)


def write_traverse(traverse: Traverse, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAVERSE_HEADER)
        for i in range(traverse.count):
            writer.writerow(
                [
                    traverse.frame_ids[i],
                    repr(float(traverse.timestamps[i])),
                    repr(float(traverse.positions[i, 0])),
                    repr(float(traverse.positions[i, 1])),
                ]
            )


def read_traverse(path, coordinate_kind: str) -> Traverse:
    """Parse a traverse CSV; the coordinate kind is declared by the caller."""
    if coordinate_kind not in COORDINATE_KINDS:
        raise ValueError(f"unknown coordinate kind {coordinate_kind!r}")
    path = Path(path)
    ids: list[str] = []
    ts: list[float] = []
    pos: list[tuple[float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRAVERSE_HEADER:
            raise FormatError(
                f"{path}: expected header {','.join(TRAVERSE_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise FormatError(f"{path}: malformed row at line {lineno}")
            try:
                t, x, y = float(row[1]), float(row[2]), float(row[3])
            except ValueError as exc:
                raise FormatError(
                    f"{path}: malformed row at line {lineno}: {exc}"
                ) from exc
            if ts and t < ts[-1]:
                raise FormatError(
                    f"{path}: timestamps decrease at line {lineno}"
                )
            ids.append(row[0])
            ts.append(t)
            pos.append((x, y))
    if not ids:
        raise FormatError(f"{path}: traverse file has no frames")
    return Traverse(tuple(ids), np.array(ts), np.array(pos), coordinate_kind)


def write_ground_truth(gt: GroundTruth, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GROUND_TRUTH_HEADER)
        for q, r in enumerate(gt.mapping):
            writer.writerow([q, "" if r < 0 else int(r)])


def read_ground_truth(path) -> GroundTruth:
    path = Path(path)
    mapping: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != GROUND_TRUTH_HEADER:
            raise FormatError(
                f"{path}: expected header {','.join(GROUND_TRUTH_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"{path}: malformed row at line {lineno}")
            try:
                q = int(row[0])
                r = -1 if row[1] == "" else int(row[1])
            except ValueError as exc:
                raise FormatError(
                    f"{path}: malformed row at line {lineno}: {exc}"
                ) from exc
            if q != len(mapping):
                raise FormatError(
                    f"{path}: query indices must be consecutive from 0 "
                    f"(line {lineno})"
                )
            mapping.append(r)
    if not mapping:
        raise FormatError(f"{path}: ground-truth file has no rows")
    return GroundTruth(np.array(mapping, dtype=np.int64), None)


def _format_optional(value: float | None) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return repr(float(value))


def write_match_results(results: Sequence[MatchResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MATCH_HEADER)
        for r in results:
            writer.writerow(
                [
                    r.query_index,
                    "" if r.best_reference is None else r.best_reference,
                    _format_optional(r.seq_cost),
                    _format_optional(r.uniqueness),
                ]
            )


def read_match_results(path) -> list[MatchResult]:
    path = Path(path)
    results: list[MatchResult] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MATCH_HEADER:
            raise FormatError(f"{path}: expected header {','.join(MATCH_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise FormatError(f"{path}: malformed row at line {lineno}")
            try:
                q = int(row[0])
                best = None if row[1] == "" else int(row[1])
                cost = None if row[2] == "" else float(row[2])
                uniq = None if row[3] == "" else float(row[3])
            except ValueError as exc:
                raise FormatError(
                    f"{path}: malformed row at line {lineno}: {exc}"
                ) from exc
            results.append(MatchResult(q, best, cost, uniq))
    if not results:
        raise FormatError(f"{path}: match file has no rows")
    return results


def read_segments(path) -> list[tuple[int, int]]:
    """Parse a segments CSV of half-open `start,stop` row ranges."""
    path = Path(path)
    segments: list[tuple[int, int]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["start", "stop"]:
            raise FormatError(f"{path}: expected header start,stop")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"{path}: malformed row at line {lineno}")
            try:
                segments.append((int(row[0]), int(row[1])))
            except ValueError as exc:
                raise FormatError(
                    f"{path}: malformed row at line {lineno}: {exc}"
                ) from exc
    if not segments:
        raise FormatError(f"{path}: segments file has no rows")
    return segments


def write_segments(segments: Sequence[tuple[int, int]], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["start", "stop"])
        for start, stop in segments:
            writer.writerow([start, stop])
