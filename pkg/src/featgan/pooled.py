"""Pooled-feature archives: an FSEQ matrix plus an aligned sidecar manifest.

Row i of the archive is the pooled vector of sidecar record i; the sidecar
lives next to the archive at <archive>.manifest and carries labels and
domain tags through the pipeline.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from featgan.errors import DimensionError, MissingInputError
from featgan.features import pool_values
from featgan.fseq import read_fseq, write_fseq
from featgan.manifest import SampleRecord, read_manifest, write_manifest


def sidecar_path(archive_path) -> Path:
    return Path(str(archive_path) + ".manifest")


def write_pooled(matrix: np.ndarray, records: list[SampleRecord], path) -> None:
    matrix = np.asarray(matrix, dtype=np.float32)
    if len(matrix) != len(records):
        raise DimensionError(
            f"archive rows {len(matrix)} vs sidecar records {len(records)}")
    write_fseq(matrix, path)
    write_manifest(records, sidecar_path(path))


def read_pooled(path) -> tuple[np.ndarray, list[SampleRecord]]:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(str(path))
    side = sidecar_path(path)
    if not side.exists():
        raise MissingInputError(str(side))
    matrix = read_fseq(path)
    records = read_manifest(side)
    if len(matrix) != len(records):
        raise DimensionError(
            f"{path}: archive rows {len(matrix)} vs sidecar records {len(records)}")
    return matrix, records


def pool_manifest(records: list[SampleRecord]) -> tuple[np.ndarray, list[SampleRecord]]:
    """Pool every record's FSEQ file into one archive row; dims must agree."""
    if not records:
        raise ValueError("empty manifest: nothing to pool")
    rows = []
    dims = None
    for rec in records:
        path = Path(rec.path)
        if not path.exists():
            raise MissingInputError(str(path))
        seq = read_fseq(path)
        if dims is None:
            dims = seq.shape[1]
        elif seq.shape[1] != dims:
            raise DimensionError(
                f"{rec.path}: dim {seq.shape[1]} differs from first record's {dims}")
        rows.append(pool_values(seq))
    return np.stack(rows), records
