"""Sample manifests: one JSON record per line.

Fields: utterance_id, label, domain, split, path, transcript_1,
transcript_2 (transcripts optional). Labels come from the closed 11-class
set; parse/serialize round-trips exactly on valid records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from featgan import CLASSES
from featgan.errors import ManifestError

DOMAINS = ("real", "synthetic")
SPLITS = ("train", "valid", "test")

_REQUIRED = ("utterance_id", "label", "domain", "split", "path")
_OPTIONAL = ("transcript_1", "transcript_2")


@dataclass
class SampleRecord:
    utterance_id: str
    label: str
    domain: str
    split: str
    path: str
    transcript_1: str | None = None
    transcript_2: str | None = None

    def __post_init__(self):
        if self.label not in CLASSES:
            raise ManifestError(f"unknown label {self.label!r}")
        if self.domain not in DOMAINS:
            raise ManifestError(f"unknown domain {self.domain!r}")
        if self.split not in SPLITS:
            raise ManifestError(f"unknown split {self.split!r}")
        if not self.path:
            raise ManifestError("path must be non-empty")

    def to_json(self) -> str:
        out = {k: getattr(self, k) for k in _REQUIRED}
        for k in _OPTIONAL:
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return json.dumps(out, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SampleRecord":
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"bad manifest line: {exc}") from None
        if not isinstance(raw, dict):
            raise ManifestError("manifest line must be a JSON object")
        unknown = set(raw) - set(_REQUIRED) - set(_OPTIONAL)
        if unknown:
            raise ManifestError(f"unknown manifest fields {sorted(unknown)}")
        missing = [k for k in _REQUIRED if k not in raw]
        if missing:
            raise ManifestError(f"missing manifest fields {missing}")
        return cls(**raw)


def read_manifest(path) -> list[SampleRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(SampleRecord.from_json(line))
            except ManifestError as exc:
                raise ManifestError(f"{path}:{n}: {exc}") from None
    return records


def iter_manifest(path) -> Iterator[SampleRecord]:
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                yield SampleRecord.from_json(line)


def write_manifest(records: Iterable[SampleRecord], path) -> None:
    text = "".join(r.to_json() + "\n" for r in records)
    Path(path).write_text(text, encoding="utf-8")
