"""ASR-agreement filtering and the synthetic-generation loop.

A generated clip is kept only when two independent recognizers both
transcribe exactly the requested word (after normalization). The loop
draws a fresh donor voice per attempt, synthesizes, transcribes twice,
filters, and retries on rejection up to a per-job attempt budget. TTS and
ASR engines are reached through external command templates (or injected
callables in tests) so the toolkit never links against model runtimes.
"""

from __future__ import annotations

import json
import re
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from featgan import CLASSES
from featgan.errors import ConfigError, ManifestError, PoolExhaustedError
from featgan.manifest import SampleRecord

_KEEP_CHARS = re.compile(r"[^a-z0-9' ]")
_WS_RUN = re.compile(r" +")


def normalize_transcript(s: str) -> str:
    """Lowercase, keep [a-z0-9' ], collapse whitespace runs, strip ends."""
    s = s.lower().replace("\t", " ").replace("\n", " ").replace("\r", " ")
    s = _KEEP_CHARS.sub("", s)
    return _WS_RUN.sub(" ", s).strip()


@dataclass
class TranscriptPair:
    asr_1: str
    asr_2: str


def validate_target(word: str) -> str:
    """Targets must be single normalized words; raises ConfigError otherwise."""
    if normalize_transcript(word) != word or " " in word or not word:
        raise ConfigError(f"target must be a single normalized word, got {word!r}")
    return word


def agreement_filter(target: str, pair: TranscriptPair) -> bool:
    """keep iff both hypotheses normalize to exactly the target word."""
    return (normalize_transcript(pair.asr_1) == target
            and normalize_transcript(pair.asr_2) == target)


@dataclass
class DonorRecord:
    """One donor utterance available for voice cloning."""

    utterance_id: str
    speaker_id: str
    path: str

    def to_json(self) -> str:
        return json.dumps({"utterance_id": self.utterance_id,
                           "speaker_id": self.speaker_id,
                           "path": self.path}, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "DonorRecord":
        raw = json.loads(line)
        unknown = set(raw) - {"utterance_id", "speaker_id", "path"}
        if unknown:
            raise ManifestError(f"unknown donor fields {sorted(unknown)}")
        return cls(**raw)


def read_donor_manifest(path) -> list[DonorRecord]:
    donors = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                donors.append(DonorRecord.from_json(line))
    return donors


class VoicePool:
    """Uniform sampling of donor utterances without replacement."""

    def __init__(self, donors: list[DonorRecord]):
        self._donors = list(donors)
        self._remaining = len(self._donors)

    def __len__(self) -> int:
        return self._remaining

    def sample(self, rng: np.random.Generator) -> DonorRecord:
        if self._remaining == 0:
            raise PoolExhaustedError("voice pool exhausted")
        j = int(rng.integers(self._remaining))
        donor = self._donors[j]
        # Swap-remove keeps draws O(1) and uniform over the unconsumed set.
        self._donors[j] = self._donors[self._remaining - 1]
        self._donors[self._remaining - 1] = donor
        self._remaining -= 1
        return donor


def run_command(template: str, substitutions: dict[str, str],
                timeout: float = 600.0) -> subprocess.CompletedProcess:
    """Split the template with shlex, substitute placeholders per token, run."""
    tokens = shlex.split(template)
    filled = []
    for tok in tokens:
        for key, value in substitutions.items():
            tok = tok.replace("{" + key + "}", value)
        filled.append(tok)
    return subprocess.run(filled, capture_output=True, text=True, timeout=timeout)


def final_stdout_line(stdout: str) -> str:
    """1-best hypothesis protocol: the final line of standard output."""
    lines = stdout.splitlines()
    return lines[-1] if lines else ""


class CommandSynth:
    """TTS adapter: template with {text}, {voice_path}, {out_path} placeholders."""

    def __init__(self, template: str):
        self.template = template

    def __call__(self, text: str, voice_path: str, out_path: str) -> None:
        proc = run_command(self.template, {"text": text, "voice_path": voice_path,
                                           "out_path": out_path})
        if proc.returncode != 0:
            raise RuntimeError(f"synth exited {proc.returncode}: "
                               f"{proc.stderr.strip()}")


class CommandAsr:
    """ASR adapter: template with {in_path}; hypothesis = final stdout line."""

    def __init__(self, template: str):
        self.template = template

    def __call__(self, in_path: str) -> str:
        proc = run_command(self.template, {"in_path": in_path})
        if proc.returncode != 0:
            raise RuntimeError(f"asr exited {proc.returncode}: "
                               f"{proc.stderr.strip()}")
        return final_stdout_line(proc.stdout)


@dataclass
class JobResult:
    index: int
    word: str
    status: str  # kept | exhausted | failed
    attempts: int
    donor_ids: list[str] = field(default_factory=list)
    kept_path: str = ""
    transcripts: tuple[str, str] | None = None
    error: str = ""


@dataclass
class LoopReport:
    requested: int
    kept: int
    exhausted: int
    failed: int
    rejected_attempts: int
    total_attempts: int
    per_word: dict[str, dict[str, int]]
    attempt_histogram: dict[int, int]
    jobs: list[JobResult]

    def summary_dict(self) -> dict:
        return {
            "requested": self.requested,
            "kept": self.kept,
            "exhausted": self.exhausted,
            "failed": self.failed,
            "rejected_attempts": self.rejected_attempts,
            "total_attempts": self.total_attempts,
            "per_word": self.per_word,
            "attempt_histogram": {str(k): v for k, v in
                                  sorted(self.attempt_histogram.items())},
        }


def run_generation_loop(targets: dict[str, int], pool: VoicePool,
                        synth: Callable[[str, str, str], None],
                        asr_1: Callable[[str], str],
                        asr_2: Callable[[str], str] | None,
                        out_dir, rng: np.random.Generator,
                        max_attempts: int = 8,
                        ) -> tuple[list[SampleRecord], LoopReport]:
    """Generate and filter synthetic utterances for each target word.

    targets maps word -> requested sample count. asr_2 may be None for the
    single-recognizer ablation. Engine failures mark the job failed and the
    loop continues; pool exhaustion fails the remaining jobs the same way.
    """
    if not targets:
        raise ConfigError("no target words requested")
    for word in targets:
        validate_target(word)
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)

    kept_records: list[SampleRecord] = []
    jobs: list[JobResult] = []
    per_word = {w: {"requested": n, "kept": 0, "rejected_attempts": 0,
                    "exhausted": 0, "failed": 0}
                for w, n in targets.items()}
    attempt_histogram: dict[int, int] = {}
    index = 0

    for word, count in targets.items():
        for _ in range(count):
            job = JobResult(index=index, word=word, status="exhausted", attempts=0)
            index += 1
            while job.attempts < max_attempts:
                job.attempts += 1
                try:
                    donor = pool.sample(rng)
                except PoolExhaustedError as exc:
                    job.status = "failed"
                    job.error = str(exc)
                    break
                job.donor_ids.append(donor.utterance_id)
                wav_path = audio_dir / f"{word}-{job.index:05d}-a{job.attempts}.wav"
                try:
                    synth(word, donor.path, str(wav_path))
                    hyp_1 = asr_1(str(wav_path))
                    hyp_2 = asr_2(str(wav_path)) if asr_2 is not None else hyp_1
                except Exception as exc:
                    job.status = "failed"
                    job.error = str(exc)
                    break
                if agreement_filter(word, TranscriptPair(hyp_1, hyp_2)):
                    job.status = "kept"
                    job.kept_path = str(wav_path)
                    job.transcripts = (hyp_1, hyp_2)
                    break
                per_word[word]["rejected_attempts"] += 1

            jobs.append(job)
            attempt_histogram[job.attempts] = attempt_histogram.get(job.attempts, 0) + 1
            if job.status == "kept":
                per_word[word]["kept"] += 1
                label = word if word in CLASSES[:-1] else "unknown"
                kept_records.append(SampleRecord(
                    utterance_id=f"synth-{word}-{job.index:05d}",
                    label=label, domain="synthetic", split="train",
                    path=job.kept_path,
                    transcript_1=job.transcripts[0],
                    transcript_2=job.transcripts[1]))
            elif job.status == "exhausted":
                per_word[word]["exhausted"] += 1
            else:
                per_word[word]["failed"] += 1

    report = LoopReport(
        requested=sum(targets.values()),
        kept=sum(w["kept"] for w in per_word.values()),
        exhausted=sum(w["exhausted"] for w in per_word.values()),
        failed=sum(w["failed"] for w in per_word.values()),
        rejected_attempts=sum(w["rejected_attempts"] for w in per_word.values()),
        total_attempts=sum(j.attempts for j in jobs),
        per_word=per_word,
        attempt_histogram=attempt_histogram,
        jobs=jobs)
    return kept_records, report


def write_loop_report(report: LoopReport, out_dir) -> None:
    """Emit the structured summary (JSON) and the per-job table (TSV)."""
    out_dir = Path(out_dir)
    (out_dir / "report.json").write_text(
        json.dumps(report.summary_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    rows = ["index\tword\tstatus\tattempts\tdonors\tkept_path\terror"]
    for job in report.jobs:
        rows.append("\t".join([
            str(job.index), job.word, job.status, str(job.attempts),
            ",".join(job.donor_ids), job.kept_path, job.error.replace("\t", " ")]))
    (out_dir / "jobs.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
