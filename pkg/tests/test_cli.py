"""CLI dispatch, exit codes, reproducibility and the mini end-to-end pipeline."""

import json

import numpy as np
import pytest

from featgan import CLASSES
from featgan.audio import AudioClip, write_wav
from featgan.cli import dispatch
from featgan.fseq import read_fseq, write_fseq
from featgan.manifest import SampleRecord, read_manifest, write_manifest
from featgan.pooled import read_pooled, write_pooled

from conftest import make_rng


def write_tone_manifest(tmp_path, n=3, label="yes"):
    records = []
    for i in range(n):
        wav = tmp_path / f"u{i}.wav"
        t = np.arange(8000) / 16000
        write_wav(AudioClip(16000, 0.3 * np.sin(2 * np.pi * (200 + 50 * i) * t)),
                  wav)
        records.append(SampleRecord(f"u{i}", label, "real", "train", str(wav)))
    path = tmp_path / "audio.jsonl"
    write_manifest(records, path)
    return path


def write_pooled_archive(tmp_path, name, n, dim, labels=None, domain="real",
                         split="train", seed=0, shift=0.0):
    r = make_rng(seed)
    matrix = (r.standard_normal((n, dim)) + shift).astype(np.float32)
    labels = labels or [CLASSES[i % 11] for i in range(n)]
    records = [SampleRecord(f"{name}{i}", labels[i], domain, split,
                            f"/x/{name}{i}.fseq") for i in range(n)]
    path = tmp_path / f"{name}.fseq"
    write_pooled(matrix, records, path)
    return path, matrix


class TestDispatchBasics:
    def test_help_exits_zero(self, capsys):
        assert dispatch(["--help"]) == 0
        assert dispatch(["pool", "--help"]) == 0

    def test_unknown_flag_exits_2(self, capsys):
        assert dispatch(["pool", "--bogus"]) == 2

    def test_unknown_subcommand_exits_2(self, capsys):
        assert dispatch(["frobnicate"]) == 2

    def test_missing_input_exits_3(self, tmp_path, capsys):
        status = dispatch(["pool", "--in", str(tmp_path / "nope.jsonl"),
                           "--out", str(tmp_path / "o.fseq")])
        assert status == 3
        assert "error: missing-input" in capsys.readouterr().err

    def test_config_violation_exits_4(self, tmp_path, capsys):
        manifest = write_tone_manifest(tmp_path)
        bad = tmp_path / "bad.json"
        bad.write_text('{"frame_length": 400, "warp_factor": 3}')
        status = dispatch(["mfcc", "--in", str(manifest),
                           "--out-dir", str(tmp_path / "f"),
                           "--config", str(bad)])
        assert status == 4
        assert "error: config" in capsys.readouterr().err

    def test_empty_manifest_rejected_no_file_written(self, tmp_path, capsys):
        manifest = tmp_path / "empty.jsonl"
        manifest.write_text("")
        out = tmp_path / "o.fseq"
        status = dispatch(["pool", "--in", str(manifest), "--out", str(out)])
        assert status == 4
        assert not out.exists()


class TestMfccAndPool:
    def test_mfcc_then_pool(self, tmp_path, capsys):
        manifest = write_tone_manifest(tmp_path, n=3)
        feat_dir = tmp_path / "feats"
        assert dispatch(["mfcc", "--in", str(manifest),
                         "--out-dir", str(feat_dir)]) == 0
        out_manifest = feat_dir / "manifest.jsonl"
        records = read_manifest(out_manifest)
        assert len(records) == 3
        seq = read_fseq(records[0].path)
        assert seq.shape[1] == 64
        assert (feat_dir / "run_config.json").exists()

        archive = tmp_path / "pooled.fseq"
        assert dispatch(["pool", "--in", str(out_manifest),
                         "--out", str(archive)]) == 0
        matrix, recs = read_pooled(archive)
        assert matrix.shape == (3, 128)
        # Row i equals stat_pool of record i's sequence.
        from featgan.features import pool_values
        np.testing.assert_allclose(matrix[0], pool_values(read_fseq(records[0].path)),
                                   atol=1e-6)

    def test_mixed_dims_rejected(self, tmp_path, capsys):
        a = tmp_path / "a.fseq"
        b = tmp_path / "b.fseq"
        write_fseq(np.zeros((4, 8), dtype=np.float32), a)
        write_fseq(np.zeros((4, 9), dtype=np.float32), b)
        manifest = tmp_path / "m.jsonl"
        write_manifest([SampleRecord("a", "yes", "real", "train", str(a)),
                        SampleRecord("b", "yes", "real", "train", str(b))],
                       manifest)
        status = dispatch(["pool", "--in", str(manifest),
                           "--out", str(tmp_path / "o.fseq")])
        assert status == 1
        assert "dimension" in capsys.readouterr().err


class TestFilterLoopCli:
    def test_stub_scripts_end_to_end(self, tmp_path, capsys):
        donors = tmp_path / "donors.jsonl"
        donors.write_text("\n".join(
            json.dumps({"utterance_id": f"d{i}", "speaker_id": f"s{i}",
                        "path": f"/cv/d{i}.wav"}) for i in range(10)) + "\n")
        synth_sh = tmp_path / "synth.sh"
        synth_sh.write_text("#!/bin/sh\nprintf '%s' \"$1\" > \"$3\"\n")
        asr_sh = tmp_path / "asr.sh"
        asr_sh.write_text("#!/bin/sh\ncat \"$1\"\n")
        out_dir = tmp_path / "gen"
        status = dispatch([
            "filter-loop", "--targets", "yes=2,no=1",
            "--voices", str(donors),
            "--synth-cmd", f"sh {synth_sh} {{text}} {{voice_path}} {{out_path}}",
            "--asr1-cmd", f"sh {asr_sh} {{in_path}}",
            "--asr2-cmd", f"sh {asr_sh} {{in_path}}",
            "--out-dir", str(out_dir), "--seed", "3"])
        assert status == 0
        kept = read_manifest(out_dir / "kept.jsonl")
        assert len(kept) == 3
        assert (out_dir / "report.json").exists()
        assert (out_dir / "jobs.tsv").exists()
        assert (out_dir / "run_config.json").exists()

    def test_targets_validation(self, tmp_path, capsys):
        donors = tmp_path / "donors.jsonl"
        donors.write_text(json.dumps({"utterance_id": "d0", "speaker_id": "s",
                                      "path": "/x.wav"}) + "\n")
        status = dispatch(["filter-loop", "--targets", "Yes=2",
                           "--voices", str(donors),
                           "--synth-cmd", "true", "--asr1-cmd", "true",
                           "--asr2-cmd", "true",
                           "--out-dir", str(tmp_path / "g")])
        assert status == 4


class TestGanPipelineCli:
    def test_train_transform_head_eval_report(self, tmp_path, capsys):
        dim = 16
        synth, _ = write_pooled_archive(tmp_path, "synth", 40, dim,
                                        domain="synthetic", seed=1, shift=-1.0)
        real, _ = write_pooled_archive(tmp_path, "real", 40, dim,
                                       domain="real", seed=2, shift=1.0)
        model_path = tmp_path / "gan.fgnn"
        status = dispatch(["train-cyclegan", "--synth", str(synth),
                           "--real", str(real), "--out", str(model_path),
                           "--epochs", "2", "--batch", "16", "--lr", "1e-4",
                           "--hidden", "8", "--seed", "5"])
        assert status == 0
        assert model_path.exists()
        assert (tmp_path / "gan.fgnn.history.tsv").exists()
        assert (tmp_path / "gan.fgnn.history.svg").exists()
        assert (tmp_path / "gan.fgnn.run.json").exists()

        adapted = tmp_path / "adapted.fseq"
        assert dispatch(["transform", "--model", str(model_path),
                         "--in", str(synth), "--out", str(adapted)]) == 0
        matrix, recs = read_pooled(adapted)
        assert matrix.shape == (40, dim)
        assert recs[0].domain == "synthetic"

        labels = [CLASSES[i % 3] for i in range(40)]
        train_a, _ = write_pooled_archive(tmp_path, "tr", 40, dim,
                                          labels=labels, seed=3)
        head_path = tmp_path / "head.fgnn"
        assert dispatch(["train-head", "--train", str(train_a),
                         "--valid", str(train_a), "--out", str(head_path),
                         "--epochs", "2", "--seed", "1"]) == 0
        assert (tmp_path / "head.fgnn.metrics.tsv").exists()

        prefix = str(tmp_path / "run1")
        assert dispatch(["eval", "--head", str(head_path),
                         "--test", str(train_a),
                         "--out-prefix", prefix]) == 0
        payload = json.loads((tmp_path / "run1.accuracy.json").read_text())
        assert 0.0 <= payload["accuracy"] <= 1.0
        assert (tmp_path / "run1.confusion.tsv").exists()
        assert (tmp_path / "run1.confusion.svg").exists()

        prefix2 = str(tmp_path / "run2")
        assert dispatch(["eval", "--head", str(head_path),
                         "--test", str(train_a), "--gan", str(model_path),
                         "--transform-test", "--out-prefix", prefix2]) == 0

        report_prefix = str(tmp_path / "summary")
        assert dispatch(["report", "--in",
                         str(tmp_path / "run1.accuracy.json"),
                         str(tmp_path / "run2.accuracy.json"),
                         "--out-prefix", report_prefix]) == 0
        table = (tmp_path / "summary.tsv").read_text().splitlines()
        assert table[0] == "run\taccuracy"
        assert table[-2].startswith("mean\t")
        assert table[-1].startswith("std\t")
        assert (tmp_path / "summary.svg").exists()

    def test_transform_test_without_gan_rejected(self, tmp_path, capsys):
        dim = 8
        archive, _ = write_pooled_archive(tmp_path, "t", 30, dim)
        head_path = tmp_path / "h.fgnn"
        assert dispatch(["train-head", "--train", str(archive),
                         "--valid", str(archive), "--out", str(head_path),
                         "--epochs", "1"]) == 0
        status = dispatch(["eval", "--head", str(head_path),
                           "--test", str(archive), "--transform-test",
                           "--out-prefix", str(tmp_path / "e")])
        assert status == 4


class TestPcaProbeCli:
    def test_pca_emits_table_svg_and_meta(self, tmp_path, capsys):
        real, _ = write_pooled_archive(tmp_path, "r", 30, 12, domain="real",
                                       seed=4)
        synth, _ = write_pooled_archive(tmp_path, "s", 25, 12,
                                        domain="synthetic", seed=5, shift=2.0)
        prefix = str(tmp_path / "fig2")
        assert dispatch(["pca", "--in", str(real), str(synth),
                         "--k", "2", "--out-prefix", prefix]) == 0
        table = (tmp_path / "fig2.table").read_text().splitlines()
        assert table[0] == "x\ty\tdomain\tlabel"
        assert len(table) == 1 + 55
        meta = json.loads((tmp_path / "fig2.meta.json").read_text())
        assert meta["fit_on"] == "union of both input pools"
        assert (tmp_path / "fig2.svg").exists()

    def test_pca_outputs_byte_stable(self, tmp_path, capsys):
        real, _ = write_pooled_archive(tmp_path, "r", 25, 10, seed=6)
        synth, _ = write_pooled_archive(tmp_path, "s", 25, 10,
                                        domain="synthetic", seed=7, shift=1.0)
        p1, p2 = str(tmp_path / "one"), str(tmp_path / "two")
        assert dispatch(["pca", "--in", str(real), str(synth),
                         "--k", "2", "--out-prefix", p1]) == 0
        assert dispatch(["pca", "--in", str(real), str(synth),
                         "--k", "2", "--out-prefix", p2]) == 0
        assert (tmp_path / "one.table").read_bytes() == \
            (tmp_path / "two.table").read_bytes()
        assert (tmp_path / "one.svg").read_bytes() == \
            (tmp_path / "two.svg").read_bytes()

    def test_probe_prints_balanced_accuracy(self, tmp_path, capsys):
        real, _ = write_pooled_archive(tmp_path, "r", 60, 8, seed=8)
        synth, _ = write_pooled_archive(tmp_path, "s", 60, 8,
                                        domain="synthetic", seed=9, shift=9.0)
        assert dispatch(["probe", "--real", str(real), "--synth", str(synth),
                         "--space", "raw"]) == 0
        out = capsys.readouterr().out
        assert "balanced accuracy" in out
        score = float(out.split("balanced accuracy")[1].split()[0])
        assert score >= 0.95


class TestReproducibility:
    def test_pool_rerun_byte_identical(self, tmp_path, capsys):
        manifest = write_tone_manifest(tmp_path, n=2)
        feat_dir = tmp_path / "f"
        dispatch(["mfcc", "--in", str(manifest), "--out-dir", str(feat_dir)])
        a1 = tmp_path / "a1.fseq"
        a2 = tmp_path / "a2.fseq"
        dispatch(["pool", "--in", str(feat_dir / "manifest.jsonl"),
                  "--out", str(a1)])
        dispatch(["pool", "--in", str(feat_dir / "manifest.jsonl"),
                  "--out", str(a2)])
        assert a1.read_bytes() == a2.read_bytes()

    def test_run_config_carries_version(self, tmp_path, capsys):
        import featgan
        manifest = write_tone_manifest(tmp_path, n=1)
        feat_dir = tmp_path / "f"
        dispatch(["mfcc", "--in", str(manifest), "--out-dir", str(feat_dir)])
        cfg = json.loads((feat_dir / "run_config.json").read_text())
        assert cfg["version"] == featgan.__version__
        assert cfg["subcommand"] == "mfcc"
        assert cfg["params"]["frame_length"] == 400
