"""Command-line entry point for every pipeline stage.

Runs are config-file driven and reproducible: a JSON config may supply any
flag value (flags override the file), the fully merged config plus the
toolkit version is archived next to each run's outputs, and one global
seed derives independent per-stage seeds. FEATGAN_THREADS caps BLAS
parallelism (default 1 for bit-stable CI).
"""

# BLAS thread caps must be exported before numpy loads.
import os

_threads = os.environ.get("FEATGAN_THREADS", "1")
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import sys  # noqa: E402
from pathlib import Path  # noqa: E402

import numpy as np  # noqa: E402

import featgan  # noqa: E402
from featgan import analysis, classifier, cyclegan, filtering, plots  # noqa: E402
from featgan.audio import read_wav  # noqa: E402
from featgan.errors import (ConfigError, FeatganError,  # noqa: E402
                            MissingInputError)
from featgan.fseq import write_fseq  # noqa: E402
from featgan.manifest import read_manifest, write_manifest  # noqa: E402
from featgan.mfcc import MfccConfig, mfcc  # noqa: E402
from featgan.pooled import pool_manifest, read_pooled, write_pooled  # noqa: E402
from featgan.seeding import derive_seed  # noqa: E402

_SEED_MASK = (1 << 63) - 1


def _require(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise MissingInputError(str(p))
    return p


def _resolved(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults <- config file <- explicit flags; unknown config keys rejected."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        cfg_path = _require(args.config)
        try:
            raw = json.loads(cfg_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{cfg_path}: invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{cfg_path}: config must be a JSON object")
        unknown = set(raw) - set(defaults)
        if unknown:
            raise ConfigError(f"{cfg_path}: unknown config keys {sorted(unknown)}")
        merged.update(raw)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged

def _archive_run(target, subcommand: str, params: dict) -> None:
    """Write the resolved config next to the run's outputs."""
    record = {"subcommand": subcommand, "params": params,
              "version": featgan.__version__}
    target = Path(target)
    if target.is_dir():
        out = target / "run_config.json"
    else:
        out = Path(str(target) + ".run.json")
    out.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")


def _write_table(path, header: list[str], rows: list[list]) -> None:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(str(c) for c in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- mfcc

_MFCC_DEFAULTS = {"n_coeffs": 64, "n_mels": 64, "frame_length": 400,
                  "hop": 160, "fft_size": 512, "fmin": 0.0, "fmax": 8000.0,
                  "preemphasis": 0.97}


def cmd_mfcc(args) -> int:
    params = _resolved(args, dict(_MFCC_DEFAULTS))
    cfg = MfccConfig(**params)
    records = read_manifest(_require(args.in_manifest))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_records = []
    for rec in records:
        clip = read_wav(_require(rec.path))
        seq = mfcc(clip, cfg, utterance_id=rec.utterance_id)
        out_path = out_dir / f"{rec.utterance_id}.fseq"
        write_fseq(seq.values, out_path)
        out_records.append(type(rec)(**{**rec.__dict__, "path": str(out_path)}))
    write_manifest(out_records, out_dir / "manifest.jsonl")
    params["in_manifest"] = str(args.in_manifest)
    _archive_run(out_dir, "mfcc", params)
    print(f"mfcc: wrote {len(out_records)} feature files to {out_dir}")
    return 0


# ---------------------------------------------------------------- pool

def cmd_pool(args) -> int:
    records = read_manifest(_require(args.in_manifest))
    if not records:
        raise ConfigError(f"empty-input: {args.in_manifest} has no records")
    matrix, records = pool_manifest(records)
    write_pooled(matrix, records, args.out)
    _archive_run(args.out, "pool", {"in_manifest": str(args.in_manifest),
                                    "out": str(args.out)})
    print(f"pool: wrote {matrix.shape[0]}x{matrix.shape[1]} archive to {args.out}")
    return 0


# ---------------------------------------------------------------- filter-loop

def _parse_targets(spec: str | None, path: str | None) -> dict[str, int]:
    if (spec is None) == (path is None):
        raise ConfigError("provide exactly one of --targets / --targets-file")
    if path is not None:
        raw = json.loads(_require(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: targets file must map word -> count")
        return {str(w): int(n) for w, n in raw.items()}
    out: dict[str, int] = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ConfigError(f"bad target {part!r}, expected word=count")
        word, count = part.split("=", 1)
        out[word.strip()] = int(count)
    return out


_LOOP_DEFAULTS = {"max_attempts": 8, "seed": 0, "single_asr": False}


def cmd_filter_loop(args) -> int:
    params = _resolved(args, dict(_LOOP_DEFAULTS))
    targets = _parse_targets(args.targets, args.targets_file)
    donors = filtering.read_donor_manifest(_require(args.voices))
    pool = filtering.VoicePool(donors)
    synth = filtering.CommandSynth(args.synth_cmd)
    asr_1 = filtering.CommandAsr(args.asr1_cmd)
    asr_2 = None
    if not params["single_asr"]:
        if not args.asr2_cmd:
            raise ConfigError("two-recognizer mode needs --asr2-cmd "
                              "(or pass --single-asr)")
        asr_2 = filtering.CommandAsr(args.asr2_cmd)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(
        derive_seed(params["seed"], "filter-loop") & _SEED_MASK))
    kept, report = filtering.run_generation_loop(
        targets, pool, synth, asr_1, asr_2, out_dir, rng,
        max_attempts=params["max_attempts"])
    write_manifest(kept, out_dir / "kept.jsonl")
    filtering.write_loop_report(report, out_dir)
    params.update({"targets": targets, "voices": str(args.voices),
                   "synth_cmd": args.synth_cmd, "asr1_cmd": args.asr1_cmd,
                   "asr2_cmd": args.asr2_cmd})
    _archive_run(out_dir, "filter-loop", params)
    print(f"filter-loop: kept {report.kept}/{report.requested} "
          f"(exhausted {report.exhausted}, failed {report.failed})")
    return 0


# ---------------------------------------------------------------- train-cyclegan

_CYCLEGAN_DEFAULTS = {"epochs": 200, "batch": 128, "lr": 1e-5,
                      "lambda_cyc": 10.0, "lambda_id": 0.5, "seed": 0,
                      "hidden": 512}


def cmd_train_cyclegan(args) -> int:
    params = _resolved(args, dict(_CYCLEGAN_DEFAULTS))
    pool_a, _ = read_pooled(_require(args.synth))
    pool_b, _ = read_pooled(_require(args.real))
    cfg = cyclegan.CycleGanTrainConfig(
        epochs=params["epochs"], batch=params["batch"], lr=params["lr"],
        lambda_cyc=params["lambda_cyc"], lambda_id=params["lambda_id"],
        seed=derive_seed(params["seed"], "train-cyclegan") & _SEED_MASK,
        hidden=params["hidden"])
    model, history = cyclegan.train(pool_a, pool_b, cfg)
    model.save(args.out)
    keys = list(history[0]) if history else []
    _write_table(str(args.out) + ".history.tsv", keys,
                 [[f"{h[k]:.6g}" if k != "epoch" else h[k] for k in keys]
                  for h in history])
    plots.save_history(history, str(args.out) + ".history.svg",
                       title="cyclegan training")
    params.update({"synth": str(args.synth), "real": str(args.real)})
    _archive_run(args.out, "train-cyclegan", params)
    if history:
        print(f"train-cyclegan: {len(history)} epochs, "
              f"final total={history[-1]['total']:.4f} -> {args.out}")
    return 0


# ---------------------------------------------------------------- transform

def cmd_transform(args) -> int:
    model = cyclegan.CycleGanModel.load(_require(args.model))
    matrix, records = read_pooled(_require(args.in_archive))
    write_pooled(model.transform(matrix), records, args.out)
    _archive_run(args.out, "transform", {"model": str(args.model),
                                         "in": str(args.in_archive),
                                         "out": str(args.out)})
    print(f"transform: wrote {len(matrix)} adapted vectors to {args.out}")
    return 0


# ---------------------------------------------------------------- train-head

_HEAD_DEFAULTS = {"epochs": 30, "lr": 5e-3, "batch": 128, "seed": 0}


def cmd_train_head(args) -> int:
    params = _resolved(args, dict(_HEAD_DEFAULTS))
    train_x, train_recs = read_pooled(_require(args.train))
    valid_x, valid_recs = read_pooled(_require(args.valid))
    gan = None
    if args.gan:
        gan = cyclegan.CycleGanModel.load(_require(args.gan))
    cfg = classifier.HeadTrainConfig(
        epochs=params["epochs"], lr=params["lr"], batch=params["batch"],
        seed=derive_seed(params["seed"], "train-head") & _SEED_MASK)
    head, metrics = classifier.train_head(
        train_x, [r.label for r in train_recs],
        valid_x, [r.label for r in valid_recs], cfg, transform=gan)
    head.save(args.out)
    _write_table(str(args.out) + ".metrics.tsv",
                 ["epoch", "train_loss", "valid_accuracy"],
                 [[m["epoch"], f"{m['train_loss']:.6g}",
                   f"{m['valid_accuracy']:.6g}"] for m in metrics])
    plots.save_history(metrics, str(args.out) + ".metrics.svg",
                       title="linear head training")
    params.update({"train": str(args.train), "valid": str(args.valid),
                   "gan": str(args.gan) if args.gan else None})
    _archive_run(args.out, "train-head", params)
    best = max((m["valid_accuracy"] for m in metrics), default=float("nan"))
    print(f"train-head: best valid accuracy {best:.4f} -> {args.out}")
    return 0


# ---------------------------------------------------------------- eval

def cmd_eval(args) -> int:
    head = classifier.LinearHead.load(_require(args.head))
    test_x, test_recs = read_pooled(_require(args.test))
    gan = None
    if args.transform_test:
        if not args.gan:
            raise ConfigError("--transform-test needs --gan")
        gan = cyclegan.CycleGanModel.load(_require(args.gan))
    accuracy, confusion = classifier.evaluate(
        head, test_x, [r.label for r in test_recs], transform=gan)
    prefix = args.out_prefix
    payload = {"accuracy": accuracy, "n": len(test_x),
               "head": str(args.head), "test": str(args.test),
               "transform_test": bool(args.transform_test)}
    Path(prefix + ".accuracy.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_table(prefix + ".confusion.tsv", ["true\\pred", *head.classes],
                 [[cls, *confusion[i]] for i, cls in enumerate(head.classes)])
    plots.save_confusion(confusion, head.classes, prefix + ".confusion.svg")
    _archive_run(prefix, "eval", payload)
    print(f"eval: accuracy {accuracy:.4f} on {len(test_x)} examples")
    return 0


# ---------------------------------------------------------------- pca

def cmd_pca(args) -> int:
    real_path, synth_path = args.inputs
    real_x, real_recs = read_pooled(_require(real_path))
    synth_x, synth_recs = read_pooled(_require(synth_path))
    union = np.concatenate([real_x, synth_x])
    seed = derive_seed(args.seed if args.seed is not None else 0, "pca")
    model = analysis.pca_fit(union, args.k, seed=seed & _SEED_MASK)
    points = analysis.pca_project(model, union)
    domains = [r.domain for r in real_recs] + [r.domain for r in synth_recs]
    labels = [r.label for r in real_recs] + [r.label for r in synth_recs]
    prefix = args.out_prefix
    Path(prefix + ".table").write_text(
        analysis.scatter_table(points[:, :2], domains, labels), encoding="utf-8")
    plots.save_scatter(points[:, :2], domains, prefix + ".svg",
                       title="PCA of pooled features")
    meta = {"fit_on": "union of both input pools", "k": args.k,
            "explained_ratios": model.explained_ratios.tolist(),
            "real": str(real_path), "synth": str(synth_path)}
    Path(prefix + ".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _archive_run(prefix, "pca", meta)
    ratios = ", ".join(f"{r:.4f}" for r in model.explained_ratios)
    print(f"pca: explained variance ratios [{ratios}] -> {prefix}.table/.svg")
    return 0


# ---------------------------------------------------------------- probe

def cmd_probe(args) -> int:
    real_x, _ = read_pooled(_require(args.real))
    synth_x, _ = read_pooled(_require(args.synth))
    seed = derive_seed(args.seed if args.seed is not None else 0, "probe")
    score = analysis.separability_probe(real_x, synth_x, space=args.space,
                                        seed=seed & _SEED_MASK)
    print(f"probe: balanced accuracy {score:.4f} ({args.space} space)")
    if args.out_prefix:
        payload = {"balanced_accuracy": score, "space": args.space,
                   "real": str(args.real), "synth": str(args.synth)}
        Path(args.out_prefix + ".probe.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        _archive_run(args.out_prefix, "probe", payload)
    return 0


# ---------------------------------------------------------------- report

def cmd_report(args) -> int:
    names, accs = [], []
    for path in args.inputs:
        payload = json.loads(_require(path).read_text(encoding="utf-8"))
        names.append(Path(path).name.removesuffix(".accuracy.json"))
        accs.append(float(payload["accuracy"]))
    summary = classifier.multi_seed_report(accs)
    prefix = args.out_prefix
    rows = [[name, f"{acc:.6g}"] for name, acc in zip(names, accs)]
    rows.append(["mean", f"{summary['mean']:.6g}"])
    rows.append(["std", f"{summary['std']:.6g}"])
    _write_table(prefix + ".tsv", ["run", "accuracy"], rows)
    plots.save_accuracy_bars(names, accs, [0.0] * len(accs), prefix + ".svg",
                             title=f"accuracy: {summary['formatted']}")
    _archive_run(prefix, "report", {"inputs": [str(p) for p in args.inputs],
                                    **summary})
    print(f"report: {summary['formatted']} over {summary['runs']} runs")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featgan",
        description="Feature-space toolkit for synthetic speech command "
                    "experiments")
    parser.add_argument("--version", action="version",
                        version=f"featgan {featgan.__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("mfcc", help="extract 64-d MFCC sequences from audio")
    p.add_argument("--in", dest="in_manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config")
    for key in _MFCC_DEFAULTS:
        flag = "--" + key.replace("_", "-")
        p.add_argument(flag, type=float if key in ("fmin", "fmax", "preemphasis")
                       else int, default=None)
    p.set_defaults(func=cmd_mfcc)

    p = sub.add_parser("pool", help="statistic-pool feature sequences")
    p.add_argument("--in", dest="in_manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("filter-loop",
                       help="generate and ASR-filter synthetic utterances")
    p.add_argument("--targets")
    p.add_argument("--targets-file")
    p.add_argument("--voices", required=True)
    p.add_argument("--synth-cmd", required=True)
    p.add_argument("--asr1-cmd", required=True)
    p.add_argument("--asr2-cmd")
    p.add_argument("--single-asr", action="store_const", const=True,
                   default=None)
    p.add_argument("--max-attempts", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_filter_loop)

    p = sub.add_parser("train-cyclegan",
                       help="train the feature-space CycleGAN")
    p.add_argument("--synth", required=True)
    p.add_argument("--real", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--lambda-cyc", type=float, default=None)
    p.add_argument("--lambda-id", type=float, default=None)
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config")
    p.set_defaults(func=cmd_train_cyclegan)

    p = sub.add_parser("transform",
                       help="map pooled vectors through generator A")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="in_archive", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("train-head", help="train the linear classification head")
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--gan")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config")
    p.set_defaults(func=cmd_train_head)

    p = sub.add_parser("eval", help="evaluate a head on a pooled test set")
    p.add_argument("--head", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--gan")
    p.add_argument("--transform-test", action="store_true")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pca", help="2-d PCA of real vs synthetic pools")
    p.add_argument("--in", dest="inputs", nargs=2, required=True,
                   metavar=("REAL", "SYNTH"))
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("probe", help="real-vs-synthetic separability probe")
    p.add_argument("--real", required=True)
    p.add_argument("--synth", required=True)
    p.add_argument("--space", choices=["raw", "pca2"], default="raw")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-prefix")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("report", help="mean/std accuracy over eval outputs")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def dispatch(argv: list[str]) -> int:
    """Run one subcommand; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help exits 0, usage errors exit 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MissingInputError as exc:
        print(f"error: missing-input: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"error: missing-input: {exc.filename or exc}", file=sys.stderr)
        return 3
    except FeatganError as exc:
        category = type(exc).__name__.removesuffix("Error").lower()
        print(f"error: {category}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: invalid-value: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
