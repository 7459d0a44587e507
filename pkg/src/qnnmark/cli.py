"""Command-line experiment harness.

Commands: train-baseline, train-watermarked, verify, reproduce, gradcheck.
Every option can also come from a ``key = value`` config file (--config);
explicit flags win over the file, the file wins over defaults. Exit codes:
0 success (or ownership confirmed), 1 negative verification / failed
checks, 2 errors.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .data import TriggerSpec, load_idx
from .digits import DEFAULT_PER_CLASS, DEFAULT_SEED, ensure_idx_corpus
from .experiment import (
    RunSettings,
    deadline_from_minutes,
    metrics_csv_lines,
    reproduce_rows,
    run_experiment,
)
from .checks import gradient_check_suite
from .model import load_checkpoint, save_checkpoint
from .schedule import schedule_to_text
from .watermark import (
    TrainingAborted,
    VerificationConfig,
    VerificationReport,
    evaluate_clean,
    verify,
    verify_from_predictions,
)
from .experiment import prepare_pools

_DEFAULTS = {
    "images": None,
    "labels": None,
    "data_dir": "data",
    "corpus_per_class": DEFAULT_PER_CLASS,
    "corpus_seed": DEFAULT_SEED,
    "out": None,
    "digit_a": 0,
    "digit_b": 1,
    "per_class": 100,
    "n_trigger": 10,
    "n_verify": 100,
    "sequence_length": 200,
    "pair_block": 2,
    "epochs": 4,
    "batch_size": 4,
    "lr": 0.01,
    "seed": 1,
    "ordering": "grouped",
    "regen_schedule": False,
    "n_qubits": 16,
    "reps": 2,
    "trigger_row": 0,
    "trigger_col": 0,
    "trigger_height": 7,
    "trigger_width": 7,
    "trigger_value": 255,
    "timing": False,
    "wall_limit_minutes": 30.0,
    "min_gap": 0.4,
    "min_trigger_accuracy": 0.7,
    "null_rate": 0.5,
    "significance": 0.01,
    "checkpoint": None,
    "baseline_checkpoint": None,
    "transcript": None,
    "baseline_transcript": None,
    "expected_queries": None,
    "target_label": 1,
    "table": 1,
    "seeds": "1,2,3",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnnmark",
        description="Train, watermark and verify hybrid quantum-classical classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--images", help="IDX image file (omit to use the rendered corpus)")
        p.add_argument("--labels", help="IDX label file")
        p.add_argument("--data-dir", dest="data_dir",
                       help="directory for the rendered corpus")
        p.add_argument("--corpus-per-class", dest="corpus_per_class", type=int)
        p.add_argument("--corpus-seed", dest="corpus_seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--digit-a", dest="digit_a", type=int)
        p.add_argument("--digit-b", dest="digit_b", type=int)
        p.add_argument("--per-class", dest="per_class", type=int)
        p.add_argument("--n-verify", dest="n_verify", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--n-qubits", dest="n_qubits", type=int)
        p.add_argument("--reps", type=int)
        p.add_argument("--trigger-row", dest="trigger_row", type=int)
        p.add_argument("--trigger-col", dest="trigger_col", type=int)
        p.add_argument("--trigger-height", dest="trigger_height", type=int)
        p.add_argument("--trigger-width", dest="trigger_width", type=int)
        p.add_argument("--trigger-value", dest="trigger_value", type=int)
        p.add_argument("--n-trigger", dest="n_trigger", type=int)

    def add_training(p):
        p.add_argument("--epochs", type=int)
        p.add_argument("--batch-size", dest="batch_size", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--timing", action=argparse.BooleanOptionalAction)
        p.add_argument("--wall-limit-minutes", dest="wall_limit_minutes", type=float)

    p = sub.add_parser("train-baseline", help="train a clean model, random order")
    add_common(p)
    add_training(p)

    p = sub.add_parser("train-watermarked", help="train with the grouped/paired schedule")
    add_common(p)
    add_training(p)
    p.add_argument("--sequence-length", dest="sequence_length", type=int)
    p.add_argument("--pair-block", dest="pair_block", type=int)
    p.add_argument("--ordering", choices=["grouped", "random"])
    p.add_argument("--regen-schedule", dest="regen_schedule",
                   action=argparse.BooleanOptionalAction)

    p = sub.add_parser("verify", help="black-box ownership verification")
    add_common(p)
    p.add_argument("--checkpoint", help="suspect model checkpoint")
    p.add_argument("--baseline-checkpoint", dest="baseline_checkpoint",
                   help="non-watermarked model for the paired test")
    p.add_argument("--transcript", help="CSV of recorded predictions instead of a checkpoint")
    p.add_argument("--baseline-transcript", dest="baseline_transcript")
    p.add_argument("--expected-queries", dest="expected_queries", type=int)
    p.add_argument("--target-label", dest="target_label", type=int)
    p.add_argument("--min-gap", dest="min_gap", type=float)
    p.add_argument("--min-trigger-accuracy", dest="min_trigger_accuracy", type=float)
    p.add_argument("--null-rate", dest="null_rate", type=float)
    p.add_argument("--significance", type=float)

    p = sub.add_parser("reproduce", help="rerun the published result tables")
    add_common(p)
    add_training(p)
    p.add_argument("--sequence-length", dest="sequence_length", type=int)
    p.add_argument("--pair-block", dest="pair_block", type=int)
    p.add_argument("--table", type=int, choices=[1, 2])
    p.add_argument("--seeds", help="comma-separated seed list")

    p = sub.add_parser("gradcheck", help="kernel and gradient self-checks")
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--seed", type=int)

    return parser


def _parse_config_file(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(key: str, raw: str):
    default = _DEFAULTS.get(key)
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"config key {key}: expected a boolean, got {raw!r}")
    if isinstance(default, int) and default is not None:
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def resolve_config(args: argparse.Namespace) -> tuple[dict, set]:
    """Merge defaults, config file and explicit flags (flags win).

    Also returns the keys that were explicitly provided (file or flag).
    """
    resolved = dict(_DEFAULTS)
    explicit = set()
    file_path = getattr(args, "config", None)
    if file_path:
        for key, raw in _parse_config_file(file_path).items():
            if key not in _DEFAULTS:
                raise ValueError(f"unknown config key {key!r}")
            resolved[key] = _coerce(key, raw)
            explicit.add(key)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        resolved[key] = value
        explicit.add(key)
    return resolved, explicit


def _log_config(cfg: dict, out_dir: Path | None) -> None:
    lines = [f"{k} = {cfg[k]}" for k in sorted(cfg)]
    for line in lines:
        print(f"config: {line}")
    if out_dir is not None:
        (out_dir / "run_config.txt").write_text("\n".join(lines) + "\n")


def _load_samples(cfg: dict):
    if cfg["images"] or cfg["labels"]:
        if not (cfg["images"] and cfg["labels"]):
            raise ValueError("--images and --labels must be given together")
        return load_idx(cfg["images"], cfg["labels"])
    images, labels = ensure_idx_corpus(
        cfg["data_dir"], cfg["corpus_per_class"], cfg["corpus_seed"]
    )
    return load_idx(images, labels)


def _settings_from(cfg: dict) -> RunSettings:
    trigger = TriggerSpec(
        block_height=cfg["trigger_height"],
        block_width=cfg["trigger_width"],
        pixel_value=cfg["trigger_value"],
        origin_row=cfg["trigger_row"],
        origin_col=cfg["trigger_col"],
    )
    return RunSettings(
        digit_a=cfg["digit_a"],
        digit_b=cfg["digit_b"],
        per_class=cfg["per_class"],
        n_trigger=cfg["n_trigger"],
        n_verify=cfg["n_verify"],
        sequence_length=cfg["sequence_length"],
        pair_block=cfg["pair_block"],
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        lr=cfg["lr"],
        seed=cfg["seed"],
        ordering=cfg["ordering"],
        regen_schedule=cfg["regen_schedule"],
        n_qubits=cfg["n_qubits"],
        reps=cfg["reps"],
        trigger=trigger,
    )


def _out_dir(cfg: dict, fallback: str) -> Path:
    out = Path(cfg["out"] or fallback)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_train(cfg: dict, watermarked: bool) -> int:
    name = "train-watermarked" if watermarked else "train-baseline"
    out = _out_dir(cfg, f"runs/{name}")
    _log_config(cfg, out)
    samples = _load_samples(cfg)
    st = _settings_from(cfg)
    deadline = deadline_from_minutes(cfg["wall_limit_minutes"])
    try:
        art = run_experiment(samples, st, watermarked, deadline)
    except TrainingAborted as exc:
        lines = metrics_csv_lines(st, watermarked, exc.partial_log, cfg["timing"])
        (out / "metrics.csv").write_text("\n".join(lines) + "\n")
        print(f"error: {exc} (partial metrics written)", file=sys.stderr)
        return 2
    lines = metrics_csv_lines(st, watermarked, art.result.log, cfg["timing"])
    (out / "metrics.csv").write_text("\n".join(lines) + "\n")
    save_checkpoint(art.result.model, out / "checkpoint.qnnw", art.checkpoint_meta())
    if watermarked:
        (out / "schedule.txt").write_text(schedule_to_text(art.result.schedule))
    final = art.final
    print(
        f"{name}: clean_acc={final.clean_accuracy:.3f} "
        f"trigger_acc={final.trigger_accuracy:.3f} -> {out}"
    )
    return 0


def _read_transcript(path: str) -> list[int]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].strip() != "index,predicted_label":
        raise ValueError(f"{path}: expected header 'index,predicted_label'")
    preds = []
    for raw in lines[1:]:
        _, _, label = raw.partition(",")
        preds.append(int(label))
    return preds


def _cmd_verify(cfg: dict, explicit: set) -> int:
    out = _out_dir(cfg, "runs/verify")
    _log_config(cfg, out)
    vcfg = VerificationConfig(
        min_accuracy_gap=cfg["min_gap"],
        min_trigger_accuracy=cfg["min_trigger_accuracy"],
        null_rate=cfg["null_rate"],
        significance=cfg["significance"],
    )
    if cfg["transcript"]:
        preds = _read_transcript(cfg["transcript"])
        if cfg["expected_queries"] and len(preds) != cfg["expected_queries"]:
            raise ValueError(
                f"transcript holds {len(preds)} predictions, "
                f"expected {cfg['expected_queries']}"
            )
        base = (
            _read_transcript(cfg["baseline_transcript"])
            if cfg["baseline_transcript"]
            else None
        )
        targets = [cfg["target_label"]] * len(preds)
        report = verify_from_predictions(preds, targets, vcfg, base)
    elif cfg["checkpoint"]:
        model, meta = load_checkpoint(cfg["checkpoint"])
        seed = cfg["seed"] if "seed" in explicit else meta.seed
        samples = _load_samples(cfg)
        st = replace(_settings_from(cfg), seed=seed)
        _, test_pool, _, verification = prepare_pools(samples, st)
        baseline_fn = None
        if cfg["baseline_checkpoint"]:
            baseline_model, _ = load_checkpoint(cfg["baseline_checkpoint"])
            baseline_fn = baseline_model.predict_label
        clean_acc = evaluate_clean(model.predict_label, test_pool)
        report = verify(
            model.predict_label,
            verification,
            vcfg,
            baseline_fn=baseline_fn,
            clean_accuracy=clean_acc,
        )
    else:
        raise ValueError("verify needs --checkpoint or --transcript")

    text = report.to_text()
    print(text, end="")
    (out / "report.txt").write_text(text)
    (out / "report.csv").write_text(
        VerificationReport.csv_header() + "\n" + report.to_csv_row() + "\n"
    )
    return 0 if report.decision == "owned" else 1


def _cmd_reproduce(cfg: dict) -> int:
    out = _out_dir(cfg, "runs/reproduce")
    _log_config(cfg, out)
    samples = _load_samples(cfg)
    base = _settings_from(cfg)
    seeds = [int(s) for s in str(cfg["seeds"]).split(",") if s.strip() != ""]
    deadline = deadline_from_minutes(cfg["wall_limit_minutes"])
    rows = reproduce_rows(
        samples, cfg["table"], seeds, base, deadline,
        progress=lambda msg: print(f"running: {msg}"),
    )
    (out / "reproduce.csv").write_text("\n".join(rows) + "\n")
    print("\n".join(rows))
    return 0


def _cmd_gradcheck(cfg: dict) -> int:
    results = gradient_check_suite(cfg["seed"])
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: max_error={r.max_error:.3e} tolerance={r.tolerance:.0e}")
        failed = failed or not r.passed
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, explicit = resolve_config(args)
        if args.command == "train-baseline":
            return _cmd_train(cfg, watermarked=False)
        if args.command == "train-watermarked":
            return _cmd_train(cfg, watermarked=True)
        if args.command == "verify":
            return _cmd_verify(cfg, explicit)
        if args.command == "reproduce":
            return _cmd_reproduce(cfg)
        if args.command == "gradcheck":
            return _cmd_gradcheck(cfg)
        raise ValueError(f"unhandled command {args.command!r}")
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
