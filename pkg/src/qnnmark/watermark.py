"""Watermark embedding and black-box ownership verification.

Embedding trains a fresh hybrid model over the grouped-and-paired
schedule, in order, consuming consecutive windows of the batch size so
the sequence order survives batching. Verification treats the suspect
model as an opaque image->label function and decides ownership from
trigger-set prediction statistics alone, either

* paired: the accuracy gap on the trigger set between the suspect and an
  independent non-watermarked baseline must exceed ``min_accuracy_gap``;
* standalone: the trigger accuracy must clear ``min_trigger_accuracy`` and
  a one-sided binomial test against chance agreement must be significant.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .data import TriggerSpec
from .model import HybridModel, train_step
from .nn import Adam
from .schedule import (
    ScheduleConfig,
    ScheduleEntry,
    build_schedule,
    validate_schedule,
)

MIN_VERIFICATION_QUERIES = 30
REPORT_SCHEMA_VERSION = 1


class TrainingAborted(RuntimeError):
    """Raised when a wall-clock deadline interrupts training."""

    def __init__(self, message, partial_log):
        super().__init__(message)
        self.partial_log = partial_log


@dataclass
class EmbedConfig:
    schedule: ScheduleConfig
    trigger: TriggerSpec
    seed: int
    epochs: int = 4
    batch_size: int = 4
    lr: float = 0.01
    ordering: str = "grouped"  # "grouped" | "random"
    regenerate_schedule_per_epoch: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.ordering not in ("grouped", "random"):
            raise ValueError(f"unknown ordering {self.ordering!r}")


@dataclass
class EpochMetrics:
    epoch: int
    mean_loss: float
    clean_accuracy: float
    trigger_accuracy: float
    wall_seconds: float = 0.0


@dataclass
class EmbedResult:
    model: HybridModel
    log: list[EpochMetrics]
    schedule: list[ScheduleEntry]


@dataclass(frozen=True)
class VerificationConfig:
    min_accuracy_gap: float = 0.4  # paired-mode decision threshold
    min_trigger_accuracy: float = 0.7  # standalone decision threshold
    max_clean_disagreement: float = 0.1  # reported utility tolerance
    max_trigger_agreement: float = 0.5  # reported divergence tolerance
    null_rate: float = 0.5  # chance agreement for the binomial null
    significance: float = 0.01

    def __post_init__(self):
        for name in (
            "min_accuracy_gap",
            "min_trigger_accuracy",
            "max_clean_disagreement",
            "max_trigger_agreement",
            "null_rate",
            "significance",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass
class VerificationReport:
    mode: str  # "paired" | "standalone"
    n_queries: int
    trigger_accuracy: float
    p_value: float
    decision: str  # "owned" | "not-owned" | "inconclusive"
    baseline_trigger_accuracy: float | None = None
    accuracy_difference: float | None = None
    clean_accuracy: float | None = None
    degenerate: bool = False
    schema_version: int = REPORT_SCHEMA_VERSION

    CSV_FIELDS = (
        "schema_version",
        "mode",
        "n_queries",
        "trigger_accuracy",
        "baseline_trigger_accuracy",
        "accuracy_difference",
        "clean_accuracy",
        "p_value",
        "degenerate",
        "decision",
    )

    def _value(self, name):
        v = getattr(self, name)
        if v is None:
            return ""
        if isinstance(v, bool):
            return str(int(v))
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    def to_text(self) -> str:
        return "\n".join(f"{k}: {self._value(k)}" for k in self.CSV_FIELDS) + "\n"

    def to_csv_row(self) -> str:
        return ",".join(self._value(k) for k in self.CSV_FIELDS)

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(cls.CSV_FIELDS)


def classification_accuracy(predict_fn, samples) -> float:
    """Fraction of samples whose predicted label matches the stored label."""
    samples = list(samples)
    if not samples:
        raise ValueError("cannot evaluate on an empty sample set")
    hits = sum(1 for s in samples if predict_fn(s.normalized()) == s.label)
    return hits / len(samples)


def evaluate_clean(predict_fn, clean_test_set) -> float:
    return classification_accuracy(predict_fn, clean_test_set)


def utility_delta(marked_fn, baseline_fn, clean_test_set) -> float:
    """Fraction of clean inputs where the two predictors disagree."""
    samples = list(clean_test_set)
    if not samples:
        raise ValueError("cannot compare predictors on an empty sample set")
    differ = sum(
        1
        for s in samples
        if marked_fn(s.normalized()) != baseline_fn(s.normalized())
    )
    return differ / len(samples)


def verify_from_predictions(
    predictions,
    target_labels,
    cfg: VerificationConfig,
    baseline_predictions=None,
    clean_accuracy: float | None = None,
    min_queries: int = MIN_VERIFICATION_QUERIES,
) -> VerificationReport:
    """Decide ownership from already-collected prediction transcripts."""
    predictions = list(predictions)
    target_labels = list(target_labels)
    n = len(predictions)
    if n == 0:
        raise ValueError("empty trigger set")
    if n < min_queries:
        raise ValueError(
            f"trigger set holds {n} samples; at least {min_queries} are required "
            "for a meaningful decision"
        )
    if len(target_labels) != n:
        raise ValueError("predictions and target labels differ in length")

    hits = sum(1 for p, y in zip(predictions, target_labels) if p == y)
    accuracy = hits / n
    p_value = float(binomtest(hits, n, cfg.null_rate, alternative="greater").pvalue)
    degenerate = clean_accuracy is not None and clean_accuracy <= cfg.null_rate

    if baseline_predictions is not None:
        baseline_predictions = list(baseline_predictions)
        if len(baseline_predictions) != n:
            raise ValueError(
                f"baseline transcript holds {len(baseline_predictions)} predictions, "
                f"target holds {n}"
            )
        base_hits = sum(
            1 for p, y in zip(baseline_predictions, target_labels) if p == y
        )
        base_accuracy = base_hits / n
        difference = abs(accuracy - base_accuracy)
        decision = "owned" if difference > cfg.min_accuracy_gap else "not-owned"
        return VerificationReport(
            mode="paired",
            n_queries=n,
            trigger_accuracy=accuracy,
            baseline_trigger_accuracy=base_accuracy,
            accuracy_difference=difference,
            clean_accuracy=clean_accuracy,
            p_value=p_value,
            degenerate=degenerate,
            decision=decision,
        )

    if accuracy < cfg.min_trigger_accuracy:
        decision = "not-owned"
    elif p_value < cfg.significance:
        decision = "owned"
    else:
        decision = "inconclusive"
    return VerificationReport(
        mode="standalone",
        n_queries=n,
        trigger_accuracy=accuracy,
        clean_accuracy=clean_accuracy,
        p_value=p_value,
        degenerate=degenerate,
        decision=decision,
    )


def verify(
    predict_fn,
    trigger_set,
    cfg: VerificationConfig,
    baseline_fn=None,
    clean_accuracy: float | None = None,
) -> VerificationReport:
    """Query the suspect (and optional baseline) on the trigger set and decide.

    Only input/output pairs of ``predict_fn`` are used; model internals are
    never touched.
    """
    trigger_set = list(trigger_set)
    predictions = [predict_fn(s.normalized()) for s in trigger_set]
    targets = [s.label for s in trigger_set]
    baseline_predictions = (
        [baseline_fn(s.normalized()) for s in trigger_set]
        if baseline_fn is not None
        else None
    )
    return verify_from_predictions(
        predictions,
        targets,
        cfg,
        baseline_predictions=baseline_predictions,
        clean_accuracy=clean_accuracy,
    )


def _epoch_sequence(entries, cfg: EmbedConfig, clean_pool, trigger_pairs, epoch, rng):
    if cfg.ordering == "random":
        order = rng.permutation(len(entries))
        return [entries[i].sample for i in order]
    if cfg.regenerate_schedule_per_epoch and epoch > 1:
        fresh = build_schedule(
            clean_pool, trigger_pairs, cfg.schedule, cfg.seed + 1000003 * epoch
        )
        return [e.sample for e in fresh]
    return [e.sample for e in entries]


def embed(
    model: HybridModel,
    clean_pool,
    trigger_pairs,
    cfg: EmbedConfig,
    clean_eval=None,
    trigger_eval=None,
    deadline: float | None = None,
) -> EmbedResult:
    """Train ``model`` in place over the configured schedule.

    ``clean_eval`` / ``trigger_eval`` are the sample sets used for the
    per-epoch accuracy log; they default to the training schedule's own
    clean and trigger members. ``deadline`` is an absolute
    ``time.monotonic()`` limit; exceeding it raises TrainingAborted with
    the partial log attached.
    """
    entries = build_schedule(clean_pool, trigger_pairs, cfg.schedule, cfg.seed)
    violations = validate_schedule(entries, cfg.schedule, cfg.trigger.target_label)
    if violations:
        raise RuntimeError(f"internal error: built schedule is invalid: {violations[0]}")

    if clean_eval is None:
        clean_eval = [e.sample for e in entries if e.sample.provenance == "clean"]
    if trigger_eval is None:
        trigger_eval = [e.sample for e in entries if e.sample.provenance == "trigger"]

    optimizer = Adam(lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    log: list[EpochMetrics] = []
    started = time.perf_counter()

    def evaluate(epoch: int, losses) -> EpochMetrics:
        mean_loss = float(np.mean(losses)) if losses else math.nan
        clean_acc = classification_accuracy(model.predict_label, clean_eval)
        trig_acc = (
            classification_accuracy(model.predict_label, trigger_eval)
            if trigger_eval
            else math.nan
        )
        return EpochMetrics(
            epoch, mean_loss, clean_acc, trig_acc,
            wall_seconds=time.perf_counter() - started,
        )

    if cfg.epochs == 0:
        log.append(evaluate(0, []))
        return EmbedResult(model, log, entries)

    for epoch in range(1, cfg.epochs + 1):
        sequence = _epoch_sequence(
            entries, cfg, clean_pool, trigger_pairs, epoch, rng
        )
        losses = []
        for start in range(0, len(sequence), cfg.batch_size):
            window = sequence[start : start + cfg.batch_size]
            batch = [(s.normalized(), s.label) for s in window]
            loss = train_step(model, optimizer, batch)
            if not math.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss {loss} at epoch {epoch}, "
                    f"batch starting at position {start}"
                )
            losses.append(loss)
            if deadline is not None and time.monotonic() > deadline:
                log.append(evaluate(epoch, losses))
                raise TrainingAborted(
                    f"wall-clock limit hit at epoch {epoch}, position {start}", log
                )
        log.append(evaluate(epoch, losses))
    return EmbedResult(model, log, entries)
