"""Grouped-and-paired ordering of the training sequence.

The sequence is a fixed alternation of blocks, D1 T1 D2 T2 ... Dq Tq:

* every D block holds ``clean_group_size`` clean samples whose labels
  cycle 0, 1, ..., n_classes-1 repeatedly (so the block size must divide
  evenly by the class count);
* every T block holds ``trigger_group_size / 2`` adjacent pairs, each a
  clean sample immediately followed by its own triggered copy (so the
  block size must be even, the clean member's label must differ from the
  trigger target label, and the trigger member carries the target label).

Which concrete sample lands in which slot is a seeded draw; the block
structure itself is fixed. ``validate_schedule`` re-derives every
structural rule from scratch and reports all violations, so generated
schedules can be checked by a route independent of the builder.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .data import ImageSample


class ScheduleConfigError(ValueError):
    """Group sizes cannot form a legal schedule."""


class PoolExhaustedError(ValueError):
    """The clean pool cannot fill the D blocks for some class."""


class PairCountError(ValueError):
    """Supplied trigger pairs do not match the schedule's T-block capacity."""


@dataclass(frozen=True)
class ScheduleConfig:
    n_classes: int
    clean_group_size: int
    trigger_group_size: int
    n_groups: int

    def __post_init__(self):
        if self.n_classes < 2:
            raise ScheduleConfigError("need at least two classes")
        if self.n_groups < 1:
            raise ScheduleConfigError("need at least one group")
        if self.clean_group_size < 0 or self.trigger_group_size < 0:
            raise ScheduleConfigError("group sizes must be non-negative")
        if self.clean_group_size % self.n_classes != 0:
            raise ScheduleConfigError(
                f"clean group size {self.clean_group_size} is not a multiple "
                f"of the class count {self.n_classes}"
            )
        if self.trigger_group_size % 2 != 0:
            raise ScheduleConfigError(
                f"trigger group size {self.trigger_group_size} is odd; "
                "trigger samples must come in (clean, trigger) pairs"
            )

    @property
    def group_size(self) -> int:
        return self.clean_group_size + self.trigger_group_size

    @property
    def total(self) -> int:
        return self.n_groups * self.group_size

    @property
    def n_pairs(self) -> int:
        return self.n_groups * self.trigger_group_size // 2

    def content_hash(self) -> int:
        text = (
            f"{self.n_classes},{self.clean_group_size},"
            f"{self.trigger_group_size},{self.n_groups}"
        )
        digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
        return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class ScheduleEntry:
    position: int
    block: str  # e.g. "D3" or "T3"
    sample: ImageSample


@dataclass(frozen=True)
class ScheduleViolation:
    kind: str
    position: int | None
    message: str


def derive_config(
    total: int, n_trigger_samples: int, n_classes: int, trigger_group_size: int
) -> ScheduleConfig:
    """Solve for the group count and clean-group size from the sequence
    length and the trigger budget."""
    if trigger_group_size <= 0 or trigger_group_size % 2 != 0:
        raise ScheduleConfigError(
            f"trigger group size must be a positive even number, "
            f"got {trigger_group_size}"
        )
    per_group = trigger_group_size // 2
    if n_trigger_samples <= 0 or n_trigger_samples % per_group != 0:
        raise ScheduleConfigError(
            f"{n_trigger_samples} trigger samples cannot be split into groups "
            f"of {per_group} pair(s)"
        )
    n_groups = n_trigger_samples // per_group
    if total % n_groups != 0:
        raise ScheduleConfigError(
            f"sequence length {total} is not divisible by {n_groups} groups"
        )
    clean_group_size = total // n_groups - trigger_group_size
    if clean_group_size <= 0:
        raise ScheduleConfigError(
            f"no room for clean samples: {total} total across {n_groups} groups "
            f"of {trigger_group_size} trigger slots"
        )
    return ScheduleConfig(n_classes, clean_group_size, trigger_group_size, n_groups)


def build_schedule(
    clean_pool, trigger_pairs, config: ScheduleConfig, seed: int
) -> list[ScheduleEntry]:
    """Fill the block structure with a seeded assignment of samples."""
    per_class = config.n_groups * config.clean_group_size // config.n_classes
    rng = np.random.default_rng(seed)

    by_class: dict[int, list[ImageSample]] = {c: [] for c in range(config.n_classes)}
    for s in clean_pool:
        if s.provenance != "clean":
            raise ValueError("clean pool contains a non-clean sample")
        if s.label in by_class:
            by_class[s.label].append(s)
    queues = {}
    for cls in range(config.n_classes):
        have = by_class[cls]
        if len(have) < per_class:
            raise PoolExhaustedError(
                f"class {cls}: D blocks need {per_class} clean samples, "
                f"pool has {len(have)}"
            )
        order = rng.permutation(len(have))
        queues[cls] = [have[i] for i in order[:per_class]]

    trigger_pairs = list(trigger_pairs)
    if len(trigger_pairs) != config.n_pairs:
        raise PairCountError(
            f"schedule holds {config.n_pairs} trigger pairs, got {len(trigger_pairs)}"
        )
    pair_order = rng.permutation(len(trigger_pairs)) if trigger_pairs else []
    pair_queue = [trigger_pairs[i] for i in pair_order]

    entries: list[ScheduleEntry] = []
    taken = {cls: 0 for cls in queues}
    pairs_used = 0
    for g in range(1, config.n_groups + 1):
        for i in range(config.clean_group_size):
            cls = i % config.n_classes
            sample = queues[cls][taken[cls]]
            taken[cls] += 1
            entries.append(ScheduleEntry(len(entries), f"D{g}", sample))
        for _ in range(config.trigger_group_size // 2):
            clean, trigger = pair_queue[pairs_used]
            pairs_used += 1
            entries.append(ScheduleEntry(len(entries), f"T{g}", clean))
            entries.append(ScheduleEntry(len(entries), f"T{g}", trigger))
    return entries


def validate_schedule(
    entries, config: ScheduleConfig, target_label: int
) -> list[ScheduleViolation]:
    """Re-derive every structural rule and report all violations found.

    Independent of build_schedule: walks the entry list against the
    block layout implied by the config alone.
    """
    violations: list[ScheduleViolation] = []

    def bad(kind, position, message):
        violations.append(ScheduleViolation(kind, position, message))

    entries = list(entries)
    if len(entries) != config.total:
        bad(
            "length",
            None,
            f"schedule length {len(entries)} != {config.total} from the config",
        )

    group_size = config.group_size
    seen: dict[tuple[int, str], int] = {}
    for pos, entry in enumerate(entries):
        if entry.position != pos:
            bad("position", pos, f"entry records position {entry.position}")
        group = pos // group_size + 1
        offset = pos % group_size
        in_clean_block = offset < config.clean_group_size
        expected_block = f"D{group}" if in_clean_block else f"T{group}"
        if entry.block != expected_block:
            bad(
                "block-order",
                pos,
                f"expected block {expected_block}, entry is tagged {entry.block}",
            )
        sample = entry.sample
        key = (sample.source_index, sample.provenance)
        if key in seen:
            bad(
                "duplicate",
                pos,
                f"sample {key} already appeared at position {seen[key]}",
            )
        else:
            seen[key] = pos

        if in_clean_block:
            if sample.provenance != "clean":
                bad("block-content", pos, "non-clean sample inside a D block")
            expected_label = offset % config.n_classes
            if sample.label != expected_label:
                bad(
                    "label-cycle",
                    pos,
                    f"D block labels must cycle; expected {expected_label}, "
                    f"got {sample.label}",
                )
        else:
            pair_offset = (offset - config.clean_group_size) % 2
            if pair_offset == 0:
                if sample.provenance != "clean":
                    bad("pair-order", pos, "pair must start with the clean sample")
                elif sample.label == target_label:
                    bad(
                        "pair-label",
                        pos,
                        f"pair clean sample carries the trigger target label "
                        f"{target_label}",
                    )
            else:
                if sample.provenance != "trigger":
                    bad("pair-order", pos, "pair must end with the trigger sample")
                else:
                    if sample.label != target_label:
                        bad(
                            "pair-label",
                            pos,
                            f"trigger sample labeled {sample.label}, "
                            f"expected {target_label}",
                        )
                    prev = entries[pos - 1].sample if pos > 0 else None
                    if (
                        prev is not None
                        and prev.provenance == "clean"
                        and prev.source_index != sample.source_index
                    ):
                        bad(
                            "pair-source",
                            pos,
                            "trigger does not originate from its paired clean sample",
                        )
    return violations


def schedule_to_text(entries) -> str:
    """Audit export: one line per entry."""
    lines = ["position\tblock\tsource_index\tlabel\tprovenance"]
    for e in entries:
        lines.append(
            f"{e.position}\t{e.block}\t{e.sample.source_index}"
            f"\t{e.sample.label}\t{e.sample.provenance}"
        )
    return "\n".join(lines) + "\n"
