"""Schedule construction and the independent structural validator."""

from dataclasses import replace

import numpy as np
import pytest

from qnnmark.data import ImageSample, TriggerSpec, apply_trigger
from qnnmark.schedule import (
    PairCountError,
    PoolExhaustedError,
    ScheduleConfig,
    ScheduleConfigError,
    ScheduleEntry,
    build_schedule,
    derive_config,
    schedule_to_text,
    validate_schedule,
)

TARGET = 1


def sample(label, source_index, provenance="clean"):
    return ImageSample(
        pixels=np.zeros(784, dtype=np.uint8),
        label=label,
        provenance=provenance,
        source_index=source_index,
    )


def make_inputs(n_per_class=100, n_pairs=10, n_classes=2):
    clean, idx = [], 0
    for label in range(n_classes):
        for _ in range(n_per_class):
            clean.append(sample(label, idx))
            idx += 1
    pairs = []
    spec = TriggerSpec()
    for _ in range(n_pairs):
        c = sample(0, idx)
        idx += 1
        pairs.append((c, apply_trigger(c, spec)))
    return clean, pairs


class TestDeriveConfig:
    def test_default_experiment_shape(self):
        cfg = derive_config(200, 10, 2, 2)
        assert cfg == ScheduleConfig(2, 18, 2, 10)
        assert cfg.total == 200
        assert cfg.n_pairs == 10

    def test_non_integer_split_rejected(self):
        with pytest.raises(ScheduleConfigError):
            derive_config(210, 20, 2, 2)

    def test_enlarged_trigger_budget(self):
        assert derive_config(200, 20, 2, 2) == ScheduleConfig(2, 8, 2, 20)

    def test_odd_pair_block_rejected(self):
        with pytest.raises(ScheduleConfigError):
            derive_config(200, 10, 2, 3)

    def test_clean_size_must_divide_by_classes(self):
        # q=5, group 40, clean 36, classes 5 -> 36 % 5 != 0
        with pytest.raises(ScheduleConfigError):
            derive_config(200, 10, 5, 4)


class TestScheduleConfig:
    def test_divisibility_invariants(self):
        with pytest.raises(ScheduleConfigError):
            ScheduleConfig(2, 17, 2, 10)
        with pytest.raises(ScheduleConfigError):
            ScheduleConfig(2, 18, 3, 10)
        with pytest.raises(ScheduleConfigError):
            ScheduleConfig(2, 18, 2, 0)

    def test_zero_trigger_block_is_legal(self):
        cfg = ScheduleConfig(2, 200, 0, 1)
        assert cfg.total == 200 and cfg.n_pairs == 0

    def test_content_hash_distinguishes_configs(self):
        a = ScheduleConfig(2, 18, 2, 10).content_hash()
        b = ScheduleConfig(2, 8, 2, 20).content_hash()
        assert a != b
        assert a == ScheduleConfig(2, 18, 2, 10).content_hash()


class TestBuildSchedule:
    def test_default_structure(self):
        clean, pairs = make_inputs()
        cfg = derive_config(200, 10, 2, 2)
        entries = build_schedule(clean, pairs, cfg, seed=0)
        assert len(entries) == 200
        assert validate_schedule(entries, cfg, TARGET) == []
        # independent structural walk, separate from the validator
        for g in range(10):
            block = entries[g * 20 : (g + 1) * 20]
            labels = [e.sample.label for e in block[:18]]
            assert labels == [0, 1] * 9
            assert all(e.block == f"D{g + 1}" for e in block[:18])
            clean_e, trig_e = block[18], block[19]
            assert clean_e.block == f"T{g + 1}" and trig_e.block == f"T{g + 1}"
            assert clean_e.sample.provenance == "clean"
            assert trig_e.sample.provenance == "trigger"
            assert clean_e.sample.source_index == trig_e.sample.source_index

    def test_minimal_instance(self):
        clean, pairs = make_inputs(n_per_class=1, n_pairs=1)
        cfg = ScheduleConfig(2, 2, 2, 1)
        entries = build_schedule(clean, pairs, cfg, seed=1)
        assert len(entries) == 4
        assert validate_schedule(entries, cfg, TARGET) == []

    def test_pool_exhaustion_names_the_class(self):
        clean, pairs = make_inputs(n_per_class=100, n_pairs=10)
        clean = [s for s in clean if not (s.label == 1 and s.source_index >= 189)]
        cfg = derive_config(200, 10, 2, 2)
        with pytest.raises(PoolExhaustedError, match="class 1"):
            build_schedule(clean, pairs, cfg, seed=0)

    def test_pair_count_mismatch(self):
        clean, pairs = make_inputs(n_pairs=9)
        cfg = derive_config(200, 10, 2, 2)
        with pytest.raises(PairCountError):
            build_schedule(clean, pairs, cfg, seed=0)

    def test_same_seed_same_schedule(self):
        clean, pairs = make_inputs()
        cfg = derive_config(200, 10, 2, 2)
        a = build_schedule(clean, pairs, cfg, seed=7)
        b = build_schedule(clean, pairs, cfg, seed=7)
        assert [(e.sample.source_index, e.sample.provenance) for e in a] == [
            (e.sample.source_index, e.sample.provenance) for e in b
        ]
        c = build_schedule(clean, pairs, cfg, seed=8)
        assert [(e.sample.source_index, e.sample.provenance) for e in a] != [
            (e.sample.source_index, e.sample.provenance) for e in c
        ]

    def test_fuzzed_builds_always_validate(self):
        rng = np.random.default_rng(123)
        for _ in range(120):
            n_classes = int(rng.integers(2, 5))
            per_group = int(rng.integers(1, 4)) * n_classes
            pair_block = 2 * int(rng.integers(0, 3))
            groups = int(rng.integers(1, 7))
            cfg = ScheduleConfig(n_classes, per_group, pair_block, groups)
            clean, idx = [], 0
            per_class_need = groups * per_group // n_classes
            for label in range(n_classes):
                for _ in range(per_class_need + int(rng.integers(0, 4))):
                    clean.append(sample(label, idx))
                    idx += 1
            pairs = []
            for _ in range(cfg.n_pairs):
                c = sample(0, idx)
                idx += 1
                pairs.append(
                    (c, replace(c, label=TARGET, provenance="trigger"))
                )
            entries = build_schedule(clean, pairs, cfg, seed=int(rng.integers(1 << 31)))
            assert validate_schedule(entries, cfg, TARGET) == []


def mutate(entries, position, **changes):
    out = list(entries)
    entry = out[position]
    out[position] = replace(entry, sample=replace(entry.sample, **changes))
    return out


class TestValidatorDetectsMutants:
    @pytest.fixture()
    def built(self):
        clean, pairs = make_inputs()
        cfg = derive_config(200, 10, 2, 2)
        return build_schedule(clean, pairs, cfg, seed=3), cfg

    def violation_kinds(self, entries, cfg):
        return {v.kind for v in validate_schedule(entries, cfg, TARGET)}

    def test_broken_label_cycle(self, built):
        entries, cfg = built
        mutated = mutate(entries, 0, label=1)  # D1 must start with label 0
        assert "label-cycle" in self.violation_kinds(mutated, cfg)

    def test_unpaired_trigger(self, built):
        entries, cfg = built
        # replace the pair's clean member with a second trigger
        mutated = mutate(entries, 18, provenance="trigger", label=TARGET)
        assert "pair-order" in self.violation_kinds(mutated, cfg)

    def test_wrong_pair_order(self, built):
        entries, cfg = built
        out = list(entries)
        a, b = out[18], out[19]
        out[18] = replace(a, sample=b.sample)
        out[19] = replace(b, sample=a.sample)
        assert "pair-order" in self.violation_kinds(out, cfg)

    def test_duplicate_sample(self, built):
        entries, cfg = built
        out = list(entries)
        out[2] = replace(out[2], sample=out[0].sample)
        assert "duplicate" in self.violation_kinds(out, cfg)

    def test_wrong_block_order(self, built):
        entries, cfg = built
        out = entries[18:20] + entries[0:18] + entries[20:]
        out = [replace(e, position=i) for i, e in enumerate(out)]
        assert "block-order" in self.violation_kinds(out, cfg)

    def test_pair_clean_carrying_target_label(self, built):
        entries, cfg = built
        mutated = mutate(entries, 18, label=TARGET)
        assert "pair-label" in self.violation_kinds(mutated, cfg)

    def test_all_violations_reported_not_just_first(self, built):
        entries, cfg = built
        mutated = mutate(mutate(entries, 0, label=1), 18, label=TARGET)
        kinds = self.violation_kinds(mutated, cfg)
        assert {"label-cycle", "pair-label"} <= kinds


class TestExport:
    def test_audit_text_format(self):
        clean, pairs = make_inputs(n_per_class=1, n_pairs=1)
        entries = build_schedule(clean, pairs, ScheduleConfig(2, 2, 2, 1), seed=0)
        text = schedule_to_text(entries)
        lines = text.strip().splitlines()
        assert lines[0] == "position\tblock\tsource_index\tlabel\tprovenance"
        assert len(lines) == 5
        fields = lines[1].split("\t")
        assert fields[0] == "0" and fields[1] == "D1"
        assert lines[-1].split("\t")[4] == "trigger"
