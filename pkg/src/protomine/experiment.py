"""End-to-end training loop tying the bank, miner, assigner, and probe together.

Each iteration runs four stages:

1. source: sample a labeled source batch, fold every class's matched
   features into the bank, refresh the novel slot from the base rows.
   A shadow bank receives only these stage-1 updates and feeds the
   nearest-prototype baseline.
2. mining: score the source batch's unlabeled pool, select the top-k
   candidates, train the probe on them under the unified novel label
   with the small novel loss weight, and blend the novel memory toward
   them. Skipped when the pool holds fewer than k entries.
3. adaptation: sample an unlabeled target batch, keep its foreground by
   score, assign labels from the bank's auxiliary pairs, train the probe
   on the assignments with the adaptive loss weight, and blend the
   prototypes toward their assigned features. Target truth labels are
   never read here.
4. evaluation (every ``eval_every`` iterations and at the end): draw a
   held-out target batch from a disjoint seed stream and score probe
   predictions and stage-3 assignments against its hidden labels.

Reported rows use the assignment accuracy on base-truth eval foreground
as ``base_accuracy``; novel recall, wilderness impact, and the open-set
error count come from the probe's predictions. Selection precision and
recall grade the most recent stage-2 selection against its own pool's
hidden labels.

Sub-seeds are split from the master seed by a fixed, published rule (see
``derive_seed``), so a run is bitwise reproducible end to end.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .assignment import (
    DEFAULT_FG_THRESHOLD,
    build_assignment_scores,
    filter_foreground,
    update_prototypes_from_target,
)
from .bank import MemoryBank, init_bank, refresh_novel_from_base, snapshot, update_base_class
from .errors import InvalidConfigError, UndefinedMetricError
from .metrics import MetricReport, evaluate, selection_metrics
from .probe import ProbeClassifier, batch_loss, init_probe, predict_labels, sgd_step
from .selection import (
    DEFAULT_GAMMA,
    DEFAULT_TOP_K,
    build_candidate_scores,
    select_topk,
    update_novel_memory,
)
from .simulator import SOURCE, TARGET, DomainSpec, LabeledBatch, make_spec, sample_batch

DEFAULT_MOMENTUM = 0.01
DEFAULT_LOSS_WEIGHT_NOVEL = 1e-4
DEFAULT_LOSS_WEIGHT_ADAPTIVE = 1e-1

CSV_HEADER = ("iter,base_accuracy,novel_recall,wilderness_impact,aose,"
              "selection_precision,selection_recall,loss_nc,loss_ac")


@dataclass(frozen=True)
class SimulatorParams:
    """Constructor arguments for the benchmark geometry."""

    num_base: int = 5
    num_novel: int = 3
    dim: int = 32
    mean_radius: float = 10.0
    class_spread: float = 1.0
    background_spread: float = 15.0
    shift_magnitude: float = 2.0
    jitter_spread: float = 0.2


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; serializes field-for-field to JSON."""

    spec: SimulatorParams = field(default_factory=SimulatorParams)
    iterations: int = 200
    seed: int = 42
    source_foreground: int = 40
    source_background: int = 4
    target_foreground: int = 40
    target_background: int = 12
    eval_foreground: int = 64
    eval_background: int = 16
    eval_every: int = 20
    gamma: float = DEFAULT_GAMMA
    top_k: int = DEFAULT_TOP_K
    momentum: float = DEFAULT_MOMENTUM
    fg_threshold: float = DEFAULT_FG_THRESHOLD
    learning_rate: float = 0.02
    loss_weight_novel: float = DEFAULT_LOSS_WEIGHT_NOVEL
    loss_weight_adaptive: float = DEFAULT_LOSS_WEIGHT_ADAPTIVE


@dataclass(frozen=True)
class MetricRow:
    """One evaluation round, in the order of the CSV schema."""

    iteration: int
    base_accuracy: float | None
    novel_recall: float | None
    wilderness_impact: float | None
    aose: int
    selection_precision: float | None
    selection_recall: float | None
    loss_nc: float | None
    loss_ac: float | None


@dataclass
class ExperimentReport:
    """Rows plus the run's summary and final state."""

    rows: list[MetricRow]
    summary: dict
    final_bank: MemoryBank
    baseline_bank: MemoryBank
    probe: ProbeClassifier
    bank_snapshots: dict[int, bytes]


def derive_seed(master_seed: int, iteration: int, stage: str) -> int:
    """Fixed sub-seed split: first 8 bytes of blake2b over "master:iter:stage"."""
    digest = hashlib.blake2b(
        f"{master_seed}:{iteration}:{stage}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def config_to_json(config: ExperimentConfig) -> str:
    doc = dataclasses.asdict(config)
    return json.dumps(doc, indent=2, sort_keys=True)


def _check_field_types(obj) -> None:
    """Reject config values whose JSON type does not fit the field."""
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if f.type == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidConfigError(f"{f.name} must be an integer")
        elif f.type == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidConfigError(f"{f.name} must be a number")


def config_from_json(text: str) -> ExperimentConfig:
    """Parse a config document; unknown keys are an error, known keys override defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidConfigError("config must be a JSON object")

    top_fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(doc) - top_fields
    if unknown:
        raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")

    spec_doc = doc.pop("spec", {})
    if not isinstance(spec_doc, dict):
        raise InvalidConfigError("spec must be a JSON object")
    spec_fields = {f.name for f in dataclasses.fields(SimulatorParams)}
    unknown = set(spec_doc) - spec_fields
    if unknown:
        raise InvalidConfigError(f"unknown spec keys: {sorted(unknown)}")

    try:
        config = ExperimentConfig(spec=SimulatorParams(**spec_doc), **doc)
    except TypeError as exc:
        raise InvalidConfigError(f"bad config value: {exc}") from exc
    _check_field_types(config.spec)
    _check_field_types(config)
    return config


def build_spec(params: SimulatorParams, seed: int) -> DomainSpec:
    return make_spec(
        num_base=params.num_base,
        num_novel=params.num_novel,
        dim=params.dim,
        seed=seed,
        mean_radius=params.mean_radius,
        class_spread=params.class_spread,
        background_spread=params.background_spread,
        shift_magnitude=params.shift_magnitude,
        jitter_spread=params.jitter_spread,
    )


def compute_baseline(bank: MemoryBank, batch: LabeledBatch) -> float:
    """Nearest-base-prototype (L2) accuracy on the batch's base-truth entries."""
    c = bank.num_base_classes
    mask = (batch.true_labels >= 1) & (batch.true_labels <= c)
    if not mask.any():
        raise UndefinedMetricError("no base-truth entries to classify")
    feats = batch.features[mask]
    dist = np.linalg.norm(feats[:, None, :] - bank.base_prototypes[None, :, :], axis=2)
    preds = dist.argmin(axis=1) + 1
    return float(np.mean(preds == batch.true_labels[mask]))


def _assignment_accuracy(bank: MemoryBank, batch: LabeledBatch, threshold: float) -> float | None:
    """Stage-3 assignment accuracy on the batch's base-truth foreground."""
    kept, kept_idx = filter_foreground(batch.features, batch.fg_scores, threshold)
    if kept.shape[0] == 0:
        return None
    truths = batch.true_labels[kept_idx]
    assigned = build_assignment_scores(kept, bank).assigned_labels
    mask = (truths >= 1) & (truths <= bank.num_base_classes)
    if not mask.any():
        return None
    return float(np.mean(assigned[mask] == truths[mask]))


def run_experiment(config: ExperimentConfig, snapshot_every: int = 0) -> ExperimentReport:
    """Run the full loop; deterministic in the config alone."""
    if config.iterations < 0:
        raise InvalidConfigError("iterations must be non-negative")
    if config.eval_every < 1:
        raise InvalidConfigError("eval_every must be at least 1")
    if min(config.source_foreground, config.source_background,
           config.target_foreground, config.target_background,
           config.eval_background) < 0 or config.eval_foreground < 1:
        raise InvalidConfigError("batch sizes must be non-negative (eval foreground >= 1)")
    if snapshot_every < 0:
        raise InvalidConfigError("snapshot_every must be non-negative")

    started = time.monotonic()
    p = config.spec
    spec = build_spec(p, derive_seed(config.seed, 0, "domain-spec"))
    bank = init_bank(p.num_base, p.dim, derive_seed(config.seed, 0, "bank-init"), config.momentum)
    baseline_bank = bank
    probe = init_probe(p.num_base + 1, p.dim, config.learning_rate)

    rows: list[MetricRow] = []
    baseline_by_iter: dict[int, float | None] = {}
    snapshots: dict[int, bytes] = {}
    last_selection: tuple[np.ndarray, np.ndarray] | None = None
    last_chance: float | None = None
    loss_nc: float | None = None
    loss_ac: float | None = None

    for t in range(1, config.iterations + 1):
        # stage 1: labeled source updates (shadow bank follows along)
        source = sample_batch(spec, SOURCE, config.source_foreground,
                              config.source_background, derive_seed(config.seed, t, "source-batch"))
        for c in range(1, p.num_base + 1):
            matched = source.features[source.true_labels == c]
            if matched.shape[0] == 0:
                continue
            cluster_seed = derive_seed(config.seed, t, f"cluster-{c}")
            bank = update_base_class(bank, c, matched, cluster_seed)
            baseline_bank = update_base_class(baseline_bank, c, matched, cluster_seed)
        bank = refresh_novel_from_base(bank)
        baseline_bank = refresh_novel_from_base(baseline_bank)

        # stage 2: mine novel candidates from the source unlabeled pool
        pool_mask = source.true_labels == 0
        pool = source.features[pool_mask]
        if pool.shape[0] >= config.top_k:
            scored = build_candidate_scores(pool, bank, config.gamma)
            chosen = select_topk(scored, pool, config.top_k)
            novel_index = p.num_base  # unified novel class, 0-based for the probe
            probe_labels = np.full(chosen.features.shape[0], novel_index, dtype=np.int64)
            loss_nc = batch_loss(probe, chosen.features, probe_labels, config.loss_weight_novel)
            probe = sgd_step(probe, chosen.features, probe_labels, config.loss_weight_novel)
            bank = update_novel_memory(bank, chosen)
            pool_truths = source.true_labels[pool_mask]
            last_selection = (chosen.indices, pool_truths)
            last_chance = float(np.mean(pool_truths >= p.num_base + 2))
        else:
            loss_nc = None

        # stage 3: assign labels to target foreground and adapt
        target = sample_batch(spec, TARGET, config.target_foreground,
                              config.target_background, derive_seed(config.seed, t, "target-batch"))
        kept, _ = filter_foreground(target.features, target.fg_scores, config.fg_threshold)
        if kept.shape[0]:
            assigned = build_assignment_scores(kept, bank).assigned_labels
            loss_ac = batch_loss(probe, kept, assigned - 1, config.loss_weight_adaptive)
            probe = sgd_step(probe, kept, assigned - 1, config.loss_weight_adaptive)
            bank = update_prototypes_from_target(bank, kept, assigned)
        else:
            loss_ac = None

        # stage 4: held-out evaluation
        if t % config.eval_every == 0 or t == config.iterations:
            held_out = sample_batch(spec, TARGET, config.eval_foreground,
                                    config.eval_background, derive_seed(config.seed, t, "eval-batch"))
            preds = predict_labels(probe, held_out.features) + 1
            sel_idx, sel_truths = last_selection if last_selection is not None else (None, None)
            report: MetricReport = evaluate(preds, held_out.true_labels, p.num_base,
                                            selected_indices=sel_idx, pool_truths=sel_truths)
            rows.append(MetricRow(
                iteration=t,
                base_accuracy=_assignment_accuracy(bank, held_out, config.fg_threshold),
                novel_recall=report.novel_recall,
                wilderness_impact=report.wilderness_impact,
                aose=report.aose,
                selection_precision=report.selection_precision,
                selection_recall=report.selection_recall,
                loss_nc=loss_nc,
                loss_ac=loss_ac,
            ))
            try:
                baseline_by_iter[t] = compute_baseline(baseline_bank, held_out)
            except UndefinedMetricError:
                baseline_by_iter[t] = None

        if snapshot_every and (t % snapshot_every == 0 or t == config.iterations):
            snapshots[t] = snapshot(bank)

    elapsed = time.monotonic() - started
    final = rows[-1] if rows else None
    summary = {
        "config": json.loads(config_to_json(config)),
        "iterations": config.iterations,
        "runtime_seconds": elapsed,
        "final": dataclasses.asdict(final) if final else None,
        "baseline_accuracy_by_iteration": baseline_by_iter,
        "final_baseline_accuracy": baseline_by_iter.get(config.iterations),
        "selection_chance_rate": last_chance,
    }
    return ExperimentReport(
        rows=rows,
        summary=summary,
        final_bank=bank,
        baseline_bank=baseline_bank,
        probe=probe,
        bank_snapshots=snapshots,
    )


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[MetricRow]) -> str:
    """Render metric rows under the fixed CSV schema; absent values are empty."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(_csv_cell(v) for v in (
            r.iteration, r.base_accuracy, r.novel_recall, r.wilderness_impact,
            r.aose, r.selection_precision, r.selection_recall, r.loss_nc, r.loss_ac)))
    return "\n".join(lines) + "\n"
