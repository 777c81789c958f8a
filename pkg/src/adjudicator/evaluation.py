"""Benchmark harness: labeled (scene, action) pairs in, class-wise recall
and misclassification breakdown out."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .engines import AdjudicationEpisode, EngineKind, SceneQuery, run_engine
from .errors import SchemaError
from .graphs import DrivingAction, OutcomeLabel, parse_action

LABELS = (OutcomeLabel.UNSAFE, OutcomeLabel.SAFE, OutcomeLabel.REASONABLE)


@dataclass(frozen=True)
class BenchmarkRecord:
    record_id: str
    description: str
    action: DrivingAction
    human_label: OutcomeLabel
    annotator_id: str = ""
    image_ref: Optional[str] = None
    agent_types: tuple[str, ...] = ()
    relative_positions: tuple[str, ...] = ()
    map_note: str = ""

    def __post_init__(self):
        if not self.action.is_canonical:
            raise ValueError("benchmark actions must be one of the 10 canonical actions")

    def to_query(self) -> SceneQuery:
        return SceneQuery(
            description=self.description,
            candidate_action=self.action,
            image_ref=self.image_ref,
            agent_types=self.agent_types,
            relative_positions=self.relative_positions,
            map_note=self.map_note,
        )

    def to_record(self) -> dict:
        return {
            "record_id": self.record_id,
            "description": self.description,
            "action": self.action.rendering,
            "human_label": self.human_label.value,
            "annotator_id": self.annotator_id,
            "image_ref": self.image_ref,
            "agent_types": list(self.agent_types),
            "relative_positions": list(self.relative_positions),
            "map_note": self.map_note,
        }


def benchmark_record_from_dict(raw: dict) -> BenchmarkRecord:
    try:
        action = parse_action(raw["action"])
        if not action.is_canonical:
            raise SchemaError(f"non-canonical action {raw['action']!r}", path="action")
        label = OutcomeLabel(str(raw["human_label"]).upper())
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}", path=str(exc))
    except ValueError as exc:
        raise SchemaError(f"invalid benchmark record: {exc}")
    return BenchmarkRecord(
        record_id=str(raw["record_id"]),
        description=str(raw["description"]),
        action=action,
        human_label=label,
        annotator_id=str(raw.get("annotator_id", "")),
        image_ref=raw.get("image_ref"),
        agent_types=tuple(raw.get("agent_types", ())),
        relative_positions=tuple(raw.get("relative_positions", ())),
        map_note=str(raw.get("map_note", "")),
    )


def load_benchmark(path) -> list[BenchmarkRecord]:
    """Newline-delimited benchmark records; duplicates rejected."""
    records: list[BenchmarkRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = benchmark_record_from_dict(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}: invalid JSON: {exc}")
            except SchemaError as exc:
                raise SchemaError(f"line {lineno}: {exc}")
            if record.record_id in seen:
                raise SchemaError(f"line {lineno}: duplicate record_id {record.record_id}")
            seen.add(record.record_id)
            records.append(record)
    return records


def class_counts(records: list[BenchmarkRecord]) -> dict:
    counts = {label: 0 for label in LABELS}
    for record in records:
        counts[record.human_label] += 1
    return counts


@dataclass
class EvaluationReport:
    confusion: dict  # (true, predicted) -> count
    n_records: int
    engine_fingerprint: str = ""
    failures: list[str] = field(default_factory=list)  # record_ids with engine errors

    def row_sum(self, label: OutcomeLabel) -> int:
        return sum(self.confusion.get((label, p), 0) for p in LABELS)

    @property
    def per_class_recall(self) -> dict:
        """Recall per true class; None (undefined) for empty classes."""
        recalls = {}
        for label in LABELS:
            total = self.row_sum(label)
            recalls[label] = (self.confusion.get((label, label), 0) / total) if total else None
        return recalls

    @property
    def misclassification_rates(self) -> dict:
        """(true, pred) -> fraction of the true class, off-diagonal only."""
        rates = {}
        for true in LABELS:
            total = self.row_sum(true)
            for pred in LABELS:
                if true is pred or not total:
                    continue
                rates[(true, pred)] = self.confusion.get((true, pred), 0) / total
        return rates

    def to_record(self) -> dict:
        return {
            "n_records": self.n_records,
            "engine_fingerprint": self.engine_fingerprint,
            "confusion": {f"{t.value}->{p.value}": c for (t, p), c in self.confusion.items()},
            "per_class_recall": {
                label.value: recall for label, recall in self.per_class_recall.items()
            },
            "misclassification_rates": {
                f"{t.value}->{p.value}": r for (t, p), r in self.misclassification_rates.items()
            },
            "failures": self.failures,
        }

    def render_table(self) -> str:
        lines = ["true\\pred  " + "  ".join(f"{p.value:>10}" for p in LABELS)]
        for true in LABELS:
            cells = "  ".join(f"{self.confusion.get((true, p), 0):>10}" for p in LABELS)
            lines.append(f"{true.value:>10} {cells}")
        lines.append("")
        for label, recall in self.per_class_recall.items():
            rendered = "undefined" if recall is None else f"{recall:.1%}"
            lines.append(f"recall {label.value}: {rendered}")
        if self.failures:
            lines.append(f"failures: {len(self.failures)}")
        return "\n".join(lines)


def run_benchmark(
    records: list[BenchmarkRecord],
    predict: Callable[[BenchmarkRecord], AdjudicationEpisode],
    engine_fingerprint: str = "",
    episodes_dir=None,
) -> EvaluationReport:
    """One episode per record; failed episodes are reported, not counted."""
    confusion: dict = {}
    failures: list[str] = []
    for record in records:
        try:
            episode = predict(record)
        except Exception:
            failures.append(record.record_id)
            continue
        if episodes_dir is not None:
            episode.save(Path(episodes_dir) / f"{record.record_id}.json")
        key = (record.human_label, episode.verdict)
        confusion[key] = confusion.get(key, 0) + 1
    return EvaluationReport(
        confusion=confusion,
        n_records=len(records),
        engine_fingerprint=engine_fingerprint,
        failures=failures,
    )


def make_predictor(
    kind: EngineKind,
    provider_factory,
    index=None,
    k: int = 3,
    weights=None,
    max_iterations: int = 3,
    extract_config=None,
    embed_config=None,
) -> Callable[[BenchmarkRecord], AdjudicationEpisode]:
    """Adapter from a benchmark record to an engine run.

    provider_factory is called once per record so scripted providers can
    be replayed per episode.
    """
    from .embedding import EmbeddingProviderConfig
    from .ingestion import ExtractionProviderConfig

    extract_config = extract_config or ExtractionProviderConfig()
    embed_config = embed_config or EmbeddingProviderConfig()

    def predict(record: BenchmarkRecord) -> AdjudicationEpisode:
        return run_engine(
            kind,
            record.to_query(),
            provider_factory(),
            index=index,
            k=k,
            weights=weights,
            max_iterations=max_iterations,
            extract_config=extract_config,
            embed_config=embed_config,
        )

    return predict


@dataclass
class ReportDelta:
    recall_delta: dict  # label -> signed difference (None if either undefined)
    confusion_delta: dict  # (true, pred) -> signed count difference


def compare_reports(a: EvaluationReport, b: EvaluationReport) -> ReportDelta:
    """Signed b-minus-a deltas; reports must cover identical record sets."""
    if a.n_records != b.n_records:
        raise ValueError("reports cover different record sets")
    if not a.failures and not b.failures:
        for label in LABELS:
            if a.row_sum(label) != b.row_sum(label):
                raise ValueError(f"reports disagree on {label.value} record counts")
    recall_a, recall_b = a.per_class_recall, b.per_class_recall
    recall_delta = {
        label: (None if recall_a[label] is None or recall_b[label] is None else recall_b[label] - recall_a[label])
        for label in LABELS
    }
    confusion_delta = {
        (t, p): b.confusion.get((t, p), 0) - a.confusion.get((t, p), 0)
        for t in LABELS
        for p in LABELS
    }
    return ReportDelta(recall_delta=recall_delta, confusion_delta=confusion_delta)


def save_report(report: EvaluationReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_record(), indent=2), encoding="utf-8")
