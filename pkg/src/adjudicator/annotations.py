"""Annotation task pool and append-only submission store.

Each task shows one scene; an annotator labels all ten canonical actions
in one submission, which expands into ten benchmark records.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import AdjudicatorError, SchemaError
from .evaluation import BenchmarkRecord
from .graphs import CANONICAL_ACTIONS, OutcomeLabel, parse_action


class DuplicateSubmissionError(AdjudicatorError):
    """The annotator already submitted this task."""


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    description: str
    image_url: Optional[str] = None
    agent_types: tuple[str, ...] = ()
    relative_positions: tuple[str, ...] = ()
    map_note: str = ""

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "description": self.description,
            "image_url": self.image_url,
            "agent_types": list(self.agent_types),
            "relative_positions": list(self.relative_positions),
            "map_note": self.map_note,
            "actions": list(CANONICAL_ACTIONS),
        }


@dataclass(frozen=True)
class AnnotationSubmission:
    task_id: str
    annotator_id: str
    labels: dict  # canonical action phrase -> OutcomeLabel
    submitted_at: str = ""

    def validate(self) -> None:
        missing = [a for a in CANONICAL_ACTIONS if a not in self.labels]
        if missing:
            raise SchemaError(f"submission missing actions: {missing}", path="labels")
        extra = [a for a in self.labels if a not in CANONICAL_ACTIONS]
        if extra:
            raise SchemaError(f"submission has unknown actions: {extra}", path="labels")


def submission_from_dict(raw: dict) -> AnnotationSubmission:
    try:
        labels = {
            str(action): OutcomeLabel(str(label).upper())
            for action, label in raw["labels"].items()
        }
        submission = AnnotationSubmission(
            task_id=str(raw["task_id"]),
            annotator_id=str(raw["annotator_id"]),
            labels=labels,
            submitted_at=str(raw.get("submitted_at", "")),
        )
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}", path=str(exc))
    except ValueError as exc:
        raise SchemaError(f"invalid submission: {exc}")
    submission.validate()
    return submission


class AnnotationStore:
    """Tasks from a JSONL pool file; submissions and expanded benchmark
    records appended to sibling files. Writes are serialized."""

    def __init__(self, tasks_path, out_dir=None):
        self.tasks_path = Path(tasks_path)
        out_dir = Path(out_dir) if out_dir else self.tasks_path.parent
        self.submissions_path = out_dir / "submissions.jsonl"
        self.records_path = out_dir / "annotation_records.jsonl"
        self._lock = threading.Lock()
        self.tasks = self._load_tasks()

    def _load_tasks(self) -> list[AnnotationTask]:
        tasks = []
        with open(self.tasks_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                raw = json.loads(line)
                tasks.append(
                    AnnotationTask(
                        task_id=str(raw["task_id"]),
                        description=str(raw["description"]),
                        image_url=raw.get("image_url"),
                        agent_types=tuple(raw.get("agent_types", ())),
                        relative_positions=tuple(raw.get("relative_positions", ())),
                        map_note=str(raw.get("map_note", "")),
                    )
                )
        return sorted(tasks, key=lambda t: t.task_id)

    def _submitted_pairs(self) -> set[tuple[str, str]]:
        pairs = set()
        if self.submissions_path.exists():
            with open(self.submissions_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        raw = json.loads(line)
                        pairs.add((str(raw["task_id"]), str(raw["annotator_id"])))
        return pairs

    def task(self, task_id: str) -> Optional[AnnotationTask]:
        for task in self.tasks:
            if task.task_id == task_id:
                return task
        return None

    def next_task(self, annotator_id: str) -> Optional[AnnotationTask]:
        """Lowest-id task this annotator has not submitted; None when done."""
        done = self._submitted_pairs()
        for task in self.tasks:
            if (task.task_id, annotator_id) not in done:
                return task
        return None

    def submit(self, submission: AnnotationSubmission) -> list[BenchmarkRecord]:
        """Persist the submission and expand it into ten benchmark records.

        The ten record lines are appended in a single buffered write so a
        crash leaves either zero or ten of them.
        """
        submission.validate()
        task = self.task(submission.task_id)
        if task is None:
            raise SchemaError(f"unknown task {submission.task_id!r}", path="task_id")
        with self._lock:
            if (submission.task_id, submission.annotator_id) in self._submitted_pairs():
                raise DuplicateSubmissionError(
                    f"annotator {submission.annotator_id} already submitted task {submission.task_id}"
                )
            submitted_at = submission.submitted_at or time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
            records = []
            for action_phrase in CANONICAL_ACTIONS:
                records.append(
                    BenchmarkRecord(
                        record_id=f"{submission.task_id}:{submission.annotator_id}:{action_phrase.replace(' ', '_')}",
                        description=task.description,
                        action=parse_action(action_phrase),
                        human_label=submission.labels[action_phrase],
                        annotator_id=submission.annotator_id,
                        image_ref=task.image_url,
                        agent_types=task.agent_types,
                        relative_positions=task.relative_positions,
                        map_note=task.map_note,
                    )
                )
            buffer = "".join(json.dumps(r.to_record(), ensure_ascii=False) + "\n" for r in records)
            with open(self.records_path, "a", encoding="utf-8") as fh:
                fh.write(buffer)
            with open(self.submissions_path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "task_id": submission.task_id,
                            "annotator_id": submission.annotator_id,
                            "labels": {a: l.value for a, l in submission.labels.items()},
                            "submitted_at": submitted_at,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
            return records

    def compact(self) -> int:
        """Drop record lines whose submission marker never landed; returns
        the number of lines kept."""
        valid = self._submitted_pairs()
        kept = []
        if self.records_path.exists():
            with open(self.records_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    raw = json.loads(line)
                    task_id, annotator_id, _ = str(raw["record_id"]).split(":", 2)
                    if (task_id, annotator_id) in valid:
                        kept.append(line)
            with open(self.records_path, "w", encoding="utf-8") as fh:
                fh.writelines(kept)
        return len(kept)
