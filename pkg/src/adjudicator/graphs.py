"""Scene-action graph data model, vocabularies, validation, serialization.

A scene-action graph is a small typed-node summary of one driving scene:
what the ego vehicle saw, what it did, what else was around, and (for
crash-derived graphs) how it ended. All types here are immutable and all
operations are pure.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Optional

from .errors import LabelParseError, SchemaError, VersionError

SCHEMA_VERSION = "1"

COLLISION_MARKER = "COLLISION"
NO_COLLISION_MARKER = "NO COLLISION"


class NodeType(str, Enum):
    MAP = "MAP"
    EGO = "EGO"
    EGO_ACTION = "EGO_ACTION"
    OBSTACLES = "OBSTACLES"
    OBSTACLES_ACTION = "OBSTACLES_ACTION"
    OUTCOME = "OUTCOME"

    @classmethod
    def parse(cls, text: str) -> "NodeType":
        try:
            return cls(text)
        except ValueError:
            raise SchemaError(f"unknown node type {text!r}", path="node_type")


class DataClass(str, Enum):
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"


# The ten canonical high-level actions, in listing order.
CANONICAL_ACTIONS: tuple[str, ...] = (
    "MERGE LEFT",
    "TURN LEFT",
    "NUDGE LEFT",
    "STRAIGHT",
    "STOP",
    "ACCELERATE",
    "DECELERATE",
    "NUDGE RIGHT",
    "TURN RIGHT",
    "MERGE RIGHT",
)


def _normalize_phrase(text: str) -> str:
    return " ".join(text.split()).upper()


@dataclass(frozen=True)
class DrivingAction:
    """A candidate ego action: one of the ten canonical phrases, or free text.

    Free-text actions arise from counterfactual proposals ("temporary stop
    to assess surroundings") and are carried verbatim.
    """

    phrase: str
    is_canonical: bool

    @property
    def rendering(self) -> str:
        """Canonical upper-case phrase for enum actions, verbatim otherwise."""
        return self.phrase

    def normalized(self) -> str:
        """Case / whitespace-insensitive form used for repetition checks."""
        return _normalize_phrase(self.phrase)


def parse_action(text: str) -> DrivingAction:
    """Map text onto the canonical action set, falling back to free text."""
    if not text or not text.strip():
        raise ValueError("action text is empty")
    normalized = _normalize_phrase(text)
    if normalized in CANONICAL_ACTIONS:
        return DrivingAction(phrase=normalized, is_canonical=True)
    return DrivingAction(phrase=text.strip(), is_canonical=False)


def canonical_actions() -> tuple[DrivingAction, ...]:
    return tuple(DrivingAction(p, True) for p in CANONICAL_ACTIONS)


class OutcomeLabel(str, Enum):
    UNSAFE = "UNSAFE"
    SAFE = "SAFE"
    REASONABLE = "REASONABLE"


# UNSAFE listed first so the alternation cannot shadow it; \b keeps the
# SAFE inside UNSAFE from matching on its own.
_LABEL_RE = re.compile(r"\b(UNSAFE|SAFE|REASONABLE)\b", re.IGNORECASE)


def parse_outcome_label(text: str) -> OutcomeLabel:
    """Extract the final verdict token from free-form engine output.

    Engines emit justification prose (which may itself mention labels)
    followed by the label, so the last occurrence wins.
    """
    matches = _LABEL_RE.findall(text or "")
    if not matches:
        raise LabelParseError(f"no verdict label in engine response: {text!r}")
    return OutcomeLabel(matches[-1].upper())


@dataclass(frozen=True)
class GraphNode:
    node_id: str
    node_type: NodeType
    name: str
    description: str
    embedding: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class Provenance:
    dataset: str = ""
    record_id: str = ""
    pipeline_version: str = ""


@dataclass(frozen=True)
class SceneActionGraph:
    graph_id: str
    data_class: DataClass
    nodes: Mapping[NodeType, GraphNode]
    source: Provenance = field(default_factory=Provenance)
    media: Optional[str] = None

    def node(self, node_type: NodeType) -> Optional[GraphNode]:
        return self.nodes.get(node_type)

    def node_types(self) -> set[NodeType]:
        return set(self.nodes)

    def with_nodes(self, nodes: Mapping[NodeType, GraphNode]) -> "SceneActionGraph":
        return replace(self, nodes=dict(nodes))

    def without_node(self, node_type: NodeType) -> "SceneActionGraph":
        remaining = {t: n for t, n in self.nodes.items() if t != node_type}
        return replace(self, nodes=remaining)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SceneActionGraph):
            return NotImplemented
        return (
            self.graph_id == other.graph_id
            and self.data_class == other.data_class
            and dict(self.nodes) == dict(other.nodes)
            and self.source == other.source
            and self.media == other.media
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Violation:
    node_type: Optional[NodeType]
    reason: str


def validate_graph(graph: SceneActionGraph) -> list[Violation]:
    """Return every invariant violation; an empty list means valid."""
    violations: list[Violation] = []
    if not graph.graph_id:
        violations.append(Violation(None, "graph_id is empty"))
    for node_type, node in graph.nodes.items():
        if node.node_type != node_type:
            violations.append(
                Violation(node_type, f"node keyed under {node_type.value} has type {node.node_type.value}")
            )
        if not node.description.strip():
            violations.append(Violation(node_type, "description is empty"))
    for required in (NodeType.EGO, NodeType.EGO_ACTION):
        if required not in graph.nodes:
            violations.append(Violation(required, f"missing required {required.value} node"))
    outcome = graph.node(NodeType.OUTCOME)
    if outcome is not None:
        desc = outcome.description.strip()
        if not (desc.startswith(NO_COLLISION_MARKER) or desc.startswith(COLLISION_MARKER)):
            violations.append(
                Violation(NodeType.OUTCOME, "outcome description must begin with COLLISION or NO COLLISION")
            )
    if graph.data_class is DataClass.NEGATIVE and outcome is None:
        violations.append(Violation(NodeType.OUTCOME, "negative graph is missing its OUTCOME node"))
    return violations


def _node_to_record(node: GraphNode) -> dict:
    return {
        "node_id": node.node_id,
        "node_type": node.node_type.value,
        "name": node.name,
        "description": node.description,
        "embedding": list(node.embedding) if node.embedding is not None else None,
    }


def _require(record: Mapping, key: str, path: str):
    if key not in record:
        raise SchemaError(f"missing field {key!r}", path=f"{path}{key}")
    return record[key]


def serialize_graph(graph: SceneActionGraph) -> str:
    """One self-describing JSON record per graph; embeddings inline."""
    record = {
        "schema_version": SCHEMA_VERSION,
        "graph_id": graph.graph_id,
        "data_class": graph.data_class.value,
        "source": {
            "dataset": graph.source.dataset,
            "record_id": graph.source.record_id,
            "pipeline_version": graph.source.pipeline_version,
        },
        "media": graph.media,
        "nodes": [_node_to_record(graph.nodes[t]) for t in NodeType if t in graph.nodes],
    }
    return json.dumps(record, ensure_ascii=False)


def deserialize_graph(text: str) -> SceneActionGraph:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"record is not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise SchemaError("record is not an object")
    version = _require(record, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise VersionError(f"unsupported schema version {version!r}", path="schema_version")
    nodes: dict[NodeType, GraphNode] = {}
    raw_nodes = _require(record, "nodes", "")
    if not isinstance(raw_nodes, list):
        raise SchemaError("nodes must be a list", path="nodes")
    for i, raw in enumerate(raw_nodes):
        path = f"nodes[{i}]."
        node_type = NodeType.parse(str(_require(raw, "node_type", path)))
        if node_type in nodes:
            raise SchemaError(f"duplicate node type {node_type.value}", path=f"{path}node_type")
        embedding = raw.get("embedding")
        nodes[node_type] = GraphNode(
            node_id=str(_require(raw, "node_id", path)),
            node_type=node_type,
            name=str(_require(raw, "name", path)),
            description=str(_require(raw, "description", path)),
            embedding=tuple(float(x) for x in embedding) if embedding is not None else None,
        )
    raw_source = record.get("source") or {}
    try:
        data_class = DataClass(str(_require(record, "data_class", "")))
    except ValueError:
        raise SchemaError(f"unknown data_class {record['data_class']!r}", path="data_class")
    return SceneActionGraph(
        graph_id=str(_require(record, "graph_id", "")),
        data_class=data_class,
        nodes=nodes,
        source=Provenance(
            dataset=str(raw_source.get("dataset", "")),
            record_id=str(raw_source.get("record_id", "")),
            pipeline_version=str(raw_source.get("pipeline_version", "")),
        ),
        media=record.get("media"),
    )


def write_corpus(graphs: Iterable[SceneActionGraph], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for graph in graphs:
            fh.write(serialize_graph(graph) + "\n")


def read_corpus(path) -> list[SceneActionGraph]:
    graphs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                graphs.append(deserialize_graph(line))
    return graphs
