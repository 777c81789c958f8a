"""Turns raw crash narratives and driving-log captions into validated,
embedded scene-action graphs.

Two extraction providers: a remote LLM (prompt-based) and a deterministic
rule-based extractor so the whole pipeline runs offline and reproducibly.
The rule-based provider is a test fixture, not a parity claim.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional

import requests

from .embedding import EmbeddingProviderConfig, embed_text
from .errors import (
    DuplicateRecordError,
    ExtractionError,
    NormalizationError,
    ProviderError,
)
from .graphs import (
    COLLISION_MARKER,
    NO_COLLISION_MARKER,
    DataClass,
    GraphNode,
    NodeType,
    Provenance,
    SceneActionGraph,
    deserialize_graph,
    serialize_graph,
    validate_graph,
)

PIPELINE_VERSION = "1"


@dataclass(frozen=True)
class CrashNarrative:
    report_id: str
    raw_text: str
    source_agency: str = "NHTSA"

    def __post_init__(self):
        if not self.raw_text.strip():
            raise ValueError("crash narrative text is empty")


@dataclass(frozen=True)
class DrivingLogCapture:
    capture_id: str
    caption: str
    agent_types: tuple[str, ...] = ()
    relative_positions: tuple[str, ...] = ()
    map_note: str = ""
    image_ref: Optional[str] = None

    def __post_init__(self):
        if not self.caption.strip():
            raise ValueError("driving log caption is empty")
        if len(self.agent_types) != len(self.relative_positions):
            raise ValueError("agent_types and relative_positions must align")


class ExtractorKind(str, Enum):
    REMOTE = "REMOTE"
    DETERMINISTIC_RULE_BASED = "DETERMINISTIC_RULE_BASED"


@dataclass(frozen=True)
class ExtractionProviderConfig:
    provider_kind: ExtractorKind = ExtractorKind.DETERMINISTIC_RULE_BASED
    model_name: str = "rule-based"
    endpoint: str = ""
    prompt_version: str = "1"
    temperature: float = 0.0

    def __post_init__(self):
        if self.provider_kind is ExtractorKind.REMOTE and not self.endpoint:
            raise ValueError("remote extractor requires an endpoint")


# --- Style normalization -------------------------------------------------

_ENTITY_SUBSTITUTIONS = [
    (re.compile(r"\bV1\b"), "the ego vehicle"),
    (re.compile(r"\bV2\b"), "the other vehicle"),
    (re.compile(r"\bV3\b"), "a second nearby vehicle"),
    (re.compile(r"\bV4\b"), "a third nearby vehicle"),
]

_CARDINAL_SUBSTITUTIONS = [
    (re.compile(r"\beastbound\b", re.IGNORECASE), "along its lane"),
    (re.compile(r"\bwestbound\b", re.IGNORECASE), "along its lane"),
    (re.compile(r"\bnorthbound\b", re.IGNORECASE), "along its lane"),
    (re.compile(r"\bsouthbound\b", re.IGNORECASE), "along its lane"),
]

_DENY_LIST = re.compile(r"\b(V\d+|eastbound|westbound|northbound|southbound)\b", re.IGNORECASE)


def _rule_based_normalize(text: str) -> str:
    for pattern, repl in _ENTITY_SUBSTITUTIONS + _CARDINAL_SUBSTITUTIONS:
        text = pattern.sub(repl, text)
    return text


def normalize_narrative(narrative: CrashNarrative, config: ExtractionProviderConfig) -> str:
    """Rewrite a third-person templated narrative into ego-centric language."""
    if config.provider_kind is ExtractorKind.DETERMINISTIC_RULE_BASED:
        result = _rule_based_normalize(narrative.raw_text)
    else:
        result = _remote_transform(
            _NORMALIZE_PROMPT.format(narrative=narrative.raw_text), config
        )
    leftover = _DENY_LIST.search(result)
    if leftover:
        raise NormalizationError(
            f"deny-listed token {leftover.group(0)!r} survived normalization of {narrative.report_id}"
        )
    return result


_NORMALIZE_PROMPT = """Rewrite the following crash narrative from the ego vehicle's \
perspective. Replace entity tags like V1/V2 with relational terms (the ego vehicle, \
the other vehicle) and convert cardinal directions into relative spatial language. \
Preserve causal structure; drop technical formatting.

Narrative:
{narrative}
"""


# --- Graph extraction ----------------------------------------------------

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")

_EGO_RE = re.compile(r"\bego\b", re.IGNORECASE)
_ACTION_VERBS = re.compile(
    r"\b(merg\w*|turn\w*|nudg\w*|stopp?\w*|accelerat\w*|decelerat\w*|brak\w*|"
    r"proceed\w*|swerv\w*|veer\w*|slow\w*|continu\w*|chang\w*|adjust\w*|maintain\w*|drift\w*)\b",
    re.IGNORECASE,
)
_OBSTACLE_RE = re.compile(
    r"\b(other vehicle|nearby vehicle|vehicle|car|truck|pedestrian|cyclist|motorcycle|bus|agent)s?\b",
    re.IGNORECASE,
)
_MAP_RE = re.compile(
    r"\b(intersection|lane|road|roadway|highway|ramp|merger|traffic (?:signal|light)|stop sign|curve|crosswalk)s?\b",
    re.IGNORECASE,
)
_COLLISION_RE = re.compile(r"\b(collid\w*|collision|struck|impact\w*|crash\w*|rear-?ended)\b", re.IGNORECASE)
_NO_COLLISION_RE = re.compile(
    r"\b(no collision|avoided (?:a |the )?collision|did not collide|without (?:a )?collision|near miss)\b",
    re.IGNORECASE,
)


def _rule_based_extract(text: str) -> dict:
    """Keyword sectioning into the six-type schema; same-type sentences merge."""
    sections: dict[NodeType, list[str]] = {t: [] for t in NodeType}
    for sentence in _SENTENCE_SPLIT.split(text.strip()):
        sentence = sentence.strip()
        if not sentence:
            continue
        is_ego = bool(_EGO_RE.search(sentence))
        has_verb = bool(_ACTION_VERBS.search(sentence))
        sans_ego = re.sub(r"\bego vehicle\b", "", sentence, flags=re.IGNORECASE)
        mentions_obstacle = bool(_OBSTACLE_RE.search(sans_ego))
        if _COLLISION_RE.search(sentence) or _NO_COLLISION_RE.search(sentence):
            sections[NodeType.OUTCOME].append(sentence)
            continue
        if is_ego and has_verb:
            sections[NodeType.EGO_ACTION].append(sentence)
        elif is_ego:
            sections[NodeType.EGO].append(sentence)
        if mentions_obstacle and not is_ego:
            if has_verb:
                sections[NodeType.OBSTACLES_ACTION].append(sentence)
            else:
                sections[NodeType.OBSTACLES].append(sentence)
        elif mentions_obstacle and is_ego:
            sections[NodeType.OBSTACLES].append(sentence)
        if _MAP_RE.search(sentence):
            sections[NodeType.MAP].append(sentence)
    return {t: "; ".join(parts) for t, parts in sections.items() if parts}


def _graph_id_for(text: str) -> str:
    return "g-" + hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]


def extract_graph(
    text: str,
    data_class: DataClass,
    config: ExtractionProviderConfig,
    graph_id: Optional[str] = None,
    source: Optional[Provenance] = None,
    media: Optional[str] = None,
) -> SceneActionGraph:
    """Parse normalized text into an unembedded scene-action graph."""
    if config.provider_kind is ExtractorKind.DETERMINISTIC_RULE_BASED:
        sections = _rule_based_extract(text)
    else:
        sections = _remote_extract(text, config)

    # Required nodes always materialize; the whole-text fallback keeps
    # descriptions non-empty for terse inputs.
    sections.setdefault(NodeType.EGO, "the ego vehicle in the described scene")
    sections.setdefault(NodeType.EGO_ACTION, "proceeding as described")
    if data_class is DataClass.NEGATIVE and NodeType.OUTCOME not in sections:
        sections[NodeType.OUTCOME] = ""

    if NodeType.OUTCOME in sections:
        outcome_text = sections[NodeType.OUTCOME]
        if _NO_COLLISION_RE.search(outcome_text):
            marker = NO_COLLISION_MARKER
        else:
            marker = COLLISION_MARKER
        sections[NodeType.OUTCOME] = f"{marker}: {outcome_text}" if outcome_text else marker

    graph_id = graph_id or _graph_id_for(text)
    nodes = {
        t: GraphNode(
            node_id=f"{graph_id}:{t.value.lower()}",
            node_type=t,
            name=t.value.replace("_", " ").title(),
            description=desc,
        )
        for t, desc in sections.items()
    }
    graph = SceneActionGraph(
        graph_id=graph_id,
        data_class=data_class,
        nodes=nodes,
        source=source or Provenance(pipeline_version=PIPELINE_VERSION),
        media=media,
    )
    violations = validate_graph(graph)
    if violations:
        raise ExtractionError(
            f"extracted graph violates schema: {[v.reason for v in violations]}", raw_output=text
        )
    return graph


_EXTRACT_PROMPT = """Parse the following ego-centric driving description into a JSON \
object with keys drawn from MAP, EGO, EGO_ACTION, OBSTACLES, OBSTACLES_ACTION, OUTCOME \
and one natural-language description per key. Merge multiple same-type entities into \
one description joined by "; ". The OUTCOME value must begin with COLLISION or NO COLLISION.

Description:
{text}
"""


def _remote_transform(prompt: str, config: ExtractionProviderConfig) -> str:
    endpoint = config.endpoint or os.environ.get("LLM_ENDPOINT", "")
    api_key = os.environ.get("LLM_API_KEY", "")
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    resp = requests.post(
        endpoint,
        json={
            "model": config.model_name,
            "temperature": config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        },
        headers=headers,
        timeout=60,
    )
    if resp.status_code != 200:
        raise ProviderError(f"extraction endpoint returned {resp.status_code}", status=resp.status_code)
    return resp.json()["choices"][0]["message"]["content"]


def _remote_extract(text: str, config: ExtractionProviderConfig) -> dict:
    prompt = _EXTRACT_PROMPT.format(text=text)
    raw = _remote_transform(prompt, config)
    for attempt in range(2):
        try:
            parsed = json.loads(raw)
            return {NodeType(k): str(v) for k, v in parsed.items()}
        except (json.JSONDecodeError, ValueError) as exc:
            if attempt == 1:
                raise ExtractionError(f"extractor output failed schema: {exc}", raw_output=raw)
            # One schema-repair retry with the violation appended.
            raw = _remote_transform(prompt + f"\nPrevious output was invalid ({exc}); return valid JSON only.", config)
    raise AssertionError("unreachable")


# --- Embedding and corpus writes -----------------------------------------


def embed_graph_nodes(graph: SceneActionGraph, embed_config: EmbeddingProviderConfig) -> SceneActionGraph:
    """Attach a normalized embedding to every node."""
    nodes = {
        t: replace(n, embedding=embed_text(n.description, embed_config))
        for t, n in graph.nodes.items()
    }
    return graph.with_nodes(nodes)


def compose_capture_text(capture: DrivingLogCapture) -> str:
    """Caption plus metadata in fixed order: agents, positions, map note."""
    parts = [capture.caption.strip()]
    if capture.agent_types:
        parts.append("The types of agents in proximity are: " + ", ".join(capture.agent_types) + ".")
        parts.append(
            "The relative positions of these agents with respect to the ego vehicle are: "
            + ", ".join(capture.relative_positions)
            + "."
        )
    if capture.map_note:
        parts.append(capture.map_note.strip())
    return " ".join(parts)


def _existing_ids(corpus_path: Path) -> set[str]:
    if not corpus_path.exists():
        return set()
    ids = set()
    with open(corpus_path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                ids.add(json.loads(line)["graph_id"])
    return ids


def _append_record(corpus_path: Path, graph: SceneActionGraph) -> None:
    line = serialize_graph(graph) + "\n"
    with open(corpus_path, "a", encoding="utf-8") as fh:
        fh.write(line)


def ingest_crash_report(
    narrative: CrashNarrative,
    corpus_path,
    extract_config: ExtractionProviderConfig,
    embed_config: EmbeddingProviderConfig,
) -> SceneActionGraph:
    """normalize -> extract -> embed -> append, atomically."""
    corpus_path = Path(corpus_path)
    graph_id = f"crash-{narrative.report_id}"
    if graph_id in _existing_ids(corpus_path):
        raise DuplicateRecordError(f"report {narrative.report_id} already ingested")
    normalized = normalize_narrative(narrative, extract_config)
    graph = extract_graph(
        normalized,
        DataClass.NEGATIVE,
        extract_config,
        graph_id=graph_id,
        source=Provenance(
            dataset=narrative.source_agency,
            record_id=narrative.report_id,
            pipeline_version=PIPELINE_VERSION,
        ),
    )
    graph = embed_graph_nodes(graph, embed_config)
    _append_record(corpus_path, graph)
    return graph


def ingest_driving_log(
    capture: DrivingLogCapture,
    corpus_path,
    extract_config: ExtractionProviderConfig,
    embed_config: EmbeddingProviderConfig,
) -> SceneActionGraph:
    """compose caption -> extract -> embed -> append, atomically."""
    corpus_path = Path(corpus_path)
    graph_id = f"log-{capture.capture_id}"
    if graph_id in _existing_ids(corpus_path):
        raise DuplicateRecordError(f"capture {capture.capture_id} already ingested")
    text = compose_capture_text(capture)
    graph = extract_graph(
        text,
        DataClass.POSITIVE,
        extract_config,
        graph_id=graph_id,
        source=Provenance(
            dataset="driving-log", record_id=capture.capture_id, pipeline_version=PIPELINE_VERSION
        ),
        media=capture.image_ref,
    )
    graph = embed_graph_nodes(graph, embed_config)
    _append_record(corpus_path, graph)
    return graph


def lint_corpus(corpus_path) -> list[str]:
    """Corpus-wide checks; returns human-readable problem strings."""
    problems: list[str] = []
    seen: set[str] = set()
    with open(corpus_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                graph = deserialize_graph(line)
            except Exception as exc:
                problems.append(f"line {lineno}: {exc}")
                continue
            if graph.graph_id in seen:
                problems.append(f"line {lineno}: duplicate graph_id {graph.graph_id}")
            seen.add(graph.graph_id)
            for violation in validate_graph(graph):
                problems.append(f"line {lineno} ({graph.graph_id}): {violation.reason}")
            if graph.data_class is DataClass.NEGATIVE and graph.node(NodeType.OUTCOME) is None:
                problems.append(f"line {lineno} ({graph.graph_id}): negative record lacks OUTCOME")
    return problems
