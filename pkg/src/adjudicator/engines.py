"""The three reasoning engines: baseline (no retrieval), one-step
retrieval-augmented, and the agentic counterfactual loop.

Every provider call is recorded in the episode transcript, so an episode
can be replayed bit-for-bit through a scripted provider.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from . import prompts
from .embedding import EmbeddingProviderConfig
from .errors import DuplicateProposalError, FingerprintMismatchError, LabelParseError
from .graphs import (
    DataClass,
    DrivingAction,
    GraphNode,
    NodeType,
    OutcomeLabel,
    SceneActionGraph,
    parse_action,
    parse_outcome_label,
)
from .index import DEFAULT_K, PrecedentIndex, RetrievalResult, TypeWeights
from .ingestion import ExtractionProviderConfig, embed_graph_nodes, extract_graph
from .providers import ChatProvider

DEFAULT_MAX_ITERATIONS = 3


class EngineKind(str, Enum):
    BASE = "BASE"
    RAG = "RAG"
    RAG_POS_ONLY = "RAG_POS_ONLY"
    AGENTIC = "AGENTIC"


@dataclass(frozen=True)
class SceneQuery:
    description: str
    candidate_action: DrivingAction
    image_ref: Optional[str] = None
    agent_types: tuple[str, ...] = ()
    relative_positions: tuple[str, ...] = ()
    map_note: str = ""

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError("scene description is empty")

    def metadata_text(self) -> str:
        lines = []
        if self.agent_types:
            lines.append("The types of agents in proximity are: " + ", ".join(self.agent_types) + ".")
            lines.append(
                "The relative positions of these agents with respect to the ego "
                "vehicle are: " + ", ".join(self.relative_positions) + "."
            )
        if self.map_note:
            lines.append(self.map_note)
        return "\n".join(lines)


@dataclass(frozen=True)
class TranscriptEntry:
    prompt: str
    response: str


@dataclass(frozen=True)
class CounterfactualTrial:
    proposed_action: DrivingAction
    retrievals: tuple[RetrievalResult, ...]
    trial_label: OutcomeLabel
    trial_justification: str


@dataclass
class AdjudicationEpisode:
    episode_id: str
    query: SceneQuery
    engine_kind: EngineKind
    verdict: OutcomeLabel
    justification: str
    trials: list[CounterfactualTrial] = field(default_factory=list)
    retrievals: list[RetrievalResult] = field(default_factory=list)
    precedent_texts: list[str] = field(default_factory=list)
    iteration_count: int = 0
    transcript: list[TranscriptEntry] = field(default_factory=list)

    def to_record(self) -> dict:
        def retrieval_rec(r: RetrievalResult) -> dict:
            return {
                "graph_id": r.graph_id,
                "score": r.score,
                "per_type_contributions": {t.value: c for t, c in r.per_type_contributions.items()},
                "data_class": r.data_class.value,
            }

        return {
            "episode_id": self.episode_id,
            "engine_kind": self.engine_kind.value,
            "query": {
                "description": self.query.description,
                "candidate_action": self.query.candidate_action.phrase,
                "candidate_is_canonical": self.query.candidate_action.is_canonical,
                "image_ref": self.query.image_ref,
                "agent_types": list(self.query.agent_types),
                "relative_positions": list(self.query.relative_positions),
                "map_note": self.query.map_note,
            },
            "verdict": self.verdict.value,
            "justification": self.justification,
            "iteration_count": self.iteration_count,
            "retrievals": [retrieval_rec(r) for r in self.retrievals],
            "precedent_texts": self.precedent_texts,
            "trials": [
                {
                    "proposed_action": t.proposed_action.phrase,
                    "is_canonical": t.proposed_action.is_canonical,
                    "label": t.trial_label.value,
                    "justification": t.trial_justification,
                    "retrievals": [retrieval_rec(r) for r in t.retrievals],
                }
                for t in self.trials
            ],
            "transcript": [{"prompt": e.prompt, "response": e.response} for e in self.transcript],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_record(), indent=2, ensure_ascii=False), encoding="utf-8")


def build_query_graph(
    query: SceneQuery,
    extract_config: ExtractionProviderConfig,
    embed_config: EmbeddingProviderConfig,
) -> SceneActionGraph:
    """Scene text -> graph, with the ego-action node forced to the candidate,
    no outcome node (a live scene has none), then embedded."""
    text = query.description
    metadata = query.metadata_text()
    if metadata:
        text = f"{text} {metadata}"
    graph = extract_graph(
        text,
        DataClass.POSITIVE,
        extract_config,
        graph_id=f"query-{uuid.uuid4().hex[:8]}",
        media=query.image_ref,
    )
    graph = graph.without_node(NodeType.OUTCOME)
    action_node = GraphNode(
        node_id=f"{graph.graph_id}:ego_action",
        node_type=NodeType.EGO_ACTION,
        name="Ego Action",
        description=query.candidate_action.rendering,
    )
    nodes = dict(graph.nodes)
    nodes[NodeType.EGO_ACTION] = action_node
    return embed_graph_nodes(graph.with_nodes(nodes), embed_config)


def _call(provider: ChatProvider, transcript: list[TranscriptEntry], user_prompt: str) -> str:
    messages = [
        {"role": "system", "content": prompts.SYSTEM_GOAL},
        {"role": "user", "content": user_prompt},
    ]
    response = provider.complete(messages)
    transcript.append(TranscriptEntry(prompt=user_prompt, response=response))
    return response


def _verdict(
    provider: ChatProvider, transcript: list[TranscriptEntry], prompt: str
) -> tuple[OutcomeLabel, str]:
    response = _call(provider, transcript, prompt)
    try:
        return parse_outcome_label(response), response
    except LabelParseError:
        retry = prompt + "\n\nYour previous reply had no label. End with exactly one of UNSAFE, SAFE, REASONABLE."
        response = _call(provider, transcript, retry)
        return parse_outcome_label(response), response


def adjudicate_base(query: SceneQuery, provider: ChatProvider) -> AdjudicationEpisode:
    """Single prompt, no precedent context."""
    transcript: list[TranscriptEntry] = []
    scene = prompts.render_scene_block(query.description, query.metadata_text(), query.image_ref)
    verdict, justification = _verdict(
        provider, transcript, prompts.base_prompt(scene, query.candidate_action.rendering)
    )
    return AdjudicationEpisode(
        episode_id=uuid.uuid4().hex,
        query=query,
        engine_kind=EngineKind.BASE,
        verdict=verdict,
        justification=justification,
        transcript=transcript,
    )


def _check_fingerprint(index: PrecedentIndex, embed_config: EmbeddingProviderConfig) -> None:
    if index.embed_fingerprint and index.embed_fingerprint != embed_config.fingerprint:
        raise FingerprintMismatchError(
            f"index was built under {index.embed_fingerprint}, query uses {embed_config.fingerprint}"
        )


def _retrieve_for(
    action: DrivingAction,
    query: SceneQuery,
    index: PrecedentIndex,
    k: int,
    weights: Optional[TypeWeights],
    class_filter: Optional[DataClass],
    extract_config: ExtractionProviderConfig,
    embed_config: EmbeddingProviderConfig,
) -> tuple[list[RetrievalResult], list[str]]:
    from dataclasses import replace as dc_replace

    q = dc_replace(query, candidate_action=action)
    graph = build_query_graph(q, extract_config, embed_config)
    results = index.retrieve_top_k(graph, k=k, weights=weights, class_filter=class_filter)
    blocks = [prompts.render_precedent(r, index, i + 1) for i, r in enumerate(results)]
    return results, blocks


def adjudicate_rag(
    query: SceneQuery,
    index: PrecedentIndex,
    provider: ChatProvider,
    k: int = DEFAULT_K,
    weights: Optional[TypeWeights] = None,
    class_filter: Optional[DataClass] = None,
    extract_config: ExtractionProviderConfig = ExtractionProviderConfig(),
    embed_config: EmbeddingProviderConfig = EmbeddingProviderConfig(),
) -> AdjudicationEpisode:
    """One-step retrieval plus chain-of-thought adjudication."""
    _check_fingerprint(index, embed_config)
    transcript: list[TranscriptEntry] = []
    results, blocks = _retrieve_for(
        query.candidate_action, query, index, k, weights, class_filter, extract_config, embed_config
    )
    scene = prompts.render_scene_block(query.description, query.metadata_text(), query.image_ref)
    verdict, justification = _verdict(
        provider, transcript, prompts.rag_prompt(scene, query.candidate_action.rendering, blocks)
    )
    kind = EngineKind.RAG_POS_ONLY if class_filter is DataClass.POSITIVE else EngineKind.RAG
    return AdjudicationEpisode(
        episode_id=uuid.uuid4().hex,
        query=query,
        engine_kind=kind,
        verdict=verdict,
        justification=justification,
        retrievals=results,
        precedent_texts=blocks,
        transcript=transcript,
    )


def propose_counterfactual(
    query: SceneQuery,
    prior_trials: list[CounterfactualTrial],
    provider: ChatProvider,
    transcript: list[TranscriptEntry],
) -> Optional[DrivingAction]:
    """One proposal step. Returns None when the provider signals stopping."""
    scene = prompts.render_scene_block(query.description, query.metadata_text(), query.image_ref)
    history = [
        f"{t.proposed_action.rendering} -> {t.trial_label.value}: {t.trial_justification}"
        for t in prior_trials
    ]
    prompt = prompts.proposal_prompt(scene, query.candidate_action.rendering, history)
    seen = {query.candidate_action.normalized()} | {t.proposed_action.normalized() for t in prior_trials}
    response = _call(provider, transcript, prompt)
    for attempt in range(2):
        if prompts.STOP_TOKEN in response:
            return None
        action = parse_action(response)
        if action.normalized() not in seen:
            return action
        if attempt == 1:
            raise DuplicateProposalError(f"provider repeated action {action.rendering!r} twice")
        response = _call(
            provider,
            transcript,
            prompt + f"\n\n{action.rendering!r} was already considered; propose a different action.",
        )
    raise AssertionError("unreachable")


def adjudicate_agentic(
    query: SceneQuery,
    index: PrecedentIndex,
    provider: ChatProvider,
    k: int = DEFAULT_K,
    weights: Optional[TypeWeights] = None,
    class_filter: Optional[DataClass] = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    extract_config: ExtractionProviderConfig = ExtractionProviderConfig(),
    embed_config: EmbeddingProviderConfig = EmbeddingProviderConfig(),
) -> AdjudicationEpisode:
    """Generation-retrieval-evaluation loop, then a final adjudication of
    the original candidate informed by every trial."""
    _check_fingerprint(index, embed_config)
    transcript: list[TranscriptEntry] = []
    scene = prompts.render_scene_block(query.description, query.metadata_text(), query.image_ref)

    initial_results, initial_blocks = _retrieve_for(
        query.candidate_action, query, index, k, weights, class_filter, extract_config, embed_config
    )

    trials: list[CounterfactualTrial] = []
    while len(trials) < max_iterations:
        try:
            proposal = propose_counterfactual(query, trials, provider, transcript)
        except DuplicateProposalError:
            break  # graceful: deliberation ends, final adjudication proceeds
        if proposal is None:
            break
        trial_results, trial_blocks = _retrieve_for(
            proposal, query, index, k, weights, class_filter, extract_config, embed_config
        )
        label, justification = _verdict(
            provider, transcript, prompts.trial_evaluation_prompt(scene, proposal.rendering, trial_blocks)
        )
        trials.append(
            CounterfactualTrial(
                proposed_action=proposal,
                retrievals=tuple(trial_results),
                trial_label=label,
                trial_justification=justification,
            )
        )

    if trials:
        trial_blocks = [
            f"Alternative {i + 1}: {t.proposed_action.rendering} -> {t.trial_label.value}\n{t.trial_justification}"
            for i, t in enumerate(trials)
        ]
        final = prompts.final_prompt(scene, query.candidate_action.rendering, trial_blocks, initial_blocks)
    else:
        # Zero trials degenerates exactly to the one-step RAG prompt.
        final = prompts.rag_prompt(scene, query.candidate_action.rendering, initial_blocks)
    verdict, justification = _verdict(provider, transcript, final)
    return AdjudicationEpisode(
        episode_id=uuid.uuid4().hex,
        query=query,
        engine_kind=EngineKind.AGENTIC,
        verdict=verdict,
        justification=justification,
        trials=trials,
        retrievals=initial_results,
        precedent_texts=initial_blocks,
        iteration_count=len(trials),
        transcript=transcript,
    )


def run_engine(
    kind: EngineKind,
    query: SceneQuery,
    provider: ChatProvider,
    index: Optional[PrecedentIndex] = None,
    k: int = DEFAULT_K,
    weights: Optional[TypeWeights] = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    extract_config: ExtractionProviderConfig = ExtractionProviderConfig(),
    embed_config: EmbeddingProviderConfig = EmbeddingProviderConfig(),
) -> AdjudicationEpisode:
    """Dispatch helper shared by the CLI, service, and benchmark harness."""
    if kind is EngineKind.BASE:
        return adjudicate_base(query, provider)
    if index is None:
        raise ValueError(f"engine {kind.value} requires an index")
    class_filter = DataClass.POSITIVE if kind is EngineKind.RAG_POS_ONLY else None
    if kind in (EngineKind.RAG, EngineKind.RAG_POS_ONLY):
        return adjudicate_rag(
            query, index, provider, k=k, weights=weights, class_filter=class_filter,
            extract_config=extract_config, embed_config=embed_config,
        )
    return adjudicate_agentic(
        query, index, provider, k=k, weights=weights, class_filter=class_filter,
        max_iterations=max_iterations, extract_config=extract_config, embed_config=embed_config,
    )
