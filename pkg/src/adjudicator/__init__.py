"""Precedent-grounded adjudication of driving actions.

Driving logs (positive) and crash narratives (negative) are normalized
into a shared scene-action graph corpus, retrieved by type-weighted node
embedding similarity, and used by three reasoning engines to label
candidate actions UNSAFE, SAFE, or REASONABLE.
"""

from .graphs import (
    CANONICAL_ACTIONS,
    DataClass,
    DrivingAction,
    GraphNode,
    NodeType,
    OutcomeLabel,
    SceneActionGraph,
    deserialize_graph,
    parse_action,
    parse_outcome_label,
    serialize_graph,
    validate_graph,
)
from .embedding import EmbeddingProviderConfig, ProviderKind, cosine_similarity, embed_text
from .index import PrecedentIndex, RetrievalResult, TypeWeights, build_index, load_index, save_index, score_pair
from .engines import (
    AdjudicationEpisode,
    EngineKind,
    SceneQuery,
    adjudicate_agentic,
    adjudicate_base,
    adjudicate_rag,
    build_query_graph,
)
from .providers import RemoteChatProvider, ScriptedProvider

__all__ = [
    "CANONICAL_ACTIONS",
    "DataClass",
    "DrivingAction",
    "GraphNode",
    "NodeType",
    "OutcomeLabel",
    "SceneActionGraph",
    "deserialize_graph",
    "parse_action",
    "parse_outcome_label",
    "serialize_graph",
    "validate_graph",
    "EmbeddingProviderConfig",
    "ProviderKind",
    "cosine_similarity",
    "embed_text",
    "PrecedentIndex",
    "RetrievalResult",
    "TypeWeights",
    "build_index",
    "load_index",
    "save_index",
    "score_pair",
    "AdjudicationEpisode",
    "EngineKind",
    "SceneQuery",
    "adjudicate_agentic",
    "adjudicate_base",
    "adjudicate_rag",
    "build_query_graph",
    "RemoteChatProvider",
    "ScriptedProvider",
]
