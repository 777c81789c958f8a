"""Precedent index: type-weighted graph similarity and top-k retrieval.

Similarity between a query graph and a corpus graph is a weighted sum
over node types of the best same-type node cosine. Types absent from
either graph contribute zero (no renormalization of the remaining
weights unless asked for). The corpus is small, so search is exact
brute force.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .embedding import EmbeddingProviderConfig, cosine_similarity, embed_text
from .errors import FingerprintMismatchError, IndexBuildError
from .graphs import (
    DataClass,
    GraphNode,
    NodeType,
    SceneActionGraph,
    read_corpus,
    validate_graph,
    write_corpus,
)

_SIMPLEX_TOL = 1e-9
DEFAULT_K = 3


@dataclass(frozen=True)
class TypeWeights:
    """Nonnegative per-type weights summing to one."""

    weights: dict

    def __post_init__(self):
        for node_type, w in self.weights.items():
            if w < 0:
                raise ValueError(f"negative weight for {node_type.value}")
        total = sum(self.weights.values())
        if abs(total - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"weights must sum to 1, got {total}")

    def __getitem__(self, node_type: NodeType) -> float:
        return self.weights.get(node_type, 0.0)

    @classmethod
    def uniform(cls, types: Iterable[NodeType] = NodeType) -> "TypeWeights":
        types = list(types)
        return cls({t: 1.0 / len(types) for t in types})

    @classmethod
    def single(cls, node_type: NodeType) -> "TypeWeights":
        return cls({node_type: 1.0})

    def to_record(self) -> dict:
        return {t.value: w for t, w in self.weights.items()}

    @classmethod
    def from_record(cls, record: dict) -> "TypeWeights":
        return cls({NodeType(k): float(v) for k, v in record.items()})


@dataclass(frozen=True)
class RetrievalResult:
    graph_id: str
    score: float
    per_type_contributions: dict
    data_class: DataClass


def _node_cosine(a: GraphNode, b: GraphNode) -> float:
    if a.embedding is None or b.embedding is None:
        raise IndexBuildError(f"node {a.node_id if a.embedding is None else b.node_id} has no embedding")
    return cosine_similarity(a.embedding, b.embedding)


def score_pair(
    query: SceneActionGraph,
    candidate: SceneActionGraph,
    weights: TypeWeights,
    renormalize_missing: bool = False,
) -> RetrievalResult:
    """Weighted sum over node types shared by both graphs of the node cosine."""
    shared = query.node_types() & candidate.node_types()
    contributions: dict = {}
    for node_type in shared:
        w = weights[node_type]
        if w == 0.0:
            continue
        contributions[node_type] = w * _node_cosine(query.nodes[node_type], candidate.nodes[node_type])
    score = sum(contributions.values())
    if renormalize_missing and shared:
        present_weight = sum(weights[t] for t in shared)
        if present_weight > 0:
            score = score / present_weight
            contributions = {t: c / present_weight for t, c in contributions.items()}
    return RetrievalResult(
        graph_id=candidate.graph_id,
        score=score,
        per_type_contributions=contributions,
        data_class=candidate.data_class,
    )


@dataclass
class PrecedentIndex:
    graphs: dict = field(default_factory=dict)  # graph_id -> SceneActionGraph
    weights: TypeWeights = field(default_factory=TypeWeights.uniform)
    embed_fingerprint: str = ""

    def __len__(self) -> int:
        return len(self.graphs)

    def graph(self, graph_id: str) -> SceneActionGraph:
        return self.graphs[graph_id]

    def retrieve_top_k(
        self,
        query: SceneActionGraph,
        k: int = DEFAULT_K,
        weights: Optional[TypeWeights] = None,
        class_filter: Optional[DataClass] = None,
        renormalize_missing: bool = False,
    ) -> list[RetrievalResult]:
        """Exact top-k by score, ties broken by ascending graph_id."""
        if k <= 0:
            raise ValueError("k must be positive")
        weights = weights or self.weights
        results = []
        for graph in self.graphs.values():
            if graph.graph_id == query.graph_id:
                continue
            if class_filter is not None and graph.data_class is not class_filter:
                continue
            results.append(score_pair(query, graph, weights, renormalize_missing))
        results.sort(key=lambda r: (-r.score, r.graph_id))
        return results[:k]


def _ensure_embedded(graph: SceneActionGraph, config: EmbeddingProviderConfig) -> SceneActionGraph:
    if all(node.embedding is not None for node in graph.nodes.values()):
        return graph
    from dataclasses import replace

    nodes = {
        t: (n if n.embedding is not None else replace(n, embedding=embed_text(n.description, config)))
        for t, n in graph.nodes.items()
    }
    return graph.with_nodes(nodes)


def build_index(
    records: Iterable[SceneActionGraph],
    weights: TypeWeights,
    embed_config: EmbeddingProviderConfig,
) -> PrecedentIndex:
    """Validate, embed where needed, and assemble the retrieval index."""
    graphs: dict = {}
    bad: list[str] = []
    for graph in records:
        if validate_graph(graph) or graph.graph_id in graphs:
            bad.append(graph.graph_id)
            continue
        graphs[graph.graph_id] = _ensure_embedded(graph, embed_config)
    if bad:
        raise IndexBuildError(f"{len(bad)} corpus record(s) failed validation", graph_ids=bad)
    for graph in graphs.values():
        for node in graph.nodes.values():
            if len(node.embedding) != embed_config.dim:
                raise FingerprintMismatchError(
                    f"graph {graph.graph_id} node {node.node_id} has dim "
                    f"{len(node.embedding)}, index expects {embed_config.dim}"
                )
    return PrecedentIndex(graphs=graphs, weights=weights, embed_fingerprint=embed_config.fingerprint)


def save_index(index: PrecedentIndex, path) -> None:
    """Corpus file plus a sidecar manifest next to it."""
    path = Path(path)
    write_corpus(index.graphs.values(), path)
    manifest = {
        "weights": index.weights.to_record(),
        "embed_fingerprint": index.embed_fingerprint,
        "built_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "count": len(index),
    }
    path.with_suffix(path.suffix + ".manifest.json").write_text(
        json.dumps(manifest, indent=2), encoding="utf-8"
    )


def load_index(path) -> PrecedentIndex:
    path = Path(path)
    manifest = json.loads(path.with_suffix(path.suffix + ".manifest.json").read_text(encoding="utf-8"))
    graphs = {g.graph_id: g for g in read_corpus(path)}
    return PrecedentIndex(
        graphs=graphs,
        weights=TypeWeights.from_record(manifest["weights"]),
        embed_fingerprint=manifest["embed_fingerprint"],
    )
