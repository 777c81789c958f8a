"""Acceptance suite: one test per top-level criterion, each printing a
PASS line on success (run with -s to see them)."""

import os
import random
import time

import pytest

from adjudicator.embedding import EmbeddingProviderConfig
from adjudicator.engines import adjudicate_agentic, adjudicate_rag
from adjudicator.evaluation import LABELS, load_benchmark, run_benchmark
from adjudicator.graphs import DataClass, NodeType, OutcomeLabel, read_corpus
from adjudicator.index import TypeWeights, build_index, load_index, save_index, score_pair
from adjudicator.ingestion import lint_corpus
from adjudicator.providers import ScriptedProvider
from conftest import FIXTURES, ingest_fixture_set, make_graph
from test_adjudication import REFERENCE_SCRIPT, SCENE, EchoProvider
from test_evaluation import scripted_predictor
from test_index import oracle_cosine, oracle_top_k, random_graph, random_weights

EMBED = EmbeddingProviderConfig()


def _passed(name):
    print(f"PASS: {name}")


def test_retrieval_oracle_equivalence():
    start = time.monotonic()
    rng = random.Random(12345)
    for trial in range(100):
        n = rng.randint(2, 50)
        graphs = [random_graph(rng, f"r{trial}-{i}") for i in range(n)]
        weights = random_weights(rng)
        index = build_index(graphs, weights, EMBED)
        query = random_graph(rng, f"q{trial}")
        k = rng.randint(1, n)
        got = index.retrieve_top_k(query, k=k)
        want = oracle_top_k(query, graphs, k, weights)
        assert [r.graph_id for r in got] == [g for g, _ in want]
        for r, (_, score) in zip(got, want):
            assert abs(r.score - score) <= 1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"
    _passed(f"retrieval oracle equivalence (100 corpora, {elapsed:.2f}s)")


def test_similarity_identities():
    rng = random.Random(777)
    for trial in range(50):
        graph = random_graph(rng, f"s{trial}")
        weights = random_weights(rng)
        self_score = score_pair(graph, graph, weights).score
        present = sum(weights[t] for t in graph.node_types())
        assert abs(self_score - present) <= 1e-6

    ego_only = make_graph(
        graph_id="ego-only",
        descriptions={NodeType.EGO: "solo ego", NodeType.EGO_ACTION: "STOP"},
        embed_config=EMBED,
    )
    map_only = make_graph(
        graph_id="map-only",
        descriptions={NodeType.MAP: "a highway", NodeType.OBSTACLES: "a truck"},
        embed_config=EMBED,
    )
    assert score_pair(ego_only, map_only, TypeWeights.uniform()).score == 0.0

    graphs = [random_graph(rng, f"d{i}") for i in range(12)]
    index = build_index(graphs, TypeWeights.uniform(), EMBED)
    query = random_graph(rng, "dq")
    degenerate = TypeWeights.single(NodeType.EGO_ACTION)
    ranked = index.retrieve_top_k(query, k=12, weights=degenerate)
    by_cosine = sorted(
        (
            (
                g.graph_id,
                oracle_cosine(
                    query.nodes[NodeType.EGO_ACTION].embedding, g.nodes[NodeType.EGO_ACTION].embedding
                ),
            )
            for g in graphs
        ),
        key=lambda pair: (-pair[1], pair[0]),
    )
    assert [r.graph_id for r in ranked] == [g for g, _ in by_cosine]
    _passed("similarity identities (self, disjoint, single-type degeneracy)")


def test_ingestion_reproducibility(tmp_path):
    first, second = tmp_path / "run1.jsonl", tmp_path / "run2.jsonl"
    ingest_fixture_set(first)
    ingest_fixture_set(second)
    assert first.read_bytes() == second.read_bytes()
    for graph in read_corpus(first):
        if graph.data_class is DataClass.NEGATIVE:
            assert graph.node(NodeType.OUTCOME) is not None
    assert lint_corpus(first) == []
    _passed("ingestion reproducibility (byte-identical runs, lint clean)")


def test_contrastive_evidence():
    graphs = read_corpus(FIXTURES / "golden" / "corpus.jsonl")
    index = build_index(graphs, TypeWeights.uniform(), EMBED)
    provider = EchoProvider()
    assert adjudicate_rag(SCENE, index, provider, k=3).verdict is OutcomeLabel.SAFE

    crash_twin = make_graph(
        graph_id="crash-twin",
        data_class=DataClass.NEGATIVE,
        descriptions={
            NodeType.EGO: "the ego vehicle navigating an urban environment close to several cars",
            NodeType.EGO_ACTION: "NUDGE LEFT",
            NodeType.OBSTACLES: "several cars close to the ego vehicle",
            NodeType.MAP: "a road with no mergers or intersections",
            NodeType.OUTCOME: "COLLISION: the ego vehicle sideswiped the car on its left",
        },
        embed_config=EMBED,
    )
    augmented = build_index(graphs + [crash_twin], TypeWeights.uniform(), EMBED)
    assert adjudicate_rag(SCENE, augmented, provider, k=3).verdict is OutcomeLabel.UNSAFE
    pos_only = adjudicate_rag(SCENE, augmented, provider, k=3, class_filter=DataClass.POSITIVE)
    assert pos_only.verdict is OutcomeLabel.SAFE
    _passed("contrastive evidence (flip on crash twin, no flip under PosOnly)")


def test_agentic_protocol():
    graphs = read_corpus(FIXTURES / "golden" / "corpus.jsonl")
    index = build_index(graphs, TypeWeights.uniform(), EMBED)

    episode = adjudicate_agentic(SCENE, index, ScriptedProvider(list(REFERENCE_SCRIPT)), k=3, max_iterations=3)
    assert episode.verdict is OutcomeLabel.REASONABLE
    assert episode.iteration_count == 2
    assert [t.proposed_action.phrase for t in episode.trials] == [
        "temporary stop to assess surroundings",
        "brief deceleration followed by a gentle arc to the left within the lane",
    ]
    assert len(episode.transcript) == len(REFERENCE_SCRIPT)

    adversarial = ScriptedProvider(
        ["STOP", "SAFE", "DECELERATE", "SAFE", "ACCELERATE", "UNSAFE", "REASONABLE"]
    )
    assert adjudicate_agentic(SCENE, index, adversarial, k=2, max_iterations=3).iteration_count == 3

    degenerate = adjudicate_agentic(SCENE, index, ScriptedProvider(["SAFE"]), k=3, max_iterations=0)
    rag = adjudicate_rag(SCENE, index, ScriptedProvider(["SAFE"]), k=3)
    assert degenerate.transcript[0].prompt == rag.transcript[0].prompt
    assert degenerate.retrievals == rag.retrievals
    _passed("agentic protocol (scripted conversation, budget, degenerate loop)")


def test_evaluation_exactness():
    records = load_benchmark(FIXTURES / "benchmark9.jsonl")

    oracle = run_benchmark(records, scripted_predictor(lambda r: r.human_label.value))
    assert all(recall == 1.0 for recall in oracle.per_class_recall.values())

    constant = run_benchmark(records, scripted_predictor(lambda r: "UNSAFE"))
    assert constant.per_class_recall[OutcomeLabel.UNSAFE] == 1.0
    assert constant.per_class_recall[OutcomeLabel.SAFE] == 0.0
    assert constant.per_class_recall[OutcomeLabel.REASONABLE] == 0.0

    script = {
        "b1": "UNSAFE", "b2": "UNSAFE", "b3": "REASONABLE",
        "b4": "SAFE", "b5": "SAFE", "b6": "SAFE",
        "b7": "UNSAFE", "b8": "REASONABLE", "b9": "UNSAFE",
    }
    report = run_benchmark(records, scripted_predictor(lambda r: script[r.record_id]))
    U, S, R = OutcomeLabel.UNSAFE, OutcomeLabel.SAFE, OutcomeLabel.REASONABLE
    expected = {
        (U, U): 2, (U, S): 1, (U, R): 0,
        (S, U): 1, (S, S): 1, (S, R): 1,
        (R, U): 1, (R, S): 1, (R, R): 1,
    }
    for true in LABELS:
        for pred in LABELS:
            assert report.confusion.get((true, pred), 0) == expected[(true, pred)]

    for rep in (oracle, constant, report):
        assert sum(rep.confusion.values()) + len(rep.failures) == rep.n_records
    _passed("evaluation exactness (oracle, constant-UNSAFE, 9-record confusion)")


def test_persistence_parity(tmp_path):
    rng = random.Random(2026)
    graphs = [random_graph(rng, f"p{i}") for i in range(30)]
    weights = random_weights(rng)
    index = build_index(graphs, weights, EMBED)
    path = tmp_path / "index.jsonl"
    save_index(index, path)
    reloaded = load_index(path)
    for i in range(20):
        query = random_graph(rng, f"pq{i}")
        k = rng.randint(1, 10)
        assert reloaded.retrieve_top_k(query, k=k) == index.retrieve_top_k(query, k=k)
    _passed("persistence parity (20 random queries bit-identical)")


@pytest.mark.skipif(
    not (os.environ.get("LIVE_SMOKE") and os.environ.get("EMBED_ENDPOINT") and os.environ.get("LLM_ENDPOINT")),
    reason="live smoke test is network-gated; set LIVE_SMOKE=1 with EMBED_ENDPOINT / LLM_ENDPOINT",
)
def test_live_smoke():
    from adjudicator.embedding import ProviderKind
    from adjudicator.engines import run_engine, EngineKind
    from adjudicator.providers import RemoteChatProvider

    records = load_benchmark(FIXTURES / "benchmark9.jsonl")[:5]
    embed = EmbeddingProviderConfig(
        provider_kind=ProviderKind.REMOTE,
        model_name=os.environ.get("EMBED_MODEL", "nv-embedqa-mistral-7b-v2"),
        endpoint=os.environ["EMBED_ENDPOINT"],
        dim=int(os.environ.get("EMBED_DIM", "4096")),
    )
    from dataclasses import replace

    graphs = read_corpus(FIXTURES / "golden" / "corpus.jsonl")
    stripped = [
        g.with_nodes({t: replace(n, embedding=None) for t, n in g.nodes.items()}) for g in graphs
    ]
    index = build_index(stripped, TypeWeights.uniform(), embed)
    for record in records:
        episode = run_engine(EngineKind.RAG, record.to_query(), RemoteChatProvider(), index=index, embed_config=embed)
        assert episode.verdict in OutcomeLabel
    _passed("live smoke (5 records through real endpoints)")
