import pytest

from adjudicator.embedding import EmbeddingProviderConfig
from adjudicator.errors import DuplicateRecordError
from adjudicator.graphs import (
    COLLISION_MARKER,
    NO_COLLISION_MARKER,
    DataClass,
    NodeType,
    read_corpus,
    validate_graph,
)
from adjudicator.ingestion import (
    CrashNarrative,
    DrivingLogCapture,
    ExtractionProviderConfig,
    compose_capture_text,
    embed_graph_nodes,
    extract_graph,
    ingest_crash_report,
    lint_corpus,
    normalize_narrative,
)
from conftest import FIXTURES, ingest_fixture_set, make_graph

EXTRACT = ExtractionProviderConfig()
EMBED = EmbeddingProviderConfig()


class TestNormalizeNarrative:
    def test_entity_tags_replaced(self):
        narrative = CrashNarrative("x", "V1 was traveling eastbound when V2 entered the lane.")
        result = normalize_narrative(narrative, EXTRACT)
        assert "the ego vehicle" in result
        assert "the other vehicle" in result
        assert "V1" not in result
        assert "eastbound" not in result

    def test_idempotent_on_clean_input(self):
        clean = "The ego vehicle slowed as a car ahead braked."
        narrative = CrashNarrative("x", clean)
        assert normalize_narrative(narrative, EXTRACT) == clean

    def test_golden_normalized_outputs(self):
        # Frozen once from the rule-based provider over the 5-report fixture.
        for path in sorted((FIXTURES / "crash").glob("*.txt")):
            narrative = CrashNarrative(path.stem, path.read_text(encoding="utf-8"))
            golden = (FIXTURES / "golden" / f"{path.stem}.normalized.txt").read_text(encoding="utf-8")
            assert normalize_narrative(narrative, EXTRACT) == golden

    def test_empty_narrative_rejected(self):
        with pytest.raises(ValueError):
            CrashNarrative("x", "   ")


class TestExtractGraph:
    def test_two_vehicles_merge_into_one_obstacles_node(self):
        text = (
            "The ego vehicle was traveling in the right lane of the roadway. "
            "A truck waited ahead in the lane. Another car waited on the shoulder. "
            "The ego vehicle decelerated and struck the truck."
        )
        graph = extract_graph(text, DataClass.NEGATIVE, EXTRACT)
        obstacles = graph.node(NodeType.OBSTACLES)
        assert obstacles is not None
        assert "truck" in obstacles.description
        assert "car" in obstacles.description
        assert "; " in obstacles.description

    def test_positive_without_agents_lacks_obstacles(self):
        capture = DrivingLogCapture(
            capture_id="solo",
            caption="The ego vehicle proceeded along an empty road and maintained its lane.",
        )
        graph = extract_graph(compose_capture_text(capture), DataClass.POSITIVE, EXTRACT)
        assert graph.node(NodeType.OBSTACLES) is None
        assert validate_graph(graph) == []

    def test_negative_always_gets_outcome(self):
        graph = extract_graph(
            "The ego vehicle was traveling forward. The ego vehicle struck a barrier.",
            DataClass.NEGATIVE,
            EXTRACT,
        )
        outcome = graph.node(NodeType.OUTCOME)
        assert outcome is not None
        assert outcome.description.startswith(COLLISION_MARKER)

    def test_no_collision_marker_detected(self):
        graph = extract_graph(
            "The ego vehicle was traveling forward. The ego vehicle braked and avoided a collision.",
            DataClass.NEGATIVE,
            EXTRACT,
        )
        assert graph.node(NodeType.OUTCOME).description.startswith(NO_COLLISION_MARKER)

    def test_stable_across_runs(self):
        text = "The ego vehicle merged left on the highway. A car slowed behind."
        assert extract_graph(text, DataClass.POSITIVE, EXTRACT, graph_id="s") == extract_graph(
            text, DataClass.POSITIVE, EXTRACT, graph_id="s"
        )

    def test_node_types_closed_under_schema(self):
        for path in sorted((FIXTURES / "crash").glob("*.txt")):
            narrative = CrashNarrative(path.stem, path.read_text(encoding="utf-8"))
            graph = extract_graph(normalize_narrative(narrative, EXTRACT), DataClass.NEGATIVE, EXTRACT)
            assert all(t in NodeType for t in graph.nodes)
            assert validate_graph(graph) == []


class TestEmbedGraphNodes:
    def test_every_node_embedded_at_dim(self):
        graph = embed_graph_nodes(make_graph(), EMBED)
        assert all(
            node.embedding is not None and len(node.embedding) == EMBED.dim
            for node in graph.nodes.values()
        )

    def test_re_embedding_is_identical(self):
        graph = embed_graph_nodes(make_graph(), EMBED)
        again = embed_graph_nodes(graph, EMBED)
        assert graph == again

    def test_identical_descriptions_identical_vectors(self):
        a = embed_graph_nodes(make_graph(graph_id="a"), EMBED)
        b = embed_graph_nodes(make_graph(graph_id="b"), EMBED)
        for node_type in a.nodes:
            assert a.nodes[node_type].embedding == b.nodes[node_type].embedding


class TestIngestPipeline:
    def test_fixture_set_produces_ten_valid_records(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        ingest_fixture_set(corpus)
        graphs = read_corpus(corpus)
        assert len(graphs) == 10
        assert sum(g.data_class is DataClass.NEGATIVE for g in graphs) == 5
        for graph in graphs:
            assert validate_graph(graph) == []

    def test_byte_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        ingest_fixture_set(a)
        ingest_fixture_set(b)
        assert a.read_bytes() == b.read_bytes()

    def test_matches_frozen_golden_corpus(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        ingest_fixture_set(corpus)
        assert corpus.read_bytes() == (FIXTURES / "golden" / "corpus.jsonl").read_bytes()

    def test_negative_records_carry_outcome_and_lint_passes(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        ingest_fixture_set(corpus)
        assert lint_corpus(corpus) == []
        for graph in read_corpus(corpus):
            if graph.data_class is DataClass.NEGATIVE:
                assert graph.node(NodeType.OUTCOME) is not None

    def test_duplicate_id_rejected_without_write(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        narrative = CrashNarrative("r1", "The ego vehicle struck a pole on the road.")
        ingest_crash_report(narrative, corpus, EXTRACT, EMBED)
        before = corpus.read_bytes()
        with pytest.raises(DuplicateRecordError):
            ingest_crash_report(narrative, corpus, EXTRACT, EMBED)
        assert corpus.read_bytes() == before

    def test_misaligned_capture_metadata_rejected(self):
        with pytest.raises(ValueError):
            DrivingLogCapture(
                capture_id="bad",
                caption="something",
                agent_types=("VEHICLE",),
                relative_positions=(),
            )
