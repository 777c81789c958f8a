import itertools
from pathlib import Path

import pytest

from adjudicator.embedding import EmbeddingProviderConfig
from adjudicator.graphs import (
    DataClass,
    GraphNode,
    NodeType,
    Provenance,
    SceneActionGraph,
)
from adjudicator.ingestion import embed_graph_nodes

FIXTURES = Path(__file__).parent / "fixtures"

_counter = itertools.count()


def make_graph(
    graph_id=None,
    data_class=DataClass.POSITIVE,
    descriptions=None,
    embed_config=None,
):
    """Small valid graph; descriptions maps NodeType -> text."""
    if graph_id is None:
        graph_id = f"g{next(_counter):04d}"
    if descriptions is None:
        descriptions = {
            NodeType.EGO: "the ego vehicle driving in traffic",
            NodeType.EGO_ACTION: "STRAIGHT",
            NodeType.MAP: "a two lane urban road",
        }
        if data_class is DataClass.NEGATIVE:
            descriptions[NodeType.OUTCOME] = "COLLISION: the vehicles collided"
    nodes = {
        t: GraphNode(
            node_id=f"{graph_id}:{t.value.lower()}",
            node_type=t,
            name=t.value.title(),
            description=desc,
        )
        for t, desc in descriptions.items()
    }
    graph = SceneActionGraph(
        graph_id=graph_id,
        data_class=data_class,
        nodes=nodes,
        source=Provenance(dataset="test", record_id=graph_id, pipeline_version="1"),
    )
    if embed_config is not None:
        graph = embed_graph_nodes(graph, embed_config)
    return graph


def ingest_fixture_set(corpus_path):
    """Run the deterministic pipeline over the frozen 5-crash + 5-log set."""
    import json

    from adjudicator.ingestion import (
        CrashNarrative,
        DrivingLogCapture,
        ExtractionProviderConfig,
        ingest_crash_report,
        ingest_driving_log,
    )

    extract, embed = ExtractionProviderConfig(), EmbeddingProviderConfig()
    for path in sorted((FIXTURES / "crash").glob("*.txt")):
        narrative = CrashNarrative(report_id=path.stem, raw_text=path.read_text(encoding="utf-8"))
        ingest_crash_report(narrative, corpus_path, extract, embed)
    for line in (FIXTURES / "logs.jsonl").read_text(encoding="utf-8").splitlines():
        raw = json.loads(line)
        capture = DrivingLogCapture(
            capture_id=raw["capture_id"],
            caption=raw["caption"],
            agent_types=tuple(raw.get("agent_types", ())),
            relative_positions=tuple(raw.get("relative_positions", ())),
            map_note=raw.get("map_note", ""),
            image_ref=raw.get("image"),
        )
        ingest_driving_log(capture, corpus_path, extract, embed)


@pytest.fixture
def embed_config():
    return EmbeddingProviderConfig()


@pytest.fixture
def fixtures_dir():
    return FIXTURES
