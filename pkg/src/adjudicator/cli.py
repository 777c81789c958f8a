"""Unified command-line entry point."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .annotations import AnnotationStore
from .embedding import EmbeddingProviderConfig, ProviderKind
from .engines import EngineKind, SceneQuery, run_engine
from .errors import AdjudicatorError, ProviderError, SchemaError
from .evaluation import (
    EvaluationReport,
    LABELS,
    compare_reports,
    load_benchmark,
    make_predictor,
    run_benchmark,
    save_report,
)
from .graphs import DataClass, OutcomeLabel, deserialize_graph, parse_action, read_corpus
from .index import TypeWeights, build_index, load_index, save_index
from .ingestion import (
    CrashNarrative,
    DrivingLogCapture,
    ExtractionProviderConfig,
    ExtractorKind,
    ingest_crash_report,
    ingest_driving_log,
    lint_corpus,
)
from .providers import RemoteChatProvider, ScriptedProvider

# Stable exit codes, shared vocabulary with the HTTP error bodies.
EXIT_VALIDATION = 2
EXIT_CONFLICT = 3
EXIT_PROVIDER = 4
EXIT_INTERNAL = 5


def _fail(exc: Exception) -> None:
    code = EXIT_INTERNAL
    if isinstance(exc, SchemaError):
        code = EXIT_VALIDATION
    elif isinstance(exc, ProviderError):
        code = EXIT_PROVIDER
    elif isinstance(exc, AdjudicatorError):
        code = EXIT_CONFLICT
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _embed_config(remote: bool, dim: int) -> EmbeddingProviderConfig:
    if remote:
        import os

        return EmbeddingProviderConfig(
            provider_kind=ProviderKind.REMOTE,
            model_name=os.environ.get("EMBED_MODEL", "nv-embedqa-mistral-7b-v2"),
            endpoint=os.environ.get("EMBED_ENDPOINT", ""),
            dim=dim,
        )
    return EmbeddingProviderConfig(dim=dim)


def _extract_config(remote: bool) -> ExtractionProviderConfig:
    if remote:
        import os

        return ExtractionProviderConfig(
            provider_kind=ExtractorKind.REMOTE,
            model_name=os.environ.get("LLM_MODEL", ""),
            endpoint=os.environ.get("LLM_ENDPOINT", ""),
        )
    return ExtractionProviderConfig()


def _chat_provider(script: str | None):
    if script:
        return ScriptedProvider.from_file(script)
    return RemoteChatProvider()


@click.group()
def main():
    """Precedent-grounded adjudication of driving actions."""


@main.command("build-index")
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--weights", default=None, help="JSON map of node type to weight")
@click.option("--dim", default=64, show_default=True)
@click.option("--remote-embeddings", is_flag=True)
def build_index_cmd(corpus, out, weights, dim, remote_embeddings):
    """Build and persist a precedent index from a corpus file."""
    try:
        type_weights = (
            TypeWeights.from_record(json.loads(weights)) if weights else TypeWeights.uniform()
        )
        index = build_index(read_corpus(corpus), type_weights, _embed_config(remote_embeddings, dim))
        save_index(index, out)
        click.echo(f"indexed {len(index)} graphs -> {out}")
    except Exception as exc:
        _fail(exc)


@main.command("retrieve")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--query", "query_path", required=True, type=click.Path(exists=True))
@click.option("--k", default=3, show_default=True)
@click.option("--class", "class_filter", type=click.Choice(["positive", "negative", "all"]), default="all")
def retrieve_cmd(index_path, query_path, k, class_filter):
    """Top-k precedents for a serialized query graph."""
    try:
        index = load_index(index_path)
        query = deserialize_graph(Path(query_path).read_text(encoding="utf-8").strip())
        filt = None if class_filter == "all" else DataClass(class_filter.upper())
        for result in index.retrieve_top_k(query, k=k, class_filter=filt):
            click.echo(f"{result.graph_id}\t{result.score:.6f}\t{result.data_class.value}")
    except Exception as exc:
        _fail(exc)


@main.command("ingest-crash")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", required=True, type=click.Path())
@click.option("--dim", default=64, show_default=True)
@click.option("--remote", is_flag=True, help="use the remote LLM / embedding providers")
def ingest_crash_cmd(input_path, corpus, dim, remote):
    """Ingest crash narratives (one plain-text file per report)."""
    input_path = Path(input_path)
    files = sorted(input_path.glob("*.txt")) if input_path.is_dir() else [input_path]
    extract, embed = _extract_config(remote), _embed_config(remote, dim)
    try:
        for path in files:
            narrative = CrashNarrative(report_id=path.stem, raw_text=path.read_text(encoding="utf-8"))
            graph = ingest_crash_report(narrative, corpus, extract, embed)
            click.echo(f"ingested {graph.graph_id}")
    except Exception as exc:
        _fail(exc)


@main.command("ingest-log")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", required=True, type=click.Path())
@click.option("--dim", default=64, show_default=True)
@click.option("--remote", is_flag=True)
def ingest_log_cmd(input_path, corpus, dim, remote):
    """Ingest driving-log captures (JSONL of capture records)."""
    extract, embed = _extract_config(remote), _embed_config(remote, dim)
    try:
        with open(input_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                raw = json.loads(line)
                capture = DrivingLogCapture(
                    capture_id=str(raw["capture_id"]),
                    caption=str(raw["caption"]),
                    agent_types=tuple(raw.get("agent_types", ())),
                    relative_positions=tuple(raw.get("relative_positions", ())),
                    map_note=str(raw.get("map_note", "")),
                    image_ref=raw.get("image"),
                )
                graph = ingest_driving_log(capture, corpus, extract, embed)
                click.echo(f"ingested {graph.graph_id}")
    except Exception as exc:
        _fail(exc)


@main.command("corpus-lint")
@click.option("--corpus", required=True, type=click.Path(exists=True))
def corpus_lint_cmd(corpus):
    """Corpus-wide invariant checks."""
    problems = lint_corpus(corpus)
    for problem in problems:
        click.echo(problem, err=True)
    if problems:
        sys.exit(EXIT_VALIDATION)
    click.echo("corpus clean")


def _load_scene(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


@main.command("adjudicate")
@click.option("--engine", required=True, type=click.Choice(["base", "rag", "rag-pos-only", "agentic"]))
@click.option("--index", "index_path", type=click.Path(exists=True))
@click.option("--scene", required=True, type=click.Path(exists=True))
@click.option("--action", required=True)
@click.option("--k", default=3, show_default=True)
@click.option("--max-iter", default=3, show_default=True)
@click.option("--out", type=click.Path())
@click.option("--script", type=click.Path(exists=True), help="scripted provider response file")
def adjudicate_cmd(engine, index_path, scene, action, k, max_iter, out, script):
    """Adjudicate one (scene, action) pair."""
    try:
        raw = _load_scene(scene)
        query = SceneQuery(
            description=str(raw["description"]),
            candidate_action=parse_action(action),
            image_ref=raw.get("image_ref"),
            agent_types=tuple(raw.get("agent_types", ())),
            relative_positions=tuple(raw.get("relative_positions", ())),
            map_note=str(raw.get("map_note", "")),
        )
        kind = EngineKind(engine.upper().replace("-", "_"))
        index = load_index(index_path) if index_path else None
        episode = run_engine(
            kind, query, _chat_provider(script), index=index, k=k, max_iterations=max_iter
        )
        if out:
            episode.save(out)
        click.echo(f"{episode.verdict.value}\t{episode.episode_id}")
    except Exception as exc:
        _fail(exc)


@main.command("eval")
@click.option("--engine", required=True, type=click.Choice(["base", "rag", "rag-pos-only", "agentic"]))
@click.option("--benchmark", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", type=click.Path(exists=True))
@click.option("--episodes-out", type=click.Path())
@click.option("--report-out", required=True, type=click.Path())
@click.option("--k", default=3, show_default=True)
@click.option("--max-iter", default=3, show_default=True)
@click.option("--script", type=click.Path(exists=True))
def eval_cmd(engine, benchmark, index_path, episodes_out, report_out, k, max_iter, script):
    """Run a benchmark through an engine and write the metrics report."""
    try:
        records = load_benchmark(benchmark)
        kind = EngineKind(engine.upper().replace("-", "_"))
        index = load_index(index_path) if index_path else None
        if episodes_out:
            Path(episodes_out).mkdir(parents=True, exist_ok=True)
        predictor = make_predictor(
            kind,
            lambda: _chat_provider(script),
            index=index,
            k=k,
            max_iterations=max_iter,
        )
        report = run_benchmark(
            records, predictor, engine_fingerprint=f"{kind.value}:k={k}", episodes_dir=episodes_out
        )
        save_report(report, report_out)
        click.echo(report.render_table())
    except Exception as exc:
        _fail(exc)


@main.command("eval-compare")
@click.option("--a", "path_a", required=True, type=click.Path(exists=True))
@click.option("--b", "path_b", required=True, type=click.Path(exists=True))
def eval_compare_cmd(path_a, path_b):
    """Signed metric deltas between two reports (b minus a)."""
    try:
        reports = []
        for path in (path_a, path_b):
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
            confusion = {}
            for key, count in raw["confusion"].items():
                true, pred = key.split("->")
                confusion[(OutcomeLabel(true), OutcomeLabel(pred))] = count
            reports.append(
                EvaluationReport(
                    confusion=confusion,
                    n_records=raw["n_records"],
                    engine_fingerprint=raw.get("engine_fingerprint", ""),
                    failures=raw.get("failures", []),
                )
            )
        delta = compare_reports(reports[0], reports[1])
        for label in LABELS:
            d = delta.recall_delta[label]
            click.echo(f"recall {label.value}: {'undefined' if d is None else f'{d:+.1%}'}")
        for (true, pred), d in sorted(delta.confusion_delta.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)):
            if d:
                click.echo(f"confusion {true.value}->{pred.value}: {d:+d}")
    except Exception as exc:
        _fail(exc)


@main.command("serve")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--index", "index_path", type=click.Path(exists=True))
@click.option("--tasks", type=click.Path(exists=True))
@click.option("--media-dir", type=click.Path(exists=True))
@click.option("--script", type=click.Path(exists=True))
def serve_cmd(port, host, index_path, tasks, media_dir, script):
    """Run the HTTP service for adjudication and annotation."""
    import uvicorn

    from .service import create_app

    try:
        store = AnnotationStore(tasks) if tasks else None
        index = load_index(index_path) if index_path else None
        provider_factory = (lambda: _chat_provider(script)) if (script or index) else (lambda: RemoteChatProvider())
        app = create_app(store=store, index=index, provider_factory=provider_factory, media_dir=media_dir)
        uvicorn.run(app, host=host, port=port)
    except Exception as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
