"""Versioned prompt templates for the reasoning engines.

Block order is fixed (goal, scene data, retrieved precedents, task,
label request); the wording is plain text and editable.
"""

from __future__ import annotations

from .graphs import DataClass
from .index import RetrievalResult, PrecedentIndex

PROMPT_VERSION = "1"

STOP_TOKEN = "FINALIZE"

LABEL_INSTRUCTIONS = (
    "Classify the action as UNSAFE (would likely cause a collision, rule "
    "violation, or hazardous interaction), SAFE (legal and physically safe "
    "but not what a reasonable driver would choose), or REASONABLE (safe and "
    "likely to be chosen by a reasonable driver). Explain your reasoning, "
    "then end your reply with the single label word."
)

SYSTEM_GOAL = (
    "You are the decision-making brain of an autonomous vehicle. You judge "
    "the legality, safety, and efficiency of candidate ego actions in a "
    "driving scene, citing retrieved precedent scenarios when provided."
)


def render_scene_block(description: str, metadata: str = "", image_ref: str | None = None) -> str:
    lines = [description.strip()]
    if image_ref:
        lines.append(f"[scene image: {image_ref}]")
    else:
        lines.append("[image unavailable]")
    if metadata:
        lines.append("Following is the meta-data:")
        lines.append(metadata.strip())
    return "\n".join(lines)


def render_precedent(result: RetrievalResult, index: PrecedentIndex, rank: int) -> str:
    graph = index.graph(result.graph_id)
    tag = "POSITIVE" if graph.data_class is DataClass.POSITIVE else "NEGATIVE"
    lines = [f"Precedent {rank} [{tag}] (similarity {result.score:.4f}):"]
    for node in graph.nodes.values():
        lines.append(f"  {node.name}: {node.description}")
    return "\n".join(lines)


def base_prompt(scene_block: str, action: str) -> str:
    return (
        f"{scene_block}\n\n"
        f"Proposed ego action: {action}\n\n"
        f"{LABEL_INSTRUCTIONS}"
    )


def rag_prompt(scene_block: str, action: str, precedent_blocks: list[str]) -> str:
    precedents = "\n\n".join(precedent_blocks) if precedent_blocks else "(no precedents retrieved)"
    return (
        f"{scene_block}\n\n"
        f"Retrieved similar scenarios:\n{precedents}\n\n"
        f"Proposed ego action: {action}\n\n"
        "Think step by step, drawing analogies to the retrieved scenarios "
        f"before deciding. {LABEL_INSTRUCTIONS}"
    )


def proposal_prompt(scene_block: str, candidate: str, prior_trials: list[str]) -> str:
    history = "\n".join(prior_trials) if prior_trials else "(none yet)"
    return (
        f"{scene_block}\n\n"
        f"Original candidate action: {candidate}\n\n"
        f"Counterfactuals explored so far:\n{history}\n\n"
        "Propose ONE new physically possible alternative action that differs "
        "from the candidate and from every counterfactual above. Reply with "
        "the action phrase alone, or reply with the single word "
        f"{STOP_TOKEN} if further exploration is unnecessary."
    )


def trial_evaluation_prompt(scene_block: str, action: str, precedent_blocks: list[str]) -> str:
    return rag_prompt(scene_block, action, precedent_blocks)


def final_prompt(
    scene_block: str,
    candidate: str,
    trial_blocks: list[str],
    precedent_blocks: list[str],
) -> str:
    trials = "\n\n".join(trial_blocks) if trial_blocks else "(no counterfactual trials)"
    precedents = "\n\n".join(precedent_blocks) if precedent_blocks else "(no precedents retrieved)"
    return (
        f"{scene_block}\n\n"
        f"Retrieved similar scenarios:\n{precedents}\n\n"
        f"Counterfactual deliberation:\n{trials}\n\n"
        f"Proposed ego action: {candidate}\n\n"
        "Weigh the candidate action against the explored alternatives and "
        f"the precedent evidence. {LABEL_INSTRUCTIONS}"
    )
