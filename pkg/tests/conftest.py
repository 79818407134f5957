"""Shared fixtures: parsed workflow fixtures, registries, generators."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from pdlagent.pdl import DependencyGraph, PdlDocument, parse_pdl
from pdlagent.runtime import ScriptedBackend, ToolRegistry
from pdlagent.state import WorkflowBundle

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def load_doc(name: str) -> PdlDocument:
    parsed = parse_pdl((FIXTURES / name).read_text(encoding="utf-8"))
    assert isinstance(parsed, PdlDocument), f"fixture {name} failed to parse: {parsed}"
    return parsed


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def hospital_doc() -> PdlDocument:
    return load_doc("hospital.pdl")


@pytest.fixture(scope="session")
def hospital_bundle(hospital_doc) -> WorkflowBundle:
    return WorkflowBundle.from_doc(hospital_doc)


@pytest.fixture()
def hospital_registry(hospital_doc) -> ToolRegistry:
    return ToolRegistry.from_document(hospital_doc, FIXTURES / "hospital.tools.json")


@pytest.fixture(scope="session")
def fig2_doc() -> PdlDocument:
    return load_doc("fig2_chain.pdl")


@pytest.fixture(scope="session")
def fig2_bundle(fig2_doc) -> WorkflowBundle:
    return WorkflowBundle.from_doc(fig2_doc)


@pytest.fixture(scope="session")
def apartment_doc() -> PdlDocument:
    return load_doc("apartment.pdl")


@pytest.fixture(scope="session")
def apartment_bundle(apartment_doc) -> WorkflowBundle:
    return WorkflowBundle.from_doc(apartment_doc)


@pytest.fixture()
def apartment_registry(apartment_doc) -> ToolRegistry:
    return ToolRegistry.from_document(apartment_doc, FIXTURES / "apartment.tools.json")


def scripted(*responses: str, default: str | None = None) -> ScriptedBackend:
    return ScriptedBackend(responses=list(responses), default=default)


def tool_output(name: str, args: dict) -> str:
    return f"Thought: scripted\nAction: {name}\nAction Input: {json.dumps(args)}"


def response_output(text: str, answer_node: str | None = None) -> str:
    label = f"Answer: {answer_node}\n" if answer_node else ""
    return f"Thought: scripted\n{label}Response: {text}"


# --------------------------------------------------------------------------
# Random DAG generation (nodes are edges-from-earlier-only, hence acyclic)


def random_graph(rng: random.Random, max_nodes: int = 8) -> DependencyGraph:
    count = rng.randint(1, max_nodes)
    names = [f"n{i}" for i in range(count)]
    edges = {}
    for i, name in enumerate(names):
        pool = names[:i]
        k = rng.randint(0, len(pool))
        edges[name] = frozenset(rng.sample(pool, k))
    return DependencyGraph(nodes=frozenset(names), edges=edges)


def random_workflow_source(rng: random.Random, max_nodes: int = 8) -> str:
    """A full parseable workflow with random precondition structure."""
    count = rng.randint(1, max_nodes)
    names = [f"step_{i}" for i in range(count)]
    lines = [
        "Name: Random Workflow",
        "Desc: Randomly generated workflow for property testing.",
        "",
        "APIs:",
    ]
    for i, name in enumerate(names):
        pool = names[:i]
        preconditions = rng.sample(pool, rng.randint(0, len(pool)))
        lines.append(f"  - name: {name}")
        lines.append(f"    request: [arg_{i}]")
        lines.append(f"    response: [out_{i}]")
        lines.append(f"    precondition: [{', '.join(preconditions)}]")
    lines.append("")
    lines.append("ANSWERs:")
    lines.append("  - name: done")
    lines.append("")
    lines.append("Procedure: |")
    for i, name in enumerate(names):
        lines.append(f"  [out_{i}] = API.{name}([arg_{i}])")
    lines.append("  ANSWER.done()")
    return "\n".join(lines) + "\n"


class GuidanceAwareAdversary:
    """Scripted policy that skips planned calls the prompt marks as blocked.

    Entries are raw template outputs; before emitting a tool call, the
    policy checks the rendered prompt's "Blocked nodes:" line and falls
    through to its next entry instead when the target is listed there.
    """

    agent_kind = "scripted-adversary"

    def __init__(self, doc, registry, backend, swaps: dict[str, str] | None = None):
        from pdlagent.runtime import PdlAgentPolicy

        self._inner = PdlAgentPolicy(doc=doc, registry=registry, backend=backend)
        self.swaps = swaps or {}

    def propose(self, state, guidance, scratch) -> str:
        raw = self._inner.propose(state, guidance, scratch)
        blocked_line = ""
        for item in guidance:
            for line in item.guidance_text.splitlines():
                if line.startswith("Blocked nodes:"):
                    blocked_line = line
        for target, replacement in self.swaps.items():
            if f"Action: {target}" in raw and f"{target} (" in blocked_line:
                raw = raw.replace(f"Action: {target}", f"Action: {replacement}", 1)
        return raw
