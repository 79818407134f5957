"""Acceptance suite: one test per release criterion, each printing a verdict.

Everything here runs with scripted backends only; no network access and no
frontend are required.
"""

from __future__ import annotations

import json
import random
import time
from collections import Counter

import pytest
from click.testing import CliRunner

from conftest import (
    FIXTURES,
    GOLDEN,
    GuidanceAwareAdversary,
    load_doc,
    random_workflow_source,
    response_output,
    tool_output,
)
from pdlagent.actions import BotResponse, ToolCall, ToolResult
from pdlagent.cli import main as cli_main
from pdlagent.controllers import ControllerConfig
from pdlagent.pdl import (
    PdlDocument,
    errors_only,
    parse_pdl,
    render_for_prompt,
    validate,
)
from pdlagent.runtime import (
    PdlAgentPolicy,
    ScriptedBackend,
    ToolRegistry,
    render_agent_prompt,
    render_judge_prompt,
    render_react_prompt,
    render_user_sim_prompt,
    step,
)
from pdlagent.simeval import (
    EchoReferencePolicy,
    OowInjector,
    OowKind,
    OowSpec,
    ReferenceSession,
    compute_report,
    evaluate_turn,
    judge_session,
)
from pdlagent.state import SessionState, WorkflowBundle

from test_metrics import naive_recount, random_records


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Acceptance runs on scripted backends only; any HTTP attempt is a failure."""

    def refuse(*args, **kwargs):
        raise AssertionError("acceptance criteria must not touch the network")

    import httpx

    monkeypatch.setattr(httpx, "post", refuse)
    monkeypatch.setattr(httpx, "get", refuse)
    monkeypatch.setattr(httpx.Client, "send", refuse)


def announce(name: str, elapsed: float, budget: float) -> None:
    print(f"PASS {name} ({elapsed:.2f}s, budget {budget:.0f}s)")
    assert elapsed < budget, f"{name} exceeded its runtime budget: {elapsed:.2f}s >= {budget}s"


# -- criterion: PDL fidelity ------------------------------------------------------

EXPECTED_PRECONDITIONS = {
    "check_hospital": (),
    "check_department": ("check_hospital",),
    "query_appointment": ("check_hospital", "check_department"),
    "recommend_other_hospitals": ("check_department",),
    "register_hospital": ("query_appointment",),
    "register_other_hospital": ("recommend_other_hospitals",),
    "hospital_not_found": (),
    "department_not_found": (),
    "no_available_slots": (),
    "appointment_successful": (),
    "appointment_failed": (),
    "other_hospital_appointment_successful": (),
    "other_hospital_appointment_failed": (),
    "answer_out_of_workflow_questions": (),
    "request_information": (),
}


def test_acceptance_pdl_fidelity():
    start = time.monotonic()
    doc = load_doc("hospital.pdl")
    assert len(doc.api_nodes) == 6
    assert len(doc.answer_nodes) == 9
    for node in doc.nodes():
        assert node.preconditions == EXPECTED_PRECONDITIONS[node.name], node.name
    assert errors_only(validate(doc)) == []
    reparsed = parse_pdl(render_for_prompt(doc))
    assert isinstance(reparsed, PdlDocument)
    assert reparsed == doc
    announce("PDL fidelity", time.monotonic() - start, budget=1.0)


# -- criterion: dependency soundness ------------------------------------------------


def _unmet_execution_count(history, graph) -> int:
    """Independent fold: successful executions with unmet preconditions."""
    done: Counter = Counter()
    bad = 0
    pending = None
    for action in history:
        if isinstance(action, ToolCall):
            pending = action
        elif isinstance(action, ToolResult):
            ok = pending is not None and pending.name == action.name and "error" not in action.payload
            if ok:
                have = {n for n, c in done.items() if c > 0}
                if action.name in graph.nodes and not set(graph.preconditions(action.name)) <= have:
                    bad += 1
                done[action.name] += 1
            pending = None
        elif isinstance(action, BotResponse) and action.answer_node:
            done[action.answer_node] += 1
    return bad


def test_acceptance_dependency_soundness():
    start = time.monotonic()
    rng = random.Random(20240731)
    total_sessions = 1000
    total_violations = 0
    for _ in range(total_sessions):
        doc = parse_pdl(random_workflow_source(rng))
        assert isinstance(doc, PdlDocument)
        bundle = WorkflowBundle.from_doc(doc)
        registry = ToolRegistry.from_document(
            doc, {n.name: {"default": {"value": 1}} for n in doc.api_nodes}
        )
        api_names = [n.name for n in doc.api_nodes]

        # adversarial script: random (frequently blocked) calls, then a reply
        outputs = []
        for _ in range(rng.randint(1, 6)):
            name = rng.choice(api_names)
            outputs.append(tool_output(name, {f"arg_{name.split('_')[1]}": "x"}))
        outputs.append(response_output("done"))
        backend = ScriptedBackend(responses=outputs, default=response_output("done"))
        policy = PdlAgentPolicy(doc=doc, registry=registry, backend=backend)

        state = SessionState(workflow=bundle)
        state.add_user_message("go")
        cfg = ControllerConfig(max_policy_retries_per_turn=4, max_tool_iterations_per_turn=6)
        step(state, policy, registry, cfg)
        total_violations += _unmet_execution_count(state.history, bundle.graph)
    assert total_violations == 0
    announce(
        f"dependency soundness over {total_sessions} random workflows",
        time.monotonic() - start,
        budget=30.0,
    )


# -- criterion: ablation direction ----------------------------------------------------


def _ablation_suite(mode: str) -> tuple[int, float]:
    """Run the fixed adversarial fixtures under one controller configuration.

    Returns (total dependency violations, mean task progress).
    """
    doc = load_doc("ablation_chain.pdl")
    bundle = WorkflowBundle.from_doc(doc)
    cfg = ControllerConfig.ablation(mode)
    workflow_info = render_for_prompt(doc)
    violations = 0
    progress_values = []

    def run_fixture(outputs, required, swaps=None):
        nonlocal violations
        registry = ToolRegistry.from_document(doc, FIXTURES / "ablation_chain.tools.json").fork()
        backend = ScriptedBackend(responses=list(outputs), default=response_output("done"))
        if swaps:
            policy = GuidanceAwareAdversary(doc, registry, backend, swaps=swaps)
        else:
            policy = PdlAgentPolicy(doc=doc, registry=registry, backend=backend)
        state = SessionState(workflow=bundle)
        state.add_user_message("run the steps")
        step(state, policy, registry, cfg)
        violations += _unmet_execution_count(state.history, bundle.graph)
        transcript = ReferenceSession.from_history(state.history)
        progress_values.append(
            judge_session(workflow_info, transcript, required, judge_backend=None).task_progress
        )

    # plain adversary: leads with an illegal jump, then recovers in order
    run_fixture(
        [
            tool_output("step_three", {}),
            tool_output("step_one", {}),
            tool_output("step_two", {}),
            tool_output("step_three", {}),
            response_output("all steps complete", answer_node="done"),
        ],
        required=["step_one", "step_two", "step_three"],
    )
    # guidance-aware adversary: swaps a blocked call when soft control is present
    run_fixture(
        [
            tool_output("step_two", {}),
            tool_output("step_two", {}),
            response_output("finished", answer_node="done"),
        ],
        required=["step_one", "step_two"],
        swaps={"step_two": "step_one"},
    )
    return violations, sum(progress_values) / len(progress_values)


def test_acceptance_ablation_direction():
    start = time.monotonic()
    full_violations, full_progress = _ablation_suite("full")
    no_post_violations, no_post_progress = _ablation_suite("no-post")
    no_post_pre_violations, no_post_pre_progress = _ablation_suite("no-post-pre")

    assert full_violations == 0
    assert no_post_violations > full_violations
    assert no_post_pre_violations >= no_post_violations
    assert full_progress >= no_post_progress >= no_post_pre_progress

    # determinism: the suite reproduces itself exactly
    assert _ablation_suite("no-post-pre") == (no_post_pre_violations, no_post_pre_progress)
    print(
        "  violations: full=%d, no-post=%d, no-post-pre=%d; "
        "progress: full=%.2f, no-post=%.2f, no-post-pre=%.2f"
        % (full_violations, no_post_violations, no_post_pre_violations,
           full_progress, no_post_progress, no_post_pre_progress)
    )
    announce("ablation direction", time.monotonic() - start, budget=10.0)


# -- criterion: metric oracle equivalence ------------------------------------------------


def test_acceptance_metric_oracle_equivalence():
    start = time.monotonic()
    rng = random.Random(7)
    for _ in range(200):
        records = random_records(rng)
        reports = compute_report(records)
        for split, report in reports.items():
            oracle = naive_recount(records, split)
            computed = (
                report.pass_rate,
                report.success_rate,
                report.task_progress,
                report.tool_precision,
                report.tool_recall,
                report.tool_f1,
            )
            for ours, theirs in zip(computed, oracle):
                assert abs(ours - theirs) < 1e-12
    announce("metric oracle equivalence over 200 record sets", time.monotonic() - start, budget=5.0)


# -- criterion: turn-level replay ----------------------------------------------------------


class PerturbedEchoPolicy(EchoReferencePolicy):
    """Echo, except one slot value of the second tool turn is wrong."""

    def __post_init__(self):
        super().__post_init__()
        perturbed = []
        tool_seen = 0
        for output in self._outputs:
            if "Action Input:" in output:
                tool_seen += 1
                if tool_seen == 2:
                    output = output.replace('"StartTimeHour": "16"', '"StartTimeHour": "17"')
            perturbed.append(output)
        self._outputs = perturbed


def test_acceptance_turn_level_replay():
    start = time.monotonic()
    reference = ReferenceSession.load(FIXTURES / "star_reference.jsonl")
    bundle = WorkflowBundle.from_doc(load_doc("apartment.pdl"))

    records = evaluate_turn(bundle, reference, EchoReferencePolicy(reference=reference))
    reports = compute_report(records)
    assert reports["ALL"].pass_rate == 1.0
    assert reports["ALL"].tool_f1 == 1.0

    perturbed = evaluate_turn(bundle, reference, PerturbedEchoPolicy(reference=reference))
    perturbed_reports = compute_report(perturbed)
    # 9 bot turns, one of which (the second tool call) no longer matches
    assert perturbed_reports["ALL"].pass_rate == pytest.approx(8 / 9, abs=1e-12)
    # 7 slots per call, 2 calls; one slot value wrong on the second call
    assert perturbed_reports["ALL"].tool_precision == pytest.approx(13 / 14, abs=1e-12)
    assert perturbed_reports["ALL"].tool_recall == pytest.approx(13 / 14, abs=1e-12)
    assert perturbed_reports["ALL"].tool_f1 == pytest.approx(13 / 14, abs=1e-12)
    announce("turn-level replay", time.monotonic() - start, budget=1.0)


# -- criterion: OOW machinery -----------------------------------------------------------


def test_acceptance_oow_machinery():
    start = time.monotonic()
    specs = [
        OowSpec(kind=OowKind.INTENT_SWITCHING, probability=0.2),
        OowSpec(kind=OowKind.PROCEDURE_JUMPING, probability=0.2),
        OowSpec(kind=OowKind.IRRELEVANT_ANSWERING, probability=0.2),
    ]
    patterns = []
    for _ in range(2):
        injector = OowInjector(specs, seed=123)
        fired = []
        for turn in range(1, 101):
            spec = injector.check(turn)
            fired.append(spec.kind.value if spec else None)
        patterns.append(fired)
    assert patterns[0] == patterns[1]
    kinds = {k for k in patterns[0] if k is not None}
    assert kinds  # the pattern actually fires
    assert kinds <= {"intent_switching", "procedure_jumping", "irrelevant_answering"}

    reference = ReferenceSession.load(FIXTURES / "star_reference.jsonl")
    bundle = WorkflowBundle.from_doc(load_doc("apartment.pdl"))
    records = evaluate_turn(bundle, reference, EchoReferencePolicy(reference=reference))
    reports = compute_report(records)
    assert (
        reports["IW"].counts["turns"] + reports["OOW"].counts["turns"]
        == reports["ALL"].counts["turns"]
    )
    assert reports["OOW"].counts["turns"] > 0
    announce("OOW machinery", time.monotonic() - start, budget=5.0)


# -- criterion: end-to-end determinism ------------------------------------------------------


def test_acceptance_end_to_end_determinism(tmp_path):
    start = time.monotonic()
    runner = CliRunner()
    args = [
        "simulate",
        str(FIXTURES / "hospital.pdl"),
        "--sessions", "2",
        "--seed", "7",
        "--profile", str(FIXTURES / "profile_michael.json"),
        "--backend", f"scripted:{FIXTURES / 'agent_script_happy.json'}",
        "--user-backend", f"scripted:{FIXTURES / 'user_script_happy.json'}",
        "--judge", f"scripted:{FIXTURES / 'judge_script_yes.json'}",
    ]
    for out in (tmp_path / "a", tmp_path / "b"):
        result = runner.invoke(cli_main, args + ["--out", str(out)])
        assert result.exit_code == 0, result.output
    for name in ("session_000.jsonl", "session_001.jsonl"):
        bytes_a = (tmp_path / "a" / "transcripts" / name).read_bytes()
        bytes_b = (tmp_path / "b" / "transcripts" / name).read_bytes()
        assert bytes_a == bytes_b
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report["ALL"]["success_rate"] == 1.0
    assert report["ALL"]["task_progress"] == 1.0
    announce("end-to-end determinism", time.monotonic() - start, budget=5.0)


# -- criterion: prompt conformance ------------------------------------------------------------


def test_acceptance_prompt_conformance():
    start = time.monotonic()
    doc = load_doc("hospital.pdl")
    bundle = WorkflowBundle.from_doc(doc)
    state = SessionState(workflow=bundle)
    state.add_user_message("hello")

    agent_prompt = render_agent_prompt(doc, state, guidance=[], scratch=[])
    react_prompt = render_react_prompt(
        task_description=doc.name,
        workflow_text="flowchart TD",
        doc=doc,
        state=state,
        current_time="2024-01-01 09:00:00",
    )
    user_prompt = render_user_sim_prompt("an assistant", "**Persona**: tester", "USER: hi")
    judge_prompt = render_judge_prompt("wf", "session", "ref", "pred")

    rendered = {
        "flowagent_headers.txt": agent_prompt,
        "react_headers.txt": react_prompt,
        "user_sim_headers.txt": user_prompt,
        "judge_headers.txt": judge_prompt,
    }
    for golden_name, prompt in rendered.items():
        for line in (GOLDEN / golden_name).read_text(encoding="utf-8").splitlines():
            assert line in prompt, f"{golden_name}: missing golden line {line!r}"
    announce("prompt conformance", time.monotonic() - start, budget=1.0)
