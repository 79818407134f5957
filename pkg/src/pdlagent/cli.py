"""Command-line interface: validation, chat, batch simulation, evaluation."""

from __future__ import annotations

import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Optional

import click

from .actions import ControllerFeedback
from .baselines import ReactPolicy, format_for_agent_kind, render_workflow
from .config import controller_config_from, load_config, resolve_backend_spec
from .controllers import ControllerConfig
from .pdl import (
    accessible_nodes,
    errors_only,
    has_errors,
    parse_pdl,
    render_for_prompt,
    validate,
)
from .runtime import PdlAgentPolicy, backend_from_spec
from .runtime.session import step
from .runtime.tools import ToolRegistry
from .simeval import (
    EchoReferencePolicy,
    OowInjector,
    OowKind,
    OowSpec,
    ReferenceSession,
    UserProfile,
    UserSimulator,
    compute_report,
    evaluate_sessions,
    evaluate_turn,
    random_kind_spec,
    render_markdown_table,
    report_to_json,
    required_nodes_from_file,
    run_session,
)
from .state import WorkflowBundle

EXIT_OK = 0
EXIT_FAILURE = 1


def _load_document(path: str):
    source = Path(path).read_text(encoding="utf-8")
    parsed = parse_pdl(source)
    if isinstance(parsed, list):
        for diagnostic in parsed:
            click.echo(str(diagnostic), err=True)
        sys.exit(EXIT_FAILURE)
    return parsed


def _load_valid_document(path: str):
    doc = _load_document(path)
    diagnostics = validate(doc)
    if has_errors(diagnostics):
        for diagnostic in errors_only(diagnostics):
            click.echo(str(diagnostic), err=True)
        sys.exit(EXIT_FAILURE)
    return doc


def _tools_for(workflow_path: str, tools: Optional[str]):
    if tools:
        return tools
    sidecar = Path(workflow_path).with_suffix(".tools.json")
    return str(sidecar) if sidecar.exists() else None


def _agent_default_cfg(cfg: ControllerConfig, agent: str, controller_flags: dict) -> ControllerConfig:
    """Prompt-only baselines run with controllers off unless explicitly set."""
    if agent.startswith("react-") and controller_flags.get("enabled_pre") is None \
            and controller_flags.get("enabled_post") is None:
        return cfg.with_overrides(enabled_pre=frozenset(), enabled_post=frozenset())
    return cfg


def _build_policy(agent: str, doc, registry, backend, reference=None):
    if agent == "echo":
        if reference is None:
            raise click.UsageError("the echo agent is only available for turn evaluation")
        return EchoReferencePolicy(reference=reference)
    if backend is None:
        raise click.UsageError(f"agent {agent!r} requires --backend")
    if agent == "flowagent":
        return PdlAgentPolicy(doc=doc, registry=registry, backend=backend)
    if agent.startswith("react-"):
        rendered = render_workflow(doc, format_for_agent_kind(agent))
        return ReactPolicy(doc=doc, rendered=rendered, registry=registry, backend=backend)
    raise click.UsageError(f"unknown agent kind {agent!r}")


def _stub_document_for(reference: ReferenceSession):
    """Minimal workflow covering a reference's tool calls, for judge context."""
    names = []
    for turn in reference.turns:
        if turn.tool_call is not None and turn.tool_call.name not in names:
            names.append(turn.tool_call.name)
    lines = ["Name: Reference Session Tools", "Desc: Synthesized from the reference session.", ""]
    if names:
        lines.append("APIs:")
        for name in names:
            lines.append(f"  - name: {name}")
            lines.append("    request: []")
            lines.append("    response: []")
            lines.append("    precondition: []")
    else:
        lines.append("APIs: []")
    lines.extend(["", "ANSWERs: []", "", "Procedure: |"])
    for name in names:
        lines.append(f"  API.{name}()")
    if not names:
        lines.append("  # no tool calls in the reference")
    doc = parse_pdl("\n".join(lines) + "\n")
    assert not isinstance(doc, list)
    return doc


controller_options = [
    click.option("--max-identical-api-calls", type=int, default=None, help="Identical tool-call limit."),
    click.option("--max-total-turns", type=int, default=None, help="User-turn limit per session."),
    click.option("--max-policy-retries", "max_policy_retries_per_turn", type=int, default=None,
                 help="Retry budget per turn for denied/unparseable outputs."),
    click.option("--enabled-pre", default=None, help="Comma list of pre-decision controllers ('' disables all)."),
    click.option("--enabled-post", default=None, help="Comma list of post-decision controllers ('' disables all)."),
]


def with_controller_options(command):
    for option in reversed(controller_options):
        command = option(command)
    return command


@click.group()
def main():
    """Workflow engine: parse PDL, run guided agents, simulate, evaluate."""


@main.command("validate")
@click.argument("workflow", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit diagnostics as a JSON array.")
def validate_cmd(workflow: str, as_json: bool):
    """Check a .pdl file; exit 0 iff there are no errors."""
    source = Path(workflow).read_text(encoding="utf-8")
    parsed = parse_pdl(source)
    diagnostics = parsed if isinstance(parsed, list) else validate(parsed)
    if as_json:
        click.echo(json.dumps([d.to_json() for d in diagnostics], indent=2))
    else:
        for diagnostic in diagnostics:
            click.echo(str(diagnostic))
        if not diagnostics:
            click.echo("OK: no diagnostics")
    sys.exit(EXIT_FAILURE if has_errors(diagnostics) else EXIT_OK)


@main.command("chat")
@click.argument("workflow", type=click.Path(exists=True, dir_okay=False))
@click.option("--agent", default="flowagent", show_default=True)
@click.option("--backend", default=None, help="Backend spec: scripted:<path> or openai:<model>.")
@click.option("--tools", default=None, type=click.Path(exists=True), help="Tool behavior fixture JSON.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@with_controller_options
def chat_cmd(workflow, agent, backend, tools, config_path, **controller_flags):
    """Interactive terminal session with a per-turn state summary."""
    config = load_config(config_path)
    cfg = _agent_default_cfg(controller_config_from(config, **controller_flags), agent, controller_flags)
    doc = _load_valid_document(workflow)
    bundle = WorkflowBundle.from_doc(doc)
    registry = ToolRegistry.from_document(doc, _tools_for(workflow, tools))
    backend_obj = backend_from_spec(resolve_backend_spec(backend, config))
    policy = _build_policy(agent, doc, registry, backend_obj)
    from .state import SessionState

    state = SessionState(workflow=bundle)
    click.echo(f"[{doc.name}] chat started; empty line or 'exit' quits")
    while True:
        try:
            text = click.prompt("you", prompt_suffix="> ", default="", show_default=False)
        except (EOFError, KeyboardInterrupt, click.Abort):
            break
        if not text or text.strip().lower() in {"exit", "quit"}:
            break
        state.add_user_message(text)

        def on_action(action):
            if isinstance(action, ControllerFeedback):
                click.echo(click.style(f"  [{action.controller_id}] {action.text}", fg="yellow"))

        response, _ = step(state, policy, registry, cfg, on_action=on_action)
        click.echo(f"bot> {response.text}")
        executed = state.executed_set() & bundle.graph.nodes
        accessible, blocked = accessible_nodes(bundle.graph, executed)
        click.echo(
            f"  state: executed={sorted(executed) or '[]'} accessible={len(accessible)} blocked={len(blocked)}"
        )


@main.command("simulate")
@click.argument("workflow", type=click.Path(exists=True, dir_okay=False))
@click.option("--sessions", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--oow-prob", default=0.0, show_default=True, type=float)
@click.option("--oow-kind", default=None, type=click.Choice([k.value for k in OowKind]),
              help="Pin all OOW interventions to one kind.")
@click.option("--profile", "profile_path", required=True, type=click.Path(exists=True))
@click.option("--agent", default="flowagent", show_default=True)
@click.option("--backend", default=None, help="Agent backend spec.")
@click.option("--user-backend", default=None, help="User-simulator backend spec.", required=True)
@click.option("--judge", default=None, help="Judge backend spec (optional).")
@click.option("--tools", default=None, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@with_controller_options
def simulate_cmd(workflow, sessions, seed, oow_prob, oow_kind, profile_path, agent, backend,
                 user_backend, judge, tools, out_dir, config_path, **controller_flags):
    """Run simulated sessions; write transcripts, a report, and a manifest."""
    config = load_config(config_path)
    cfg = _agent_default_cfg(controller_config_from(config, **controller_flags), agent, controller_flags)
    doc = _load_valid_document(workflow)
    bundle = WorkflowBundle.from_doc(doc)
    tools_source = _tools_for(workflow, tools)
    profile = UserProfile.from_file(profile_path)
    required = required_nodes_from_file(profile_path)

    out = Path(out_dir)
    transcripts_dir = out / "transcripts"
    events_dir = out / "events"
    transcripts_dir.mkdir(parents=True, exist_ok=True)
    events_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    if manifest_path.exists():
        raise click.UsageError(f"run directory {out} already holds a manifest; runs are append-only")

    agent_spec = resolve_backend_spec(backend, config)
    user_spec = resolve_backend_spec(user_backend, config)
    judge_spec = resolve_backend_spec(judge, config)

    transcripts = []
    backend_identity = None
    for index in range(sessions):
        registry = ToolRegistry.from_document(doc, tools_source).fork()
        agent_backend = backend_from_spec(agent_spec)
        backend_identity = getattr(agent_backend, "identity", None)
        policy = _build_policy(agent, doc, registry, agent_backend)
        if oow_prob > 0.0 and oow_kind:
            specs = [OowSpec(kind=OowKind(oow_kind), probability=oow_prob)]
        else:
            specs = random_kind_spec(oow_prob)
        injector = OowInjector(specs, seed=seed * 1000 + index)
        user_sim = UserSimulator(
            profile=profile,
            backend=backend_from_spec(user_spec),
            injector=injector,
            assistant_description=doc.desc,
        )
        session_id = f"session_{index:03d}"
        result = run_session(bundle, policy, user_sim, registry, cfg, session_id=session_id)
        result.transcript.save(transcripts_dir / f"{session_id}.jsonl")
        with (events_dir / f"{session_id}.events.jsonl").open("w", encoding="utf-8") as handle:
            for event in result.events:
                handle.write(json.dumps(event, ensure_ascii=False) + "\n")
        transcripts.append((session_id, result.transcript))
        click.echo(f"{session_id}: {result.end_reason}, turns={result.state.user_turns}")

    judge_backend = backend_from_spec(judge_spec)
    records = evaluate_sessions(
        transcripts,
        workflow_info=render_for_prompt(doc),
        required_nodes=required,
        judge_backend=judge_backend,
        objectives=profile.needs,
    )
    reports = compute_report(records)
    (out / "report.json").write_text(report_to_json(reports), encoding="utf-8")
    (out / "report.md").write_text(render_markdown_table({agent: reports}), encoding="utf-8")

    manifest = {
        "run_id": f"{hashlib.sha256(render_for_prompt(doc).encode()).hexdigest()[:12]}-{agent}-seed{seed}",
        "workflow": {"path": str(workflow), "sha256": hashlib.sha256(Path(workflow).read_bytes()).hexdigest()},
        "agent": agent,
        "backend_identity": backend_identity,
        "controllers": {
            "max_identical_api_calls": cfg.max_identical_api_calls,
            "max_total_turns": cfg.max_total_turns,
            "max_policy_retries_per_turn": cfg.max_policy_retries_per_turn,
            "enabled_pre": sorted(cfg.enabled_pre),
            "enabled_post": sorted(cfg.enabled_post),
        },
        "seed": seed,
        "sessions": sessions,
        "required_nodes": required,
        "report": "report.json",
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    click.echo(f"wrote {sessions} transcripts and report to {out}")


@main.group("evaluate")
def evaluate_group():
    """Turn-level and session-level evaluation."""


@evaluate_group.command("turn")
@click.option("--reference", "reference_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--workflow", "workflow_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Workflow file; synthesized from the reference's tool calls when omitted.")
@click.option("--agent", default="echo", show_default=True)
@click.option("--backend", default=None)
@click.option("--judge", default=None, help="Judge backend spec; omitted = exact text match.")
@click.option("--tools", default=None, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--fail-under-pass-rate", type=float, default=None)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@with_controller_options
def evaluate_turn_cmd(reference_path, workflow_path, agent, backend, judge, tools, out_path,
                      fail_under_pass_rate, config_path, **controller_flags):
    """Replay reference prefixes and score each predicted turn."""
    config = load_config(config_path)
    cfg = _agent_default_cfg(controller_config_from(config, **controller_flags), agent, controller_flags)
    reference = ReferenceSession.load(reference_path)
    if workflow_path:
        doc = _load_valid_document(workflow_path)
        registry = ToolRegistry.from_document(doc, _tools_for(workflow_path, tools))
    else:
        doc = _stub_document_for(reference)
        registry = ToolRegistry.from_document(doc, tools)
    bundle = WorkflowBundle.from_doc(doc)
    backend_obj = backend_from_spec(resolve_backend_spec(backend, config))
    policy = _build_policy(agent, doc, registry, backend_obj, reference=reference)
    judge_backend = backend_from_spec(resolve_backend_spec(judge, config))

    records = evaluate_turn(bundle, reference, policy, judge_backend=judge_backend, cfg=cfg)
    reports = compute_report(records)
    output = report_to_json(reports)
    if out_path:
        Path(out_path).write_text(output, encoding="utf-8")
    click.echo(output)
    click.echo(render_markdown_table({agent: reports}))
    if fail_under_pass_rate is not None and reports["ALL"].pass_rate < fail_under_pass_rate:
        sys.exit(EXIT_FAILURE)


@evaluate_group.command("session")
@click.option("--transcripts", "transcripts_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--workflow", "workflow_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Workflow file; synthesized from the transcripts' tool calls when omitted.")
@click.option("--required", "required_csv", default=None, help="Comma list of required nodes.")
@click.option("--profile", "profile_path", default=None, type=click.Path(exists=True),
              help="Profile fixture supplying required_nodes.")
@click.option("--judge", default=None)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def evaluate_session_cmd(transcripts_dir, workflow_path, required_csv, profile_path, judge, out_path, config_path):
    """Judge finished transcripts and compute session-level metrics."""
    config = load_config(config_path)
    if required_csv:
        required = [part.strip() for part in required_csv.split(",") if part.strip()]
    elif profile_path:
        required = required_nodes_from_file(profile_path)
    else:
        click.echo("warning: no --required/--profile given; task_progress is defined as 1.0", err=True)
        required = []

    transcripts = []
    for path in sorted(Path(transcripts_dir).glob("*.jsonl")):
        if path.name.endswith(".events.jsonl"):
            continue
        transcripts.append((path.stem, ReferenceSession.load(path)))
    if not transcripts:
        raise click.UsageError(f"no transcripts found under {transcripts_dir}")

    if workflow_path:
        doc = _load_valid_document(workflow_path)
    else:
        merged = ReferenceSession(turns=tuple(t for _, session in transcripts for t in session.turns))
        doc = _stub_document_for(merged)

    judge_backend = backend_from_spec(resolve_backend_spec(judge, config))
    records = evaluate_sessions(
        transcripts,
        workflow_info=render_for_prompt(doc),
        required_nodes=required,
        judge_backend=judge_backend,
    )
    reports = compute_report(records)
    output = report_to_json(reports)
    if out_path:
        Path(out_path).write_text(output, encoding="utf-8")
    click.echo(output)
    click.echo(render_markdown_table({"sessions": reports}))


@main.command("report")
@click.option("--runs", "runs_dir", required=True, type=click.Path(exists=True, file_okay=False))
def report_cmd(runs_dir):
    """Combine run manifests under a directory into one comparison table."""
    from .simeval.metrics import MetricsReport

    by_agent: dict[str, dict[str, MetricsReport]] = {}
    for manifest_path in sorted(Path(runs_dir).glob("*/manifest.json")):
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        report_path = manifest_path.parent / manifest.get("report", "report.json")
        if not report_path.exists():
            continue
        raw = json.loads(report_path.read_text(encoding="utf-8"))
        by_agent[manifest["agent"]] = {
            split: MetricsReport(**data) for split, data in raw.items()
        }
    if not by_agent:
        raise click.UsageError(f"no run manifests found under {runs_dir}")
    click.echo(render_markdown_table(by_agent))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--workflows", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="Workflow files to register at startup (repeatable).")
@click.option("--run-dir", default=None, type=click.Path(file_okay=False))
@click.option("--console-dir", default=None, type=click.Path(file_okay=False),
              help="Static console bundle to mount at /console.")
def serve_cmd(host, port, workflows, run_dir, console_dir):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(workflow_paths=list(workflows), run_dir=run_dir, console_dir=console_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
