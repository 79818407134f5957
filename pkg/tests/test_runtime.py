"""Runtime tests: prompts, output parsing, tool execution, the step loop."""

from __future__ import annotations

import json
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import response_output, scripted, tool_output
from pdlagent.actions import (
    BotResponse,
    ControllerFeedback,
    ToolCall,
    ToolResult,
    UserMessage,
    parse_transcript_line,
    render_transcript_line,
)
from pdlagent.controllers import ControllerConfig, DEPENDENCY
from pdlagent.runtime import (
    EMPTY_HISTORY_MARKER,
    FALLBACK_RESPONSE_TEXT,
    ParseFailure,
    PdlAgentPolicy,
    ScriptedBackend,
    TemplateOverlapClassifier,
    ToolRegistry,
    UnknownToolError,
    execute_tool,
    label_answer_node,
    parse_llm_output,
    render_agent_prompt,
    replay_executed,
    step,
)
from pdlagent.controllers import run_pre
from pdlagent.state import SessionState, count_dependency_violations


def fresh_state(bundle) -> SessionState:
    return SessionState(workflow=bundle)


# -- prompt construction ---------------------------------------------------------


def test_prompt_contains_pdl_and_empty_history_marker(hospital_bundle, hospital_registry):
    state = fresh_state(hospital_bundle)
    prompt = render_agent_prompt(hospital_bundle.doc, state, guidance=[], scratch=[])
    assert "Name: 114 Hospital Appointment" in prompt
    assert "```PDL" in prompt
    assert EMPTY_HISTORY_MARKER in prompt


def test_prompt_passes_guidance_verbatim(hospital_bundle):
    state = fresh_state(hospital_bundle)
    state.executed["check_hospital"] = 1
    guidance = run_pre(state, hospital_bundle.graph, ControllerConfig())
    prompt = render_agent_prompt(hospital_bundle.doc, state, guidance, scratch=[])
    for item in guidance:
        assert item.guidance_text in prompt


def test_prompt_renders_tool_call_transcript(hospital_bundle):
    state = fresh_state(hospital_bundle)
    state.add_user_message("book it")
    state.history.append(ToolCall(name="check_hospital", args={"hospital_name": "A"}))
    state.history.append(ToolResult(name="check_hospital", payload={"hospital_exists": True}))
    prompt = render_agent_prompt(hospital_bundle.doc, state, guidance=[], scratch=[])
    assert "BOT: <Call API> check_hospital({'hospital_name': 'A'})" in prompt
    assert "SYSTEM: {'hospital_exists': True}" in prompt


# -- output parsing ----------------------------------------------------------------


def test_parse_response_template():
    action = parse_llm_output("Thought: greet\nResponse: Hello!")
    assert action == BotResponse(text="Hello!", thought="greet")


def test_parse_tool_call_template():
    action = parse_llm_output(
        'Thought: t\nAction: check_hospital\nAction Input: {"hospital_name": "A"}'
    )
    assert action == ToolCall(name="check_hospital", args={"hospital_name": "A"}, thought="t")


def test_parse_invalid_json_is_failure():
    result = parse_llm_output("Action: f\nAction Input: {broken")
    assert isinstance(result, ParseFailure)
    assert "JSON" in result.reason


def test_parse_strips_api_prefix_and_fences():
    action = parse_llm_output(
        "```\nThought: t\nAction: API_check_hospital\nAction Input: {\"hospital_name\": \"A\"}\n```"
    )
    assert isinstance(action, ToolCall)
    assert action.name == "check_hospital"


def test_parse_answer_label():
    action = parse_llm_output("Thought: t\nAnswer: appointment_successful\nResponse: Done!")
    assert action == BotResponse(text="Done!", answer_node="appointment_successful", thought="t")


def test_parse_multiline_response():
    action = parse_llm_output("Thought: t\nResponse: line one\nline two")
    assert isinstance(action, BotResponse)
    assert action.text == "line one\nline two"


def test_parse_garbage_is_failure():
    assert isinstance(parse_llm_output("complete nonsense"), ParseFailure)
    assert isinstance(parse_llm_output(""), ParseFailure)


# -- tool execution ----------------------------------------------------------------


def test_execute_tool_table_lookup(hospital_registry):
    result = execute_tool(
        hospital_registry,
        ToolCall(
            name="query_appointment",
            args={"hospital_name": "A", "department_name": "B", "appointment_time": "C"},
        ),
    )
    assert result.payload["available_slots"] == 2


def test_execute_tool_apartment_booking(apartment_registry):
    args = {
        "RenterName": "Alex",
        "Name": "Maple Apartments",
        "Day": "Friday",
        "StartTimeHour": "15",
        "ApplicationFeePaid": "Yes",
        "Message": "",
        "RequestType": "CheckAvailability",
    }
    result = execute_tool(apartment_registry, ToolCall(name="book_apartment_viewing", args=args))
    assert result.payload == {"Status": "Available"}


def test_execute_tool_missing_slot(hospital_registry):
    result = execute_tool(hospital_registry, ToolCall(name="check_hospital", args={}))
    assert result.payload["error"] == "missing_slots"
    assert "hospital_name" in result.payload["missing"]


def test_execute_tool_unknown_raises(hospital_registry):
    with pytest.raises(UnknownToolError):
        execute_tool(hospital_registry, ToolCall(name="nope", args={}))


def test_registry_sequential_responses(hospital_doc):
    registry = ToolRegistry.from_document(
        hospital_doc,
        {"check_hospital": {"responses": [{"hospital_exists": True}, {"hospital_exists": False}]}},
    )
    call = ToolCall(name="check_hospital", args={"hospital_name": "A"})
    assert execute_tool(registry, call).payload == {"hospital_exists": True}
    assert execute_tool(registry, call).payload == {"hospital_exists": False}
    forked = registry.fork()
    assert execute_tool(forked, call).payload == {"hospital_exists": True}


def test_registry_case_match_beats_default(hospital_doc):
    registry = ToolRegistry.from_document(
        hospital_doc,
        {
            "check_hospital": {
                "cases": [{"args": {"hospital_name": "Closed"}, "payload": {"hospital_exists": False}}],
                "default": {"hospital_exists": True},
            }
        },
    )
    closed = execute_tool(registry, ToolCall(name="check_hospital", args={"hospital_name": "Closed"}))
    assert closed.payload == {"hospital_exists": False}
    open_ = execute_tool(registry, ToolCall(name="check_hospital", args={"hospital_name": "Open"}))
    assert open_.payload == {"hospital_exists": True}


# -- step loop -----------------------------------------------------------------------


def test_step_happy_path(hospital_bundle, hospital_registry):
    backend = scripted(
        tool_output("check_hospital", {"hospital_name": "A"}),
        response_output("The hospital exists."),
    )
    policy = PdlAgentPolicy(doc=hospital_bundle.doc, registry=hospital_registry, backend=backend)
    state = fresh_state(hospital_bundle)
    state.add_user_message("does hospital A exist?")
    response, emitted = step(state, policy, hospital_registry, ControllerConfig())
    assert response.text == "The hospital exists."
    kinds = [type(a).__name__ for a in state.history]
    assert kinds == ["UserMessage", "ToolCall", "ToolResult", "BotResponse"]
    assert state.executed["check_hospital"] == 1


def test_step_vetoes_adversarial_call(hospital_bundle, hospital_registry):
    backend = scripted(
        tool_output("register_hospital", {"id_number": "1"}),
        response_output("Let me check the hospital first."),
    )
    policy = PdlAgentPolicy(doc=hospital_bundle.doc, registry=hospital_registry, backend=backend)
    state = fresh_state(hospital_bundle)
    state.add_user_message("just register me now")
    response, emitted = step(state, policy, hospital_registry, ControllerConfig())
    assert response.text == "Let me check the hospital first."
    feedback = [a for a in emitted if isinstance(a, ControllerFeedback)]
    assert feedback and feedback[0].controller_id == DEPENDENCY
    assert not any(isinstance(a, ToolCall) for a in state.history)
    assert count_dependency_violations(state.history, hospital_bundle.graph) == 0


def test_step_reissued_call_with_changed_detail(apartment_bundle, apartment_registry):
    """A user-driven detail change re-invokes the same tool with new arguments."""
    base = {
        "RenterName": "Alex",
        "Name": "Maple Apartments",
        "Day": "Friday",
        "StartTimeHour": "15",
        "ApplicationFeePaid": "Yes",
        "Message": "",
        "RequestType": "CheckAvailability",
    }
    changed = dict(base, StartTimeHour="16")
    backend = scripted(
        tool_output("book_apartment_viewing", base),
        response_output("The viewing is available. Would you like to proceed with booking?"),
        tool_output("book_apartment_viewing", changed),
        response_output("The new time at 4 PM is also available. Shall I book it for you?"),
    )
    policy = PdlAgentPolicy(doc=apartment_bundle.doc, registry=apartment_registry, backend=backend)
    state = fresh_state(apartment_bundle)
    state.add_user_message("Friday 3 PM please")
    step(state, policy, apartment_registry, ControllerConfig())
    state.add_user_message(
        "Actually, I might need to change the time. Can we do 4 PM instead?",
    )
    response, emitted = step(state, policy, apartment_registry, ControllerConfig())
    calls = [a for a in state.history if isinstance(a, ToolCall)]
    assert len(calls) == 2
    assert calls[1].args["StartTimeHour"] == "16"
    assert not any(isinstance(a, ControllerFeedback) for a in emitted)
    assert state.executed["book_apartment_viewing"] == 2


def test_step_bounded_backend_calls_on_garbage(hospital_bundle, hospital_registry):
    backend = ScriptedBackend(responses=[], default="???")
    policy = PdlAgentPolicy(doc=hospital_bundle.doc, registry=hospital_registry, backend=backend)
    cfg = ControllerConfig(max_policy_retries_per_turn=3)
    state = fresh_state(hospital_bundle)
    state.add_user_message("hello")
    response, _ = step(state, policy, hospital_registry, cfg)
    assert response.text == FALLBACK_RESPONSE_TEXT
    assert backend.calls == 3


def test_step_tool_iteration_cap(hospital_bundle, hospital_registry):
    outputs = [tool_output("check_hospital", {"hospital_name": f"H{i}"}) for i in range(10)]
    backend = ScriptedBackend(responses=outputs, default=outputs[-1])
    policy = PdlAgentPolicy(doc=hospital_bundle.doc, registry=hospital_registry, backend=backend)
    cfg = ControllerConfig(max_tool_iterations_per_turn=5, max_identical_api_calls=10)
    state = fresh_state(hospital_bundle)
    state.add_user_message("loop forever")
    response, _ = step(state, policy, hospital_registry, cfg)
    assert response.text == FALLBACK_RESPONSE_TEXT
    assert sum(1 for a in state.history if isinstance(a, ToolCall)) == 5


def test_step_requires_user_message_last(hospital_bundle, hospital_registry):
    policy = PdlAgentPolicy(
        doc=hospital_bundle.doc, registry=hospital_registry, backend=scripted(response_output("hi"))
    )
    state = fresh_state(hospital_bundle)
    with pytest.raises(ValueError):
        step(state, policy, hospital_registry, ControllerConfig())


def test_history_integrity_replay(hospital_bundle, hospital_registry):
    backend = scripted(
        tool_output("check_hospital", {"hospital_name": "A"}),
        tool_output("check_department", {"department_name": "d", "hospital_name": "A"}),
        response_output("Both exist."),
        tool_output(
            "query_appointment",
            {"hospital_name": "A", "department_name": "d", "appointment_time": "Fri"},
        ),
        response_output("Two slots open.", answer_node="request_information"),
    )
    policy = PdlAgentPolicy(doc=hospital_bundle.doc, registry=hospital_registry, backend=backend)
    state = fresh_state(hospital_bundle)
    state.add_user_message("check hospital A, cardiology")
    step(state, policy, hospital_registry, ControllerConfig())
    state.add_user_message("what slots are open on Friday?")
    step(state, policy, hospital_registry, ControllerConfig())
    assert replay_executed(state.history) == state.executed


# -- answer-node labeling ---------------------------------------------------------


def test_label_from_template_fragment(hospital_doc):
    classifier = TemplateOverlapClassifier(hospital_doc)
    label = label_answer_node(
        "has been successful. A confirmation message will be sent", hospital_doc, classifier
    )
    assert label == "appointment_successful"


def test_label_explicit_line_wins(hospital_doc):
    label = label_answer_node(
        "Answer: hospital_not_found\nSorry, that hospital is not supported.", hospital_doc
    )
    assert label == "hospital_not_found"


def test_label_chitchat_returns_none(hospital_doc):
    classifier = TemplateOverlapClassifier(hospital_doc)
    assert label_answer_node("What's the weather like today?", hospital_doc, classifier) is None


# -- transcript round-trip ----------------------------------------------------------

_slot_values = st.one_of(
    st.text(alphabet="abcdefgh 0123456789", min_size=0, max_size=10), st.integers(-100, 100)
)
_args = st.dictionaries(
    st.text(alphabet="abcdefgh_", min_size=1, max_size=8), _slot_values, max_size=4
)


@settings(max_examples=100, deadline=None)
@given(args=_args, name=st.text(alphabet="abcdefgh_", min_size=1, max_size=10))
def test_tool_call_transcript_round_trip(args, name):
    raw = f"Thought: t\nAction: {name}\nAction Input: {json.dumps(args)}"
    action = parse_llm_output(raw)
    assert isinstance(action, ToolCall)
    line = render_transcript_line(action)
    back = parse_transcript_line(line)
    # the transcript keeps the decision content; the thought is prompt-only
    assert replace(action, thought=None) == back


@settings(max_examples=60, deadline=None)
@given(text=st.text(alphabet="abcdefgh ,.!?", min_size=1, max_size=40))
def test_response_transcript_round_trip(text):
    action = parse_llm_output(f"Thought: t\nResponse: {text}")
    assert isinstance(action, BotResponse)
    line = render_transcript_line(action)
    back = parse_transcript_line(line)
    assert isinstance(back, BotResponse)
    assert back.text == action.text
