"""User simulation, OOW injection, session rollout, judging, evaluation."""

from __future__ import annotations

import pytest

from conftest import FIXTURES, response_output, scripted, tool_output
from pdlagent.controllers import ControllerConfig
from pdlagent.runtime import PdlAgentPolicy, ScriptedBackend
from pdlagent.simeval import (
    DEFAULT_INSTRUCTIONS,
    EchoReferencePolicy,
    OowInjector,
    OowKind,
    OowSpec,
    ReferenceSession,
    RefTurn,
    ToolCallRef,
    UserProfile,
    UserSimulator,
    compute_report,
    evaluate_sessions,
    evaluate_turn,
    inject_oow,
    judge_session,
    judge_turn,
    run_session,
    simulate_user,
)

PROFILE = UserProfile(
    persona="A 25-year-old bartender who gives sincere advice.",
    details={"Name": "Michael James Carter", "ID Number": "110105199801012345"},
    needs="Book a hospital appointment.",
    dialogue_style="Straightforward and sincere.",
    interactive_pattern="One request at a time.",
)


class CapturingBackend:
    identity = "capture"

    def __init__(self, responses):
        self.responses = list(responses)
        self.prompts = []

    def complete(self, prompt, params=None):
        self.prompts.append(prompt)
        return self.responses.pop(0)


# -- user simulation ------------------------------------------------------------


def test_simulate_user_parses_response_line():
    backend = scripted("Response: I'd like Friday 3 PM.")
    assert simulate_user(PROFILE, [], backend) == "I'd like Friday 3 PM."


def test_simulate_user_end_sentinel():
    backend = scripted("Response: [END]")
    assert simulate_user(PROFILE, [], backend) is None


def test_simulate_user_retry_then_end():
    backend = scripted("no format here", "still no format")
    assert simulate_user(PROFILE, [], backend) is None
    assert backend.calls == 2


def test_oow_constraint_lands_in_prompt():
    backend = CapturingBackend(["Response: By the way, do you like jazz?"])
    spec = OowSpec(kind=OowKind.IRRELEVANT_ANSWERING, schedule=(5,))
    sim = UserSimulator(profile=PROFILE, backend=backend, injector=OowInjector([spec]))
    utterance, annotation = sim.next_utterance([], turn_index=5)
    assert utterance == "By the way, do you like jazz?"
    assert annotation == ("irrelevant_answering", None)
    assert "ask a question unrelated to the current topic" in backend.prompts[0]
    assert "**Additional Constraints**" in backend.prompts[0]


def test_no_oow_constraint_outside_schedule():
    backend = CapturingBackend(["Response: Friday works."])
    spec = OowSpec(kind=OowKind.IRRELEVANT_ANSWERING, schedule=(5,))
    sim = UserSimulator(profile=PROFILE, backend=backend, injector=OowInjector([spec]))
    _, annotation = sim.next_utterance([], turn_index=4)
    assert annotation is None
    assert "Additional Constraints" not in backend.prompts[0]


# -- OOW injection ---------------------------------------------------------------


def test_inject_oow_schedule():
    spec = OowSpec(kind=OowKind.INTENT_SWITCHING, schedule=(5,))
    assert inject_oow(spec, 5) == DEFAULT_INSTRUCTIONS[OowKind.INTENT_SWITCHING]
    assert inject_oow(spec, 4) is None


def test_inject_oow_zero_probability_never_fires():
    spec = OowSpec(kind=OowKind.PROCEDURE_JUMPING, probability=0.0)
    injector = OowInjector([spec], seed=1)
    assert all(injector.check(turn) is None for turn in range(1, 200))


def test_seeded_probability_is_reproducible():
    spec = OowSpec(kind=OowKind.IRRELEVANT_ANSWERING, probability=0.5)
    runs = []
    for _ in range(2):
        injector = OowInjector([spec], seed=42)
        runs.append([injector.check(turn) is not None for turn in range(1, 101)])
    assert runs[0] == runs[1]
    assert any(runs[0]) and not all(runs[0])


def test_spec_requires_exactly_one_trigger():
    with pytest.raises(ValueError):
        OowSpec(kind=OowKind.INTENT_SWITCHING)
    with pytest.raises(ValueError):
        OowSpec(kind=OowKind.INTENT_SWITCHING, schedule=(1,), probability=0.5)


# -- session rollout ---------------------------------------------------------------


def _hospital_policy(bundle, registry, backend):
    return PdlAgentPolicy(doc=bundle.doc, registry=registry, backend=backend)


def test_run_session_three_user_turns(hospital_bundle, hospital_registry):
    user_backend = scripted(
        "Response: one", "Response: two", "Response: three", "Response: [END]"
    )
    agent_backend = ScriptedBackend(responses=[], default=response_output("noted"))
    sim = UserSimulator(profile=PROFILE, backend=user_backend)
    result = run_session(
        hospital_bundle,
        _hospital_policy(hospital_bundle, hospital_registry, agent_backend),
        sim,
        hospital_registry,
        ControllerConfig(),
    )
    assert result.transcript.user_turn_count() == 3
    assert result.end_reason == "user_end"


def test_run_session_length_cutoff_forces_close(hospital_bundle, hospital_registry):
    user_backend = ScriptedBackend(responses=[], default="Response: again")
    agent_backend = ScriptedBackend(responses=[], default=response_output("noted"))
    sim = UserSimulator(profile=PROFILE, backend=user_backend)
    cfg = ControllerConfig(max_total_turns=2)
    result = run_session(
        hospital_bundle,
        _hospital_policy(hospital_bundle, hospital_registry, agent_backend),
        sim,
        hospital_registry,
        cfg,
    )
    assert result.transcript.user_turn_count() == 2
    assert result.end_reason == "length_limit"
    bot_turns = [t for t in result.transcript.turns if t.role == "BOT"]
    assert "length limit" in bot_turns[-1].text


STAR_REFERENCE = ReferenceSession.load(FIXTURES / "star_reference.jsonl")

_BOOK_15 = {
    "RenterName": "Alex",
    "Name": "Maple Apartments",
    "Day": "Friday",
    "StartTimeHour": "15",
    "ApplicationFeePaid": "Yes",
    "Message": "",
    "RequestType": "CheckAvailability",
}
_BOOK_16 = dict(_BOOK_15, StartTimeHour="16")
_BOOK_FINAL = dict(_BOOK_16, RequestType="BookViewing")

_REPLAY_USER_SCRIPT = [
    "Response: Maple Apartments.",
    "Response: I'd like to do it on Friday.",
    "Response: How about 3 PM?",
    "Response: Yes, I have.",
    "Response: No, that's fine.",
    "Response: Actually, I might need to change the time. Can we do 4 PM instead?",
    "Response: Yes, please book it.",
    "Response: [END]",
]

_REPLAY_AGENT_SCRIPT = [
    response_output("When would you like to view the Maple Apartments?"),
    response_output("What time on Friday would you prefer for the viewing?"),
    response_output("Have you paid the application fee?"),
    response_output("Would you like to add any custom message for the viewing?"),
    tool_output("book_apartment_viewing", _BOOK_15),
    response_output("The viewing is available. Would you like to proceed with booking?"),
    tool_output("book_apartment_viewing", _BOOK_16),
    response_output("The new time at 4 PM is also available. Shall I book it for you?"),
    tool_output("book_apartment_viewing", _BOOK_FINAL),
    response_output("Your viewing of Maple Apartments on Friday at 4 PM is booked."),
]


def _replay_session(apartment_bundle, registry):
    user_backend = ScriptedBackend(responses=list(_REPLAY_USER_SCRIPT))
    agent_backend = ScriptedBackend(responses=list(_REPLAY_AGENT_SCRIPT))
    injector = OowInjector(
        [OowSpec(kind=OowKind.INTENT_SWITCHING, schedule=(6,), subtype="detail-switching")]
    )
    sim = UserSimulator(profile=PROFILE, backend=user_backend, injector=injector)
    policy = PdlAgentPolicy(doc=apartment_bundle.doc, registry=registry, backend=agent_backend)
    return run_session(apartment_bundle, policy, sim, registry, ControllerConfig(), session_id="replay")


def test_reference_replay_matches_fixture_turn_for_turn(apartment_bundle, apartment_registry):
    """The scripted rollout reproduces the reference transcript's turns."""
    result = _replay_session(apartment_bundle, apartment_registry.fork())
    # the fixture opens mid-conversation with a bot question; the rollout
    # starts at the user's reply, so align from the fixture's second turn
    expected = STAR_REFERENCE.turns[1:]
    assert result.transcript.turns[: len(expected)] == expected


def test_reference_replay_is_byte_deterministic(apartment_bundle, apartment_registry):
    first = _replay_session(apartment_bundle, apartment_registry.fork())
    second = _replay_session(apartment_bundle, apartment_registry.fork())
    assert first.transcript.to_jsonl() == second.transcript.to_jsonl()


# -- judging ------------------------------------------------------------------------


def test_judge_turn_parses_yes():
    backend = scripted(
        "Correctness Score: 9\nHelpfulness Score: 8\nHumanness Score: 10\nConsistency: Yes"
    )
    judgement = judge_turn("wf", "prefix", "ref", "pred", backend)
    assert judgement.consistent is True
    assert judgement.scores == {"correctness": 9.0, "helpfulness": 8.0, "humanness": 10.0}


def test_judge_turn_parses_no():
    backend = scripted("Consistency: No")
    assert judge_turn("wf", "p", "r", "x", backend).consistent is False


def test_judge_turn_unparseable_retries_then_inconsistent():
    backend = scripted("garbage", "more garbage")
    judgement = judge_turn("wf", "p", "r", "x", backend)
    assert judgement.consistent is False
    assert backend.calls == 2


def _transcript_with_calls(names):
    turns = []
    for name in names:
        turns.append(
            RefTurn(role="BOT", text=f"<Call API> {name}({{}})", tool_call=ToolCallRef(name=name, args={}))
        )
        turns.append(RefTurn(role="SYSTEM", text="{'ok': True}"))
    turns.append(RefTurn(role="BOT", text="All done, your registration succeeded!"))
    return ReferenceSession(turns=tuple(turns))


def test_judge_session_partial_progress():
    transcript = _transcript_with_calls(["a", "b"])
    judgement = judge_session("wf", transcript, ["a", "b", "c", "d"])
    assert judgement.task_progress == 0.5


def test_judge_session_full_progress_with_yes_judge():
    transcript = _transcript_with_calls(["a", "b"])
    backend = scripted("Consistency: Yes")
    judgement = judge_session("wf", transcript, ["a", "b"], judge_backend=backend)
    assert judgement.success is True
    assert judgement.task_progress == 1.0


def test_judge_session_progress_is_judge_independent():
    """A bot claiming success cannot inflate progress: the count is mechanical."""
    transcript = _transcript_with_calls(["a"])  # register never ran
    backend = scripted("Consistency: Yes")
    judgement = judge_session("wf", transcript, ["a", "register"], judge_backend=backend)
    assert judgement.success is True  # judge was fooled
    assert judgement.task_progress == 0.5  # the mechanical count was not


def test_judge_session_empty_required_warns_progress_one():
    judgement = judge_session("wf", _transcript_with_calls(["a"]), [])
    assert judgement.task_progress == 1.0


def test_judge_session_error_payload_not_completed():
    turns = (
        RefTurn(role="BOT", text="<Call API> a({})", tool_call=ToolCallRef(name="a", args={})),
        RefTurn(role="SYSTEM", text="{'error': 'missing_slots'}"),
    )
    judgement = judge_session("wf", ReferenceSession(turns=turns), ["a"])
    assert judgement.task_progress == 0.0


# -- turn-level evaluation -----------------------------------------------------------


def test_echo_policy_scores_perfectly(apartment_bundle):
    policy = EchoReferencePolicy(reference=STAR_REFERENCE)
    records = evaluate_turn(apartment_bundle, STAR_REFERENCE, policy, judge_backend=None)
    assert len(records) == 9
    assert all(r.consistent for r in records)
    reports = compute_report(records)
    assert reports["ALL"].pass_rate == 1.0
    assert reports["ALL"].tool_f1 == 1.0


def test_slot_mismatch_fractions(apartment_bundle):
    reference = ReferenceSession(
        turns=(
            RefTurn(role="USER", text="go"),
            RefTurn(role="BOT", text="<Call API> t({'a': 1, 'b': 2})",
                    tool_call=ToolCallRef(name="t", args={"a": 1, "b": 2})),
        )
    )

    class FixedPolicy:
        agent_kind = "fixed"

        def propose(self, state, guidance, scratch):
            return 'Thought: x\nAction: t\nAction Input: {"a": 1, "c": 3}'

    cfg = ControllerConfig(enabled_pre=frozenset(), enabled_post=frozenset())
    records = evaluate_turn(apartment_bundle, reference, FixedPolicy(), cfg=cfg)
    (record,) = records
    assert record.reference_items == 2
    assert record.predicted_items == 2
    assert record.matched_items == 1
    assert record.consistent is False
    report = compute_report(records)["ALL"]
    assert report.tool_precision == 0.5
    assert report.tool_recall == 0.5


def test_oow_turns_land_in_oow_split(apartment_bundle):
    policy = EchoReferencePolicy(reference=STAR_REFERENCE)
    records = evaluate_turn(apartment_bundle, STAR_REFERENCE, policy, judge_backend=None)
    reports = compute_report(records)
    # the two turns after the intent switch answer an OOW user turn
    assert reports["OOW"].counts["turns"] == 2
    assert reports["IW"].counts["turns"] + reports["OOW"].counts["turns"] == reports["ALL"].counts["turns"]


def test_session_records_oow_flag(apartment_bundle):
    records = evaluate_sessions(
        [("s1", STAR_REFERENCE)],
        workflow_info="wf",
        required_nodes=["book_apartment_viewing"],
        judge_backend=scripted("Consistency: Yes"),
    )
    (record,) = records
    assert record.oow is True
    assert record.task_progress == 1.0


def test_evaluate_turn_long_reference_not_length_vetoed(apartment_bundle):
    """Prefix replay must not trip the live-session length controller."""
    turns = []
    for i in range(25):
        turns.append(RefTurn(role="USER", text=f"message {i}"))
        turns.append(RefTurn(role="BOT", text=f"reply {i}"))
    reference = ReferenceSession(turns=tuple(turns))
    policy = EchoReferencePolicy(reference=reference)
    records = evaluate_turn(apartment_bundle, reference, policy, judge_backend=None)
    assert len(records) == 25
    assert all(r.consistent for r in records)
