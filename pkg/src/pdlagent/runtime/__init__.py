"""Agent runtime: actions, backends, tools, prompts, and the step loop."""

from ..actions import (
    Action,
    BotResponse,
    ControllerFeedback,
    SessionEnd,
    ToolCall,
    ToolResult,
    UserMessage,
    action_from_payload,
    action_payload,
    action_type,
    canonical_args,
    event_from_json,
    format_args,
    is_error_payload,
    parse_transcript_line,
    render_transcript_line,
    to_event_json,
)
from .backends import (
    BackendError,
    GenParams,
    LlmBackend,
    OpenAICompatBackend,
    ScriptedBackend,
    backend_from_spec,
)
from .output import (
    LlmLabelClassifier,
    ParseFailure,
    TemplateOverlapClassifier,
    label_answer_node,
    parse_llm_output,
)
from .policies import PdlAgentPolicy, Policy
from .prompts import (
    EMPTY_HISTORY_MARKER,
    render_agent_prompt,
    render_api_infos,
    render_current_state,
    render_history,
    render_judge_prompt,
    render_react_prompt,
    render_user_sim_prompt,
)
from .session import (
    CLOSING_RESPONSE_TEXT,
    FALLBACK_RESPONSE_TEXT,
    predict_action,
    step,
)
from ..state import SessionState, WorkflowBundle, count_dependency_violations, replay_executed
from .tools import ToolBehavior, ToolRegistry, ToolSchema, UnknownToolError, execute_tool

__all__ = [
    "Action", "BackendError", "BotResponse", "CLOSING_RESPONSE_TEXT", "ControllerFeedback",
    "EMPTY_HISTORY_MARKER", "FALLBACK_RESPONSE_TEXT", "GenParams", "LlmBackend",
    "LlmLabelClassifier", "OpenAICompatBackend", "ParseFailure", "PdlAgentPolicy", "Policy",
    "ScriptedBackend", "SessionEnd", "SessionState", "TemplateOverlapClassifier", "ToolBehavior",
    "ToolCall", "ToolRegistry", "ToolResult", "ToolSchema", "UnknownToolError", "UserMessage",
    "WorkflowBundle", "action_from_payload", "action_payload", "action_type", "backend_from_spec",
    "canonical_args", "count_dependency_violations", "event_from_json", "execute_tool",
    "format_args", "is_error_payload", "label_answer_node", "parse_llm_output",
    "parse_transcript_line", "predict_action", "render_agent_prompt", "render_api_infos",
    "render_current_state", "render_history", "render_judge_prompt", "render_react_prompt",
    "render_transcript_line", "render_user_sim_prompt", "replay_executed", "step",
    "to_event_json",
]
