"""Prompt templates and renderers for the agent, user simulator, and judge."""

from __future__ import annotations

import json
from typing import Iterable, Optional

from jinja2 import Template

from ..pdl import PdlDocument, render_for_prompt, topological_order
from ..actions import Action, render_transcript_line
from ..state import SessionState

PDL_AGENT_TEMPLATE = """You are a bot designed to assist the user for a specific task described by the Procedure Description Language (PDL). Your goal is to engage in a friendly conversation with the user while helping them complete the task.

### Constraints
1. **Step Identification**: Throughout the conversation, you should determine the user's current step, (whether it is in the PDL or just general questions), and dynamically follow PDL:
    - If the user's query aligns with the PDL logic, proceed to the next step.
    - If the user ask irrelevant questions, generate a response that maintains a fluent and logical conversation.
2. **PDL Components**: The PDL includes several components:
    - meta information: `name, desc, desc_detail` are meta information about the PDL.
    - slots: `slots`s define the information you may need to collect from user, or the values returned by the API.
    - reference answer: `answers` define the responses you should response to the user.
    - procedure: the final `procedure` string is a Pythonic language that defines the core logic of the procedure. 
3. Notes:
    - You have to collect enough parameter values from the user before calling the apis. 

### PDL
```PDL
{{ PDL }}
```

### Available APIs
{{ api_infos }}

### History Conversation
{{ conversation }}

### Current state
{{ current_state | trim }}

### Output Format
Your output format should be chosen from one of the two templates below. 
1. If you need to interact with the user without calling an API (inquire slot values or reply/answer):
```
Thought: xxx (description of your thought process ) 
Response: xxx (the content you need to inquire or reply)
```
2. If you need to call an API: 
```
Thought: xxx (description of your thought process ) 
Action: xxx (the function name to be called, do not prefix "API_".)
Action Input: xxx (the parameters for the function, must be in strictly valid JSON format)
```
"""

REACT_TEMPLATE = """You are a helpful assistant for the task of {{task_description}}.

### Specific requirements
1. You need to act as an assistant and engage in a conversation with the user, following the business process and API information.
2. You have been provided with the flowchart information for different scenarios under a specific role.
3. You can only answer questions within the scope of the given several workflow processes. If the user asks a question beyond these scopes, please apologize and explain to the user in the response part.
4. When asking for API input parameters, ensure that the provided parameter values comply with the specified format regarding both the correctness of the format and the completeness of the content. Do not assign values arbitrarily. In instances where the parameters do not meet the format requirements, notify users to make the adjustments until the requirements are satisfied.
5. When the user has multiple requests at the same time, please select one appropriate request for processing first and inform the user that other requests will be resolved subsequently. If there is unfinished business in the previous conversation, continue to provide the necessary help and guidance to assist them in completing the business process. When multiple APIs need to be called, do so in separate rounds, with a maximum of one API call output per round. When the user indicates that the business is finished or says goodbye, respond politely and end the conversation. 

### Workflow information
```
{{workflow}}
```

### Tool information
{{toolbox}}

### Current time
{{current_time}}

### History conversation
{{history_conversation}}

### Output format
Your output format should be chosen from one of the two templates below:
1. If you need to interact with the user:
```
Thought: xxx (description of your thought process ) 
Response: xxx (the content you need to inquire or reply)
```
2. If you need to call an API (only one API call per time): 
```
Thought: xxx (description of your thought process ) 
Action: xxx (the function name to be called, do not prefix "functions.")
Action Input: xxx (the parameters for the function, must be in strictly valid JSON format)
```
"""

USER_SIM_TEMPLATE = """You are a real-life user that interact with an assistant of {{ assistant_description }} to achieve your specific objectives. 

## User Profile
```
{{ user_profile }}
```

## History conversation
```
{{ history_conversation }}
```

## Specific requirements
1. Role Awareness: Remember you are playing the user role and speak in the first person.
2. Goal-Oriented: Keep the conversation focused on achieving your needs.
3. Style: Keep your response concise and real-life.
4. Engagement: Maintain an engaging and curious tone to facilitate effective dialogue.
5. Your output format should be:
```
Response: xxx (the response content)
```
6. Stop: End the conversation when the task is completed or when it becomes repetitive and no longer meaningful to continue. Set your response as "[END]" to stop the conversation.
"""

JUDGE_TEMPLATE = """Please serve as an impartial judge to evaluate the response quality of the assistant. Your evaluation should be based on the following criteria:
(1) Correctness: Does the reply remain consistent with the workflow knowledge without any contradictions?
(2) Helpfulness: Has the user's request been reasonably understood and addressed, fulfilling the user 's needs within the provided workflow scope?
(3) Humanness: Is the response coherent, clear, complete, and does it include human acknowledgment?
Please compare the provided response with the reference response and evaluate it based on the mentioned dimensions. Then, aggregate these assessments to assign an overall score. 
A perfect score is 10 points, with 9-10 points indicating high quality, nearly identical to the reference answer; 7-8 points indicating quality close to the reference answer; 6-7 points being of moderate quality; 4-5 points indicating a lower quality response; and 2-3 points for a response with significant errors.
Finally, output a binary result to determine if the predicted and reference responses are consistent (Yes or No).

Here is the knowledge related to the workflow: 
```
{{ workflow_info }}
```

Here is the previous conversation:
```
{{ session }}
```

Here is the true value response from the reference: 
{{ reference_input }}

Here is the generated response from the assistant: 
{{ predicted_input }}


Please reply with the scores and consistency judgment in the following format:
```
Correctness Score: xxx
Helpfulness Score: xxx
Humanness Score: xxx
Consistency: Yes/No
```
"""

EMPTY_HISTORY_MARKER = "(no conversation yet)"


def render_history(history: Iterable[Action]) -> str:
    lines = [render_transcript_line(a) for a in history]
    return "\n".join(lines) if lines else EMPTY_HISTORY_MARKER


def render_api_infos(doc: PdlDocument, descriptions: Optional[dict[str, str]] = None) -> str:
    """Tool schemas in function-calling JSON form, one object per API node."""
    infos = []
    for node in doc.api_nodes:
        desc = (descriptions or {}).get(node.name) or node.desc or ""
        infos.append(
            {
                "name": node.name,
                "description": desc,
                "parameters": {
                    "type": "object",
                    "properties": {slot: {"type": "string"} for slot in node.request_slots},
                    "required": list(node.request_slots),
                },
            }
        )
    return json.dumps(infos, indent=2, ensure_ascii=False)


def render_current_state(
    state: SessionState,
    guidance: Iterable,
    scratch: Iterable[str] = (),
) -> str:
    """Executed-node summary plus controller guidance and per-turn feedback."""
    order = topological_order(state.workflow.graph)
    executed_parts = [f"{n} (x{state.executed[n]})" for n in order if state.executed.get(n, 0) > 0]
    lines = ["Executed nodes: " + (", ".join(executed_parts) if executed_parts else "none")]
    for item in guidance:
        lines.append(item.guidance_text)
    for note in scratch:
        lines.append(note)
    return "\n".join(lines)


def render_agent_prompt(
    doc: PdlDocument,
    state: SessionState,
    guidance: Iterable,
    scratch: Iterable[str] = (),
    api_descriptions: Optional[dict[str, str]] = None,
) -> str:
    return Template(PDL_AGENT_TEMPLATE).render(
        PDL=render_for_prompt(doc),
        api_infos=render_api_infos(doc, api_descriptions),
        conversation=render_history(state.history),
        current_state=render_current_state(state, guidance, scratch),
    )


def render_react_prompt(
    task_description: str,
    workflow_text: str,
    doc: PdlDocument,
    state: SessionState,
    current_time: str,
    scratch: Iterable[str] = (),
    api_descriptions: Optional[dict[str, str]] = None,
) -> str:
    history = render_history(state.history)
    if scratch:
        history = history + "\n" + "\n".join(f"SYSTEM: {note}" for note in scratch)
    return Template(REACT_TEMPLATE).render(
        task_description=task_description,
        workflow=workflow_text,
        toolbox=render_api_infos(doc, api_descriptions),
        current_time=current_time,
        history_conversation=history,
    )


def render_user_sim_prompt(assistant_description: str, user_profile: str, history_text: str) -> str:
    return Template(USER_SIM_TEMPLATE).render(
        assistant_description=assistant_description,
        user_profile=user_profile,
        history_conversation=history_text,
    )


def render_judge_prompt(workflow_info: str, session: str, reference_input: str, predicted_input: str) -> str:
    return Template(JUDGE_TEMPLATE).render(
        workflow_info=workflow_info,
        session=session,
        reference_input=reference_input,
        predicted_input=predicted_input,
    )
