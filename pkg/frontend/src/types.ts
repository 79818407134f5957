/** Wire types mirroring the service API. */

export interface NodeInfo {
  name: string;
  kind: "API" | "ANSWER";
  desc: string | null;
  request_slots: string[];
  response_slots: string[];
  preconditions: string[];
}

export interface EdgeInfo {
  source: string;
  target: string;
}

export interface WorkflowSummary {
  workflow_id: string;
  name: string;
  desc: string;
  nodes: NodeInfo[];
  edges: EdgeInfo[];
}

export interface SessionState {
  session_id: string;
  executed: Record<string, number>;
  accessible: string[];
  blocked: Record<string, string[]>;
  user_turns: number;
  clock: number;
  in_flight: boolean;
}

export interface ServiceEvent {
  seq: number;
  ts: number;
  session_id: string;
  type:
    | "user_message"
    | "bot_response"
    | "tool_call"
    | "tool_result"
    | "controller_feedback"
    | "session_end";
  payload: Record<string, unknown>;
}

export interface EventsResponse {
  events: ServiceEvent[];
  next: number;
}

export interface MessageResponse {
  response: { text: string; answer_node: string | null } | null;
  ended: boolean;
  state: SessionState;
}

export type NodeStatus = "executed" | "accessible" | "blocked";

export type OowKind = "intent_switching" | "procedure_jumping" | "irrelevant_answering";

export const OOW_KINDS: OowKind[] = [
  "intent_switching",
  "procedure_jumping",
  "irrelevant_answering",
];
