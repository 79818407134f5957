/** Pure projection of the ordered event log onto view state.
 *
 * Rendering must stay a deterministic function of (workflow, events): the
 * executed multiset is folded from tool results and labeled responses, and
 * node statuses follow from the precondition edges alone.
 */

import type {
  NodeStatus,
  OowKind,
  ServiceEvent,
  WorkflowSummary,
} from "./types.js";

export interface TranscriptTurn {
  role: "USER" | "BOT" | "SYSTEM";
  text: string;
  toolName?: string;
  oow?: string[];
}

export interface FeedCard {
  seq: number;
  kind: "action" | "intervention";
  title: string;
  body: string;
}

export interface ViewState {
  transcript: TranscriptTurn[];
  feed: FeedCard[];
  executed: Record<string, number>;
  nodeStatus: Record<string, NodeStatus>;
  pendingTurn: boolean;
  armedOow: OowKind | null;
  ended: boolean;
  nextSeq: number;
}

function formatArgs(args: Record<string, unknown>): string {
  const parts = Object.entries(args).map(([key, value]) => `${key}: ${JSON.stringify(value)}`);
  return `{${parts.join(", ")}}`;
}

export function foldExecuted(events: ServiceEvent[]): Record<string, number> {
  const executed: Record<string, number> = {};
  let pendingCall: string | null = null;
  for (const event of events) {
    if (event.type === "tool_call") {
      pendingCall = String(event.payload.name);
    } else if (event.type === "tool_result") {
      const payload = (event.payload.payload ?? {}) as Record<string, unknown>;
      const name = String(event.payload.name);
      if (pendingCall === name && !("error" in payload)) {
        executed[name] = (executed[name] ?? 0) + 1;
      }
      pendingCall = null;
    } else if (event.type === "bot_response") {
      const node = event.payload.answer_node;
      if (typeof node === "string" && node) {
        executed[node] = (executed[node] ?? 0) + 1;
      }
    }
  }
  return executed;
}

export function nodeStatuses(
  workflow: WorkflowSummary,
  executed: Record<string, number>,
): Record<string, NodeStatus> {
  const statuses: Record<string, NodeStatus> = {};
  for (const node of workflow.nodes) {
    if ((executed[node.name] ?? 0) > 0) {
      statuses[node.name] = "executed";
      continue;
    }
    const unmet = node.preconditions.filter((pre) => (executed[pre] ?? 0) === 0);
    statuses[node.name] = unmet.length === 0 ? "accessible" : "blocked";
  }
  return statuses;
}

export function unmetPreconditions(
  workflow: WorkflowSummary,
  executed: Record<string, number>,
  nodeName: string,
): string[] {
  const node = workflow.nodes.find((n) => n.name === nodeName);
  if (!node) return [];
  return node.preconditions.filter((pre) => (executed[pre] ?? 0) === 0);
}

export function project(
  workflow: WorkflowSummary,
  events: ServiceEvent[],
  armedOow: OowKind | null = null,
): ViewState {
  const transcript: TranscriptTurn[] = [];
  const feed: FeedCard[] = [];
  let pendingTurn = false;
  let ended = false;

  for (const event of events) {
    const payload = event.payload;
    switch (event.type) {
      case "user_message": {
        const oow = payload.oow as string[] | undefined;
        transcript.push({ role: "USER", text: String(payload.text), oow });
        feed.push({
          seq: event.seq,
          kind: "action",
          title: oow ? `user message (OOW: ${oow.join("/")})` : "user message",
          body: String(payload.text),
        });
        pendingTurn = true;
        break;
      }
      case "bot_response": {
        transcript.push({ role: "BOT", text: String(payload.text) });
        const label = payload.answer_node ? ` [${payload.answer_node}]` : "";
        feed.push({
          seq: event.seq,
          kind: "action",
          title: `bot response${label}`,
          body: String(payload.text),
        });
        pendingTurn = false;
        break;
      }
      case "tool_call": {
        const args = (payload.args ?? {}) as Record<string, unknown>;
        const name = String(payload.name);
        transcript.push({
          role: "BOT",
          text: `<Call API> ${name}(${formatArgs(args)})`,
          toolName: name,
        });
        feed.push({ seq: event.seq, kind: "action", title: `tool call: ${name}`, body: formatArgs(args) });
        break;
      }
      case "tool_result": {
        const result = (payload.payload ?? {}) as Record<string, unknown>;
        transcript.push({ role: "SYSTEM", text: formatArgs(result) });
        feed.push({
          seq: event.seq,
          kind: "action",
          title: `tool result: ${String(payload.name)}`,
          body: formatArgs(result),
        });
        break;
      }
      case "controller_feedback": {
        feed.push({
          seq: event.seq,
          kind: "intervention",
          title: `controller intervention: ${String(payload.controller_id)}`,
          body: String(payload.text),
        });
        break;
      }
      case "session_end": {
        ended = true;
        feed.push({
          seq: event.seq,
          kind: "action",
          title: "session end",
          body: String(payload.reason ?? ""),
        });
        break;
      }
    }
  }

  const executed = foldExecuted(events);
  return {
    transcript,
    feed,
    executed,
    nodeStatus: nodeStatuses(workflow, executed),
    pendingTurn,
    armedOow,
    ended,
    nextSeq: events.length ? events[events.length - 1].seq + 1 : 0,
  };
}
