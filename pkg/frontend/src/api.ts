/** Thin typed client over the service HTTP API; no state of its own. */

import type {
  EventsResponse,
  MessageResponse,
  OowKind,
  SessionState,
  WorkflowSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ConsoleApi {
  constructor(private base: string) {}

  validateWorkflow(pdl: string) {
    return request<{ diagnostics: unknown[]; error_count: number; warning_count: number }>(
      this.base,
      "/workflows/validate",
      { method: "POST", body: JSON.stringify({ pdl }) },
    );
  }

  registerWorkflow(pdl: string, tools: Record<string, unknown> = {}) {
    return request<WorkflowSummary>(this.base, "/workflows", {
      method: "POST",
      body: JSON.stringify({ pdl, tools }),
    });
  }

  listWorkflows() {
    return request<WorkflowSummary[]>(this.base, "/workflows");
  }

  createSession(body: {
    workflow_id: string;
    agent?: string;
    backend?: Record<string, unknown>;
    controllers?: Record<string, unknown>;
    user?: Record<string, unknown>;
  }) {
    return request<{ session_id: string }>(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  /** text null advances a simulated-user session by one turn. */
  sendMessage(sessionId: string, text: string | null) {
    return request<MessageResponse>(this.base, `/sessions/${sessionId}/messages`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  getState(sessionId: string) {
    return request<SessionState>(this.base, `/sessions/${sessionId}/state`);
  }

  getEvents(sessionId: string, since = 0) {
    return request<EventsResponse>(this.base, `/sessions/${sessionId}/events?since=${since}`);
  }

  armOow(sessionId: string, kind: OowKind, instructionText?: string, subtype?: string) {
    return request<{ armed: string; subtype: string | null }>(
      this.base,
      `/sessions/${sessionId}/oow`,
      {
        method: "POST",
        body: JSON.stringify({ kind, instruction_text: instructionText, subtype }),
      },
    );
  }
}
