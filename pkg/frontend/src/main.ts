/** Console bootstrap: poll the event stream, render confirmed state only.
 *
 * No optimistic updates: the transcript and the DAG re-render from the
 * accumulated event log each time new confirmed events arrive, and the
 * input stays locked from send() until the turn's bot response shows up
 * in the stream. Reconnects replay from the last seen sequence number.
 */

import { ApiError, ConsoleApi } from "./api.js";
import { project } from "./projection.js";
import type { ViewState } from "./projection.js";
import { renderArmedBadge, renderDag, renderFeed, renderInspector, renderTranscript } from "./render.js";
import { OOW_KINDS, type OowKind, type ServiceEvent, type WorkflowSummary } from "./types.js";

const api = new ConsoleApi("");

interface ConsoleState {
  workflow: WorkflowSummary | null;
  sessionId: string | null;
  events: ServiceEvent[];
  armedOow: OowKind | null;
  selectedNode: string | null;
  sending: boolean;
  simulated: boolean;
}

const state: ConsoleState = {
  workflow: null,
  sessionId: null,
  events: [],
  armedOow: null,
  selectedNode: null,
  sending: false,
  simulated: false,
};

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function currentView(): ViewState {
  if (!state.workflow) throw new Error("no workflow loaded");
  return project(state.workflow, state.events, state.armedOow);
}

function redraw(): void {
  if (!state.workflow) return;
  const view = currentView();
  el("transcript").innerHTML = renderTranscript(view);
  el("feed").innerHTML = renderFeed(view);
  el("dag").innerHTML = renderDag(state.workflow, view);
  el("inspector").innerHTML = renderInspector(state.workflow, view, state.selectedNode);
  el("armed").innerHTML = renderArmedBadge(view);
  const input = el<HTMLInputElement>("message-input");
  const locked = state.sending || view.pendingTurn || view.ended;
  input.disabled = locked || state.simulated;
  el<HTMLButtonElement>("send-button").disabled = locked;
  el("transcript").scrollTop = el("transcript").scrollHeight;
  el("feed").scrollTop = el("feed").scrollHeight;

  for (const nodeEl of el("dag").querySelectorAll<SVGGElement>(".dag-node")) {
    nodeEl.addEventListener("click", () => {
      state.selectedNode = nodeEl.dataset.node ?? null;
      redraw();
    });
  }
}

async function pollEvents(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const since = state.events.length ? state.events[state.events.length - 1].seq + 1 : 0;
    const body = await api.getEvents(state.sessionId, since);
    if (body.events.length) {
      state.events.push(...body.events);
      redraw();
    }
  } catch {
    // transient network failure; the next poll replays from the last seq
  }
}

async function connect(sessionId: string): Promise<void> {
  state.sessionId = sessionId;
  state.events = [];
  el("session-label").textContent = sessionId;
  await pollEvents();
  redraw();
}

async function send(text: string | null): Promise<void> {
  if (!state.sessionId || state.sending) return;
  state.sending = true;
  redraw();
  try {
    await api.sendMessage(state.sessionId, text);
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      el("status-line").textContent = "a turn is already in flight";
    } else {
      el("status-line").textContent = String(error);
    }
  } finally {
    state.sending = false;
    await pollEvents();
    redraw();
  }
}

async function armOow(kind: OowKind): Promise<void> {
  if (!state.sessionId) return;
  try {
    await api.armOow(state.sessionId, kind);
    state.armedOow = kind;
  } catch (error) {
    el("status-line").textContent =
      error instanceof ApiError ? error.message : String(error);
  }
  redraw();
}

async function bootstrap(): Promise<void> {
  const workflows = await api.listWorkflows();
  if (!workflows.length) {
    el("status-line").textContent = "no workflows registered on the service";
    return;
  }
  const select = el<HTMLSelectElement>("workflow-select");
  select.innerHTML = workflows
    .map((w) => `<option value="${w.workflow_id}">${w.name}</option>`)
    .join("");
  state.workflow = workflows[0];
  select.addEventListener("change", () => {
    state.workflow = workflows.find((w) => w.workflow_id === select.value) ?? workflows[0];
    redraw();
  });

  el<HTMLButtonElement>("new-session").addEventListener("click", async () => {
    if (!state.workflow) return;
    const simulated = el<HTMLInputElement>("simulated-user").checked;
    state.simulated = simulated;
    state.armedOow = null;
    const body: Parameters<ConsoleApi["createSession"]>[0] = {
      workflow_id: state.workflow.workflow_id,
      agent: el<HTMLSelectElement>("agent-select").value,
    };
    const backendModel = el<HTMLInputElement>("backend-model").value.trim();
    if (backendModel) body.backend = { kind: "openai", model: backendModel };
    if (simulated) {
      body.user = {
        kind: "simulated",
        profile: { persona: "a cooperative user exercising the workflow" },
        backend: backendModel ? { kind: "openai", model: backendModel } : undefined,
      };
    }
    try {
      const created = await api.createSession(body);
      await connect(created.session_id);
    } catch (error) {
      el("status-line").textContent =
        error instanceof ApiError ? error.message : String(error);
    }
  });

  el<HTMLButtonElement>("send-button").addEventListener("click", async () => {
    if (state.simulated) {
      await send(null);
      return;
    }
    const input = el<HTMLInputElement>("message-input");
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    await send(text);
  });

  const oowBar = el("oow-buttons");
  oowBar.innerHTML = OOW_KINDS.map(
    (kind) => `<button class="oow" data-kind="${kind}">${kind.replace("_", " ")}</button>`,
  ).join("");
  for (const button of oowBar.querySelectorAll<HTMLButtonElement>("button.oow")) {
    button.addEventListener("click", () => armOow(button.dataset.kind as OowKind));
  }

  window.setInterval(pollEvents, 800);
}

bootstrap().catch((error) => {
  el("status-line").textContent = String(error);
});
