/** HTML rendering of view state; pure string functions for testability. */

import { renderDagSvg } from "./dag.js";
import type { ViewState } from "./projection.js";
import { unmetPreconditions } from "./projection.js";
import type { NodeInfo, WorkflowSummary } from "./types.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTranscript(view: ViewState): string {
  const turns = view.transcript
    .map((turn) => {
      const badge = turn.oow ? `<span class="oow-badge">OOW ${escapeHtml(turn.oow.join("/"))}</span>` : "";
      return (
        `<div class="turn turn-${turn.role.toLowerCase()}">` +
        `<span class="role">${turn.role}</span>${badge}` +
        `<span class="text">${escapeHtml(turn.text)}</span></div>`
      );
    })
    .join("");
  const pending = view.pendingTurn ? `<div class="pending">thinking…</div>` : "";
  return turns + pending;
}

export function renderFeed(view: ViewState): string {
  return view.feed
    .map(
      (card) =>
        `<div class="card card-${card.kind}" data-seq="${card.seq}">` +
        `<div class="card-title">${escapeHtml(card.title)}</div>` +
        `<div class="card-body">${escapeHtml(card.body)}</div></div>`,
    )
    .join("");
}

export function renderDag(workflow: WorkflowSummary, view: ViewState): string {
  return renderDagSvg(workflow, view.nodeStatus, view.executed);
}

export function renderInspector(
  workflow: WorkflowSummary,
  view: ViewState,
  nodeName: string | null,
): string {
  if (!nodeName) return `<div class="inspector-empty">select a node</div>`;
  const node: NodeInfo | undefined = workflow.nodes.find((n) => n.name === nodeName);
  if (!node) return `<div class="inspector-empty">unknown node</div>`;
  const unmet = unmetPreconditions(workflow, view.executed, nodeName);
  const rows = [
    `<h3>${escapeHtml(node.name)} <small>${node.kind}</small></h3>`,
    node.desc ? `<p class="desc">${escapeHtml(node.desc)}</p>` : "",
    `<dl>`,
    `<dt>status</dt><dd>${view.nodeStatus[node.name] ?? "?"}</dd>`,
    `<dt>executions</dt><dd>${view.executed[node.name] ?? 0}</dd>`,
    `<dt>request slots</dt><dd>${escapeHtml(node.request_slots.join(", ") || "–")}</dd>`,
    `<dt>response slots</dt><dd>${escapeHtml(node.response_slots.join(", ") || "–")}</dd>`,
    `<dt>preconditions</dt><dd>${escapeHtml(node.preconditions.join(", ") || "–")}</dd>`,
    unmet.length ? `<dt>unmet</dt><dd>${escapeHtml(unmet.join(", "))}</dd>` : "",
    `</dl>`,
  ];
  return rows.join("");
}

export function renderArmedBadge(view: ViewState): string {
  return view.armedOow
    ? `<span class="armed-badge">armed: ${escapeHtml(view.armedOow)}</span>`
    : "";
}
