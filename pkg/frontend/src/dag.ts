/** Client-side layered DAG layout and SVG rendering. */

import type { NodeStatus, WorkflowSummary } from "./types.js";

export interface LayoutNode {
  name: string;
  kind: "API" | "ANSWER";
  layer: number;
  index: number;
  x: number;
  y: number;
}

const NODE_WIDTH = 170;
const NODE_HEIGHT = 34;
const H_GAP = 40;
const V_GAP = 44;

/** Longest-path layering: a node sits one layer below its deepest precondition. */
export function layerNodes(workflow: WorkflowSummary): LayoutNode[] {
  const preconditions = new Map<string, string[]>();
  for (const node of workflow.nodes) preconditions.set(node.name, [...node.preconditions]);

  const depth = new Map<string, number>();
  const visiting = new Set<string>();
  const computeDepth = (name: string): number => {
    const cached = depth.get(name);
    if (cached !== undefined) return cached;
    if (visiting.has(name)) return 0; // defensive: the service validates acyclicity
    visiting.add(name);
    const pres = preconditions.get(name) ?? [];
    const value = pres.length === 0 ? 0 : Math.max(...pres.map(computeDepth)) + 1;
    visiting.delete(name);
    depth.set(name, value);
    return value;
  };

  const sorted = [...workflow.nodes].sort((a, b) => a.name.localeCompare(b.name));
  const byLayer = new Map<number, LayoutNode[]>();
  for (const node of sorted) {
    const layer = computeDepth(node.name);
    const row = byLayer.get(layer) ?? [];
    const item: LayoutNode = {
      name: node.name,
      kind: node.kind,
      layer,
      index: row.length,
      x: 0,
      y: 0,
    };
    row.push(item);
    byLayer.set(layer, row);
  }
  const result: LayoutNode[] = [];
  for (const [layer, row] of [...byLayer.entries()].sort((a, b) => a[0] - b[0])) {
    row.forEach((item, index) => {
      item.x = index * (NODE_WIDTH + H_GAP) + 10;
      item.y = layer * (NODE_HEIGHT + V_GAP) + 10;
      result.push(item);
    });
  }
  return result;
}

const STATUS_FILL: Record<NodeStatus, string> = {
  executed: "#2e7d32",
  accessible: "#1565c0",
  blocked: "#9e9e9e",
};

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderDagSvg(
  workflow: WorkflowSummary,
  statuses: Record<string, NodeStatus>,
  executed: Record<string, number>,
): string {
  const nodes = layerNodes(workflow);
  const byName = new Map(nodes.map((n) => [n.name, n]));
  const width = Math.max(...nodes.map((n) => n.x + NODE_WIDTH), 200) + 10;
  const height = Math.max(...nodes.map((n) => n.y + NODE_HEIGHT), 100) + 10;

  const edges = workflow.edges
    .map((edge) => {
      const from = byName.get(edge.source);
      const to = byName.get(edge.target);
      if (!from || !to) return "";
      const x1 = from.x + NODE_WIDTH / 2;
      const y1 = from.y + NODE_HEIGHT;
      const x2 = to.x + NODE_WIDTH / 2;
      const y2 = to.y;
      return `<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" stroke="#777" marker-end="url(#arrow)"/>`;
    })
    .join("");

  const boxes = nodes
    .map((node) => {
      const status = statuses[node.name] ?? "blocked";
      const fill = STATUS_FILL[status];
      const rx = node.kind === "ANSWER" ? 16 : 4;
      const count = executed[node.name] ?? 0;
      const label = count > 1 ? `${node.name} (x${count})` : node.name;
      return (
        `<g class="dag-node status-${status}" data-node="${escapeXml(node.name)}">` +
        `<rect x="${node.x}" y="${node.y}" width="${NODE_WIDTH}" height="${NODE_HEIGHT}" rx="${rx}" ` +
        `fill="${fill}" opacity="0.9"/>` +
        `<text x="${node.x + NODE_WIDTH / 2}" y="${node.y + NODE_HEIGHT / 2 + 4}" ` +
        `text-anchor="middle" fill="#fff" font-size="11">${escapeXml(label)}</text></g>`
      );
    })
    .join("");

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">` +
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse">` +
    `<path d="M 0 0 L 10 5 L 0 10 z" fill="#777"/></marker></defs>` +
    edges +
    boxes +
    `</svg>`
  );
}
