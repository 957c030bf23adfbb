/** SVG scene rendering and pointer interaction (browser only). */

import { parsePinRef } from "./document.js";
import type { Editor, WireGeometry } from "./state.js";
import type { ComponentInfo, Point } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function wirePoints(geometry: WireGeometry): Point[] {
  const points: Point[] = [geometry.start];
  let [x, y] = geometry.start;
  for (const token of geometry.tokens) {
    const delta = parseFloat(token.slice(1));
    if (token[0] === "h") x += delta;
    else y += delta;
    points.push([x, y]);
  }
  const [ex, ey] = geometry.end;
  if (x !== ex) points.push([ex, y]);
  if (y !== ey || x !== ex) points.push([ex, ey]);
  return points;
}

export class SceneRenderer {
  private svg: SVGSVGElement;
  private dragging: { partId: string; offsetX: number; offsetY: number } | null = null;

  constructor(
    private readonly host: HTMLElement,
    private readonly editor: Editor,
    private readonly catalog: Map<string, ComponentInfo>,
  ) {
    this.svg = el("svg", { width: 800, height: 600 });
    this.host.appendChild(this.svg);
    this.svg.addEventListener("pointermove", (event) => this.onPointerMove(event));
    this.svg.addEventListener("pointerup", () => (this.dragging = null));
    this.svg.addEventListener("pointerleave", () => (this.dragging = null));
    editor.on("document", () => this.render());
    editor.on("selection", () => this.render());
  }

  private toCanvas(event: PointerEvent): Point {
    const rect = this.svg.getBoundingClientRect();
    return [event.clientX - rect.left, event.clientY - rect.top];
  }

  private onPointerMove(event: PointerEvent): void {
    if (!this.dragging) return;
    const [x, y] = this.toCanvas(event);
    this.editor.dragPart(this.dragging.partId,
                         x - this.dragging.offsetX,
                         y - this.dragging.offsetY);
  }

  render(): void {
    const state = this.editor.state;
    const doc = state.document;
    this.svg.replaceChildren();
    const [width, height] = state.canvas;
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(height));
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    this.svg.appendChild(el("rect", {
      x: 0, y: 0, width, height, fill: "#fdfdf6", stroke: "#444",
    }));
    if (!doc) return;

    const highlighted = new Set(state.highlighted.flatMap((subject) => {
      const colon = subject.indexOf(":");
      return colon > 0 ? [subject, subject.slice(0, colon)] : [subject];
    }));
    const overlapping = new Set(state.overlaps.flat());

    doc.connections.forEach((conn, index) => {
      const geometry = this.editor.wires.get(index);
      if (!geometry) return;
      const selected = state.selection?.kind === "wire"
        && state.selection.index === index;
      const hot = highlighted.has(conn.startPin) || highlighted.has(conn.endPin);
      const line = el("polyline", {
        points: wirePoints(geometry).map(([x, y]) => `${x},${y}`).join(" "),
        fill: "none",
        stroke: hot ? "#d03020" : geometry.color,
        "stroke-width": selected || hot ? 4 : 2,
      });
      line.addEventListener("pointerdown", (event) => {
        event.stopPropagation();
        this.editor.select({ kind: "wire", index });
      });
      this.svg.appendChild(line);
    });

    for (const part of doc.parts) {
      const info = this.catalog.get(part.type);
      const w = info?.width ?? 60;
      const h = info?.height ?? 40;
      const group = el("g", { transform: `translate(${part.left} ${part.top})` });
      const selected = state.selection?.kind === "part"
        && state.selection.id === part.id;
      const box = el("rect", {
        x: 0, y: 0, width: w, height: h, rx: 4,
        fill: info ? "#e8eef7" : "#f7e8e8",
        stroke: highlighted.has(part.id) ? "#d03020"
          : overlapping.has(part.id) ? "#d07020"
          : selected ? "#2a6099" : "#333",
        "stroke-width": selected || highlighted.has(part.id) ? 3 : 1.5,
      });
      group.appendChild(box);
      const label = el("text", {
        x: w / 2, y: h / 2, "font-size": 10, "text-anchor": "middle",
        "dominant-baseline": "middle",
      });
      label.textContent = part.id;
      group.appendChild(label);
      const typeLabel = el("text", {
        x: w / 2, y: -4, "font-size": 8, "text-anchor": "middle",
        fill: "#777",
      });
      typeLabel.textContent = part.type;
      group.appendChild(typeLabel);
      group.addEventListener("pointerdown", (event) => {
        event.stopPropagation();
        const [x, y] = this.toCanvas(event);
        this.dragging = {
          partId: part.id,
          offsetX: x - part.left,
          offsetY: y - part.top,
        };
        this.editor.select({ kind: "part", id: part.id });
      });
      this.svg.appendChild(group);
    }
  }
}

export function describePin(subject: string): string {
  try {
    const ref = parsePinRef(subject);
    return `${ref.partId} pin ${ref.pinName}`;
  } catch {
    return subject;
  }
}
