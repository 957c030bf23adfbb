/** Editor bootstrap: wires the store, renderer, and page controls. */

import { ApiClient } from "./api.js";
import { SceneRenderer } from "./render.js";
import { Editor } from "./state.js";
import type { ComponentInfo, SeverityName } from "./types.js";

const SEVERITIES: SeverityName[] = ["Fatal", "Major", "Minor", "Warning"];

const DEMO_CIRCUIT = {
  version: 1,
  author: "editor-demo",
  parts: [
    { type: "arduino-uno", id: "arduino", top: 60, left: 60, attrs: {} },
    { type: "resistor", id: "r1", top: 60, left: 320, attrs: { resistance: 220 } },
    { type: "led", id: "led1", top: 60, left: 580, attrs: {} },
  ],
  connections: [
    { startPin: "arduino:D3", endPin: "r1:1", color: "green", route: [] },
    { startPin: "r1:2", endPin: "led1:A", color: "green", route: [] },
    { startPin: "led1:C", endPin: "arduino:GND", color: "black", route: [] },
  ],
};

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const editor = new Editor(api);
  const banner = byId<HTMLDivElement>("banner");
  const badge = byId<HTMLDivElement>("badge");
  const violations = byId<HTMLUListElement>("violations");
  const source = byId<HTMLTextAreaElement>("source");

  let catalog: ComponentInfo[] = [];
  try {
    catalog = await editor.loadComponentCatalog();
  } catch {
    banner.textContent = "server unreachable: start `circuitlm serve` first";
    banner.className = "banner error";
    return;
  }
  const catalogMap = new Map(catalog.map((info) => [info.key, info]));
  new SceneRenderer(byId("canvas"), editor, catalogMap);

  editor.on("error", () => {
    banner.textContent = editor.state.error ?? "";
    banner.className = editor.state.error ? "banner error" : "banner";
  });
  editor.on("document", () => {
    banner.className = "banner";
    banner.textContent = editor.state.dirty ? "unsaved changes" : "";
    if (editor.state.overlaps.length > 0) {
      banner.textContent += (banner.textContent ? " - " : "")
        + `overlapping: ${editor.state.overlaps
            .map(([a, b]) => `${a}/${b}`).join(", ")}`;
      banner.className = "banner warn";
    }
  });
  editor.on("erc", () => {
    const { counts, stale } = editor.badge();
    badge.replaceChildren();
    for (const severity of SEVERITIES) {
      const chip = document.createElement("span");
      chip.className = `chip ${severity.toLowerCase()}`
        + (counts[severity] > 0 ? " nonzero" : "");
      chip.textContent = `${severity} ${counts[severity]}`;
      badge.appendChild(chip);
    }
    if (stale) {
      const warn = document.createElement("span");
      warn.className = "chip stale";
      warn.textContent = "⚠ stale";
      badge.appendChild(warn);
    }
    violations.replaceChildren();
    for (const violation of editor.state.lastErc?.violations ?? []) {
      const item = document.createElement("li");
      item.className = violation.severity.toLowerCase();
      item.textContent =
        `${violation.severity}: ${violation.rule_id}: ${violation.message}`;
      item.addEventListener("click", () =>
        editor.highlightViolation(violation.subjects));
      violations.appendChild(item);
    }
  });

  byId<HTMLButtonElement>("load").addEventListener("click", () => {
    void editor.load(source.value).catch(() => undefined);
  });
  byId<HTMLButtonElement>("export").addEventListener("click", () => {
    if (!editor.state.document) return;
    const text = editor.export();
    source.value = text;
    const blob = new Blob([text], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "circuit.circuit.json";
    link.click();
    URL.revokeObjectURL(link.href);
    editor.state.dirty = false;
  });
  byId<HTMLButtonElement>("delete").addEventListener("click", () => {
    const selection = editor.state.selection;
    if (selection?.kind === "part") editor.deletePart(selection.id);
    else if (selection?.kind === "wire") editor.deleteWire(selection.index);
  });
  byId<HTMLButtonElement>("recheck").addEventListener("click", () => {
    void editor.flushErc();
  });

  source.value = JSON.stringify(DEMO_CIRCUIT, null, 2);
  await editor.load(source.value);
}

void boot();
