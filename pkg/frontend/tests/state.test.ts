import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Editor } from "../src/state.js";
import type { CircuitDocument } from "../src/types.js";

const DEMO = JSON.stringify({
  version: 1,
  author: "t",
  parts: [
    { type: "arduino-uno", id: "arduino", top: 60, left: 60, attrs: {} },
    { type: "resistor", id: "r1", top: 60, left: 320,
      attrs: { resistance: 220 } },
    { type: "led", id: "led1", top: 60, left: 580, attrs: {} },
  ],
  connections: [
    { startPin: "arduino:D3", endPin: "r1:1", color: "green", route: [] },
    { startPin: "r1:2", endPin: "led1:A", color: "green", route: [] },
    { startPin: "led1:C", endPin: "arduino:GND", color: "black", route: [] },
  ],
});

/** Canned service contract: shapes mirror the live server's responses. */
function cannedFetch(options: { offline?: { value: boolean } } = {}): typeof fetch {
  return async (input: RequestInfo | URL, init?: RequestInit) => {
    if (options.offline?.value) throw new TypeError("fetch failed");
    const url = String(input);
    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), {
        status, headers: { "Content-Type": "application/json" },
      });
    if (url.endsWith("/v1/components")) {
      const pin = (name: string) =>
        ({ name, role: "passive", requires_drive: false });
      return json({ components: [
        { key: "arduino-uno",
          pins: ["5V", "GND", "D2", "D3", "D4"].map(pin),
          width: 180, height: 140, aliases: [],
          category: "microcontroller", description: "", glyph: true },
        { key: "resistor", pins: ["1", "2"].map(pin), width: 40, height: 20,
          aliases: [], category: "resistor", description: "", glyph: true },
        { key: "led", pins: ["A", "C"].map(pin), width: 30, height: 30,
          aliases: [], category: "led", description: "", glyph: true },
      ] });
    }
    const body = init?.body ? String(init.body) : "";
    if (url.endsWith("/v1/validate")) {
      try {
        JSON.parse(body);
      } catch {
        return json({ code: "SyntaxError", message: "invalid JSON",
                      path: "line 1 column 2" }, 400);
      }
      return json({ violations: [], parts: 0, connections: 0 });
    }
    if (url.endsWith("/v1/layout")) {
      const circuit = JSON.parse(body).circuit as CircuitDocument;
      const positions: Record<string, [number, number]> = {};
      circuit.parts.forEach((part, i) => { positions[part.id] = [40 + i * 250, 60]; });
      const wires = circuit.connections.map((conn, index) => ({
        connection_index: index,
        segments: [[[40 + index * 10, 100], [300 + index * 10, 100]]],
        color: conn.color,
        overlay: false,
        route: [`h${260}`],
      }));
      return json({ plan: { positions, rotations: {}, canvas: [800, 600] },
                    wires, crossings: 0, svg: "<svg/>" });
    }
    if (url.endsWith("/v1/erc")) {
      const doc = JSON.parse(body) as CircuitDocument;
      const protected_ = doc.parts.some((p) => p.type === "resistor");
      const violations = protected_ ? [] : [{
        rule_id: "led-no-series-resistor", severity: "Major",
        message: "led1 is driven without a current-limiting resistor",
        subjects: ["led1:A"],
      }];
      return json({
        violations,
        counts: { Fatal: 0, Major: violations.length, Minor: 0, Warning: 0 },
        halted_ood: false,
      });
    }
    return json({ code: "BadRequest", message: `unexpected ${url}` }, 404);
  };
}

function makeEditor(options: { offline?: { value: boolean } } = {}): Editor {
  const api = new ApiClient("http://test", cannedFetch(options));
  return new Editor(api, 10);
}

describe("Editor.load", () => {
  it("applies server layout positions and wire geometry", async () => {
    const editor = makeEditor();
    await editor.loadComponentCatalog();
    await editor.load(DEMO);
    const doc = editor.state.document!;
    expect(doc.parts[0].left).toBe(40);
    expect(doc.parts[1].left).toBe(290);
    expect(editor.wires.size).toBe(3);
    expect(editor.state.dirty).toBe(false);
    expect(doc.connections[0].route).toEqual(["h260"]);
  });

  it("surfaces server schema errors verbatim with the path", async () => {
    const editor = makeEditor();
    await expect(editor.load("{broken")).rejects.toThrow();
    expect(editor.state.error).toContain("SyntaxError");
    expect(editor.state.error).toContain("line 1 column 2");
  });

  it("runs ERC after load (debounced)", async () => {
    const editor = makeEditor();
    await editor.load(DEMO);
    await editor.flushErc();
    expect(editor.badge().counts.Major).toBe(0);
    expect(editor.state.ercStale).toBe(false);
  });
});

describe("Editor.dragPart", () => {
  it("snaps, marks dirty, and keeps the export loadable", async () => {
    const editor = makeEditor();
    await editor.loadComponentCatalog();
    await editor.load(DEMO);
    editor.dragPart("led1", 503, 297);
    const led = editor.state.document!.parts.find((p) => p.id === "led1")!;
    expect([led.left, led.top]).toEqual([500, 300]);
    expect(editor.state.dirty).toBe(true);
    const exported = editor.export();
    const reparsed = JSON.parse(exported);
    expect(reparsed.parts[2].left).toBe(500);
  });

  it("translates attached wire endpoints and reroutes as an L", async () => {
    const editor = makeEditor();
    await editor.loadComponentCatalog();
    await editor.load(DEMO);
    const before = editor.wires.get(1)!;
    const endBefore = [...before.end];
    editor.dragPart("led1", 600, 200);
    const after = editor.wires.get(1)!;
    expect(after.end).not.toEqual(endBefore);
    for (const token of after.tokens) {
      expect(token).toMatch(/^[hv]-?\d+/);
    }
  });

  it("flags overlaps as advisory, never rejects", async () => {
    const editor = makeEditor();
    await editor.loadComponentCatalog();
    await editor.load(DEMO);
    editor.dragPart("led1", 45, 65);
    expect(editor.state.overlaps).toContainEqual(["arduino", "led1"]);
    expect(editor.state.document!.parts).toHaveLength(3);
  });
});

describe("live ERC loop", () => {
  it("raises the Major badge after deleting the series resistor", async () => {
    const editor = makeEditor();
    await editor.loadComponentCatalog();
    await editor.load(DEMO);
    await editor.flushErc();
    expect(editor.badge().counts.Major).toBe(0);
    editor.deletePart("r1");
    await new Promise((r) => setTimeout(r, 60));  // > debounce interval (10)
    expect(editor.badge().counts.Major).toBe(1);
  });

  it("clears the badge once the resistor is reinserted", async () => {
    const editor = makeEditor();
    await editor.loadComponentCatalog();
    await editor.load(DEMO);
    editor.deletePart("r1");
    await editor.flushErc();
    expect(editor.badge().counts.Major).toBe(1);
    const spliced = editor.state.document!.connections.findIndex(
      (c) => c.startPin === "arduino:D3");
    editor.insertInline(spliced,
      { type: "resistor", id: "r2", top: 60, left: 320,
        attrs: { resistance: 220 } }, "1", "2");
    await editor.flushErc();
    expect(editor.badge().counts.Major).toBe(0);
  });

  it("keeps a stale badge when the server goes away", async () => {
    const offline = { value: false };
    const editor = makeEditor({ offline });
    await editor.loadComponentCatalog();
    await editor.load(DEMO);
    await editor.flushErc();
    offline.value = true;
    editor.dragPart("led1", 700, 100);
    await editor.flushErc();
    expect(editor.state.ercStale).toBe(true);
    expect(editor.badge().counts.Major).toBe(0);  // previous badge kept
  });
});

describe("export round-trip", () => {
  it("any edit sequence stays accepted by the validator", async () => {
    const editor = makeEditor();
    await editor.loadComponentCatalog();
    await editor.load(DEMO);
    editor.dragPart("arduino", 10, 10);
    editor.deletePart("r1");
    const spliced = editor.state.document!.connections.findIndex(
      (c) => c.startPin === "arduino:D3");
    editor.reshapeWire(spliced, ["h120", "v40", "h60"]);
    const api = new ApiClient("http://test", cannedFetch());
    const result = await api.validate(editor.export());
    expect(result.violations).toEqual([]);
  });
});
