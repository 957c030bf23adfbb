/** Editor state store: document mirror, selection, dirty flag, live ERC.
 *
 * The store is DOM-free so it runs under plain node for testing; the
 * render layer subscribes to change events.  ERC and layout always come
 * from the server - the editor never recomputes either locally.  Wire
 * geometry arrives with the initial layout; drags translate the
 * affected endpoints and fall back to simple L routes.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  DocumentError,
  connectionsOf,
  deleteConnection,
  deletePart,
  insertPartInline,
  lRouteTokens,
  movePart,
  overlappingParts,
  parseCircuit,
  parsePinRef,
  serializeCircuit,
  setRoute,
  snap,
} from "./document.js";
import { debouncedRunner, type DebouncedRunner } from "./debounce.js";
import type {
  CircuitDocument,
  ComponentInfo,
  ErcReport,
  Part,
  Point,
} from "./types.js";

export interface WireGeometry {
  start: Point;
  end: Point;
  tokens: string[];
  color: string;
}

export interface EditorState {
  document: CircuitDocument | null;
  selection: { kind: "part"; id: string } | { kind: "wire"; index: number } | null;
  dirty: boolean;
  lastErc: ErcReport | null;
  ercStale: boolean;
  error: string | null;
  overlaps: [string, string][];
  highlighted: string[];
  canvas: Point;
}

export type EditorEvent = "document" | "erc" | "selection" | "error";

const DEFAULT_CANVAS: Point = [800, 600];

export class Editor {
  readonly state: EditorState = {
    document: null,
    selection: null,
    dirty: false,
    lastErc: null,
    ercStale: false,
    error: null,
    overlaps: [],
    highlighted: [],
    canvas: DEFAULT_CANVAS,
  };
  readonly wires = new Map<number, WireGeometry>();
  private readonly dims = new Map<string, [number, number]>();
  private readonly pinCounts = new Map<string, number>();
  private readonly listeners = new Map<EditorEvent, Set<() => void>>();
  private readonly ercRunner: DebouncedRunner;

  constructor(
    private readonly api: ApiClient,
    readonly debounceMs: number = 250,
    readonly layoutSeed: number = 1,
  ) {
    this.ercRunner = debouncedRunner(debounceMs, () => this.runErc());
  }

  on(event: EditorEvent, listener: () => void): () => void {
    if (!this.listeners.has(event)) this.listeners.set(event, new Set());
    this.listeners.get(event)!.add(listener);
    return () => this.listeners.get(event)!.delete(listener);
  }

  private emit(event: EditorEvent): void {
    for (const listener of this.listeners.get(event) ?? []) listener();
  }

  async loadComponentCatalog(): Promise<ComponentInfo[]> {
    const catalog = await this.api.components();
    for (const info of catalog) {
      this.dims.set(info.key, [info.width, info.height]);
      this.pinCounts.set(info.key, info.pins.length);
    }
    return catalog;
  }

  /** Load CircuitJSON text: server-validate, auto-layout, start live ERC. */
  async load(text: string): Promise<void> {
    this.state.error = null;
    let doc: CircuitDocument;
    try {
      await this.api.validate(text);
      doc = parseCircuit(text);
    } catch (err) {
      // Server schema errors surface verbatim, JSON path included.
      this.state.error = err instanceof ApiError || err instanceof DocumentError
        ? err.message
        : `load failed: ${(err as Error).message}`;
      this.emit("error");
      throw err;
    }
    this.state.document = doc;
    this.state.selection = null;
    this.state.dirty = false;
    this.state.highlighted = [];
    await this.applyServerLayout();
    this.emit("document");
    this.scheduleErc();
  }

  /** Place via the service; positions land in the document mirror. */
  private async applyServerLayout(): Promise<void> {
    const doc = this.state.document;
    if (!doc) return;
    this.wires.clear();
    if (doc.parts.length === 0) {
      this.state.canvas = DEFAULT_CANVAS;
      return;
    }
    const layout = await this.api.layout(JSON.parse(serializeCircuit(doc)),
                                         this.layoutSeed);
    for (const part of doc.parts) {
      const position = layout.plan.positions[part.id];
      if (position) {
        part.left = position[0];
        part.top = position[1];
      }
    }
    this.state.canvas = layout.plan.canvas;
    for (const wire of layout.wires) {
      const first = wire.segments[0];
      const last = wire.segments[wire.segments.length - 1];
      if (!first || !last) continue;
      this.wires.set(wire.connection_index, {
        start: first[0],
        end: last[1],
        tokens: [...wire.route],
        color: wire.color,
      });
      const conn = doc.connections[wire.connection_index];
      if (conn) conn.route = [...wire.route];
    }
    this.state.overlaps = overlappingParts(doc, this.dims);
  }

  private mustDocument(): CircuitDocument {
    if (!this.state.document) throw new DocumentError("no document loaded");
    return this.state.document;
  }

  select(selection: EditorState["selection"]): void {
    this.state.selection = selection;
    this.emit("selection");
  }

  /** Drag: snap to grid, translate endpoints, L-reroute, mark dirty. */
  dragPart(partId: string, left: number, top: number): void {
    const doc = this.mustDocument();
    const before = doc.parts.find((p) => p.id === partId);
    if (!before) return;
    const dx = snap(left) - before.left;
    const dy = snap(top) - before.top;
    movePart(doc, partId, left, top);
    for (const index of connectionsOf(doc, partId)) {
      const geometry = this.wires.get(index);
      const conn = doc.connections[index];
      if (!geometry || !conn) continue;
      if (parsePinRef(conn.startPin).partId === partId) {
        geometry.start = [geometry.start[0] + dx, geometry.start[1] + dy];
      }
      if (parsePinRef(conn.endPin).partId === partId) {
        geometry.end = [geometry.end[0] + dx, geometry.end[1] + dy];
      }
      geometry.tokens = lRouteTokens(geometry.start, geometry.end);
      conn.route = [...geometry.tokens];
    }
    this.state.dirty = true;
    this.state.overlaps = overlappingParts(doc, this.dims);
    this.emit("document");
    this.scheduleErc();
  }

  deletePart(partId: string): void {
    const doc = this.mustDocument();
    const part = doc.parts.find((p) => p.id === partId);
    const inline = part ? this.pinCounts.get(part.type) === 2 : false;
    deletePart(doc, partId, inline);
    this.rebuildWireGeometry();
    if (this.state.selection?.kind === "part"
        && this.state.selection.id === partId) {
      this.state.selection = null;
    }
    this.state.dirty = true;
    this.state.overlaps = overlappingParts(doc, this.dims);
    this.emit("document");
    this.scheduleErc();
  }

  deleteWire(index: number): void {
    const doc = this.mustDocument();
    deleteConnection(doc, index);
    this.rebuildWireGeometry();
    this.state.selection = null;
    this.state.dirty = true;
    this.emit("document");
    this.scheduleErc();
  }

  insertInline(connectionIndex: number, part: Part, pinA: string,
               pinB: string): void {
    const doc = this.mustDocument();
    insertPartInline(doc, connectionIndex, part, pinA, pinB);
    this.rebuildWireGeometry();
    this.state.dirty = true;
    this.state.overlaps = overlappingParts(doc, this.dims);
    this.emit("document");
    this.scheduleErc();
  }

  /** Reshape a wire by editing its h/v route token list directly. */
  reshapeWire(index: number, tokens: string[]): void {
    const doc = this.mustDocument();
    setRoute(doc, index, tokens);
    const geometry = this.wires.get(index);
    if (geometry) geometry.tokens = [...tokens];
    this.state.dirty = true;
    this.emit("document");
    this.scheduleErc();
  }

  /** Wire indices shift on any connection edit; drop geometry and redraw
   *  from part anchors (exact pin geometry returns on the next layout). */
  private rebuildWireGeometry(): void {
    const doc = this.state.document;
    if (!doc) return;
    const stale = new Map(this.wires);
    this.wires.clear();
    doc.connections.forEach((conn, index) => {
      const old = stale.get(index);
      const start = this.partAnchor(parsePinRef(conn.startPin).partId);
      const end = this.partAnchor(parsePinRef(conn.endPin).partId);
      if (!start || !end) return;
      const geometry = old ?? { start, end, tokens: [], color: conn.color };
      geometry.start = start;
      geometry.end = end;
      geometry.tokens = lRouteTokens(start, end);
      conn.route = [...geometry.tokens];
      this.wires.set(index, geometry);
    });
  }

  private partAnchor(partId: string): Point | null {
    const part = this.state.document?.parts.find((p) => p.id === partId);
    if (!part) return null;
    const [w, h] = this.dims.get(part.type) ?? [60, 40];
    return [part.left + w / 2, part.top + h / 2];
  }

  export(): string {
    return serializeCircuit(this.mustDocument());
  }

  highlightViolation(subjects: string[]): void {
    this.state.highlighted = [...subjects];
    this.emit("selection");
  }

  scheduleErc(): void {
    this.ercRunner.schedule();
  }

  /** Force the pending ERC through; test hook and explicit refresh. */
  async flushErc(): Promise<void> {
    await this.ercRunner.flush();
  }

  private async runErc(): Promise<void> {
    const doc = this.state.document;
    if (!doc) return;
    try {
      const report = await this.api.erc(serializeCircuit(doc));
      this.state.lastErc = report;
      this.state.ercStale = false;
    } catch {
      // Offline or rejected: keep the previous badge, flag it stale.
      this.state.ercStale = true;
    }
    this.emit("erc");
  }

  badge(): { counts: Record<string, number>; stale: boolean } {
    const counts = this.state.lastErc?.counts
      ?? { Fatal: 0, Major: 0, Minor: 0, Warning: 0 };
    return { counts, stale: this.state.ercStale };
  }
}
