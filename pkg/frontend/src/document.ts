/** Client-side document handling: parsing, invariants, and edits.
 *
 * Edits never break the schema invariants (unique part ids, no dangling
 * connection endpoints, first-colon pin references), so every exported
 * document stays acceptable to the server.  Electrical and layout
 * mathematics stay on the server; this module only moves data around.
 */

import type { CircuitDocument, Connection, Part, PinRef } from "./types.js";

export const GRID = 10;

export class DocumentError extends Error {
  constructor(message: string, readonly path: string = "$") {
    super(`${path}: ${message}`);
    this.name = "DocumentError";
  }
}

export function parsePinRef(text: string, path = "$"): PinRef {
  const split = text.indexOf(":");
  if (split < 0) throw new DocumentError(`pin reference '${text}' has no ':'`, path);
  const partId = text.slice(0, split);
  const pinName = text.slice(split + 1);
  if (!partId) throw new DocumentError("empty part id in pin reference", path);
  if (!pinName) throw new DocumentError("empty pin name in pin reference", path);
  if (pinName.includes(":")) {
    throw new DocumentError(`pin name '${pinName}' contains ':'`, path);
  }
  return { partId, pinName };
}

function requireField<T>(obj: Record<string, unknown>, key: string, path: string): T {
  if (!(key in obj)) throw new DocumentError(`missing required field '${key}'`, path);
  return obj[key] as T;
}

/** Parse and check structure; throws DocumentError with a JSON path. */
export function parseCircuit(text: string): CircuitDocument {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    throw new DocumentError(`invalid JSON: ${(err as Error).message}`);
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new DocumentError("document must be a JSON object");
  }
  const doc = data as CircuitDocument;
  const version = requireField<number>(doc, "version", "$");
  if (typeof version !== "number" || !Number.isInteger(version)) {
    throw new DocumentError("version must be an integer", "$.version");
  }
  if (typeof requireField(doc, "author", "$") !== "string") {
    throw new DocumentError("author must be a string", "$.author");
  }
  const parts = requireField<Part[]>(doc, "parts", "$");
  const connections = requireField<Connection[]>(doc, "connections", "$");
  if (!Array.isArray(parts)) throw new DocumentError("parts must be a list", "$.parts");
  if (!Array.isArray(connections)) {
    throw new DocumentError("connections must be a list", "$.connections");
  }
  const ids = new Set<string>();
  parts.forEach((part, i) => {
    const path = `$.parts[${i}]`;
    if (typeof part.id !== "string" || !part.id) {
      throw new DocumentError("part id must be a non-empty string", `${path}.id`);
    }
    if (part.id.includes(":")) {
      throw new DocumentError(`part id '${part.id}' contains ':'`, `${path}.id`);
    }
    if (ids.has(part.id)) throw new DocumentError(`duplicate part id '${part.id}'`, `${path}.id`);
    ids.add(part.id);
    if (typeof part.type !== "string") throw new DocumentError("part type must be a string", `${path}.type`);
    if (typeof part.top !== "number" || typeof part.left !== "number") {
      throw new DocumentError("top and left must be numbers", path);
    }
    if (typeof part.attrs !== "object" || part.attrs === null || Array.isArray(part.attrs)) {
      throw new DocumentError("attrs must be an object", `${path}.attrs`);
    }
  });
  connections.forEach((conn, i) => {
    const path = `$.connections[${i}]`;
    for (const [field, value] of [["startPin", conn.startPin], ["endPin", conn.endPin]] as const) {
      const ref = parsePinRef(String(value), `${path}.${field}`);
      if (!ids.has(ref.partId)) {
        throw new DocumentError(`connection references unknown part '${ref.partId}'`, `${path}.${field}`);
      }
    }
    if (conn.startPin === conn.endPin) {
      throw new DocumentError("startPin and endPin reference the same pin", path);
    }
    if (conn.color === undefined) conn.color = "black";
    if (conn.route === undefined) conn.route = [];
  });
  return doc;
}

/** Canonical-order export; the server round-trips this byte-for-byte parseable. */
export function serializeCircuit(doc: CircuitDocument): string {
  const parts = doc.parts.map((part) => {
    const { type, id, top, left, attrs, rotate, ...extra } = part;
    const entry: Record<string, unknown> = { type, id, top, left, attrs };
    if (rotate) entry.rotate = rotate;
    return { ...entry, ...extra };
  });
  const connections = doc.connections.map((conn) => {
    const { startPin, endPin, color, route, ...extra } = conn;
    return { startPin, endPin, color, route, ...extra };
  });
  const { version, author, parts: _p, connections: _c, ...extras } = doc;
  return JSON.stringify({ version, author, parts, connections, ...extras }, null, 2) + "\n";
}

export function snap(value: number, grid: number = GRID): number {
  return Math.round(value / grid) * grid;
}

export function partById(doc: CircuitDocument, id: string): Part | undefined {
  return doc.parts.find((p) => p.id === id);
}

export function movePart(doc: CircuitDocument, id: string, left: number, top: number): Part {
  const part = partById(doc, id);
  if (!part) throw new DocumentError(`no part '${id}'`);
  part.left = snap(left);
  part.top = snap(top);
  return part;
}

export function connectionsOf(doc: CircuitDocument, partId: string): number[] {
  const indices: number[] = [];
  doc.connections.forEach((conn, i) => {
    if (parsePinRef(conn.startPin).partId === partId
        || parsePinRef(conn.endPin).partId === partId) {
      indices.push(i);
    }
  });
  return indices;
}

/**
 * Delete a part.  With `spliceInline` (two-pin series elements like a
 * resistor, per the component catalog), the two neighbouring wires are
 * joined into one direct wire so the circuit stays connected; otherwise
 * the part's wires are simply dropped.  No dangling endpoints survive.
 */
export function deletePart(doc: CircuitDocument, id: string,
                           spliceInline = false): void {
  if (!partById(doc, id)) throw new DocumentError(`no part '${id}'`);
  const attached = connectionsOf(doc, id);
  let splice: Connection | null = null;
  if (spliceInline && attached.length === 2) {
    const farEnds = attached.map((i) => {
      const conn = doc.connections[i];
      return parsePinRef(conn.startPin).partId === id ? conn.endPin : conn.startPin;
    });
    const [a, b] = farEnds;
    if (parsePinRef(a).partId !== id && parsePinRef(b).partId !== id && a !== b) {
      splice = { startPin: a, endPin: b, color: doc.connections[attached[0]].color, route: [] };
    }
  }
  doc.connections = doc.connections.filter((_, i) => !attached.includes(i));
  if (splice) doc.connections.push(splice);
  doc.parts = doc.parts.filter((p) => p.id !== id);
}

export function deleteConnection(doc: CircuitDocument, index: number): void {
  if (index < 0 || index >= doc.connections.length) {
    throw new DocumentError(`no connection ${index}`);
  }
  doc.connections.splice(index, 1);
}

/** Split a wire through a new two-pin part (the inverse of a splice). */
export function insertPartInline(
  doc: CircuitDocument,
  connectionIndex: number,
  part: Part,
  pinA: string,
  pinB: string,
): void {
  if (partById(doc, part.id)) throw new DocumentError(`duplicate part id '${part.id}'`);
  if (connectionIndex < 0 || connectionIndex >= doc.connections.length) {
    throw new DocumentError(`no connection ${connectionIndex}`);
  }
  const old = doc.connections[connectionIndex];
  doc.parts.push(part);
  doc.connections.splice(connectionIndex, 1,
    { startPin: old.startPin, endPin: `${part.id}:${pinA}`, color: old.color, route: [] },
    { startPin: `${part.id}:${pinB}`, endPin: old.endPin, color: old.color, route: [] });
}

const ROUTE_TOKEN = /^[hv]-?\d+(\.\d+)?$/;

export function validRouteTokens(tokens: string[]): boolean {
  return tokens.every((t) => ROUTE_TOKEN.test(t) && parseFloat(t.slice(1)) !== 0);
}

export function setRoute(doc: CircuitDocument, index: number, tokens: string[]): void {
  if (index < 0 || index >= doc.connections.length) {
    throw new DocumentError(`no connection ${index}`);
  }
  if (!validRouteTokens(tokens)) {
    throw new DocumentError(`route tokens must match h<dx>/v<dy>: ${tokens.join(" ")}`);
  }
  doc.connections[index].route = [...tokens];
}

/** L-shaped token pair between two points (empty when already axis-aligned). */
export function lRouteTokens(from: [number, number], to: [number, number]): string[] {
  const tokens: string[] = [];
  const dx = to[0] - from[0];
  const dy = to[1] - from[1];
  if (dx !== 0) tokens.push(`h${dx}`);
  if (dy !== 0) tokens.push(`v${dy}`);
  return tokens;
}

/** Advisory overlap check from component dimensions (manual mode allows it). */
export function overlappingParts(
  doc: CircuitDocument,
  dims: Map<string, [number, number]>,
  fallback: [number, number] = [60, 40],
): [string, string][] {
  const boxes = doc.parts.map((part) => {
    let [w, h] = dims.get(part.type) ?? fallback;
    if (((part.rotate ?? 0) % 180 + 180) % 180 === 90) [w, h] = [h, w];
    return { id: part.id, left: part.left, top: part.top, w, h };
  });
  const pairs: [string, string][] = [];
  for (let i = 0; i < boxes.length; i++) {
    for (let j = i + 1; j < boxes.length; j++) {
      const a = boxes[i];
      const b = boxes[j];
      if (a.left < b.left + b.w && b.left < a.left + a.w
          && a.top < b.top + b.h && b.top < a.top + a.h) {
        pairs.push([a.id, b.id]);
      }
    }
  }
  return pairs;
}
