/** Shared shapes for the editor: the document mirror and server replies. */

export interface Part {
  type: string;
  id: string;
  top: number;
  left: number;
  attrs: Record<string, unknown>;
  rotate?: number;
  [extra: string]: unknown;
}

export interface Connection {
  startPin: string;
  endPin: string;
  color: string;
  route: string[];
  [extra: string]: unknown;
}

export interface CircuitDocument {
  version: number;
  author: string;
  parts: Part[];
  connections: Connection[];
  [extra: string]: unknown;
}

export interface PinRef {
  partId: string;
  pinName: string;
}

export type SeverityName = "Fatal" | "Major" | "Minor" | "Warning";

export interface Violation {
  rule_id: string;
  severity: SeverityName;
  message: string;
  subjects: string[];
}

export interface ErcReport {
  violations: Violation[];
  counts: Record<SeverityName, number>;
  halted_ood: boolean;
}

export interface ComponentInfo {
  key: string;
  pins: { name: string; role: string; requires_drive: boolean }[];
  width: number;
  height: number;
  aliases: string[];
  category: string;
  description: string;
  glyph: boolean;
}

export type Point = [number, number];

export interface RoutedWireInfo {
  connection_index: number;
  segments: [Point, Point][];
  color: string;
  overlay: boolean;
  route: string[];
}

export interface LayoutResponse {
  plan: {
    positions: Record<string, Point>;
    rotations: Record<string, number>;
    canvas: Point;
  };
  wires: RoutedWireInfo[];
  crossings: number;
  svg: string;
}

export interface ValidateResponse {
  violations: Violation[];
  parts: number;
  connections: number;
}

/** Server-reported document error (HTTP 400), shown verbatim. */
export interface ApiErrorBody {
  code: string;
  message: string;
  path?: string;
}
