"""Placement, rectilinear wire routing, and SVG rendering.

Placement runs a seeded spring embedder (attraction along connections,
repulsion between all part pairs) in float space, then a separation pass
that guarantees non-overlapping boxes, and finally snaps to the routing
grid.  Routing searches the grid with cost = length + bend_penalty per
turn, avoiding part interiors; an enclosed endpoint falls back to a
direct two-segment route flagged as an overlay.  Wire crossings are
counted as a diagnostic but never optimized away.

Everything is a pure function of (document, library, seed, config), so
output bytes are stable across runs and platforms.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .kb import ComponentLibrary, ComponentRecord
from .schema import CircuitDocument, Part, PinRef

Point = tuple[float, float]
Segment = tuple[Point, Point]

_GLYPHS_PATH = Path(__file__).parent / "data" / "glyphs.json"


@dataclass(frozen=True)
class LayoutConfig:
    grid: int = 10
    bend_penalty: int = 20
    iterations: int = 300
    margin: int = 40
    min_canvas_width: int = 800
    min_canvas_height: int = 600
    default_width: float = 60.0   # unknown parts render as this glyph box
    default_height: float = 40.0
    ideal_slack: float = 60.0     # added to box radii for the spring length
    initial_jitter: float = 15.0


DEFAULT_CONFIG = LayoutConfig()


@dataclass
class LayoutPlan:
    positions: dict[str, tuple[float, float]]  # part id -> (left, top)
    rotations: dict[str, float]
    canvas: tuple[float, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "positions": {pid: [pos[0], pos[1]]
                          for pid, pos in self.positions.items()},
            "rotations": dict(self.rotations),
            "canvas": [self.canvas[0], self.canvas[1]],
        }


@dataclass
class RoutedWire:
    connection_index: int
    segments: list[Segment]
    color: str
    overlay: bool = False

    def route_tokens(self) -> list[str]:
        """Relative axis moves in the h<dx>/v<dy> grammar."""
        tokens = []
        for (x1, y1), (x2, y2) in self.segments:
            if x1 != x2:
                tokens.append(f"h{x2 - x1:g}")
            elif y1 != y2:
                tokens.append(f"v{y2 - y1:g}")
        return tokens

    def to_dict(self) -> dict[str, Any]:
        return {
            "connection_index": self.connection_index,
            "segments": [[[a[0], a[1]], [b[0], b[1]]]
                         for a, b in self.segments],
            "color": self.color,
            "overlay": self.overlay,
            "route": self.route_tokens(),
        }


def load_glyphs(path: str | Path | None = None) -> dict[str, Any]:
    glyph_path = Path(path) if path else _GLYPHS_PATH
    if not glyph_path.exists():
        return {}
    return json.loads(glyph_path.read_text(encoding="utf-8"))


def part_dimensions(part: Part, lib: ComponentLibrary,
                    config: LayoutConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    record = lib.get(part.type)
    if record is None:
        width, height = config.default_width, config.default_height
    else:
        width, height = record.width, record.height
    if part.rotate % 180 == 90:
        width, height = height, width
    return width, height


def _snap(value: float, grid: int) -> float:
    return float(round(value / grid) * grid)


def _boxes_overlap(a: tuple[float, float, float, float],
                   b: tuple[float, float, float, float]) -> bool:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def compute_layout(doc: CircuitDocument, lib: ComponentLibrary, seed: int,
                   config: LayoutConfig = DEFAULT_CONFIG) -> LayoutPlan:
    """Seeded force-directed placement with guaranteed box separation."""
    grid = config.grid
    canvas_w = float(config.min_canvas_width)
    canvas_h = float(config.min_canvas_height)
    parts = doc.parts
    rotations = {p.id: float(p.rotate) for p in parts}
    if not parts:
        return LayoutPlan(positions={}, rotations={},
                          canvas=(canvas_w, canvas_h))

    dims = {p.id: part_dimensions(p, lib, config) for p in parts}
    if len(parts) == 1:
        part = parts[0]
        w, h = dims[part.id]
        left = _snap((canvas_w - w) / 2, grid)
        top = _snap((canvas_h - h) / 2, grid)
        return LayoutPlan(positions={part.id: (left, top)},
                          rotations=rotations, canvas=(canvas_w, canvas_h))

    rng = random.Random(seed)
    order = [p.id for p in parts]
    centers: dict[str, list[float]] = {}
    for part in parts:
        w, h = dims[part.id]
        cx = part.left + w / 2 + rng.uniform(-config.initial_jitter,
                                             config.initial_jitter)
        cy = part.top + h / 2 + rng.uniform(-config.initial_jitter,
                                            config.initial_jitter)
        centers[part.id] = [cx, cy]

    edges: dict[tuple[str, str], int] = {}
    for conn in doc.connections:
        a, b = conn.start_pin.part_id, conn.end_pin.part_id
        if a == b:
            continue
        key = (a, b) if order.index(a) < order.index(b) else (b, a)
        edges[key] = edges.get(key, 0) + 1

    def radius(pid: str) -> float:
        w, h = dims[pid]
        return math.hypot(w, h) / 2

    temperature = max(canvas_w, canvas_h) / 8
    cooling = temperature / (config.iterations + 1)
    for _ in range(config.iterations):
        forces = {pid: [0.0, 0.0] for pid in order}
        for i, a in enumerate(order):
            for b in order[i + 1:]:
                dx = centers[a][0] - centers[b][0]
                dy = centers[a][1] - centers[b][1]
                dist = math.hypot(dx, dy)
                if dist < 1e-9:
                    # Deterministic nudge for coincident centers.
                    dx, dy, dist = 1.0, 0.5, math.hypot(1.0, 0.5)
                ideal = radius(a) + radius(b) + config.ideal_slack
                rep = (ideal * ideal) / dist
                forces[a][0] += dx / dist * rep
                forces[a][1] += dy / dist * rep
                forces[b][0] -= dx / dist * rep
                forces[b][1] -= dy / dist * rep
        for (a, b), count in edges.items():
            dx = centers[a][0] - centers[b][0]
            dy = centers[a][1] - centers[b][1]
            dist = math.hypot(dx, dy)
            if dist < 1e-9:
                continue
            ideal = radius(a) + radius(b) + config.ideal_slack
            att = count * (dist * dist) / ideal
            forces[a][0] -= dx / dist * att
            forces[a][1] -= dy / dist * att
            forces[b][0] += dx / dist * att
            forces[b][1] += dy / dist * att
        for pid in order:
            fx, fy = forces[pid]
            magnitude = math.hypot(fx, fy)
            if magnitude < 1e-9:
                continue
            step = min(magnitude, temperature)
            centers[pid][0] += fx / magnitude * step
            centers[pid][1] += fy / magnitude * step
        temperature = max(temperature - cooling, 1.0)

    def box(pid: str) -> tuple[float, float, float, float]:
        w, h = dims[pid]
        return (centers[pid][0] - w / 2, centers[pid][1] - h / 2, w, h)

    # Separation sweeps in float space; a gap of one grid cell keeps the
    # boxes apart after snapping.
    gap = float(grid)
    for _ in range(300):
        moved = False
        for i, a in enumerate(order):
            for b in order[i + 1:]:
                ax, ay, aw, ah = box(a)
                bx, by, bw, bh = box(b)
                overlap_x = min(ax + aw, bx + bw) - max(ax, bx) + gap
                overlap_y = min(ay + ah, by + bh) - max(ay, by) + gap
                if overlap_x <= gap - 1e-9 or overlap_y <= gap - 1e-9:
                    continue
                if overlap_x <= overlap_y:
                    shift = overlap_x / 2
                    sign = 1.0 if centers[a][0] >= centers[b][0] else -1.0
                    centers[a][0] += sign * shift
                    centers[b][0] -= sign * shift
                else:
                    shift = overlap_y / 2
                    sign = 1.0 if centers[a][1] >= centers[b][1] else -1.0
                    centers[a][1] += sign * shift
                    centers[b][1] -= sign * shift
                moved = True
        if not moved:
            break
    else:
        # Shelf-pack fallback: always valid, rarely needed.
        shelf_x, shelf_y, row_height = 0.0, 0.0, 0.0
        for pid in order:
            w, h = dims[pid]
            if shelf_x > 0 and shelf_x + w > canvas_w:
                shelf_x = 0.0
                shelf_y += row_height + gap
                row_height = 0.0
            centers[pid] = [shelf_x + w / 2, shelf_y + h / 2]
            shelf_x += w + gap
            row_height = max(row_height, h)

    min_x = min(box(pid)[0] for pid in order)
    min_y = min(box(pid)[1] for pid in order)
    shift_x = config.margin - min_x
    shift_y = config.margin - min_y
    positions: dict[str, tuple[float, float]] = {}
    for pid in order:
        x, y, w, h = box(pid)
        positions[pid] = (_snap(x + shift_x, grid), _snap(y + shift_y, grid))

    # Snapping can reintroduce touch-overlaps; nudge later parts on the grid.
    for _ in range(200):
        clean = True
        for i, a in enumerate(order):
            for b in order[:i]:
                abox = (*positions[a], *dims[a])
                bbox = (*positions[b], *dims[b])
                if _boxes_overlap(abox, bbox):
                    positions[a] = (positions[a][0] + grid, positions[a][1])
                    clean = False
        if clean:
            break

    max_x = max(positions[pid][0] + dims[pid][0] for pid in order)
    max_y = max(positions[pid][1] + dims[pid][1] for pid in order)
    canvas_w = max(canvas_w, _snap(max_x + config.margin, grid))
    canvas_h = max(canvas_h, _snap(max_y + config.margin, grid))
    return LayoutPlan(positions=positions, rotations=rotations,
                      canvas=(canvas_w, canvas_h))


def _default_pin_offsets(record_pins: list[str], width: float, height: float,
                         grid: int) -> dict[str, tuple[float, float]]:
    offsets: dict[str, tuple[float, float]] = {}
    n = len(record_pins)
    left_count = (n + 1) // 2
    for i, name in enumerate(record_pins):
        if i < left_count:
            y = height * (i + 1) / (left_count + 1)
            offsets[name] = (0.0, _snap(y, grid))
        else:
            j = i - left_count
            y = height * (j + 1) / (n - left_count + 1)
            offsets[name] = (width, _snap(y, grid))
    return offsets


def _rotate_offset(offset: tuple[float, float], rotate: float,
                   width: float, height: float) -> tuple[float, float]:
    turns = int(rotate / 90) % 4
    x, y = offset
    for _ in range(turns):
        x, y = height - y, x  # 90 degrees clockwise within the box
        width, height = height, width
    return x, y


def pin_positions(doc: CircuitDocument, plan: LayoutPlan,
                  lib: ComponentLibrary, glyphs: dict[str, Any] | None = None,
                  config: LayoutConfig = DEFAULT_CONFIG,
                  ) -> dict[PinRef, tuple[float, float]]:
    """Absolute pin coordinates from part positions plus per-pin offsets.

    Offsets come from the glyph file when present, otherwise pins spread
    down the left then right box edges in record order.  Unknown part
    types expose whatever pins the connections reference, on the left edge.
    """
    glyphs = glyphs if glyphs is not None else load_glyphs()
    result: dict[PinRef, tuple[float, float]] = {}
    referenced: dict[str, list[str]] = {}
    for ref in doc.pin_refs():
        names = referenced.setdefault(ref.part_id, [])
        if ref.pin_name not in names:
            names.append(ref.pin_name)
    for part in doc.parts:
        if part.id not in plan.positions:
            continue
        record = lib.get(part.type)
        width, height = part_dimensions(part, lib, config)
        raw_w, raw_h = ((record.width, record.height) if record
                        else (config.default_width, config.default_height))
        glyph_pins = (glyphs.get(part.type) or {}).get("pins", {})
        if record is not None:
            names = [pin.name for pin in record.pins]
        else:
            names = referenced.get(part.id, [])
        offsets = _default_pin_offsets(names, raw_w, raw_h, config.grid)
        for name, xy in glyph_pins.items():
            offsets[name] = (float(xy[0]), float(xy[1]))
        left, top = plan.positions[part.id]
        for name, offset in offsets.items():
            ox, oy = _rotate_offset(offset, part.rotate, raw_w, raw_h)
            result[PinRef(part.id, name)] = (left + ox, top + oy)
    return result


def _compress_path(cells: list[tuple[int, int]]) -> list[Segment]:
    if len(cells) < 2:
        return []
    segments: list[Segment] = []
    anchor = cells[0]
    for prev, curr in zip(cells[1:-1], cells[2:]):
        dx1, dy1 = prev[0] - anchor[0], prev[1] - anchor[1]
        dx2, dy2 = curr[0] - prev[0], curr[1] - prev[1]
        straight = (dx1 == 0 and dx2 == 0) or (dy1 == 0 and dy2 == 0)
        if not straight:
            segments.append(((float(anchor[0]), float(anchor[1])),
                             (float(prev[0]), float(prev[1]))))
            anchor = prev
    segments.append(((float(anchor[0]), float(anchor[1])),
                     (float(cells[-1][0]), float(cells[-1][1]))))
    return segments


_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def route_cost(segments: list[Segment], bend_penalty: int) -> float:
    length = sum(abs(b[0] - a[0]) + abs(b[1] - a[1]) for a, b in segments)
    return length + bend_penalty * max(len(segments) - 1, 0)


def _grid_route(start: tuple[int, int], goal: tuple[int, int],
                blocked: set[tuple[int, int]], width: int, height: int,
                grid: int, bend_penalty: int) -> list[tuple[int, int]] | None:
    """A* over (cell, entry direction); admissible Manhattan heuristic."""
    def h(cell: tuple[int, int]) -> int:
        return abs(cell[0] - goal[0]) + abs(cell[1] - goal[1])

    counter = 0
    heap: list[tuple[int, int, int, tuple[int, int], int]] = []
    heapq.heappush(heap, (h(start), 0, counter, start, -1))
    best: dict[tuple[tuple[int, int], int], int] = {(start, -1): 0}
    parent: dict[tuple[tuple[int, int], int],
                 tuple[tuple[int, int], int]] = {}
    while heap:
        _, g, _, cell, direction = heapq.heappop(heap)
        if g > best.get((cell, direction), -1):
            continue
        if cell == goal:
            cells = [cell]
            key = (cell, direction)
            while key in parent:
                key = parent[key]
                cells.append(key[0])
            cells.reverse()
            return cells
        for d, (dx, dy) in enumerate(_DIRECTIONS):
            nxt = (cell[0] + dx * grid, cell[1] + dy * grid)
            if not (0 <= nxt[0] <= width and 0 <= nxt[1] <= height):
                continue
            if nxt in blocked and nxt != goal:
                continue
            cost = g + grid
            if direction != -1 and direction != d:
                cost += bend_penalty
            key = (nxt, d)
            if cost < best.get(key, 1 << 60):
                best[key] = cost
                parent[key] = (cell, direction)
                counter += 1
                heapq.heappush(heap, (cost + h(nxt), cost, counter, nxt, d))
    return None


def _l_route(start: Point, goal: Point) -> list[Segment]:
    segments: list[Segment] = []
    corner = (goal[0], start[1])
    if start[0] != goal[0]:
        segments.append((start, corner))
    if start[1] != goal[1]:
        segments.append((corner if segments else start, goal))
    if not segments:
        segments.append((start, goal))
    return segments


def route_wires(plan: LayoutPlan, doc: CircuitDocument, lib: ComponentLibrary,
                glyphs: dict[str, Any] | None = None,
                config: LayoutConfig = DEFAULT_CONFIG) -> list[RoutedWire]:
    """Route every connection on the grid; unroutable pairs get L overlays."""
    grid = config.grid
    pins = pin_positions(doc, plan, lib, glyphs, config)
    width = int(plan.canvas[0])
    height = int(plan.canvas[1])

    blocked: set[tuple[int, int]] = set()
    for part in doc.parts:
        if part.id not in plan.positions:
            continue
        left, top = plan.positions[part.id]
        w, h = part_dimensions(part, lib, config)
        x = int(left) + grid
        while x < left + w:
            y = int(top) + grid
            while y < top + h:
                blocked.add((x, y))
                y += grid
            x += grid

    wires: list[RoutedWire] = []
    for index, conn in enumerate(doc.connections):
        start = pins.get(conn.start_pin)
        goal = pins.get(conn.end_pin)
        if start is None or goal is None:
            continue
        if start == goal:
            continue
        start_cell = (int(_snap(start[0], grid)), int(_snap(start[1], grid)))
        goal_cell = (int(_snap(goal[0], grid)), int(_snap(goal[1], grid)))
        if start_cell == goal_cell:
            wires.append(RoutedWire(index, _l_route(start, goal), conn.color))
            continue
        cells = None
        if start_cell not in blocked:
            cells = _grid_route(start_cell, goal_cell, blocked, width, height,
                                grid, config.bend_penalty)
        if cells is None:
            wires.append(RoutedWire(index, _l_route(start, goal), conn.color,
                                    overlay=True))
            continue
        wires.append(RoutedWire(index, _compress_path(cells), conn.color))
    return wires


def crossing_count(wires: list[RoutedWire]) -> int:
    """Diagnostic only: pairwise segment crossings between distinct wires."""
    def crosses(s1: Segment, s2: Segment) -> bool:
        (ax1, ay1), (ax2, ay2) = s1
        (bx1, by1), (bx2, by2) = s2
        h1, h2 = ay1 == ay2, by1 == by2
        if h1 == h2:
            return False
        horizontal, vertical = (s1, s2) if h1 else (s2, s1)
        (hx1, hy), (hx2, _) = horizontal
        (vx, vy1), (_, vy2) = vertical
        return (min(hx1, hx2) < vx < max(hx1, hx2)
                and min(vy1, vy2) < hy < max(vy1, vy2))

    count = 0
    for i, wire_a in enumerate(wires):
        for wire_b in wires[i + 1:]:
            for seg_a in wire_a.segments:
                for seg_b in wire_b.segments:
                    if crosses(seg_a, seg_b):
                        count += 1
    return count


def _svg_escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def render_svg(plan: LayoutPlan, routes: list[RoutedWire],
               doc: CircuitDocument, lib: ComponentLibrary,
               glyphs: dict[str, Any] | None = None,
               config: LayoutConfig = DEFAULT_CONFIG) -> str:
    """Static SVG 1.1 scene: glyphs for known parts, labeled boxes otherwise."""
    glyphs = glyphs if glyphs is not None else load_glyphs()
    width, height = plan.canvas
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">',
        f'<rect class="canvas" x="0" y="0" width="{width:g}" '
        f'height="{height:g}" fill="#fdfdf6" stroke="#444"/>',
    ]
    pins = pin_positions(doc, plan, lib, glyphs, config)

    for wire in routes:
        points = []
        for i, (a, b) in enumerate(wire.segments):
            if i == 0:
                points.append(a)
            points.append(b)
        rendered = " ".join(f"{x:g},{y:g}" for x, y in points)
        dash = ' stroke-dasharray="4 3"' if wire.overlay else ""
        lines.append(f'<polyline class="wire" points="{rendered}" '
                     f'fill="none" stroke="{_svg_escape(wire.color)}" '
                     f'stroke-width="2"{dash}/>')

    for part in doc.parts:
        if part.id not in plan.positions:
            continue
        left, top = plan.positions[part.id]
        record = lib.get(part.type)
        raw_w, raw_h = ((record.width, record.height) if record
                        else (config.default_width, config.default_height))
        rotate = part.rotate % 360
        transform = f"translate({left:g} {top:g})"
        if rotate:
            transform += f" rotate({rotate:g} {raw_w / 2:g} {raw_h / 2:g})"
        glyph = (glyphs.get(part.type) or {}).get("svg")
        lines.append(f'<g class="part" data-part="{_svg_escape(part.id)}" '
                     f'transform="{transform}">')
        if glyph:
            lines.append(glyph)
        else:
            lines.append(f'<rect x="0" y="0" width="{raw_w:g}" '
                         f'height="{raw_h:g}" fill="#e8eef7" stroke="#333" '
                         f'rx="4"/>')
            lines.append(f'<text x="{raw_w / 2:g}" y="{raw_h / 2:g}" '
                         f'font-size="10" text-anchor="middle" '
                         f'dominant-baseline="middle">'
                         f'{_svg_escape(part.type)}</text>')
        lines.append(f'<text x="{raw_w / 2:g}" y="-4" font-size="9" '
                     f'text-anchor="middle" fill="#555">'
                     f'{_svg_escape(part.id)}</text>')
        lines.append('</g>')

    for ref, (x, y) in pins.items():
        if any(c.start_pin == ref or c.end_pin == ref
               for c in doc.connections):
            lines.append(f'<circle class="pin" cx="{x:g}" cy="{y:g}" r="2.2" '
                         f'fill="#b33"/>')
            lines.append(f'<text x="{x + 3:g}" y="{y - 3:g}" font-size="8" '
                         f'fill="#777">{_svg_escape(ref.pin_name)}</text>')

    lines.append("</svg>")
    return "\n".join(lines) + "\n"
