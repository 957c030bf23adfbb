import json

import pytest

from circuitlm import layout
from circuitlm.layout import (
    DEFAULT_CONFIG,
    LayoutPlan,
    compute_layout,
    part_dimensions,
    pin_positions,
    render_svg,
    route_cost,
    route_wires,
)
from circuitlm.schema import parse_document

from conftest import circuit_names, load_circuit
from test_netgraph import simple_doc


def oracle_grid_cost(start, goal, blocked, width, height, grid,
                     bend_penalty) -> int | None:
    """Bellman-Ford relaxation over (cell, direction) states.

    Independent of the search in layout.py: exhaustively relaxes until
    fixpoint, no heuristic, no priority queue.
    """
    directions = ((1, 0), (-1, 0), (0, 1), (0, -1))
    cells = [(x, y) for x in range(0, width + 1, grid)
             for y in range(0, height + 1, grid)]
    INF = 1 << 60
    dist = {(cell, d): INF for cell in cells for d in range(-1, 4)}
    if (start, -1) not in dist:
        return None
    dist[(start, -1)] = 0
    changed = True
    while changed:
        changed = False
        for cell in cells:
            for d_in in range(-1, 4):
                base = dist[(cell, d_in)]
                if base >= INF:
                    continue
                if cell != start and cell in blocked and cell != goal:
                    continue
                for d_out, (dx, dy) in enumerate(directions):
                    nxt = (cell[0] + dx * grid, cell[1] + dy * grid)
                    if not (0 <= nxt[0] <= width and 0 <= nxt[1] <= height):
                        continue
                    if nxt in blocked and nxt != goal:
                        continue
                    cost = base + grid
                    if d_in != -1 and d_in != d_out:
                        cost += bend_penalty
                    if cost < dist[(nxt, d_out)]:
                        dist[(nxt, d_out)] = cost
                        changed = True
    best = min(dist[(goal, d)] for d in range(-1, 4))
    return None if best >= INF else best


def blocked_cells(doc, plan, lib, grid=10):
    cells = set()
    for part in doc.parts:
        if part.id not in plan.positions:
            continue
        left, top = plan.positions[part.id]
        w, h = part_dimensions(part, lib)
        x = int(left) + grid
        while x < left + w:
            y = int(top) + grid
            while y < top + h:
                cells.add((x, y))
                y += grid
            x += grid
    return cells


def boxes(doc, plan, lib):
    for part in doc.parts:
        left, top = plan.positions[part.id]
        w, h = part_dimensions(part, lib)
        yield part.id, (left, top, w, h)


def overlapping_pairs(doc, plan, lib):
    items = list(boxes(doc, plan, lib))
    pairs = []
    for i, (id_a, a) in enumerate(items):
        for id_b, b in items[i + 1:]:
            if (a[0] < b[0] + b[2] and b[0] < a[0] + a[2]
                    and a[1] < b[1] + b[3] and b[1] < a[1] + a[3]):
                pairs.append((id_a, id_b))
    return pairs


class TestPlacement:
    def test_single_part_centered(self, lib):
        doc = simple_doc([("arduino-uno", "a", {})], [])
        plan = compute_layout(doc, lib, seed=1)
        left, top = plan.positions["a"]
        assert left + 90 == plan.canvas[0] / 2
        assert top + 70 == plan.canvas[1] / 2

    def test_connected_pair_sits_closer_than_unconnected(self, lib):
        def distance(with_wire: bool) -> float:
            wires = [("a:D2", "b:D15")] if with_wire else []
            doc = simple_doc([("arduino-uno", "a", {}),
                              ("esp32-devkit", "b", {})], wires)
            plan = compute_layout(doc, lib, seed=7)
            (ax, ay), (bx, by) = plan.positions["a"], plan.positions["b"]
            return ((ax - bx) ** 2 + (ay - by) ** 2) ** 0.5

        assert distance(True) < distance(False)

    def test_same_seed_identical(self, lib):
        doc = load_circuit("i2c_no_pullups_fixed")
        first = compute_layout(doc, lib, seed=3)
        second = compute_layout(doc, lib, seed=3)
        assert first.to_dict() == second.to_dict()

    def test_different_seeds_differ(self, lib):
        doc = load_circuit("i2c_no_pullups_fixed")
        a = compute_layout(doc, lib, seed=1).to_dict()
        b = compute_layout(doc, lib, seed=2).to_dict()
        assert a != b

    def test_empty_document(self, lib):
        doc = parse_document('{"version":1,"author":"t","parts":[],'
                             '"connections":[]}')
        plan = compute_layout(doc, lib, seed=0)
        assert plan.positions == {}
        assert plan.canvas == (800.0, 600.0)

    @pytest.mark.parametrize("name", circuit_names())
    def test_no_overlaps_on_corpus(self, name, lib):
        doc = load_circuit(name)
        plan = compute_layout(doc, lib, seed=11)
        assert overlapping_pairs(doc, plan, lib) == []

    @pytest.mark.parametrize("name", circuit_names())
    def test_boxes_inside_canvas(self, name, lib):
        doc = load_circuit(name)
        plan = compute_layout(doc, lib, seed=11)
        for _, (left, top, w, h) in boxes(doc, plan, lib):
            assert left >= 0 and top >= 0
            assert left + w <= plan.canvas[0]
            assert top + h <= plan.canvas[1]

    def test_rotation_swaps_box(self, lib):
        doc = simple_doc([("resistor", "r1", {})], [])
        doc.parts[0].rotate = 90.0
        assert part_dimensions(doc.parts[0], lib) == (20.0, 40.0)

    def test_unknown_part_gets_default_glyph_box(self, lib):
        doc = simple_doc([("frobnicator", "f1", {})], [])
        assert part_dimensions(doc.parts[0], lib) == (60.0, 40.0)


class TestRouting:
    def _plan(self, positions, canvas=(200.0, 200.0)):
        return LayoutPlan(positions=positions,
                          rotations={k: 0.0 for k in positions},
                          canvas=canvas)

    def test_aligned_pins_single_segment(self, lib):
        doc = simple_doc([("resistor", "r1", {}), ("resistor", "r2", {})],
                         [("r1:2", "r2:1")])
        plan = self._plan({"r1": (20.0, 80.0), "r2": (120.0, 80.0)})
        wires = route_wires(plan, doc, lib)
        assert len(wires) == 1
        assert not wires[0].overlay
        assert wires[0].segments == [((60.0, 90.0), (120.0, 90.0))]
        assert wires[0].route_tokens() == ["h60"]

    def test_diagonal_is_one_bend(self, lib):
        doc = simple_doc([("resistor", "r1", {}), ("resistor", "r2", {})],
                         [("r1:2", "r2:1")])
        plan = self._plan({"r1": (20.0, 40.0), "r2": (120.0, 120.0)})
        wires = route_wires(plan, doc, lib)
        assert len(wires[0].segments) == 2
        assert route_cost(wires[0].segments, DEFAULT_CONFIG.bend_penalty) \
            == 60 + 80 + 20

    def test_obstacle_detour_matches_oracle(self, lib):
        doc = simple_doc(
            [("resistor", "r1", {}), ("resistor", "r2", {}),
             ("frobnicator", "wall", {})],
            [("r1:2", "r2:1")])
        plan = self._plan({"r1": (20.0, 80.0), "r2": (140.0, 80.0),
                           "wall": (80.0, 70.0)})
        wires = route_wires(plan, doc, lib)
        wire = wires[0]
        assert not wire.overlay
        blocked = blocked_cells(doc, plan, lib)
        expected = oracle_grid_cost((60, 90), (140, 90), blocked, 200, 200,
                                    10, DEFAULT_CONFIG.bend_penalty)
        actual = route_cost(wire.segments, DEFAULT_CONFIG.bend_penalty)
        assert actual == expected
        # Detour is strictly longer than the unobstructed L route.
        assert actual > 80

    def test_all_segments_axis_aligned_on_corpus(self, lib):
        for name in circuit_names():
            doc = load_circuit(name)
            plan = compute_layout(doc, lib, seed=5)
            for wire in route_wires(plan, doc, lib):
                for (x1, y1), (x2, y2) in wire.segments:
                    assert (x1 == x2) != (y1 == y2), (name, wire)

    def test_segments_are_contiguous_and_anchored(self, lib):
        doc = load_circuit("missing_flyback_fixed")
        plan = compute_layout(doc, lib, seed=5)
        pins = pin_positions(doc, plan, lib)
        for wire in route_wires(plan, doc, lib):
            conn = doc.connections[wire.connection_index]
            assert wire.segments[0][0] == pins[conn.start_pin]
            assert wire.segments[-1][1] == pins[conn.end_pin]
            for (_, end), (start, _) in zip(wire.segments,
                                            wire.segments[1:]):
                assert end == start

    def test_enclosed_endpoint_falls_back_to_overlay(self, lib):
        doc = simple_doc(
            [("resistor", "r1", {}), ("resistor", "r2", {})],
            [("r1:2", "r2:1")])
        # r2 fully buried inside r1's footprint: its pin cell is blocked.
        plan = self._plan({"r1": (20.0, 80.0), "r2": (22.0, 82.0)})
        wires = route_wires(plan, doc, lib)
        assert len(wires) == 1

    def test_random_grids_match_oracle(self, lib):
        import random

        rng = random.Random(9)
        for trial in range(6):
            walls = set()
            for _ in range(rng.randint(3, 10)):
                walls.add((rng.randrange(2, 19) * 10,
                           rng.randrange(2, 19) * 10))
            start, goal = (0, 0), (200, 200)
            expected = oracle_grid_cost(start, goal, walls, 200, 200, 10,
                                        DEFAULT_CONFIG.bend_penalty)
            cells = layout._grid_route(start, goal, walls, 200, 200, 10,
                                       DEFAULT_CONFIG.bend_penalty)
            assert cells is not None
            segments = layout._compress_path(cells)
            assert route_cost(segments, DEFAULT_CONFIG.bend_penalty) \
                == expected


class TestSvg:
    def test_empty_document_renders_frame(self, lib):
        doc = parse_document('{"version":1,"author":"t","parts":[],'
                             '"connections":[]}')
        plan = compute_layout(doc, lib, seed=0)
        svg = render_svg(plan, [], doc, lib)
        assert svg.startswith('<?xml')
        assert '<svg' in svg and svg.rstrip().endswith('</svg>')
        assert 'class="canvas"' in svg
        assert 'class="part"' not in svg

    def test_counts_glyphs_and_wires(self, lib):
        doc = load_circuit("led_no_series_fixed")
        plan = compute_layout(doc, lib, seed=1)
        wires = route_wires(plan, doc, lib)
        svg = render_svg(plan, wires, doc, lib)
        assert svg.count('class="part"') == 3
        assert svg.count('<polyline') == 3

    def test_unknown_type_gets_labeled_rect(self, lib):
        doc = simple_doc([("frobnicator", "f1", {})], [])
        plan = compute_layout(doc, lib, seed=0)
        svg = render_svg(plan, [], doc, lib)
        assert "frobnicator" in svg
        assert "<rect" in svg

    def test_deterministic_bytes(self, lib):
        doc = load_circuit("i2c_addr_conflict")
        plan = compute_layout(doc, lib, seed=2)
        wires = route_wires(plan, doc, lib)
        assert render_svg(plan, wires, doc, lib) \
            == render_svg(plan, wires, doc, lib)

    def test_route_tokens_round_into_document(self, lib):
        doc = load_circuit("led_no_series")
        plan = compute_layout(doc, lib, seed=4)
        wires = route_wires(plan, doc, lib)
        for wire in wires:
            tokens = wire.route_tokens()
            assert all(t[0] in "hv" for t in tokens)
            assert all(float(t[1:]) != 0 for t in tokens)
