"""Bipartite component/pin/net graph with weighted resistive bridges.

Connections union pins into galvanic nets (zero-resistance node sets).
Two-terminal passives then become weighted bridges between nets, which
lets path queries distinguish a direct short from a resistor path:

- resistors carry their ``resistance`` attr value in ohms;
- capacitors are open for DC purposes (sentinel weight, never traversed);
- diodes, inductors, and other closed two-pin elements weigh 0.

Net ids are assigned by each net's smallest member pin reference in
lexicographic order, so graph construction is fully deterministic.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from typing import Any

from .kb import ComponentLibrary, ComponentRecord, PinRole
from .schema import CircuitDocument, Part, PinRef

NetId = int

# Bridges at or above this weight are treated as open and never traversed.
OPEN_SENTINEL_OHMS = 1e9

_BRIDGE_ROLES = {PinRole.PASSIVE, PinRole.LED_ANODE, PinRole.LED_CATHODE,
                 PinRole.INDUCTIVE_TERMINAL}

_PIN_NAME_VOLTS = re.compile(r"^(\d+)V(\d+)?$", re.IGNORECASE)


class UnknownNetError(KeyError):
    pass


@dataclass
class Net:
    id: NetId
    pins: tuple[PinRef, ...]
    kind: str = "unknown"  # vcc | gnd | signal | unknown
    voltage: float | None = None
    # True when ground and powered pins meet on one net: consumed by the
    # short checker as a zero-length VCC-GND path.
    poisoned: bool = False


@dataclass(frozen=True)
class Bridge:
    component_id: str
    net_a: NetId
    net_b: NetId
    weight: float


@dataclass
class NetGraph:
    nets: list[Net]
    pin_to_net: dict[PinRef, NetId]
    passive_bridges: list[Bridge]
    parts: tuple[Part, ...] = ()

    def net(self, net_id: NetId) -> Net:
        if not 0 <= net_id < len(self.nets):
            raise UnknownNetError(net_id)
        return self.nets[net_id]

    def vcc_nets(self) -> list[Net]:
        return [n for n in self.nets if n.kind == "vcc" or n.poisoned]

    def gnd_nets(self) -> list[Net]:
        return [n for n in self.nets if n.kind == "gnd" or n.poisoned]


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[PinRef, PinRef] = {}

    def add(self, item: PinRef) -> None:
        self.parent.setdefault(item, item)

    def find(self, item: PinRef) -> PinRef:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:  # path compression
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: PinRef, b: PinRef) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def power_pin_voltage(pin_name: str, record: ComponentRecord,
                      part: Part) -> float | None:
    """Voltage carried by a power_out pin.

    Precedence: a ``voltage`` attr on the part instance, then a voltage
    encoded in the pin name (``5V``, ``3V3``, ``12V``), then the record's
    supply_voltage.
    """
    attr = part.attrs.get("voltage")
    if isinstance(attr, (int, float)) and not isinstance(attr, bool):
        return float(attr)
    match = _PIN_NAME_VOLTS.match(pin_name)
    if match:
        whole, frac = match.groups()
        return float(f"{whole}.{frac}" if frac else whole)
    return record.specs.supply_voltage


def _bridge_weight(part: Part, record: ComponentRecord) -> float:
    if record.category == "resistor":
        value = part.attrs.get("resistance", 0.0)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return max(float(value), 0.0)
        return 0.0
    if record.category == "capacitor":
        return OPEN_SENTINEL_OHMS
    return 0.0  # jumpers, diodes, inductors, closed switches


def build_net_graph(doc: CircuitDocument, lib: ComponentLibrary) -> NetGraph:
    """Union connection endpoints into nets and attach passive bridges.

    Unknown part types are permitted; their pins contribute with role
    ``other`` and form no bridges.
    """
    uf = _UnionFind()
    for conn in doc.connections:
        uf.add(conn.start_pin)
        uf.add(conn.end_pin)
        uf.union(conn.start_pin, conn.end_pin)

    groups: dict[PinRef, list[PinRef]] = {}
    for pin in uf.parent:
        groups.setdefault(uf.find(pin), []).append(pin)

    members = sorted((sorted(pins, key=str) for pins in groups.values()),
                     key=lambda pins: str(pins[0]))
    nets: list[Net] = []
    pin_to_net: dict[PinRef, NetId] = {}
    for net_id, pins in enumerate(members):
        nets.append(Net(id=net_id, pins=tuple(pins)))
        for pin in pins:
            pin_to_net[pin] = net_id

    parts_by_id = {part.id: part for part in doc.parts}
    for net in nets:
        has_ground = False
        voltage: float | None = None
        has_signal_role = False
        for pin in net.pins:
            part = parts_by_id.get(pin.part_id)
            record = lib.get(part.type) if part else None
            spec = record.pin(pin.pin_name) if record else None
            if spec is None:
                continue
            has_signal_role = True
            if spec.role == PinRole.GROUND:
                has_ground = True
            elif spec.role == PinRole.POWER_OUT:
                v = power_pin_voltage(pin.pin_name, record, part)
                if v is not None and (voltage is None or v > voltage):
                    voltage = v
        if has_ground and voltage is not None:
            net.kind = "gnd"
            net.voltage = voltage
            net.poisoned = True
        elif has_ground:
            net.kind = "gnd"
        elif voltage is not None:
            net.kind = "vcc"
            net.voltage = voltage
        elif has_signal_role:
            net.kind = "signal"

    bridges: list[Bridge] = []
    for part in doc.parts:
        record = lib.get(part.type)
        if record is None or len(record.pins) != 2:
            continue
        if not all(pin.role in _BRIDGE_ROLES for pin in record.pins):
            continue
        refs = [PinRef(part.id, pin.name) for pin in record.pins]
        if any(ref not in pin_to_net for ref in refs):
            continue
        net_a, net_b = pin_to_net[refs[0]], pin_to_net[refs[1]]
        if net_a == net_b:
            continue
        bridges.append(Bridge(component_id=part.id, net_a=net_a, net_b=net_b,
                              weight=_bridge_weight(part, record)))

    return NetGraph(nets=nets, pin_to_net=pin_to_net, passive_bridges=bridges,
                    parts=tuple(doc.parts))


def min_weight_path(graph: NetGraph, start: NetId, goal: NetId,
                    ) -> tuple[list[Bridge], float] | None:
    """Minimum-total-weight bridge path between two nets, or None.

    Dijkstra over nets as nodes and bridges as edges; wires inside a net
    already cost 0 by construction.  Open bridges (weight >= the sentinel)
    are never traversed.
    """
    graph.net(start)
    graph.net(goal)
    if start == goal:
        return [], 0.0

    adjacency: dict[NetId, list[tuple[float, NetId, Bridge]]] = {}
    for bridge in graph.passive_bridges:
        if bridge.weight >= OPEN_SENTINEL_OHMS:
            continue
        adjacency.setdefault(bridge.net_a, []).append(
            (bridge.weight, bridge.net_b, bridge))
        adjacency.setdefault(bridge.net_b, []).append(
            (bridge.weight, bridge.net_a, bridge))

    dist: dict[NetId, float] = {start: 0.0}
    prev: dict[NetId, tuple[NetId, Bridge]] = {}
    heap: list[tuple[float, NetId]] = [(0.0, start)]
    visited: set[NetId] = set()
    while heap:
        total, node = heapq.heappop(heap)
        if node in visited:
            continue
        visited.add(node)
        if node == goal:
            path: list[Bridge] = []
            cursor = node
            while cursor != start:
                parent, bridge = prev[cursor]
                path.append(bridge)
                cursor = parent
            path.reverse()
            return path, total
        for weight, neighbor, bridge in adjacency.get(node, []):
            candidate = total + weight
            if candidate < dist.get(neighbor, float("inf")):
                dist[neighbor] = candidate
                prev[neighbor] = (node, bridge)
                heapq.heappush(heap, (candidate, neighbor))
    return None


def graph_summary(graph: NetGraph) -> dict[str, Any]:
    """Serializable view of the graph, mostly for debugging and the API."""
    return {
        "nets": [{
            "id": net.id,
            "kind": net.kind,
            "voltage": net.voltage,
            "poisoned": net.poisoned,
            "pins": [str(p) for p in net.pins],
        } for net in graph.nets],
        "bridges": [{
            "component_id": b.component_id,
            "net_a": b.net_a,
            "net_b": b.net_b,
            "weight": b.weight,
        } for b in graph.passive_bridges],
    }
