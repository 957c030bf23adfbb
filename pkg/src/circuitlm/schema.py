"""CircuitJSON document model: parsing, validation, canonical serialization.

CircuitJSON is a small JSON interchange format for breadboard-level
schematics: a flat list of placed parts plus pin-to-pin connections.
Pin references use the textual form ``"partId:pinName"``, split on the
first colon; part ids therefore must not contain colons.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .violations import Severity, Violation

Scalar = Any  # str | int | float | bool (attrs values; validated at parse time)

DEFAULT_WIRE_COLOR = "black"

_DOCUMENT_KEYS = ("version", "author", "parts", "connections")
_PART_KEYS = ("type", "id", "top", "left", "attrs", "rotate")
_CONNECTION_KEYS = ("startPin", "endPin", "color", "route")


class CircuitJsonError(ValueError):
    """Base error for document problems; ``path`` names the failing JSON node."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.message = message
        self.path = path


class JsonSyntaxError(CircuitJsonError):
    """Input is not well-formed JSON."""


class SchemaError(CircuitJsonError):
    """Input is JSON but violates the CircuitJSON schema."""


@dataclass(frozen=True, order=True)
class PinRef:
    """Reference to one pin of one part, e.g. ``arduino:5V``."""

    part_id: str
    pin_name: str

    def __str__(self) -> str:
        return f"{self.part_id}:{self.pin_name}"


def parse_pin_ref(text: str, path: str = "$") -> PinRef:
    """Split ``partId:pinName`` on the first colon and validate both halves."""
    if not isinstance(text, str):
        raise SchemaError("pin reference must be a string", path)
    part_id, sep, pin_name = text.partition(":")
    if not sep:
        raise SchemaError(f"pin reference {text!r} has no ':' separator", path)
    if not part_id:
        raise SchemaError(f"pin reference {text!r} has an empty part id", path)
    if not pin_name:
        raise SchemaError(f"pin reference {text!r} has an empty pin name", path)
    if ":" in pin_name:
        raise SchemaError(f"pin name {pin_name!r} contains ':'", path)
    return PinRef(part_id, pin_name)


@dataclass
class Part:
    """One placed component instance."""

    type: str
    id: str
    top: float
    left: float
    attrs: dict[str, Scalar] = field(default_factory=dict)
    rotate: float = 0.0
    extras: dict[str, Any] = field(default_factory=dict)


@dataclass
class Connection:
    """One wire between two pins."""

    start_pin: PinRef
    end_pin: PinRef
    color: str = DEFAULT_WIRE_COLOR
    route: list[str] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)


@dataclass
class CircuitDocument:
    """A parsed CircuitJSON document."""

    version: int
    author: str
    parts: list[Part] = field(default_factory=list)
    connections: list[Connection] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)

    def part_by_id(self, part_id: str) -> Part | None:
        for part in self.parts:
            if part.id == part_id:
                return part
        return None

    def pin_refs(self) -> list[PinRef]:
        """All connection endpoints, in document order."""
        refs: list[PinRef] = []
        for conn in self.connections:
            refs.append(conn.start_pin)
            refs.append(conn.end_pin)
        return refs


def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaError(f"missing required field {key!r}", path)
    return obj[key]


def _as_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a number", path)
    return float(value)


def _as_text(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError("expected a string", path)
    return value


def _part_from_jsonable(obj: Any, path: str) -> Part:
    if not isinstance(obj, dict):
        raise SchemaError("part must be an object", path)
    type_ = _as_text(_require(obj, "type", path), f"{path}.type")
    part_id = _as_text(_require(obj, "id", path), f"{path}.id")
    if not part_id:
        raise SchemaError("part id must be non-empty", f"{path}.id")
    if ":" in part_id:
        raise SchemaError(f"part id {part_id!r} contains reserved ':'", f"{path}.id")
    top = _as_number(_require(obj, "top", path), f"{path}.top")
    left = _as_number(_require(obj, "left", path), f"{path}.left")
    attrs_raw = _require(obj, "attrs", path)
    if not isinstance(attrs_raw, dict):
        raise SchemaError("attrs must be an object", f"{path}.attrs")
    attrs: dict[str, Scalar] = {}
    for key, value in attrs_raw.items():
        if value is not None and not isinstance(value, (str, int, float, bool)):
            raise SchemaError("attrs values must be scalars", f"{path}.attrs.{key}")
        attrs[key] = value
    rotate = 0.0
    if "rotate" in obj:
        rotate = _as_number(obj["rotate"], f"{path}.rotate")
    extras = {k: v for k, v in obj.items() if k not in _PART_KEYS}
    return Part(type=type_, id=part_id, top=top, left=left, attrs=attrs,
                rotate=rotate, extras=extras)


def _connection_from_jsonable(obj: Any, path: str) -> Connection:
    if not isinstance(obj, dict):
        raise SchemaError("connection must be an object", path)
    start = parse_pin_ref(_require(obj, "startPin", path), f"{path}.startPin")
    end = parse_pin_ref(_require(obj, "endPin", path), f"{path}.endPin")
    if start == end:
        raise SchemaError("startPin and endPin reference the same pin", path)
    color = DEFAULT_WIRE_COLOR
    if "color" in obj:
        color = _as_text(obj["color"], f"{path}.color")
    route: list[str] = []
    if "route" in obj:
        route_raw = obj["route"]
        if not isinstance(route_raw, list):
            raise SchemaError("route must be a list of strings", f"{path}.route")
        for i, item in enumerate(route_raw):
            if not isinstance(item, str):
                raise SchemaError("route entries must be strings", f"{path}.route[{i}]")
        route = list(route_raw)
    extras = {k: v for k, v in obj.items() if k not in _CONNECTION_KEYS}
    return Connection(start_pin=start, end_pin=end, color=color, route=route,
                      extras=extras)


def document_from_jsonable(obj: Any, path: str = "$") -> CircuitDocument:
    """Build a validated document from already-decoded JSON data."""
    if not isinstance(obj, dict):
        raise SchemaError("document must be a JSON object", path)
    version_raw = _require(obj, "version", path)
    version_num = _as_number(version_raw, f"{path}.version")
    if version_num != int(version_num):
        raise SchemaError("version must be an integer", f"{path}.version")
    author = _as_text(_require(obj, "author", path), f"{path}.author")
    parts_raw = _require(obj, "parts", path)
    if not isinstance(parts_raw, list):
        raise SchemaError("parts must be a list", f"{path}.parts")
    connections_raw = _require(obj, "connections", path)
    if not isinstance(connections_raw, list):
        raise SchemaError("connections must be a list", f"{path}.connections")

    parts = [_part_from_jsonable(p, f"{path}.parts[{i}]")
             for i, p in enumerate(parts_raw)]
    seen_ids: set[str] = set()
    for i, part in enumerate(parts):
        if part.id in seen_ids:
            raise SchemaError(f"duplicate part id {part.id!r}", f"{path}.parts[{i}].id")
        seen_ids.add(part.id)

    connections = [_connection_from_jsonable(c, f"{path}.connections[{i}]")
                   for i, c in enumerate(connections_raw)]
    for i, conn in enumerate(connections):
        for end_name, ref in (("startPin", conn.start_pin), ("endPin", conn.end_pin)):
            if ref.part_id not in seen_ids:
                raise SchemaError(
                    f"connection references unknown part {ref.part_id!r}",
                    f"{path}.connections[{i}].{end_name}")

    extras = {k: v for k, v in obj.items() if k not in _DOCUMENT_KEYS}
    return CircuitDocument(version=int(version_num), author=author, parts=parts,
                           connections=connections, extras=extras)


def parse_document(text: str) -> CircuitDocument:
    """Parse CircuitJSON text into a validated document.

    Raises JsonSyntaxError for malformed JSON and SchemaError for schema
    violations; both carry the JSON path of the offending node.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise JsonSyntaxError(f"invalid JSON: {exc.msg}",
                              f"line {exc.lineno} column {exc.colno}") from exc
    return document_from_jsonable(data)


def _canonical_number(value: float) -> int | float:
    # Integral floats serialize without the trailing ".0".
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def document_to_jsonable(doc: CircuitDocument) -> dict[str, Any]:
    """Canonical JSON-ready form: fixed key order, no superfluous decimals."""
    parts = []
    for part in doc.parts:
        entry: dict[str, Any] = {
            "type": part.type,
            "id": part.id,
            "top": _canonical_number(part.top),
            "left": _canonical_number(part.left),
            "attrs": dict(part.attrs),
        }
        if part.rotate:
            entry["rotate"] = _canonical_number(part.rotate)
        entry.update(part.extras)
        parts.append(entry)
    connections = []
    for conn in doc.connections:
        entry = {
            "startPin": str(conn.start_pin),
            "endPin": str(conn.end_pin),
            "color": conn.color,
            "route": list(conn.route),
        }
        entry.update(conn.extras)
        connections.append(entry)
    out: dict[str, Any] = {
        "version": doc.version,
        "author": doc.author,
        "parts": parts,
        "connections": connections,
    }
    out.update(doc.extras)
    return out


def serialize_document(doc: CircuitDocument) -> str:
    """Serialize to canonical CircuitJSON text; parse(serialize(d)) == d."""
    return json.dumps(document_to_jsonable(doc), indent=2, ensure_ascii=False) + "\n"


def validate_against_library(doc: CircuitDocument, lib) -> list[Violation]:
    """Check part types and pin names against the component library.

    Findings, not failures: unknown part types and pin labels outside a
    record's mandatory pin set each yield one Major violation.
    """
    violations: list[Violation] = []
    known_pins: dict[str, set[str]] = {}
    for part in doc.parts:
        record = lib.get(part.type)
        if record is None:
            violations.append(Violation(
                rule_id="unknown-part-type",
                severity=Severity.MAJOR,
                message=f"part type {part.type!r} is not in the component library",
                subjects=[part.id],
            ))
        else:
            known_pins[part.id] = {pin.name for pin in record.pins}
    for i, conn in enumerate(doc.connections):
        for ref in (conn.start_pin, conn.end_pin):
            pins = known_pins.get(ref.part_id)
            if pins is not None and ref.pin_name not in pins:
                violations.append(Violation(
                    rule_id="unknown-pin",
                    severity=Severity.MAJOR,
                    message=(f"pin {ref.pin_name!r} is not a defined pin of "
                             f"{ref.part_id!r} (connection {i})"),
                    subjects=[str(ref)],
                ))
    return violations
