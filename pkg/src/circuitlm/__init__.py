"""CircuitJSON schematic toolkit.

Parsing and canonical serialization, a retrieval-grounded component
knowledge base, net-graph electrical rule checking, a staged generation
pipeline over pluggable model clients, Pass@1 benchmark scoring, and
force-directed layout with Manhattan routing and SVG output.
"""

from .schema import (
    CircuitDocument,
    CircuitJsonError,
    Connection,
    JsonSyntaxError,
    Part,
    PinRef,
    SchemaError,
    parse_document,
    serialize_document,
    validate_against_library,
)
from .violations import Severity, Violation

__version__ = "0.1.0"

__all__ = [
    "CircuitDocument",
    "CircuitJsonError",
    "Connection",
    "JsonSyntaxError",
    "Part",
    "PinRef",
    "SchemaError",
    "Severity",
    "Violation",
    "parse_document",
    "serialize_document",
    "validate_against_library",
    "__version__",
]
