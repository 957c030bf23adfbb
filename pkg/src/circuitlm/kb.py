"""Curated component knowledge base and retrieval.

Resolution pipeline for a free-text component request:

1. normalized alias lookup (case-folded, whitespace/hyphen stripped) --
   an exact hit short-circuits with similarity 1.0;
2. cosine similarity of the query embedding against every record's
   description+category+usage embedding, argmax wins;
3. below-threshold maxima raise an out-of-distribution result, which
   halts any downstream generation.

Embeddings come from a pluggable provider.  The built-in fallback is a
hashed character-trigram term-frequency vector (dimension 256, L2
normalized, CRC32 hashing) so the whole toolkit runs offline and gives
identical vectors on every platform.
"""

from __future__ import annotations

import enum
import json
import math
import os
import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Protocol

DEFAULT_THRESHOLD = 0.65
FALLBACK_DIMENSION = 256

I2C_ADDRESS_MIN = 0x08
I2C_ADDRESS_MAX = 0x77


class LibraryError(ValueError):
    """Base error for component library problems."""


class FormatError(LibraryError):
    """Library file is malformed or a record violates its invariants."""


class DuplicateKeyError(LibraryError):
    """Two records share one canonical key."""


class DuplicateAliasError(LibraryError):
    """Two records claim the same alias."""


class ProviderError(RuntimeError):
    """A remote embedding provider failed; callers may retry or fall back."""


class PinRole(str, enum.Enum):
    POWER_IN = "power_in"
    POWER_OUT = "power_out"
    GROUND = "ground"
    GPIO = "gpio"
    ANALOG_IN = "analog_in"
    PWM_CAPABLE_GPIO = "pwm_capable_gpio"
    I2C_SDA = "i2c_sda"
    I2C_SCL = "i2c_scl"
    SPI_MOSI = "spi_mosi"
    SPI_MISO = "spi_miso"
    SPI_SCK = "spi_sck"
    SPI_CS = "spi_cs"
    UART_TX = "uart_tx"
    UART_RX = "uart_rx"
    PASSIVE = "passive"
    LED_ANODE = "led_anode"
    LED_CATHODE = "led_cathode"
    INDUCTIVE_TERMINAL = "inductive_terminal"
    GATE = "gate"
    DRAIN = "drain"
    SOURCE = "source"
    OTHER = "other"


@dataclass(frozen=True)
class PinSpec:
    name: str
    role: PinRole
    requires_drive: bool = False


@dataclass(frozen=True)
class ElectricalSpecs:
    supply_voltage: float | None = None
    v_out_high: float | None = None
    v_in_max: float | None = None
    max_current_ma: float | None = None
    is_inductive_load: bool = False
    needs_decoupling: bool = False
    needs_series_resistor: bool = False
    i2c_address: int | None = None

    def __post_init__(self) -> None:
        for name in ("supply_voltage", "v_out_high", "v_in_max"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise FormatError(f"{name} must be >= 0, got {value}")
        if self.i2c_address is not None and not (
                I2C_ADDRESS_MIN <= self.i2c_address <= I2C_ADDRESS_MAX):
            raise FormatError(
                f"i2c_address 0x{self.i2c_address:02x} outside "
                f"[0x{I2C_ADDRESS_MIN:02x}, 0x{I2C_ADDRESS_MAX:02x}]")


@dataclass(frozen=True)
class ComponentRecord:
    key: str
    pins: tuple[PinSpec, ...]
    width: float = 60.0
    height: float = 40.0
    aliases: tuple[str, ...] = ()
    description: str = ""
    category: str = ""
    usage: str = ""
    specs: ElectricalSpecs = field(default_factory=ElectricalSpecs)

    def __post_init__(self) -> None:
        if not self.pins:
            raise FormatError(f"record {self.key!r} has no pins")
        names = [pin.name for pin in self.pins]
        if len(names) != len(set(names)):
            raise FormatError(f"record {self.key!r} has duplicate pin names")

    def pin(self, name: str) -> PinSpec | None:
        for pin in self.pins:
            if pin.name == name:
                return pin
        return None

    def embedding_text(self) -> str:
        return " ".join(part for part in (self.description, self.category,
                                          self.usage) if part)


@dataclass(frozen=True)
class MatchResult:
    """Outcome of resolving one component request."""

    query: str
    key: str | None
    similarity: float

    @property
    def matched(self) -> bool:
        return self.key is not None

    def to_dict(self) -> dict[str, Any]:
        return {"query": self.query, "key": self.key,
                "similarity": self.similarity, "matched": self.matched}


def normalize_alias(text: str) -> str:
    """Case-fold and drop whitespace, hyphens, and underscores."""
    return re.sub(r"[\s\-_]+", "", text.casefold())


class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed(self, text: str) -> tuple[float, ...]: ...


class TrigramEmbedder:
    """Deterministic offline embedder: hashed character-trigram TF vectors."""

    def __init__(self, dimension: int = FALLBACK_DIMENSION):
        self.dimension = dimension
        self.name = f"trigram-{dimension}"

    def embed(self, text: str) -> tuple[float, ...]:
        normalized = re.sub(r"\s+", " ", text.casefold()).strip()
        padded = f" {normalized} "
        counts = [0.0] * self.dimension
        if len(padded) < 3:
            padded = padded + "  "
        for i in range(len(padded) - 2):
            trigram = padded[i:i + 3]
            bucket = zlib.crc32(trigram.encode("utf-8")) % self.dimension
            counts[bucket] += 1.0
        norm = math.sqrt(sum(c * c for c in counts))
        if norm == 0.0:
            counts[0] = 1.0
            norm = 1.0
        return tuple(c / norm for c in counts)


class RemoteEmbedder:
    """HTTP provider: POST {"text": ...} -> {"embedding": [...]}."""

    def __init__(self, url: str, dimension: int = 1024, timeout: float = 30.0):
        self.url = url
        self.dimension = dimension
        self.name = f"remote:{url}"
        self.timeout = timeout

    def embed(self, text: str) -> tuple[float, ...]:
        import httpx

        try:
            response = httpx.post(self.url, json={"text": text},
                                  timeout=self.timeout)
            response.raise_for_status()
            vector = [float(v) for v in response.json()["embedding"]]
        except Exception as exc:
            raise ProviderError(f"embedding request failed: {exc}") from exc
        norm = math.sqrt(sum(v * v for v in vector))
        if norm == 0.0:
            raise ProviderError("remote provider returned a zero vector")
        return tuple(v / norm for v in vector)


def provider_from_env() -> EmbeddingProvider:
    """Remote provider when CIRCUITLM_EMBED_URL is set, fallback otherwise."""
    url = os.environ.get("CIRCUITLM_EMBED_URL")
    if url:
        return RemoteEmbedder(url)
    return TrigramEmbedder()


def embed(text: str, provider: EmbeddingProvider) -> tuple[float, ...]:
    """Embed text with the given provider; result is L2-normalized."""
    return provider.embed(text)


def cosine(a: Iterable[float], b: Iterable[float]) -> float:
    return sum(x * y for x, y in zip(a, b))


class ComponentLibrary:
    """Immutable record set with a normalized alias index."""

    def __init__(self, records: Iterable[ComponentRecord]):
        self.records: tuple[ComponentRecord, ...] = tuple(records)
        if not self.records:
            raise FormatError("library must contain at least one record")
        self.by_key: dict[str, ComponentRecord] = {}
        self.alias_index: dict[str, str] = {}
        for record in self.records:
            if record.key in self.by_key:
                raise DuplicateKeyError(f"duplicate key {record.key!r}")
            self.by_key[record.key] = record
        for record in self.records:
            for alias in (record.key, *record.aliases):
                normalized = normalize_alias(alias)
                owner = self.alias_index.get(normalized)
                if owner is not None and owner != record.key:
                    raise DuplicateAliasError(
                        f"alias {alias!r} claimed by both {owner!r} "
                        f"and {record.key!r}")
                self.alias_index[normalized] = record.key
        self._vector_cache: dict[str, list[tuple[float, ...]]] = {}

    def get(self, key: str) -> ComponentRecord | None:
        return self.by_key.get(key)

    def lookup_alias(self, text: str) -> ComponentRecord | None:
        key = self.alias_index.get(normalize_alias(text))
        return self.by_key[key] if key else None

    def record_vectors(self, provider: EmbeddingProvider) -> list[tuple[float, ...]]:
        cached = self._vector_cache.get(provider.name)
        if cached is None:
            cached = [provider.embed(r.embedding_text()) for r in self.records]
            self._vector_cache[provider.name] = cached
        return cached


def _record_from_jsonable(data: dict[str, Any]) -> ComponentRecord:
    try:
        pins = tuple(
            PinSpec(name=str(p["name"]), role=PinRole(p.get("role", "other")),
                    requires_drive=bool(p.get("requires_drive", False)))
            for p in data["pins"])
        specs_raw = data.get("specs", {})
        specs = ElectricalSpecs(
            supply_voltage=specs_raw.get("supply_voltage"),
            v_out_high=specs_raw.get("v_out_high"),
            v_in_max=specs_raw.get("v_in_max"),
            max_current_ma=specs_raw.get("max_current_ma"),
            is_inductive_load=bool(specs_raw.get("is_inductive_load", False)),
            needs_decoupling=bool(specs_raw.get("needs_decoupling", False)),
            needs_series_resistor=bool(specs_raw.get("needs_series_resistor", False)),
            i2c_address=specs_raw.get("i2c_address"),
        )
        return ComponentRecord(
            key=str(data["key"]),
            pins=pins,
            width=float(data.get("width", 60.0)),
            height=float(data.get("height", 40.0)),
            aliases=tuple(str(a) for a in data.get("aliases", [])),
            description=str(data.get("description", "")),
            category=str(data.get("category", "")),
            usage=str(data.get("usage", "")),
            specs=specs,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LibraryError):
            raise
        raise FormatError(f"bad record {data.get('key', '?')!r}: {exc}") from exc


def load_library(source: str | Path) -> ComponentLibrary:
    """Load the library file: a JSON array of component records."""
    path = Path(source)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read library {path}: {exc}") from exc
    if not isinstance(data, list):
        raise FormatError("library file must hold a JSON array of records")
    return ComponentLibrary(_record_from_jsonable(entry) for entry in data)


def default_library_path() -> Path:
    env = os.environ.get("CIRCUITLM_LIB")
    if env:
        return Path(env)
    return Path(__file__).parent / "data" / "library.json"


def load_default_library() -> ComponentLibrary:
    return load_library(default_library_path())


def match_component(query: str, lib: ComponentLibrary,
                    provider: EmbeddingProvider,
                    threshold: float = DEFAULT_THRESHOLD) -> MatchResult:
    """Resolve one free-text request to a canonical record."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    record = lib.lookup_alias(query)
    if record is not None:
        return MatchResult(query=query, key=record.key, similarity=1.0)
    query_vec = provider.embed(query)
    best_key: str | None = None
    best_score = -1.0
    for rec, vec in zip(lib.records, lib.record_vectors(provider)):
        score = cosine(query_vec, vec)
        # Ties break toward the lexicographically smallest key.
        if score > best_score or (score == best_score and best_key is not None
                                  and rec.key < best_key):
            best_key, best_score = rec.key, score
    if best_score >= threshold:
        return MatchResult(query=query, key=best_key, similarity=best_score)
    return MatchResult(query=query, key=None, similarity=best_score)


def resolve_all(requests: list[str], lib: ComponentLibrary,
                provider: EmbeddingProvider,
                threshold: float = DEFAULT_THRESHOLD,
                ) -> tuple[dict[str, MatchResult], bool]:
    """Resolve every request; the halt flag is true iff any result is OOD.

    A raised halt is a strict guardrail: callers must not run generation
    stages against a halted resolution.
    """
    if not requests:
        raise ValueError("requests must be non-empty")
    results = {req: match_component(req, lib, provider, threshold)
               for req in requests}
    halted = any(not result.matched for result in results.values())
    return results, halted
