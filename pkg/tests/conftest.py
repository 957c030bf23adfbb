from __future__ import annotations

import json
from pathlib import Path

import pytest

from circuitlm import kb, schema

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
CIRCUITS = FIXTURES / "circuits"
REPLAYS = FIXTURES / "replays"
REPLAYS_OOD = FIXTURES / "replays_ood"
PROMPTS_FILE = FIXTURES / "prompts.json"
KB_FIXTURE = Path(__file__).parent / "fixtures" / "kb_library.json"


def load_circuit(name: str) -> schema.CircuitDocument:
    path = CIRCUITS / f"{name}.circuit.json"
    return schema.parse_document(path.read_text(encoding="utf-8"))


def circuit_names() -> list[str]:
    return sorted(p.name.removesuffix(".circuit.json")
                  for p in CIRCUITS.glob("*.circuit.json"))


def erc_expectations() -> dict[str, list[dict]]:
    return json.loads((FIXTURES / "erc_expected.json").read_text())


def bench_expectations() -> dict[str, dict]:
    return json.loads((FIXTURES / "expected.json").read_text())


@pytest.fixture(scope="session")
def lib() -> kb.ComponentLibrary:
    return kb.load_default_library()


@pytest.fixture(scope="session")
def provider() -> kb.TrigramEmbedder:
    return kb.TrigramEmbedder()


@pytest.fixture(scope="session")
def kb_lib() -> kb.ComponentLibrary:
    return kb.load_library(KB_FIXTURE)
