"""Generation pipeline: staged prompting against a pluggable chat model.

Stage I identifies generic component categories, stage II resolves them
against the knowledge base (halting hard on any out-of-distribution
request), stage III produces a structured reasoning document, and stage
IV emits the CircuitJSON schematic.  Every stage gets exactly one repair
retry on a parse failure, and every raw model reply is retained in the
result transcript for audit.

The judge operation runs the same client interface with a separate
model: it grades a finished schematic on protocol-level correctness the
rule checker cannot see.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

from . import kb, schema
from .violations import Violation, parse_severity

PROMPTS_DIR = Path(__file__).parent / "prompts"

MODEL_URL_VAR = "CIRCUITLM_MODEL_URL"
MODEL_KEY_VAR = "CIRCUITLM_MODEL_KEY"
JUDGE_URL_VAR = "CIRCUITLM_JUDGE_URL"
JUDGE_KEY_VAR = "CIRCUITLM_JUDGE_KEY"


class ClientError(RuntimeError):
    """Transport or protocol failure talking to a model backend."""


class StageParseError(ValueError):
    """A stage reply stayed unparseable after its repair retry."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


class JudgeParseError(ValueError):
    """The judge reply could not be parsed into a report."""


class ModelClient(Protocol):
    name: str

    def complete(self, system_prompt: str, user_prompt: str,
                 temperature: float) -> str: ...


class HttpModelClient:
    """Plain HTTP chat adapter: POST {system, user, temperature} -> {text}."""

    def __init__(self, url: str, api_key: str | None = None,
                 name: str = "http", timeout: float = 120.0):
        self.url = url
        self.api_key = api_key
        self.name = name
        self.timeout = timeout

    def complete(self, system_prompt: str, user_prompt: str,
                 temperature: float) -> str:
        import httpx

        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = httpx.post(
                self.url,
                json={"system": system_prompt, "user": user_prompt,
                      "temperature": temperature},
                headers=headers, timeout=self.timeout)
            response.raise_for_status()
            return str(response.json()["text"])
        except Exception as exc:
            raise ClientError(f"model request failed: {exc}") from exc


class ReplayClient:
    """Serves canned replies in order; offline stand-in for a live model."""

    def __init__(self, replies: list[str], name: str = "replay"):
        self.replies = list(replies)
        self.name = name
        self.call_count = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayClient":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        replies = data["replies"] if isinstance(data, dict) else data
        return cls([str(r) for r in replies], name=f"replay:{Path(path).stem}")

    def complete(self, system_prompt: str, user_prompt: str,
                 temperature: float) -> str:
        if self.call_count >= len(self.replies):
            raise ClientError(f"{self.name}: transcript exhausted "
                              f"after {self.call_count} calls")
        reply = self.replies[self.call_count]
        self.call_count += 1
        return reply


def client_from_env(role: str = "model") -> HttpModelClient | None:
    """Build the generator or judge client from environment, if configured."""
    url_var, key_var = ((JUDGE_URL_VAR, JUDGE_KEY_VAR) if role == "judge"
                        else (MODEL_URL_VAR, MODEL_KEY_VAR))
    url = os.environ.get(url_var)
    if not url:
        return None
    return HttpModelClient(url, os.environ.get(key_var), name=role)


def load_prompt(name: str) -> str:
    return (PROMPTS_DIR / name).read_text(encoding="utf-8")


def strip_code_fences(text: str) -> str:
    """Drop markdown code fences wrapping a reply, if any."""
    stripped = text.strip()
    match = re.match(r"^```[a-zA-Z0-9_-]*\s*\n(.*)\n?```\s*$", stripped,
                     re.DOTALL)
    return match.group(1).strip() if match else stripped


def _extract_json(text: str, opener: str) -> Any:
    cleaned = strip_code_fences(text)
    start = cleaned.find(opener)
    if start < 0:
        raise ValueError(f"no {opener!r} found in reply")
    value, _ = json.JSONDecoder().raw_decode(cleaned[start:])
    return value


@dataclass(frozen=True)
class CotDocument:
    goals: str
    power_plan: str
    safety_constraints: str
    wiring_steps: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "goals": self.goals,
            "power_plan": self.power_plan,
            "safety_constraints": self.safety_constraints,
            "wiring_steps": list(self.wiring_steps),
        }

    def render(self) -> str:
        steps = "\n".join(f"{i + 1}. {step}"
                          for i, step in enumerate(self.wiring_steps))
        return (f"GOALS:\n{self.goals}\n\nPOWER:\n{self.power_plan}\n\n"
                f"SAFETY:\n{self.safety_constraints}\n\nWIRING:\n{steps}\n")


_SECTION_RE = re.compile(r"^\s*(GOALS|POWER|SAFETY|WIRING)\s*:\s*$|"
                         r"^\s*(GOALS|POWER|SAFETY|WIRING)\s*:\s*(.*)$",
                         re.IGNORECASE)


def parse_cot(text: str) -> CotDocument:
    """Split a reply into the four labeled reasoning sections."""
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for line in strip_code_fences(text).splitlines():
        match = _SECTION_RE.match(line)
        if match:
            name = (match.group(1) or match.group(2)).upper()
            sections[name] = []
            current = name
            rest = match.group(3)
            if rest:
                sections[name].append(rest)
        elif current is not None:
            sections[current].append(line)
    missing = [name for name in ("GOALS", "POWER", "SAFETY", "WIRING")
               if name not in sections]
    if missing:
        raise ValueError(f"missing sections: {', '.join(missing)}")
    steps = []
    for line in sections["WIRING"]:
        cleaned = re.sub(r"^\s*(?:\d+[.)]\s*|-\s*|\*\s*)", "", line).strip()
        if cleaned:
            steps.append(cleaned)
    if not steps:
        raise ValueError("WIRING section holds no steps")

    def body(name: str) -> str:
        return "\n".join(sections[name]).strip()

    return CotDocument(goals=body("GOALS"), power_plan=body("POWER"),
                       safety_constraints=body("SAFETY"),
                       wiring_steps=tuple(steps))


@dataclass
class StageReply:
    stage: str
    text: str

    def to_dict(self) -> dict[str, str]:
        return {"stage": self.stage, "text": self.text}


class _Recorder:
    """Client wrapper that logs every raw reply under the current stage."""

    def __init__(self, inner: ModelClient, temperature: float):
        self.inner = inner
        self.temperature = temperature
        self.stage = "?"
        self.transcript: list[StageReply] = []
        self.name = getattr(inner, "name", "client")

    def complete(self, system_prompt: str, user_prompt: str,
                 temperature: float) -> str:
        reply = self.inner.complete(system_prompt, user_prompt, temperature)
        self.transcript.append(StageReply(stage=self.stage, text=reply))
        return reply


def identify_components(prompt: str, client: ModelClient,
                        temperature: float = 0.0) -> list[str]:
    """Stage I: generic component categories as a JSON array of strings."""
    if not prompt.strip():
        raise ValueError("prompt must be non-empty")
    system = load_prompt("stage1_identify.txt")
    user = prompt
    last_error = ""
    for attempt in range(2):
        reply = client.complete(system, user, temperature)
        try:
            value = _extract_json(reply, "[")
            if (not isinstance(value, list) or not value
                    or not all(isinstance(item, str) for item in value)):
                raise ValueError("reply is not a non-empty array of strings")
            return [item.strip() for item in value]
        except ValueError as exc:
            last_error = str(exc)
            user = (f"{prompt}\n\nYour previous reply could not be parsed "
                    f"({last_error}). Reply with only a JSON array of "
                    f"component category strings.")
    raise StageParseError("I", last_error)


def _render_pinouts(pinouts: dict[str, list[str]]) -> str:
    lines = [f"- {key}: {', '.join(pins)}" for key, pins in pinouts.items()]
    return "\n".join(lines)


def generate_cot(prompt: str, matches: dict[str, kb.MatchResult],
                 pinouts: dict[str, list[str]], client: ModelClient,
                 temperature: float = 0.0) -> CotDocument:
    """Stage III: structured reasoning over resolved components."""
    unresolved = [q for q, m in matches.items() if not m.matched]
    if unresolved:
        raise ValueError(f"unresolved components: {unresolved}")
    system = load_prompt("stage3_cot.txt")
    names = ", ".join(sorted({m.key for m in matches.values()}))
    base = (f"Project request:\n{prompt}\n\nVerified components: {names}\n\n"
            f"Pinouts:\n{_render_pinouts(pinouts)}")
    user = base
    last_error = ""
    for attempt in range(2):
        reply = client.complete(system, user, temperature)
        try:
            return parse_cot(reply)
        except ValueError as exc:
            last_error = str(exc)
            user = (f"{base}\n\nYour previous reply could not be parsed "
                    f"({last_error}). Use the four labeled sections GOALS, "
                    f"POWER, SAFETY, WIRING.")
    raise StageParseError("III", last_error)


def generate_schematic(cot: CotDocument, matches: dict[str, kb.MatchResult],
                       pinouts: dict[str, list[str]], client: ModelClient,
                       temperature: float = 0.0) -> schema.CircuitDocument:
    """Stage IV: the CircuitJSON schematic itself."""
    system = load_prompt("stage4_generate.txt")
    names = ", ".join(sorted({m.key for m in matches.values() if m.key}))
    base = (f"Wiring plan:\n{cot.render()}\n"
            f"Canonical component types: {names}\n\n"
            f"Pinouts:\n{_render_pinouts(pinouts)}")
    user = base
    last_error = ""
    for attempt in range(2):
        reply = client.complete(system, user, temperature)
        try:
            value = _extract_json(reply, "{")
            return schema.document_from_jsonable(value)
        except (ValueError, schema.CircuitJsonError) as exc:
            last_error = str(exc)
            user = (f"{base}\n\nYour previous reply was rejected: "
                    f"{last_error}. Reply with a single valid CircuitJSON "
                    f"object only.")
    raise StageParseError("IV", last_error)


@dataclass
class PipelineResult:
    prompt: str
    identified: list[str] = field(default_factory=list)
    matches: dict[str, kb.MatchResult] = field(default_factory=dict)
    cot: CotDocument | None = None
    document: schema.CircuitDocument | None = None
    halted: bool = False
    validation: list[Violation] = field(default_factory=list)
    transcript: list[StageReply] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt": self.prompt,
            "identified": list(self.identified),
            "matches": {q: m.to_dict() for q, m in self.matches.items()},
            "cot": self.cot.to_dict() if self.cot else None,
            "document": (schema.document_to_jsonable(self.document)
                         if self.document else None),
            "halted": self.halted,
            "validation": [v.to_dict() for v in self.validation],
            "transcript": [r.to_dict() for r in self.transcript],
        }


def run_pipeline(prompt: str, client: ModelClient, lib: kb.ComponentLibrary,
                 provider: kb.EmbeddingProvider,
                 threshold: float = kb.DEFAULT_THRESHOLD,
                 temperature: float = 0.0) -> PipelineResult:
    """Drive stages I through IV; the OOD halt skips all generation stages."""
    recorder = _Recorder(client, temperature)
    result = PipelineResult(prompt=prompt)

    recorder.stage = "I"
    result.identified = identify_components(prompt, recorder, temperature)
    result.transcript = recorder.transcript

    matches, halted = kb.resolve_all(result.identified, lib, provider,
                                     threshold)
    result.matches = matches
    if halted:
        # Strict guardrail: no reasoning or generation over unknown parts.
        result.halted = True
        return result

    pinouts = {match.key: [pin.name for pin in lib.by_key[match.key].pins]
               for match in matches.values()}

    recorder.stage = "III"
    result.cot = generate_cot(prompt, matches, pinouts, recorder, temperature)

    recorder.stage = "IV"
    result.document = generate_schematic(result.cot, matches, pinouts,
                                         recorder, temperature)
    result.validation = schema.validate_against_library(result.document, lib)
    return result


@dataclass
class JudgeReport:
    violations: list[Violation]
    rationale: str

    def to_dict(self) -> dict[str, Any]:
        return {"violations": [v.to_dict() for v in self.violations],
                "rationale": self.rationale}

    def as_erc_report(self):
        """Adapter so judge findings flow through the same scoring path."""
        from .erc import ErcReport

        return ErcReport(violations=list(self.violations))


def judge_circuit(prompt: str, doc: schema.CircuitDocument,
                  judge: ModelClient,
                  temperature: float = 0.0) -> JudgeReport:
    """Meta-evaluation of a finished schematic by a separate model."""
    system = load_prompt("judge.txt")
    base = (f"Project request:\n{prompt}\n\nSchematic:\n"
            f"{schema.serialize_document(doc)}")
    user = base
    last_error = ""
    for attempt in range(2):
        reply = judge.complete(system, user, temperature)
        try:
            value = _extract_json(reply, "{")
            if not isinstance(value, dict) or "violations" not in value:
                raise ValueError("reply lacks a violations array")
            violations = []
            for entry in value["violations"]:
                violations.append(Violation(
                    rule_id=str(entry.get("rule_id", "judge-finding")),
                    severity=parse_severity(str(entry["severity"])),
                    message=str(entry.get("message", "")),
                    subjects=[str(s) for s in entry.get("subjects", [])],
                ))
            return JudgeReport(violations=violations,
                               rationale=str(value.get("rationale", "")))
        except (ValueError, KeyError) as exc:
            last_error = str(exc)
            user = (f"{base}\n\nYour previous reply could not be parsed "
                    f"({last_error}). Reply with the JSON object format "
                    f"from the instructions only.")
    raise JudgeParseError(last_error)
