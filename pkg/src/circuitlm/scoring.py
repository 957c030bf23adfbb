"""Pass@1 classification and multi-run benchmark aggregation.

A schematic passes only with zero Fatal and zero Major findings; minor
errors and warnings are recorded for diagnostics but do not fail a run.
An out-of-distribution halt is an automatic failure.  Rates are averaged
across runs; per-severity means use the population standard deviation
(divide by N) so repeated aggregations are reproducible bit for bit.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .erc import ErcReport
from .violations import Severity


class Difficulty(enum.Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"

    def __str__(self) -> str:
        return self.value


# "Adversarial" is the alternate name for the hardest tier.
_DIFFICULTY_ALIASES = {
    "easy": Difficulty.EASY,
    "medium": Difficulty.MEDIUM,
    "hard": Difficulty.HARD,
    "adversarial": Difficulty.HARD,
}


def parse_difficulty(text: str) -> Difficulty:
    try:
        return _DIFFICULTY_ALIASES[text.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown difficulty {text!r}") from None


class EmptyStratumError(ValueError):
    """No prompts exist at the requested difficulty."""


class MismatchedPromptSetError(ValueError):
    """Runs do not cover an identical set of prompt ids."""


@dataclass(frozen=True)
class PromptRecord:
    id: str
    text: str
    difficulty: Difficulty


def load_prompts(path: str | Path) -> list[PromptRecord]:
    """Read the benchmark prompt file: a JSON array of prompt records."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    prompts = [PromptRecord(id=str(entry["id"]), text=str(entry["text"]),
                            difficulty=parse_difficulty(str(entry["difficulty"])))
               for entry in data]
    seen = set()
    for prompt in prompts:
        if prompt.id in seen:
            raise ValueError(f"duplicate prompt id {prompt.id!r}")
        seen.add(prompt.id)
    return prompts


def classify_pass(report: ErcReport) -> bool:
    """Pass iff not halted and the report holds no Fatal or Major finding."""
    if report.halted_ood:
        return False
    counts = report.counts
    return counts[Severity.FATAL] == 0 and counts[Severity.MAJOR] == 0


@dataclass(frozen=True)
class RunOutcome:
    prompt_id: str
    run_index: int
    report: ErcReport

    @property
    def passed(self) -> bool:
        return classify_pass(self.report)


@dataclass(frozen=True)
class BenchmarkSummary:
    pass_at_1_percent: float
    per_severity: dict[Severity, tuple[float, float]]
    per_difficulty: dict[Difficulty, float]
    runs: int
    prompt_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "pass_at_1_percent": self.pass_at_1_percent,
            "per_severity": {
                sev.value: {"mean": mu, "std": sigma}
                for sev, (mu, sigma) in self.per_severity.items()
            },
            "per_difficulty": {
                diff.value: rate for diff, rate in self.per_difficulty.items()
            },
            "runs": self.runs,
            "prompt_count": self.prompt_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _population_std(values: list[float], mean: float) -> float:
    if not values:
        return 0.0
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def _runs_by_index(outcomes: Iterable[RunOutcome]) -> dict[int, list[RunOutcome]]:
    runs: dict[int, list[RunOutcome]] = {}
    for outcome in outcomes:
        runs.setdefault(outcome.run_index, []).append(outcome)
    return runs


def difficulty_rate(outcomes: list[RunOutcome], prompts: list[PromptRecord],
                    difficulty: Difficulty) -> float:
    """Mean over runs of 100 * passed / total prompts at the difficulty."""
    stratum = {p.id for p in prompts if p.difficulty == difficulty}
    if not stratum:
        raise EmptyStratumError(f"no prompts at difficulty {difficulty}")
    known = {p.id for p in prompts}
    for outcome in outcomes:
        if outcome.prompt_id not in known:
            raise MismatchedPromptSetError(
                f"outcome references unknown prompt {outcome.prompt_id!r}")
    rates = []
    for _, run_outcomes in sorted(_runs_by_index(outcomes).items()):
        passed = sum(1 for o in run_outcomes
                     if o.prompt_id in stratum and o.passed)
        rates.append(100.0 * passed / len(stratum))
    if not rates:
        raise ValueError("no outcomes supplied")
    return sum(rates) / len(rates)


def aggregate(outcomes: list[RunOutcome],
              prompts: list[PromptRecord]) -> BenchmarkSummary:
    """Fold run outcomes into the benchmark summary.

    Pass@1 is the mean across runs of per-run pass percentage; severity
    means pool every (prompt, run) report.
    """
    if not outcomes:
        raise ValueError("no outcomes supplied")
    runs = _runs_by_index(outcomes)
    indices = sorted(runs)
    if indices != list(range(len(indices))):
        raise ValueError(f"run indices must be contiguous from 0, got {indices}")
    prompt_ids = {p.id for p in prompts}
    covered = [frozenset(o.prompt_id for o in runs[i]) for i in indices]
    for index, cover in zip(indices, covered):
        if len(cover) != len(runs[index]):
            raise MismatchedPromptSetError(
                f"run {index} holds duplicate prompt outcomes")
        if cover != covered[0] or not cover <= prompt_ids:
            raise MismatchedPromptSetError(
                "all runs must cover one identical prompt id set")

    per_run_rates = []
    for index in indices:
        run = runs[index]
        per_run_rates.append(100.0 * sum(o.passed for o in run) / len(run))
    pass_at_1 = sum(per_run_rates) / len(per_run_rates)

    ordered = sorted(outcomes, key=lambda o: (o.run_index, o.prompt_id))
    per_severity: dict[Severity, tuple[float, float]] = {}
    for severity in Severity:
        counts = [float(o.report.counts[severity]) for o in ordered]
        mean = sum(counts) / len(counts)
        per_severity[severity] = (mean, _population_std(counts, mean))

    per_difficulty: dict[Difficulty, float] = {}
    covered_prompts = [p for p in prompts if p.id in covered[0]]
    for difficulty in Difficulty:
        if any(p.difficulty == difficulty for p in covered_prompts):
            per_difficulty[difficulty] = difficulty_rate(
                outcomes, covered_prompts, difficulty)

    return BenchmarkSummary(
        pass_at_1_percent=pass_at_1,
        per_severity=per_severity,
        per_difficulty=per_difficulty,
        runs=len(indices),
        prompt_count=len(covered[0]),
    )


def render_table(summary: BenchmarkSummary, label: str = "model") -> str:
    """Fixed-width results table: Pass@1 plus per-tier errors per prompt."""
    headers = ["Model", "Pass@1", "Fatal", "Major", "Minor", "Warning"]
    row = [label, f"{summary.pass_at_1_percent:.1f}%"]
    for severity in Severity:
        mu, sigma = summary.per_severity[severity]
        row.append(f"{mu:.1f} ± {sigma:.1f}")
    widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
        "  ".join(v.ljust(w) for v, w in zip(row, widths)),
    ]
    if summary.per_difficulty:
        parts = [f"{diff.value} {summary.per_difficulty[diff]:.2f}%"
                 for diff in Difficulty if diff in summary.per_difficulty]
        lines.append("")
        lines.append("Pass@1 by difficulty: " + ", ".join(parts))
    return "\n".join(lines) + "\n"
