"""Benchmark harness: prompts through the pipeline, scored and reported.

Replay mode reads canned transcripts from a directory (one JSON file per
prompt id), keeping the whole benchmark offline and bitwise
deterministic; live mode builds a fresh HTTP client per prompt.  Prompts
fan out over a thread pool, and outcomes are merged by (run, prompt)
index so completion order never changes the result.

The report path writes the delimited per-outcome table and the summary
JSON, renders the Table-style text to stdout, and saves matplotlib
charts next to the data files.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from . import kb, pipeline, scoring
from .erc import ErcConfig, ErcReport, run_erc
from .scoring import BenchmarkSummary, PromptRecord, RunOutcome
from .violations import Severity, Violation

ClientFactory = Callable[[str, int], pipeline.ModelClient]


@dataclass(frozen=True)
class BenchConfig:
    runs: int = 3
    jobs: int = 4
    threshold: float = kb.DEFAULT_THRESHOLD
    temperature: float = 0.0


def replay_client_factory(transcripts_dir: str | Path) -> ClientFactory:
    directory = Path(transcripts_dir)

    def factory(prompt_id: str, run_index: int) -> pipeline.ModelClient:
        path = directory / f"{prompt_id}.json"
        if not path.exists():
            raise FileNotFoundError(f"no replay transcript for {prompt_id!r} "
                                    f"under {directory}")
        return pipeline.ReplayClient.from_file(path)

    return factory


def live_client_factory() -> ClientFactory:
    client = pipeline.client_from_env("model")
    if client is None:
        raise RuntimeError(f"live mode needs {pipeline.MODEL_URL_VAR} set")

    def factory(prompt_id: str, run_index: int) -> pipeline.ModelClient:
        return client

    return factory


def _evaluate_prompt(prompt: PromptRecord, run_index: int,
                     factory: ClientFactory, lib: kb.ComponentLibrary,
                     provider: kb.EmbeddingProvider, erc_config: ErcConfig,
                     config: BenchConfig) -> RunOutcome:
    client = factory(prompt.id, run_index)
    try:
        result = pipeline.run_pipeline(prompt.text, client, lib, provider,
                                       threshold=config.threshold,
                                       temperature=config.temperature)
    except (pipeline.StageParseError, pipeline.ClientError) as exc:
        # Unusable generator output counts as a fatal defect of the run.
        report = ErcReport(violations=[Violation(
            rule_id="generation-error", severity=Severity.FATAL,
            message=str(exc))])
        return RunOutcome(prompt_id=prompt.id, run_index=run_index,
                          report=report)
    if result.halted or result.document is None:
        return RunOutcome(prompt_id=prompt.id, run_index=run_index,
                          report=ErcReport(halted_ood=True))
    report = run_erc(result.document, lib, erc_config)
    return RunOutcome(prompt_id=prompt.id, run_index=run_index, report=report)


def run_benchmark(prompts: list[PromptRecord], factory: ClientFactory,
                  lib: kb.ComponentLibrary, provider: kb.EmbeddingProvider,
                  erc_config: ErcConfig | None = None,
                  config: BenchConfig = BenchConfig(),
                  ) -> tuple[list[RunOutcome], BenchmarkSummary]:
    erc_config = erc_config or ErcConfig()
    tasks = [(prompt, run_index)
             for run_index in range(config.runs) for prompt in prompts]
    with ThreadPoolExecutor(max_workers=max(config.jobs, 1)) as pool:
        outcomes = list(pool.map(
            lambda task: _evaluate_prompt(task[0], task[1], factory, lib,
                                          provider, erc_config, config),
            tasks))
    summary = scoring.aggregate(outcomes, prompts)
    return outcomes, summary


def write_outcomes_csv(outcomes: list[RunOutcome], path: str | Path) -> None:
    """Delimited per-(prompt, run) table."""
    ordered = sorted(outcomes, key=lambda o: (o.run_index, o.prompt_id))
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["prompt_id", "run", "pass", "halted_ood",
                         "fatal", "major", "minor", "warning"])
        for outcome in ordered:
            counts = outcome.report.counts
            writer.writerow([
                outcome.prompt_id, outcome.run_index,
                int(outcome.passed), int(outcome.report.halted_ood),
                counts[Severity.FATAL], counts[Severity.MAJOR],
                counts[Severity.MINOR], counts[Severity.WARNING],
            ])


def write_figures(summary: BenchmarkSummary, out_dir: str | Path) -> list[Path]:
    """Bar charts for the difficulty breakdown and severity means."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if summary.per_difficulty:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        tiers = [d for d in scoring.Difficulty if d in summary.per_difficulty]
        rates = [summary.per_difficulty[d] for d in tiers]
        ax.bar([d.value for d in tiers], rates, color="#2a6099")
        ax.set_ylabel("Pass@1 (%)")
        ax.set_ylim(0, 100)
        ax.set_title("Pass@1 by difficulty")
        for i, rate in enumerate(rates):
            ax.text(i, rate + 2, f"{rate:.1f}", ha="center", fontsize=9)
        fig.tight_layout()
        path = out / "pass_rate_by_difficulty.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(5, 3.2))
    tiers = list(Severity)
    means = [summary.per_severity[s][0] for s in tiers]
    stds = [summary.per_severity[s][1] for s in tiers]
    ax.bar([s.value for s in tiers], means, yerr=stds, capsize=4,
           color=["#a02015", "#d07020", "#c0a030", "#708090"])
    ax.set_ylabel("errors per prompt")
    ax.set_title("Mean errors per prompt by severity")
    fig.tight_layout()
    path = out / "errors_by_severity.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def write_report(outcomes: list[RunOutcome], summary: BenchmarkSummary,
                 out_dir: str | Path, label: str = "replay",
                 figures: bool = True) -> dict[str, Any]:
    """Write summary.json, outcomes.csv, and charts; return file map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary_path = out / "summary.json"
    summary_path.write_text(summary.to_json(), encoding="utf-8")
    outcomes_path = out / "outcomes.csv"
    write_outcomes_csv(outcomes, outcomes_path)
    files = {"summary": summary_path, "outcomes": outcomes_path}
    if figures:
        for i, path in enumerate(write_figures(summary, out / "figures")):
            files[f"figure_{i}"] = path
    return files
