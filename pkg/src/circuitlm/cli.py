"""Command line entry point tying the toolkit together."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import bench as bench_mod
from . import kb, layout, pipeline, schema, scoring
from .erc import ErcConfig, run_erc
from .violations import Severity


def _load_library(path: str | None) -> kb.ComponentLibrary:
    lib_path = Path(path) if path else kb.default_library_path()
    try:
        return kb.load_library(lib_path)
    except kb.LibraryError as exc:
        raise click.UsageError(f"cannot load library: {exc}")


def _load_document(path: str) -> schema.CircuitDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.UsageError(str(exc))
    try:
        return schema.parse_document(text)
    except schema.CircuitJsonError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _erc_config(path: str | None) -> ErcConfig:
    if not path:
        return ErcConfig()
    try:
        return ErcConfig.from_file(path)
    except (OSError, ValueError) as exc:
        raise click.UsageError(f"bad ERC config: {exc}")


library_option = click.option(
    "--library", envvar="CIRCUITLM_LIB", default=None,
    help="Component library file (default: bundled library).")


@click.group()
@click.version_option(package_name="circuitlm")
def main() -> None:
    """CircuitJSON toolkit: validate, rule-check, lay out, and benchmark."""


@main.command()
@click.argument("file", type=click.Path(exists=True))
@library_option
def validate(file: str, library: str | None) -> None:
    """Schema plus library check; exit 0 iff fully canonical."""
    lib = _load_library(library)
    doc = _load_document(file)
    violations = schema.validate_against_library(doc, lib)
    for violation in violations:
        click.echo(f"{violation.severity}: {violation.rule_id}: "
                   f"{violation.message}")
    if violations:
        sys.exit(1)
    click.echo(f"ok: {len(doc.parts)} parts, {len(doc.connections)} "
               f"connections, all canonical")


@main.command()
@click.argument("file", type=click.Path(exists=True))
@library_option
@click.option("--erc-config", "erc_config_path", default=None,
              type=click.Path(exists=True), help="ErcConfig JSON overrides.")
@click.option("--json", "json_out", default=None, type=click.Path(),
              help="Also write the report as JSON.")
def erc(file: str, library: str | None, erc_config_path: str | None,
        json_out: str | None) -> None:
    """Run every electrical rule checker; exit 0 iff the circuit passes."""
    lib = _load_library(library)
    doc = _load_document(file)
    report = run_erc(doc, lib, _erc_config(erc_config_path))
    if report.violations:
        width = max(len(v.rule_id) for v in report.violations)
        for violation in report.violations:
            click.echo(f"{str(violation.severity):8} "
                       f"{violation.rule_id.ljust(width)}  "
                       f"{violation.message}")
    counts = report.counts
    click.echo("  ".join(f"{sev.value}: {counts[sev]}" for sev in Severity))
    if json_out:
        Path(json_out).write_text(report.to_json(), encoding="utf-8")
    if not scoring.classify_pass(report):
        sys.exit(1)
    click.echo("PASS")


@main.command("layout")
@click.argument("file", type=click.Path(exists=True))
@library_option
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--svg", "svg_out", default=None, type=click.Path(),
              help="Write the rendered SVG here.")
@click.option("--out", "doc_out", default=None, type=click.Path(),
              help="Write the document back with computed placement/routes.")
def layout_cmd(file: str, library: str | None, seed: int,
               svg_out: str | None, doc_out: str | None) -> None:
    """Force-directed placement and Manhattan routing."""
    lib = _load_library(library)
    doc = _load_document(file)
    plan = layout.compute_layout(doc, lib, seed)
    wires = layout.route_wires(plan, doc, lib)
    crossings = layout.crossing_count(wires)
    click.echo(f"canvas {plan.canvas[0]:g}x{plan.canvas[1]:g}, "
               f"{len(plan.positions)} parts placed, {len(wires)} wires, "
               f"{crossings} crossings")
    if svg_out:
        svg = layout.render_svg(plan, wires, doc, lib)
        Path(svg_out).write_text(svg, encoding="utf-8")
        click.echo(f"wrote {svg_out}")
    if doc_out:
        for part in doc.parts:
            if part.id in plan.positions:
                part.left, part.top = plan.positions[part.id]
        by_index = {w.connection_index: w for w in wires}
        for i, conn in enumerate(doc.connections):
            if i in by_index:
                conn.route = by_index[i].route_tokens()
        Path(doc_out).write_text(schema.serialize_document(doc),
                                 encoding="utf-8")
        click.echo(f"wrote {doc_out}")


@main.command()
@click.argument("query")
@library_option
@click.option("--threshold", default=kb.DEFAULT_THRESHOLD,
              show_default=True, type=float)
def match(query: str, library: str | None, threshold: float) -> None:
    """Resolve a free-text component request against the knowledge base."""
    lib = _load_library(library)
    provider = kb.provider_from_env()
    result = kb.match_component(query, lib, provider, threshold)
    if result.matched:
        click.echo(f"matched: {result.key} "
                   f"(similarity {result.similarity:.4f})")
    else:
        click.echo(f"out-of-distribution: best similarity "
                   f"{result.similarity:.4f} below threshold {threshold}")
        sys.exit(1)


@main.command()
@click.argument("prompts_file", type=click.Path(exists=True))
@library_option
@click.option("--runs", default=3, show_default=True, type=int)
@click.option("--jobs", default=4, show_default=True, type=int)
@click.option("--transcripts", default=None, type=click.Path(exists=True),
              help="Replay transcript directory (offline mode).")
@click.option("--live", is_flag=True,
              help="Call the configured live model backend.")
@click.option("--out", "out_dir", default="bench_out", show_default=True,
              type=click.Path(), help="Report output directory.")
@click.option("--label", default=None, help="Row label in the table.")
@click.option("--threshold", default=kb.DEFAULT_THRESHOLD, type=float,
              show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render charts next to the delimited output.")
def bench(prompts_file: str, library: str | None, runs: int, jobs: int,
          transcripts: str | None, live: bool, out_dir: str,
          label: str | None, threshold: float, figures: bool) -> None:
    """Run the benchmark over a prompt set and write the report."""
    if bool(transcripts) == live:
        raise click.UsageError("pick exactly one of --transcripts or --live")
    lib = _load_library(library)
    provider = kb.provider_from_env()
    prompts = scoring.load_prompts(prompts_file)
    if live:
        try:
            factory = bench_mod.live_client_factory()
        except RuntimeError as exc:
            raise click.UsageError(str(exc))
        label = label or "live"
    else:
        factory = bench_mod.replay_client_factory(transcripts)
        label = label or "replay"
    config = bench_mod.BenchConfig(runs=runs, jobs=jobs, threshold=threshold)
    outcomes, summary = bench_mod.run_benchmark(prompts, factory, lib,
                                                provider, config=config)
    click.echo(scoring.render_table(summary, label=label), nl=False)
    files = bench_mod.write_report(outcomes, summary, out_dir, label=label,
                                   figures=figures)
    for name in sorted(files):
        click.echo(f"wrote {files[name]}")


@main.command("pipeline")
@click.argument("prompt")
@library_option
@click.option("--threshold", default=kb.DEFAULT_THRESHOLD, type=float,
              show_default=True)
@click.option("--out", "out_file", default=None, type=click.Path(),
              help="Write the generated CircuitJSON here.")
def pipeline_cmd(prompt: str, library: str | None, threshold: float,
                 out_file: str | None) -> None:
    """One live generation run (needs CIRCUITLM_MODEL_URL)."""
    client = pipeline.client_from_env("model")
    if client is None:
        raise click.UsageError(
            f"set {pipeline.MODEL_URL_VAR} (and optionally "
            f"{pipeline.MODEL_KEY_VAR}) to run the live pipeline")
    lib = _load_library(library)
    provider = kb.provider_from_env()
    result = pipeline.run_pipeline(prompt, client, lib, provider, threshold)
    click.echo(f"identified: {', '.join(result.identified)}")
    for query, match_result in result.matches.items():
        status = (match_result.key if match_result.matched
                  else f"OOD ({match_result.similarity:.3f})")
        click.echo(f"  {query} -> {status}")
    if result.halted:
        click.echo("halted: out-of-distribution component, human review "
                   "requested")
        sys.exit(1)
    doc = result.document
    click.echo(f"generated {len(doc.parts)} parts, "
               f"{len(doc.connections)} connections")
    for violation in result.validation:
        click.echo(f"validation {violation.severity}: {violation.message}")
    if out_file:
        Path(out_file).write_text(schema.serialize_document(doc),
                                  encoding="utf-8")
        click.echo(f"wrote {out_file}")


@main.command()
@click.option("--port", default=8747, show_default=True, type=int)
@library_option
@click.option("--erc-config", "erc_config_path", default=None,
              type=click.Path(exists=True))
@click.option("--static", "static_dir", default=None, type=click.Path(),
              help="Serve the editor's built assets from this directory.")
def serve(port: int, library: str | None, erc_config_path: str | None,
          static_dir: str | None) -> None:
    """Start the HTTP facade used by the browser editor."""
    from .service import serve as run_server

    lib = _load_library(library)
    static = Path(static_dir) if static_dir else _default_editor_dist()
    click.echo(f"listening on http://127.0.0.1:{port}"
               + (f" (editor assets: {static})" if static else ""))
    run_server(port=port, lib=lib, erc_config=_erc_config(erc_config_path),
               static_dir=static)


def _default_editor_dist() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


@main.command()
def firmware() -> None:
    """Explain why firmware generation is not part of this toolkit."""
    click.echo(
        "Firmware code generation is deliberately not included: this "
        "toolkit covers schematic generation, checking, and layout. "
        "Exported CircuitJSON plus the original prompt is everything a "
        "separate code-generation step needs.")


if __name__ == "__main__":
    main()
