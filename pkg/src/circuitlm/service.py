"""Stateless JSON-over-HTTP facade for the browser editor and tooling.

Every endpoint answers with exactly the core modules' serializations;
there is no logic here beyond decoding bodies and mapping errors to the
documented ApiError codes.  All shared state (library, config) is
immutable after startup, so requests are freely concurrent.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import kb, layout, pipeline, schema
from .erc import ErcConfig, run_erc

# Closed set of error codes clients may rely on.
API_ERROR_CODES = ("SyntaxError", "SchemaError", "BadRequest",
                   "PipelineUnavailable", "StageError")


def _api_error(status: int, code: str, message: str,
               path: str | None = None) -> JSONResponse:
    assert code in API_ERROR_CODES
    body: dict[str, Any] = {"code": code, "message": message}
    if path is not None:
        body["path"] = path
    return JSONResponse(status_code=status, content=body)


async def _read_json(request: Request) -> Any:
    raw = await request.body()
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise schema.JsonSyntaxError(f"invalid JSON body: {exc}") from exc


def create_app(lib: kb.ComponentLibrary | None = None,
               erc_config: ErcConfig | None = None,
               threshold: float = kb.DEFAULT_THRESHOLD,
               static_dir: str | Path | None = None) -> FastAPI:
    library = lib or kb.load_default_library()
    config = erc_config or ErcConfig()
    provider = kb.provider_from_env()
    glyphs = layout.load_glyphs()

    app = FastAPI(title="circuitlm", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"https?://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(schema.CircuitJsonError)
    async def _circuit_error(request: Request,
                             exc: schema.CircuitJsonError) -> JSONResponse:
        code = ("SyntaxError" if isinstance(exc, schema.JsonSyntaxError)
                else "SchemaError")
        return _api_error(400, code, exc.message, exc.path)

    @app.post("/v1/validate")
    async def validate(request: Request) -> JSONResponse:
        raw = await request.body()
        doc = schema.parse_document(raw.decode("utf-8", errors="replace"))
        violations = schema.validate_against_library(doc, library)
        return JSONResponse({
            "violations": [v.to_dict() for v in violations],
            "parts": len(doc.parts),
            "connections": len(doc.connections),
        })

    @app.post("/v1/erc")
    async def erc_endpoint(request: Request) -> JSONResponse:
        raw = await request.body()
        doc = schema.parse_document(raw.decode("utf-8", errors="replace"))
        report = run_erc(doc, library, config)
        return JSONResponse(report.to_dict())

    @app.post("/v1/layout")
    async def layout_endpoint(request: Request) -> JSONResponse:
        body = await _read_json(request)
        if not isinstance(body, dict) or "circuit" not in body:
            return _api_error(400, "BadRequest",
                              "body must be {\"circuit\": ..., \"seed\": n}")
        seed_raw = body.get("seed", 0)
        if not isinstance(seed_raw, int) or isinstance(seed_raw, bool):
            return _api_error(400, "BadRequest", "seed must be an integer",
                              "$.seed")
        doc = schema.document_from_jsonable(body["circuit"], "$.circuit")
        plan = layout.compute_layout(doc, library, seed_raw)
        wires = layout.route_wires(plan, doc, library, glyphs)
        return JSONResponse({
            "plan": plan.to_dict(),
            "wires": [w.to_dict() for w in wires],
            "crossings": layout.crossing_count(wires),
            "svg": layout.render_svg(plan, wires, doc, library, glyphs),
        })

    @app.get("/v1/components")
    async def components() -> JSONResponse:
        records = []
        for record in library.records:
            records.append({
                "key": record.key,
                "pins": [{"name": p.name, "role": p.role.value,
                          "requires_drive": p.requires_drive}
                         for p in record.pins],
                "width": record.width,
                "height": record.height,
                "aliases": list(record.aliases),
                "category": record.category,
                "description": record.description,
                "glyph": record.key in glyphs,
            })
        return JSONResponse({"components": records})

    @app.post("/v1/pipeline")
    async def pipeline_endpoint(request: Request) -> JSONResponse:
        body = await _read_json(request)
        if not isinstance(body, dict) or not body.get("prompt"):
            return _api_error(400, "BadRequest",
                              "body must be {\"prompt\": \"...\"}")
        client = pipeline.client_from_env("model")
        if client is None:
            return _api_error(503, "PipelineUnavailable",
                              f"set {pipeline.MODEL_URL_VAR} to enable "
                              f"live generation")
        try:
            result = pipeline.run_pipeline(str(body["prompt"]), client,
                                           library, provider, threshold)
        except (pipeline.StageParseError, pipeline.ClientError) as exc:
            return _api_error(502, "StageError", str(exc))
        return JSONResponse(result.to_dict())

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="editor")

    return app


def serve(port: int = 8747, lib: kb.ComponentLibrary | None = None,
          erc_config: ErcConfig | None = None,
          static_dir: str | Path | None = None) -> None:
    """Run the blocking HTTP listener."""
    import uvicorn

    app = create_app(lib=lib, erc_config=erc_config, static_dir=static_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
