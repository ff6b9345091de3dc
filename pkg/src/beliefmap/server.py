"""HTTP service over the analysis pipeline and the simulator.

Endpoints:
  POST /corpora                      upload an interchange file
  POST /corpora/{id}/analyses       run (or reuse) an analysis
  GET  /analyses/{run}/map          ?format=dot|structured
  GET  /analyses/{run}/convergence
  GET  /analyses/{run}/sequences/{s}/posts   ?group=g&contains=t1,t2
  POST /simulations                 run a simulation, store posts as a corpus

Runs are synchronous and content-addressed: the same corpus and config hash
to the same run id and the cached result is returned.
"""

from __future__ import annotations

import os
import tempfile

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from . import mapgen
from .analysis import run_analysis, result_to_obj, write_artifacts
from .config import (analysis_config_from_mapping, analysis_config_to_mapping,
                     validate_analysis_config)
from .corpus import dumps_corpus, format_timestamp, tokenize
from .errors import (BeliefMapError, ConfigError, ConfigFileError,
                     CorpusIntegrityError)
from .sim import Environment, run_simulation, sim_config_from_mapping, sim_posts_to_corpus
from .store import ArtifactStore

DEFAULT_POST_CAP = 100_000
DEFAULT_SIM_WORK_CAP = 2_000_000  # agent_count * steps


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details or []


def _error_response(exc: ApiError) -> JSONResponse:
    return JSONResponse(
        status_code=exc.status,
        content={"code": exc.code, "message": exc.message, "details": exc.details},
    )


def create_app(store_dir: str | None = None, post_cap: int = DEFAULT_POST_CAP,
               sim_work_cap: int = DEFAULT_SIM_WORK_CAP) -> FastAPI:
    if store_dir is None:
        store_dir = os.environ.get("STORE_DIR") or tempfile.mkdtemp(prefix="beliefmap-store-")
    store = ArtifactStore(store_dir)
    app = FastAPI(title="beliefmap", version="0.1.0")
    app.state.store = store

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return _error_response(exc)

    def _load_run(run_id: str) -> dict:
        if not store.has_run(run_id):
            raise ApiError(404, "unknown_run", f"run {run_id!r} not found")
        meta = store.load_run(run_id)
        if meta["status"] == "failed":
            raise ApiError(409, "run_failed",
                           f"run {run_id!r} failed: {meta.get('error', '')}")
        return meta

    @app.post("/corpora", status_code=201)
    async def post_corpus(request: Request):
        body = await request.body()
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ApiError(400, "bad_encoding", f"body is not UTF-8: {exc}")
        try:
            corpus_id, corpus, rejects = store.put_corpus(text)
        except CorpusIntegrityError as exc:
            raise ApiError(400, "corpus_integrity", str(exc),
                           details=[f"line {n}" for n in exc.bad_lines])
        return {
            "corpus_id": corpus_id,
            "groups": corpus.groups,
            "counts": {"groups": len(corpus.groups), "posts": len(corpus.posts)},
            "rejects": [
                {"line": r.line_no, "reason": r.reason} for r in rejects
            ],
        }

    @app.post("/corpora/{corpus_id}/analyses", status_code=201)
    async def post_analysis(corpus_id: str, request: Request):
        if not store.has_corpus(corpus_id):
            raise ApiError(404, "unknown_corpus", f"corpus {corpus_id!r} not found")
        try:
            body = await request.json()
        except Exception as exc:
            raise ApiError(422, "invalid_config", f"body is not JSON: {exc}")
        try:
            config = analysis_config_from_mapping(body)
        except ConfigFileError as exc:
            raise ApiError(422, "invalid_config", str(exc))
        field_errors = validate_analysis_config(config)
        if field_errors:
            raise ApiError(422, "invalid_config", "config validation failed",
                           details=[{"field": e.field, "message": e.message}
                                    for e in field_errors])
        corpus = store.get_corpus(corpus_id)
        if len(corpus.posts) > post_cap:
            raise ApiError(422, "corpus_too_large",
                           f"corpus has {len(corpus.posts)} posts; cap is {post_cap}")
        config_obj = analysis_config_to_mapping(config)
        run_id = store.run_id_for(corpus_id, config_obj)
        if not store.has_run(run_id):
            try:
                result = run_analysis(corpus, config)
            except BeliefMapError as exc:
                store.save_run(run_id, {
                    "run_id": run_id, "corpus_id": corpus_id,
                    "config": config_obj, "status": "failed",
                    "error": str(exc),
                })
            else:
                meta = {
                    "run_id": run_id, "corpus_id": corpus_id,
                    "config": config_obj, "status": "done",
                    "outputs": result_to_obj(result),
                }
                store.save_run(run_id, meta,
                               artifact_writer=lambda d: write_artifacts(result, d))
        meta = store.load_run(run_id)
        response = {
            "run_id": run_id,
            "corpus_id": corpus_id,
            "status": meta["status"],
        }
        if meta["status"] == "done":
            outputs = meta["outputs"]
            response["place_labels"] = outputs["place_labels"]
            response["sequence_count"] = outputs["sequence_count"]
            response["groups"] = outputs["groups"]
            response["diagnostics"] = outputs["diagnostics"]
        else:
            response["error"] = meta.get("error", "")
        return response

    @app.get("/analyses/{run_id}/map")
    async def get_map(run_id: str, format: str = Query("structured")):
        meta = _load_run(run_id)
        if format == "dot":
            text = (store.run_dir(run_id) / "map.dot").read_text("utf-8")
            return PlainTextResponse(text, media_type="text/vnd.graphviz")
        if format == "structured":
            return JSONResponse(meta["outputs"]["map"])
        raise ApiError(422, "bad_format", f"unknown map format {format!r}")

    @app.get("/analyses/{run_id}/convergence")
    async def get_convergence(run_id: str):
        meta = _load_run(run_id)
        conv = meta["outputs"]["convergence"]
        return {"run_id": run_id, "convergence": conv}

    @app.get("/analyses/{run_id}/sequences/{s}/posts")
    async def get_sequence_posts(run_id: str, s: int,
                                 group: str | None = Query(None),
                                 contains: str | None = Query(None)):
        meta = _load_run(run_id)
        outputs = meta["outputs"]
        if not (0 <= s < outputs["sequence_count"]):
            raise ApiError(404, "unknown_sequence",
                           f"sequence {s} not in [0, {outputs['sequence_count']})")
        if group is not None and group not in outputs["groups"]:
            raise ApiError(404, "unknown_group", f"group {group!r} not in this run")
        corpus = store.get_corpus(meta["corpus_id"])
        posts_by_id = {p.post_id: p for p in corpus.posts}
        wanted = [t for t in (contains.split(",") if contains else []) if t]
        rows = []
        for sl in outputs["slices"]:
            if sl["sequence"] != s:
                continue
            if group is not None and sl["group"] != group:
                continue
            for pid in sl["post_ids"]:
                post = posts_by_id[pid]
                if wanted and not set(wanted).issubset(set(tokenize(post.text))):
                    continue
                rows.append(post)
        rows.sort(key=lambda p: (len(p.text), p.timestamp, p.post_id))
        return [
            {"post_id": p.post_id, "group_id": p.group_id,
             "player_id": p.player_id, "role": p.role,
             "timestamp": format_timestamp(p.timestamp), "text": p.text}
            for p in rows
        ]

    @app.post("/simulations", status_code=201)
    async def post_simulation(request: Request):
        try:
            body = await request.json()
        except Exception as exc:
            raise ApiError(422, "invalid_config", f"body is not JSON: {exc}")
        if not isinstance(body, dict):
            raise ApiError(422, "invalid_config", "simulation config must be an object")
        try:
            cfg = sim_config_from_mapping(body, strict=False)
        except ConfigError as exc:
            raise ApiError(422, "invalid_config", str(exc))
        if cfg.agent_count * max(cfg.steps, 1) > sim_work_cap:
            raise ApiError(422, "simulation_too_large",
                           f"agent_count * steps exceeds {sim_work_cap}")
        env = Environment(cfg.dimensions, cfg.cells_per_axis)
        _, posts, report = run_simulation(cfg, env)
        corpus = sim_posts_to_corpus(posts)
        corpus_id, _, _ = store.put_corpus(dumps_corpus(corpus))
        recon = mapgen.reconstruct_environment(posts)
        comparison = mapgen.compare_graphs(recon, env)
        return {
            "posts_corpus_id": corpus_id,
            "regime": report.to_mapping() if report is not None else None,
            "reconstruction": mapgen.reconstruction_to_obj(recon),
            "comparison": {
                "node_jaccard": comparison.node_jaccard,
                "edge_jaccard": comparison.edge_jaccard,
            },
        }

    return app
