"""HTTP facade over the engine.

A loaded model (and optional dataset for attribution backgrounds and the
cohort report) is immutable for the process lifetime; every request gets a
fresh solver, bounded by a concurrency semaphore and the request timeout.
Responses are serialized with the same helpers as the CLI, so payloads for
identical inputs are byte-identical. Errors come back as structured JSON
{"error_code", "message"}. No authentication: this is a local analysis tool.
"""

from __future__ import annotations

import asyncio
from dataclasses import dataclass
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from . import counterfactual as cf_mod
from . import data as data_mod
from . import forest as forest_mod
from . import report as report_mod
from .cli import attribute_instance
from .encoding import extract_thresholds
from .jsonutil import to_json
from .sat import BudgetExhausted


@dataclass(frozen=True)
class ServiceConfig:
    model_path: str
    dataset_path: Optional[str] = None
    background_path: Optional[str] = None  # defaults to dataset_path
    label_column: str = "label"
    host: str = "127.0.0.1"
    port: int = 8000
    timeout_seconds: float = 30.0
    max_concurrent_solves: int = 4

    def validate(self) -> None:
        if not 0 < self.port < 65536:
            raise ValueError("port out of range")
        if self.timeout_seconds <= 0:
            raise ValueError("timeout must be positive")
        if self.max_concurrent_solves < 1:
            raise ValueError("max_concurrent_solves must be >= 1")


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(content=to_json(payload), status_code=status_code,
                    media_type="application/json")


def _error(status_code: int, error_code: str, message: str) -> Response:
    return _json_response({"error_code": error_code, "message": message}, status_code)


def create_app(config: ServiceConfig) -> FastAPI:
    config.validate()
    forest = forest_mod.load_model(config.model_path)
    tmap = extract_thresholds(forest)
    dataset = None
    if config.dataset_path:
        dataset = data_mod.relabel_to_class_indices(
            data_mod.load_csv(config.dataset_path, config.label_column))
        if dataset.n_features != forest.n_features:
            raise ValueError("dataset feature count does not match the model")
    background = dataset
    if config.background_path:
        background = data_mod.load_csv(config.background_path, config.label_column)

    app = FastAPI(title="forestcf", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    solver_slots = asyncio.Semaphore(config.max_concurrent_solves)
    report_cache: dict = {}
    report_lock = asyncio.Lock()

    async def _bounded(fn):
        """Run an engine call in a worker thread under the request timeout."""
        async with solver_slots:
            return await asyncio.wait_for(asyncio.to_thread(fn), config.timeout_seconds)

    def _parse_instance(doc: dict):
        if not isinstance(doc, dict) or "instance" not in doc:
            raise ValueError("body must be an object with an \"instance\" array")
        values = doc["instance"]
        if not isinstance(values, list) or len(values) != forest.n_features:
            raise InstanceLengthMismatch(
                f"instance has {len(values) if isinstance(values, list) else 'no'} values,"
                f" model expects {forest.n_features}")
        return forest_mod.check_instance(values, forest.n_features)

    @app.get("/health")
    async def health():
        return _json_response({"status": "ok", "model_loaded": True})

    @app.get("/model/summary")
    async def model_summary():
        return _json_response({
            "n_features": forest.n_features,
            "n_classes": forest.n_classes,
            "n_trees": forest.n_trees,
            "feature_names": list(forest.feature_names),
            "feature_ranges": [[lo, hi] for lo, hi in forest.feature_ranges],
        })

    @app.post("/predict")
    async def predict(request: Request):
        try:
            x = _parse_instance(await request.json())
        except InstanceLengthMismatch as exc:
            return _error(400, "InstanceLengthMismatch", str(exc))
        except ValueError as exc:
            return _error(400, "BadRequest", str(exc))
        return _json_response({
            "prediction": forest_mod.predict_forest(forest, x),
            "votes": forest_mod.vote_counts(forest, x),
        })

    @app.post("/counterfactual")
    async def counterfactual(request: Request):
        try:
            doc = await request.json()
            x = _parse_instance(doc)
            frozen = frozenset(_resolve_features(doc.get("frozen", [])))
            query = cf_mod.CounterfactualQuery(
                instance=tuple(x),
                delta0=float(doc.get("delta0", 0.01)),
                growth=float(doc.get("growth", 1.01)),
                frozen_features=frozen,
                epsilon_fraction=float(doc.get("epsilon_fraction", 1e-6)),
                max_delta=float(doc.get("max_delta", 1.0)),
                clip_to_ranges=not doc.get("extrapolate", False),
            )
            query.validate()
        except InstanceLengthMismatch as exc:
            return _error(400, "InstanceLengthMismatch", str(exc))
        except ValueError as exc:
            return _error(400, "BadRequest", str(exc))
        try:
            result = await _bounded(
                lambda: cf_mod.find_min_counterfactual(forest, query, tmap=tmap))
        except cf_mod.Unreachable as exc:
            return _error(422, "Unreachable", str(exc))
        except (BudgetExhausted, asyncio.TimeoutError):
            return _error(504, "SolverBudget", "solve exceeded the request budget")
        return _json_response(cf_mod.result_to_dict(result))

    def _resolve_features(items) -> set:
        out = set()
        for item in items:
            if isinstance(item, int):
                idx = item
            elif isinstance(item, str) and item in forest.feature_names:
                idx = forest.feature_names.index(item)
            else:
                raise ValueError(f"unknown feature {item!r}")
            if not 0 <= idx < forest.n_features:
                raise ValueError(f"feature index {idx} out of range")
            out.add(idx)
        return out

    @app.post("/attribution")
    async def attribution(request: Request):
        if background is None:
            return _error(400, "NoDatasetLoaded",
                          "attribution needs the service started with a dataset")
        try:
            doc = await request.json()
            x = _parse_instance(doc)
            method = doc.get("method", "shapley-mc")
            if method not in ("shapley-exact", "shapley-mc", "lime"):
                raise ValueError(f"unknown method {method!r}")
            seed = int(doc.get("seed", 0))
            n_permutations = int(doc.get("n_permutations", 200))
            n_samples = int(doc.get("n_samples", 1000))
            kernel_width = doc.get("kernel_width")
        except InstanceLengthMismatch as exc:
            return _error(400, "InstanceLengthMismatch", str(exc))
        except ValueError as exc:
            return _error(400, "BadRequest", str(exc))
        try:
            payload = await _bounded(lambda: attribute_instance(
                forest, x, method, seed, background.features,
                n_permutations, n_samples, kernel_width))
        except asyncio.TimeoutError:
            return _error(504, "SolverBudget", "attribution exceeded the request budget")
        except Exception as exc:  # TooManyFeatures, SingularFit
            return _error(422, type(exc).__name__, str(exc))
        return _json_response(payload)

    @app.get("/report")
    async def report():
        if dataset is None:
            return _error(400, "NoDatasetLoaded",
                          "the report needs the service started with a dataset")
        async with report_lock:
            if "doc" not in report_cache:
                def build():
                    cf_results = [
                        cf_mod.find_min_counterfactual(
                            forest,
                            cf_mod.CounterfactualQuery(instance=tuple(row)),
                            tmap=tmap)
                        for row in dataset.features
                    ]
                    return report_mod.build_report(forest, dataset, cf_results)

                async with solver_slots:
                    report_cache["doc"] = await asyncio.to_thread(build)
        return Response(content=report_mod.report_to_json(report_cache["doc"]),
                        media_type="application/json")

    return app


class InstanceLengthMismatch(ValueError):
    pass


def run(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
