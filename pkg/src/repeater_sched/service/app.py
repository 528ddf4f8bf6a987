"""HTTP facade over the engine for interactive what-if evaluation.

Every computation is delegated to the same functions the CLI uses, so
responses are value-identical to CLI output.  Requests above the cost
ceiling are rejected instead of queued; sweeps are read-only here and
produced by the `sweep` CLI command.
"""

from __future__ import annotations

import importlib.resources
import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import ENGINE_VERSION, defaults, reports
from ..analysis import curves_by_point, min_n_table, plateau_table, plob_bound, ultimate_bound
from ..optimizer import SearchConfig, search_schedules
from ..protocol import BudgetError, ChainParams, parse_policy
from ..protocol import run_protocol
from ..store import ResultsStore, StoreError, discover_stores
from .models import (
    BoundsResponse,
    EvaluateRequest,
    EvaluateResponse,
    OptimizeRequest,
    SweepList,
    SweepSummary,
)

# Interactive requests above these sizes belong in a batch sweep.
MAX_SEGMENTS = 2**12
MAX_SAMPLES = 10**4


def _chain_params(payload, total_distance_m: float) -> ChainParams:
    try:
        return ChainParams(
            segments=payload.segments,
            multiplexing=payload.multiplexing,
            coupling_eff=payload.coupling_eff,
            gate_error=payload.gate_error,
            total_distance_m=total_distance_m,
            attenuation_m=payload.attenuation_m,
            coherence_time_s=payload.coherence_time_s,
            signal_speed_m_s=payload.signal_speed_m_s,
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app(store_root: Path | None = None, static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="repeater-sched", version=ENGINE_VERSION)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        # Malformed bodies are client errors, reported per field.
        return JSONResponse(
            status_code=400,
            content={
                "detail": [
                    {"loc": list(err.get("loc", ())), "msg": err.get("msg", "invalid")}
                    for err in exc.errors()
                ]
            },
        )

    def stores() -> dict[str, Path]:
        if store_root is None:
            return {}
        return discover_stores(store_root)

    def open_store(sweep_id: str) -> ResultsStore:
        path = stores().get(sweep_id)
        if path is None:
            raise HTTPException(status_code=404, detail=f"unknown sweep {sweep_id!r}")
        try:
            return ResultsStore.open(path)
        except StoreError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc

    @app.get("/api/params")
    def get_params():
        return {
            "engine_version": ENGINE_VERSION,
            "model_constants": defaults.model_constants(),
            "grid_defaults": {
                "n_values": list(defaults.DEFAULT_N_VALUES),
                "m_values": list(defaults.DEFAULT_M_VALUES),
                "coupling_values": list(defaults.DEFAULT_COUPLING_VALUES),
                "gate_error_values": list(defaults.DEFAULT_GATE_ERROR_VALUES),
                "distance_range_m": list(defaults.DEFAULT_DISTANCE_RANGE_M),
                "distance_points": defaults.DEFAULT_DISTANCE_POINTS,
            },
            "fth_grid": list(defaults.DEFAULT_FTH_GRID),
            "budget_rule": "sum(schedule) <= log2(multiplexing)",
            "cost_ceiling": {"max_segments": MAX_SEGMENTS, "max_samples": MAX_SAMPLES},
        }

    @app.post("/api/evaluate", response_model=EvaluateResponse)
    def evaluate(request: EvaluateRequest):
        if request.segments > MAX_SEGMENTS:
            raise HTTPException(
                status_code=422,
                detail=f"segments {request.segments} exceeds the interactive ceiling "
                f"{MAX_SEGMENTS}; run a sweep instead",
            )
        distances = request.distances_m or (
            [request.total_distance_m] if request.total_distance_m is not None else []
        )
        if not distances:
            raise HTTPException(
                status_code=422, detail="provide total_distance_m or a distances_m list"
            )
        try:
            policy = parse_policy(request.policy.to_text())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        results = []
        for distance in distances:
            params = _chain_params(request, distance)
            try:
                outcome = run_protocol(params, policy)
            except BudgetError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            results.append(reports.run_report(params, policy, outcome, request.seed))
        return {"engine_version": ENGINE_VERSION, "results": results}

    @app.post("/api/optimize")
    def optimize(request: OptimizeRequest):
        if request.segments > MAX_SEGMENTS:
            raise HTTPException(
                status_code=422,
                detail=f"segments {request.segments} exceeds the interactive ceiling "
                f"{MAX_SEGMENTS}; run a sweep instead",
            )
        if request.samples > MAX_SAMPLES:
            raise HTTPException(
                status_code=422,
                detail=f"samples {request.samples} exceeds the interactive ceiling "
                f"{MAX_SAMPLES}; run a sweep instead",
            )
        params = _chain_params(request, request.total_distance_m)
        try:
            config = SearchConfig(
                samples=request.samples,
                seed=request.seed,
                include_ld_candidates=request.include_ld_candidates,
                max_steps_per_level=request.max_steps_per_level,
                fth_grid=tuple(request.fth_grid),
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        result = search_schedules(params, config)
        return reports.optimize_report(params, config, result)

    @app.get("/api/bounds", response_model=BoundsResponse)
    def bounds(
        eta: float = Query(ge=0.0, lt=1.0, description="end-to-end transmissivity"),
        n: int = Query(default=0, ge=0, description="number of middle repeater nodes"),
    ):
        return {
            "eta": eta,
            "repeaters": n,
            "plob": plob_bound(eta),
            "ultimate": ultimate_bound(eta, n),
        }

    @app.get("/api/sweeps", response_model=SweepList)
    def list_sweeps():
        summaries = []
        for sweep_id, path in stores().items():
            try:
                store = ResultsStore.open(path)
                count = sum(1 for _ in store.iter_records())
            except StoreError:
                continue
            summaries.append(
                SweepSummary(
                    id=sweep_id,
                    engine_version=store.manifest.get("engine_version", "?"),
                    seed=store.manifest.get("seed", 0),
                    grid_hash=store.manifest.get("grid_hash", ""),
                    record_count=count,
                )
            )
        return {"sweeps": summaries}

    @app.get("/api/sweeps/{sweep_id}/curves")
    def sweep_curves(sweep_id: str):
        store = open_store(sweep_id)
        records = store.records()
        extras: dict[tuple, dict[str, list]] = {}
        for rec in records:
            point = (rec.segments, rec.multiplexing, rec.coupling_eff, rec.gate_error)
            extras.setdefault(point, {}).setdefault(rec.policy, []).append(
                (rec.total_distance_m, list(rec.schedule), list(rec.flags))
            )
        points = []
        for point, policies in sorted(curves_by_point(records).items()):
            entry = {
                "segments": point[0],
                "multiplexing": point[1],
                "coupling_eff": point[2],
                "gate_error": point[3],
                "policies": {},
            }
            for label, curve in sorted(policies.items()):
                per_distance = sorted(extras[point].get(label, []))
                entry["policies"][label] = {
                    "distances_m": [d for d, _ in curve],
                    "skrs": [s for _, s in curve],
                    "schedules": [sched for _, sched, _ in per_distance],
                    "flags": [fl for _, _, fl in per_distance],
                }
            points.append(entry)
        return {"id": sweep_id, "points": points}

    @app.get("/api/sweeps/{sweep_id}/plateau")
    def sweep_plateau(sweep_id: str):
        store = open_store(sweep_id)
        return {"id": sweep_id, "rows": plateau_table(store.records())}

    @app.get("/api/sweeps/{sweep_id}/min-n")
    def sweep_min_n(sweep_id: str):
        store = open_store(sweep_id)
        return {"id": sweep_id, "rows": min_n_table(store.records())}

    @app.get("/api/schemas")
    def list_schemas():
        root = importlib.resources.files("repeater_sched") / "schemas"
        return {"schemas": sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))}

    @app.get("/api/schemas/{name}")
    def get_schema(name: str):
        if "/" in name or not name.endswith(".json"):
            raise HTTPException(status_code=404, detail="unknown schema")
        root = importlib.resources.files("repeater_sched") / "schemas"
        target = root / name
        if not target.is_file():
            raise HTTPException(status_code=404, detail="unknown schema")
        return JSONResponse(content=json.loads(target.read_text()))

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="explorer")

    return app
