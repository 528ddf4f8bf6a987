"""Report payload builders shared by the CLI and the HTTP service.

Both front ends serialize the same dictionaries, so a run evaluated over
HTTP is value-identical to the same run evaluated from the shell.
"""

from __future__ import annotations

import math
from dataclasses import asdict

from . import ENGINE_VERSION
from .analysis import plob_bound, ultimate_bound_from_distance
from .optimizer import SearchConfig, SearchResult
from .protocol import ChainParams, Policy, ProtocolResult


def params_dict(params: ChainParams) -> dict:
    return asdict(params)


def _json_bound(value: float) -> float | None:
    # Unbounded capacities (eta = 1) have no JSON number; null stands in.
    return value if math.isfinite(value) else None


def bounds_dict(params: ChainParams) -> dict:
    eta = math.exp(-params.total_distance_m / params.attenuation_m)
    repeaters = params.segments - 1
    return {
        "eta": eta,
        "repeaters": repeaters,
        "plob": _json_bound(plob_bound(eta)),
        "ultimate": _json_bound(
            ultimate_bound_from_distance(
                params.total_distance_m, params.attenuation_m, repeaters
            )
        ),
    }


def run_report(
    params: ChainParams, policy: Policy, result: ProtocolResult, seed: int
) -> dict:
    return {
        "params": params_dict(params),
        "policy": policy.label,
        "seed": seed,
        "engine_version": ENGINE_VERSION,
        "skr": result.skr,
        "schedule": list(result.schedule),
        "flags": list(result.flags),
        "trace": result.trace_dicts(),
        "bounds": bounds_dict(params),
    }


def optimize_report(
    params: ChainParams, config: SearchConfig, result: SearchResult
) -> dict:
    return {
        "params": params_dict(params),
        "seed": config.seed,
        "samples": config.samples,
        "engine_version": ENGINE_VERSION,
        "best_schedule": list(result.best_schedule),
        "best_skr": result.best_skr,
        "evaluated": result.evaluated,
        "histogram": {str(total): skr for total, skr in result.histogram.items()},
        "ld_baselines": dict(result.ld_baselines),
        "flags": list(result.flags),
    }
