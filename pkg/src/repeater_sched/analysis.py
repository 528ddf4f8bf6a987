"""Capacity bounds, plateau metrics, and parameter-sweep orchestration.

SKR-vs-distance curves in this setting sit on a plateau and then drop;
comparing policies by the mean SKR over the near-maximal region (the
plateau) removes the distance dimension.  The sweep runner evaluates
the local rules and the global search over a parameter grid and
persists replayable records.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import ENGINE_VERSION, defaults
from .defaults import NEGLIGIBLE_SKR
from .optimizer import SearchConfig, search_schedules
from .protocol import ChainParams, ManualPolicy, parse_policy, run_protocol
from .store import ResultsStore, SweepRecord, derive_record_seed, trace_digest

Curve = Sequence[tuple[float, float]]


# ---------------------------------------------------------------------------
# Capacity bounds


def plob_bound(transmissivity: float) -> float:
    """Repeaterless capacity of a lossy channel, -log2(1 - eta)."""
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {transmissivity}")
    if transmissivity == 1.0:
        return math.inf
    return -math.log1p(-transmissivity) / math.log(2.0)


def ultimate_bound(transmissivity: float, repeaters: int) -> float:
    """Capacity of an equidistant chain with `repeaters` middle nodes,
    -log2(1 - eta^(1/(repeaters+1)))."""
    if repeaters < 0:
        raise ValueError(f"repeaters must be >= 0, got {repeaters}")
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {transmissivity}")
    if transmissivity == 1.0:
        return math.inf
    # log1p keeps precision when the root transmissivity is within a few
    # ulps of 0 or 1.
    return -math.log1p(-(transmissivity ** (1.0 / (repeaters + 1)))) / math.log(2.0)


def ultimate_bound_from_distance(
    total_distance_m: float, attenuation_m: float, repeaters: int
) -> float:
    """Chain capacity evaluated from the distance in log space.

    Long chains put the end-to-end transmissivity below float range
    (e.g. exp(-500) at 10^4 km), where `ultimate_bound` would see 0 and
    report no capacity; the per-segment transmissivity stays
    representable.
    """
    if repeaters < 0:
        raise ValueError(f"repeaters must be >= 0, got {repeaters}")
    if total_distance_m < 0.0 or attenuation_m <= 0.0:
        raise ValueError("distance must be >= 0 and attenuation > 0")
    per_segment = math.exp(-total_distance_m / ((repeaters + 1) * attenuation_m))
    if per_segment == 1.0:
        return math.inf
    return -math.log1p(-per_segment) / math.log(2.0)


# ---------------------------------------------------------------------------
# Plateau metrics


@dataclass(frozen=True, slots=True)
class PlateauStats:
    max_skr: float
    plateau_mean: float
    plateau_distances: tuple[float, ...]
    negligible: bool


def plateau_stats(curve: Curve, threshold: float = 0.9) -> PlateauStats:
    """Mean SKR over the plateau: all points within `threshold` of the max."""
    if len(curve) == 0:
        raise ValueError("curve must be non-empty")
    skrs = np.array([skr for _, skr in curve])
    max_skr = float(skrs.max())
    if max_skr < NEGLIGIBLE_SKR:
        return PlateauStats(max_skr, 0.0, (), True)
    member = skrs >= threshold * max_skr
    distances = tuple(dist for (dist, _), keep in zip(curve, member) if keep)
    return PlateauStats(max_skr, float(skrs[member].mean()), distances, False)


UNDEFINED_LD_ZERO = "undefined (LD zero)"
OMITTED = "omitted"


@dataclass(frozen=True, slots=True)
class PlateauRatio:
    ratio: float | None
    flag: str | None
    gd_mean: float
    ld_mean: float


def plateau_ratio(gd: Curve, ld: Curve, threshold: float = 0.9) -> PlateauRatio:
    """Ratio of plateau means, GD over LD, with omission flags.

    A negligible LD plateau under a real GD plateau makes the ratio
    undefined (infinite advantage); when both are negligible the point
    is omitted outright.
    """
    if [d for d, _ in gd] != [d for d, _ in ld]:
        raise ValueError("curves must share the same distance grid")
    gd_stats = plateau_stats(gd, threshold)
    ld_stats = plateau_stats(ld, threshold)
    if gd_stats.negligible and ld_stats.negligible:
        return PlateauRatio(None, OMITTED, 0.0, 0.0)
    if ld_stats.negligible:
        return PlateauRatio(None, UNDEFINED_LD_ZERO, gd_stats.plateau_mean, 0.0)
    return PlateauRatio(
        gd_stats.plateau_mean / ld_stats.plateau_mean,
        None,
        gd_stats.plateau_mean,
        ld_stats.plateau_mean,
    )


def minimal_advantage_n(ratios: Mapping[int, PlateauRatio]) -> int | None:
    """Smallest segment count where the global policy wins.

    An undefined ratio from a dead LD baseline counts as advantage; a
    point where both policies are negligible does not."""
    for n in sorted(ratios):
        entry = ratios[n]
        if entry.flag == UNDEFINED_LD_ZERO:
            return n
        if entry.flag is None and entry.ratio is not None and entry.ratio > 1.0:
            return n
    return None


# ---------------------------------------------------------------------------
# Sweep grid and runner


@dataclass(frozen=True, slots=True)
class SweepGrid:
    """Cartesian parameter grid for a sweep, distances in meters."""

    n_values: tuple[int, ...] = defaults.DEFAULT_N_VALUES
    m_values: tuple[int, ...] = defaults.DEFAULT_M_VALUES
    coupling_values: tuple[float, ...] = defaults.DEFAULT_COUPLING_VALUES
    gate_error_values: tuple[float, ...] = defaults.DEFAULT_GATE_ERROR_VALUES
    distances_m: tuple[float, ...] = field(
        default_factory=lambda: log_spaced_distances()
    )
    attenuation_m: float = defaults.DEFAULT_ATTENUATION_M
    coherence_time_s: float = defaults.DEFAULT_COHERENCE_TIME_S
    signal_speed_m_s: float = defaults.DEFAULT_SIGNAL_SPEED_M_S

    def points(self) -> Iterable[ChainParams]:
        for n in self.n_values:
            for m in self.m_values:
                for eta in self.coupling_values:
                    for eps in self.gate_error_values:
                        for distance in self.distances_m:
                            yield ChainParams(
                                segments=n,
                                multiplexing=m,
                                coupling_eff=eta,
                                gate_error=eps,
                                total_distance_m=distance,
                                attenuation_m=self.attenuation_m,
                                coherence_time_s=self.coherence_time_s,
                                signal_speed_m_s=self.signal_speed_m_s,
                            )

    def to_dict(self) -> dict:
        return {
            "n_values": list(self.n_values),
            "m_values": list(self.m_values),
            "coupling_values": list(self.coupling_values),
            "gate_error_values": list(self.gate_error_values),
            "distances_m": list(self.distances_m),
            "attenuation_m": self.attenuation_m,
            "coherence_time_s": self.coherence_time_s,
            "signal_speed_m_s": self.signal_speed_m_s,
        }

    @staticmethod
    def from_dict(payload: dict) -> "SweepGrid":
        known = {f: payload[f] for f in payload}
        for key in ("n_values", "m_values", "coupling_values", "gate_error_values", "distances_m"):
            if key in known:
                known[key] = tuple(known[key])
        return SweepGrid(**known)


def log_spaced_distances(
    low_m: float = defaults.DEFAULT_DISTANCE_RANGE_M[0],
    high_m: float = defaults.DEFAULT_DISTANCE_RANGE_M[1],
    points: int = defaults.DEFAULT_DISTANCE_POINTS,
) -> tuple[float, ...]:
    return tuple(float(v) for v in np.geomspace(low_m, high_m, points))


def default_policies(fth_grid: Sequence[float] = defaults.DEFAULT_FTH_GRID) -> tuple[str, ...]:
    return ("gd", *[f"fth:{t:g}" for t in fth_grid], "skr")


def _evaluate_task(task: tuple) -> SweepRecord:
    grid_hash, params, policy_label, seed, search_config = task
    flags: tuple[str, ...] = ()
    search_evaluated = None
    try:
        if policy_label == "gd":
            result = search_schedules(
                params,
                SearchConfig(
                    samples=search_config.samples,
                    seed=seed,
                    include_ld_candidates=search_config.include_ld_candidates,
                    max_steps_per_level=search_config.max_steps_per_level,
                    fth_grid=search_config.fth_grid,
                ),
            )
            schedule, skr = result.best_schedule, result.best_skr
            flags = result.flags
            search_evaluated = result.evaluated
            digest = trace_digest(run_protocol(params, ManualPolicy(schedule)).trace_dicts())
        else:
            outcome = run_protocol(params, parse_policy(policy_label))
            schedule, skr = outcome.schedule, outcome.skr
            flags = outcome.flags
            digest = trace_digest(outcome.trace_dicts())
    except Exception as exc:  # record the failure, keep sweeping
        schedule, skr, digest = (), 0.0, ""
        flags = (f"error: {exc}",)
    return SweepRecord(
        grid_hash=grid_hash,
        engine_version=ENGINE_VERSION,
        segments=params.segments,
        multiplexing=params.multiplexing,
        coupling_eff=params.coupling_eff,
        gate_error=params.gate_error,
        total_distance_m=params.total_distance_m,
        attenuation_m=params.attenuation_m,
        coherence_time_s=params.coherence_time_s,
        signal_speed_m_s=params.signal_speed_m_s,
        policy=policy_label,
        schedule=schedule,
        skr=skr,
        seed=seed,
        trace_digest=digest,
        flags=flags,
        search_evaluated=search_evaluated,
    )


def worker_count() -> int:
    env = os.environ.get(defaults.THREADS_ENV_VAR)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_sweep(
    grid: SweepGrid,
    policies: Sequence[str],
    search_config: SearchConfig,
    store: ResultsStore,
    *,
    workers: int | None = None,
    limit: int | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> dict:
    """Evaluate every (point, distance, policy) of the grid into the store.

    Records already present are skipped, so an interrupted sweep resumes
    where it stopped.  Tasks are evaluated in a fixed enumeration order
    and written in that order regardless of worker scheduling, keeping
    stores byte-identical across reruns with the same seed.
    """
    grid_hash = store.manifest["grid_hash"]
    global_seed = store.manifest["seed"]
    done = store.existing_keys()
    tasks = []
    for params in grid.points():
        for policy_label in policies:
            key = (
                params.segments,
                params.multiplexing,
                params.coupling_eff,
                params.gate_error,
                params.total_distance_m,
                policy_label,
            )
            if key in done:
                continue
            seed = derive_record_seed(
                global_seed,
                params.segments,
                params.multiplexing,
                params.coupling_eff,
                params.gate_error,
                params.total_distance_m,
                policy_label,
            )
            tasks.append((grid_hash, params, policy_label, seed, search_config))
    if limit is not None:
        tasks = tasks[:limit]

    total = len(tasks)
    written = 0
    if workers is None:
        workers = worker_count()
    if workers <= 1 or total <= 1:
        for task in tasks:
            store.append(_evaluate_task(task))
            written += 1
            if progress:
                progress(written, total)
    else:
        chunk = max(1, total // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for record in pool.map(_evaluate_task, tasks, chunksize=chunk):
                store.append(record)
                written += 1
                if progress:
                    progress(written, total)
    return {"new_records": written, "skipped": len(done), "total_tasks": total}


# ---------------------------------------------------------------------------
# Tables over stored records


def curves_by_point(
    records: Iterable[SweepRecord],
) -> dict[tuple, dict[str, list[tuple[float, float]]]]:
    """Group records into SKR-vs-distance curves per point and policy."""
    grouped: dict[tuple, dict[str, list[tuple[float, float]]]] = {}
    for rec in records:
        point = (rec.segments, rec.multiplexing, rec.coupling_eff, rec.gate_error)
        grouped.setdefault(point, {}).setdefault(rec.policy, []).append(
            (rec.total_distance_m, rec.skr)
        )
    for policies in grouped.values():
        for curve in policies.values():
            curve.sort()
    return grouped


def plateau_table(records: Iterable[SweepRecord], threshold: float = 0.9) -> list[dict]:
    """Plateau-ratio rows of the GD policy against each local rule.

    The threshold-rule baseline at each point is the best-performing
    threshold value (by plateau mean) among those swept.
    """
    rows = []
    for point, policies in sorted(curves_by_point(records).items()):
        if "gd" not in policies:
            continue
        gd_curve = policies["gd"]
        baselines: dict[str, Curve] = {}
        if "skr" in policies:
            baselines["skr"] = policies["skr"]
        fth_curves = {
            label: curve for label, curve in policies.items() if label.startswith("fth:")
        }
        if fth_curves:
            best_label = max(
                sorted(fth_curves),
                key=lambda lbl: plateau_stats(fth_curves[lbl], threshold).plateau_mean,
            )
            baselines["fth"] = fth_curves[best_label]
        for rule, ld_curve in sorted(baselines.items()):
            ratio = plateau_ratio(gd_curve, ld_curve, threshold)
            rows.append(
                {
                    "segments": point[0],
                    "multiplexing": point[1],
                    "coupling_eff": point[2],
                    "gate_error": point[3],
                    "rule": rule,
                    "gd_plateau_mean": ratio.gd_mean,
                    "ld_plateau_mean": ratio.ld_mean,
                    "ratio": ratio.ratio,
                    "flag": ratio.flag,
                }
            )
    return rows


def min_n_table(records: Iterable[SweepRecord], threshold: float = 0.9) -> list[dict]:
    """Smallest advantageous segment count per (M, coupling, error, rule)."""
    ratios: dict[tuple, dict[int, PlateauRatio]] = {}
    for row in plateau_table(records, threshold):
        group = (row["multiplexing"], row["coupling_eff"], row["gate_error"], row["rule"])
        entry = PlateauRatio(
            row["ratio"], row["flag"], row["gd_plateau_mean"], row["ld_plateau_mean"]
        )
        ratios.setdefault(group, {})[row["segments"]] = entry
    rows = []
    for group in sorted(ratios):
        minimal = minimal_advantage_n(ratios[group])
        rows.append(
            {
                "multiplexing": group[0],
                "coupling_eff": group[1],
                "gate_error": group[2],
                "rule": group[3],
                "minimal_n": minimal,
            }
        )
    return rows


def bounds_rows(records: Iterable[SweepRecord]) -> list[dict]:
    """PLOB and chain bounds at each stored (distance, segments) pair."""
    seen = set()
    rows = []
    for rec in records:
        key = (rec.total_distance_m, rec.segments, rec.attenuation_m)
        if key in seen:
            continue
        seen.add(key)
        eta = math.exp(-rec.total_distance_m / rec.attenuation_m)
        rows.append(
            {
                "distance_m": rec.total_distance_m,
                "eta": eta,
                "repeaters": rec.segments - 1,
                "plob": plob_bound(eta),
                "ultimate": ultimate_bound_from_distance(
                    rec.total_distance_m, rec.attenuation_m, rec.segments - 1
                ),
            }
        )
    rows.sort(key=lambda r: (r["distance_m"] if r["distance_m"] is not None else -1, r["repeaters"]))
    return rows


def bound_row(eta: float, repeaters: int, distance_m: float | None = None) -> dict:
    return {
        "distance_m": distance_m,
        "eta": eta,
        "repeaters": repeaters,
        "plob": plob_bound(eta),
        "ultimate": ultimate_bound(eta, repeaters),
    }


def curves_rows(records: Iterable[SweepRecord]) -> list[dict]:
    """Flat per-record rows for plotting: schedule, SKR, coordinates."""
    rows = []
    for rec in sorted(records, key=lambda r: (r.key, r.policy)):
        rows.append(
            {
                "segments": rec.segments,
                "multiplexing": rec.multiplexing,
                "coupling_eff": rec.coupling_eff,
                "gate_error": rec.gate_error,
                "distance_m": rec.total_distance_m,
                "policy": rec.policy,
                "skr": rec.skr,
                "schedule": ";".join(str(s) for s in rec.schedule),
                "flags": ";".join(rec.flags),
            }
        )
    return rows
