"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .. import defaults


class PolicySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["fth", "skr", "manual"]
    threshold: Optional[float] = Field(default=None, description="fth threshold in (1/2, 1]")
    steps: Optional[list[int]] = Field(default=None, description="manual schedule entries")

    def to_text(self) -> str:
        if self.kind == "skr":
            return "skr"
        if self.kind == "fth":
            return f"fth:{self.threshold}"
        return "manual:" + ",".join(str(s) for s in (self.steps or []))


class EvaluateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    segments: int
    multiplexing: int
    coupling_eff: float
    gate_error: float
    total_distance_m: Optional[float] = None
    distances_m: Optional[list[float]] = None
    attenuation_m: float = defaults.DEFAULT_ATTENUATION_M
    coherence_time_s: float = defaults.DEFAULT_COHERENCE_TIME_S
    signal_speed_m_s: float = defaults.DEFAULT_SIGNAL_SPEED_M_S
    policy: PolicySpec
    seed: int = defaults.DEFAULT_SEED


class EvaluateResponse(BaseModel):
    engine_version: str
    results: list[dict]


class OptimizeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    segments: int
    multiplexing: int
    coupling_eff: float
    gate_error: float
    total_distance_m: float
    attenuation_m: float = defaults.DEFAULT_ATTENUATION_M
    coherence_time_s: float = defaults.DEFAULT_COHERENCE_TIME_S
    signal_speed_m_s: float = defaults.DEFAULT_SIGNAL_SPEED_M_S
    samples: int = 500
    seed: int = defaults.DEFAULT_SEED
    include_ld_candidates: bool = True
    max_steps_per_level: Optional[int] = None
    fth_grid: list[float] = Field(default_factory=lambda: list(defaults.DEFAULT_FTH_GRID))


class BoundsResponse(BaseModel):
    eta: float
    repeaters: int
    plob: float
    ultimate: float


class SweepSummary(BaseModel):
    id: str
    engine_version: str
    seed: int
    grid_hash: str
    record_count: int


class SweepList(BaseModel):
    sweeps: list[SweepSummary]
