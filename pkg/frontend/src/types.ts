/** Payload shapes of the scheduling service API. */

export interface ChainParamsPayload {
  segments: number;
  multiplexing: number;
  coupling_eff: number;
  gate_error: number;
  total_distance_m: number;
  attenuation_m: number;
  coherence_time_s: number;
  signal_speed_m_s: number;
}

export interface StageRecord {
  level: number;
  pre_fidelity: number;
  post_fidelity: number;
  steps: number;
  step_success_probs: number[];
  expected_links: number;
  stage_skr: number;
}

export interface BoundsPayload {
  eta: number;
  repeaters: number;
  plob: number | null;
  ultimate: number | null;
}

export interface RunReport {
  params: ChainParamsPayload;
  policy: string;
  seed: number;
  engine_version: string;
  skr: number;
  schedule: number[];
  flags: string[];
  trace: StageRecord[];
  bounds: BoundsPayload;
}

export interface EvaluateResponse {
  engine_version: string;
  results: RunReport[];
}

export type PolicySpec =
  | { kind: "skr" }
  | { kind: "fth"; threshold: number }
  | { kind: "manual"; steps: number[] };

export interface EvaluateRequest {
  segments: number;
  multiplexing: number;
  coupling_eff: number;
  gate_error: number;
  distances_m: number[];
  policy: PolicySpec;
}

export interface SweepSummary {
  id: string;
  engine_version: string;
  seed: number;
  grid_hash: string;
  record_count: number;
}

export interface PolicyCurve {
  distances_m: number[];
  skrs: number[];
  schedules: number[][];
  flags: string[][];
}

export interface SweepPoint {
  segments: number;
  multiplexing: number;
  coupling_eff: number;
  gate_error: number;
  policies: Record<string, PolicyCurve>;
}

export interface SweepCurves {
  id: string;
  points: SweepPoint[];
}

export interface PlateauRow {
  segments: number;
  multiplexing: number;
  coupling_eff: number;
  gate_error: number;
  rule: "fth" | "skr";
  gd_plateau_mean: number;
  ld_plateau_mean: number;
  ratio: number | null;
  flag: string | null;
}

export interface ServiceError {
  detail: string | { loc: (string | number)[]; msg: string }[];
}
