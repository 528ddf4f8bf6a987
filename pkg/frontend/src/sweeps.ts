/**
 * Sweep browser: stored-results views.  The schedule map shows where
 * each policy spends distillation steps across distances; the ratio
 * view plots inverse plateau ratios (LD/GD, below 1 = global wins)
 * with omission markers mirroring the analysis flags.
 */

import { ApiClient } from "./api.js";
import { ratioChart, stepMap, type RatioPoint } from "./charts.js";
import type { PlateauRow, SweepCurves, SweepPoint, SweepSummary } from "./types.js";

export function pointKey(point: {
  segments: number;
  multiplexing: number;
  coupling_eff: number;
  gate_error: number;
}): string {
  return `N=${point.segments} M=${point.multiplexing} eta=${point.coupling_eff} eps=${point.gate_error}`;
}

/** Inverse-ratio lines grouped per (M, coupling) at one rule and error. */
export function ratioLines(
  rows: PlateauRow[],
  rule: "fth" | "skr",
  gateError: number,
): Record<string, RatioPoint[]> {
  const lines: Record<string, RatioPoint[]> = {};
  for (const row of rows) {
    if (row.rule !== rule || row.gate_error !== gateError) continue;
    const label = `M=${row.multiplexing} eta=${row.coupling_eff}`;
    const inverse =
      row.flag === null && row.ratio !== null && row.ratio > 0 ? 1.0 / row.ratio : null;
    (lines[label] ??= []).push({
      n: row.segments,
      inverseRatio: inverse,
      omitted: row.flag !== null,
      omissionReason: row.flag,
    });
  }
  for (const pts of Object.values(lines)) {
    pts.sort((a, b) => a.n - b.n);
  }
  return lines;
}

export function stepMapFor(point: SweepPoint, policy: string): string {
  const curve = point.policies[policy];
  if (!curve) return "<p>policy not recorded at this point</p>";
  return stepMap(curve.distances_m, curve.schedules, curve.skrs);
}

const RATIO_COLORS = ["#0072B2", "#E69F00", "#009E73", "#D55E00", "#CC79A7"];

export class SweepBrowser {
  summaries: SweepSummary[] = [];
  curves: SweepCurves | null = null;
  plateau: PlateauRow[] = [];
  curveFetches = 0;
  manifestFetches = 0;
  gateErrorFilter: number | null = null;

  constructor(private readonly api: ApiClient) {}

  async loadSweeps(): Promise<SweepSummary[]> {
    this.manifestFetches += 1;
    this.summaries = await this.api.sweeps();
    return this.summaries;
  }

  async open(id: string): Promise<void> {
    this.curveFetches += 1;
    this.curves = await this.api.sweepCurves(id);
    this.plateau = await this.api.sweepPlateau(id);
  }

  /** Filter changes re-query curves only; the sweep list stays cached. */
  async setGateErrorFilter(value: number | null): Promise<void> {
    this.gateErrorFilter = value;
    if (this.curves) {
      this.curveFetches += 1;
      this.curves = await this.api.sweepCurves(this.curves.id);
    }
  }

  visiblePoints(): SweepPoint[] {
    if (!this.curves) return [];
    return this.curves.points.filter(
      (p) => this.gateErrorFilter === null || p.gate_error === this.gateErrorFilter,
    );
  }

  ratioMarkup(rule: "fth" | "skr", gateError: number): string {
    return ratioChart(ratioLines(this.plateau, rule, gateError), RATIO_COLORS);
  }

  /** Omission markers shown must match the analysis flags one-to-one. */
  omissionMarkers(rule: "fth" | "skr", gateError: number): { n: number; reason: string }[] {
    const markers: { n: number; reason: string }[] = [];
    for (const pts of Object.values(ratioLines(this.plateau, rule, gateError))) {
      for (const p of pts) {
        if (p.omitted) markers.push({ n: p.n, reason: p.omissionReason ?? "omitted" });
      }
    }
    return markers.sort((a, b) => a.n - b.n);
  }
}
