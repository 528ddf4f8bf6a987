/**
 * What-if panel: edit chain parameters and a manual schedule, compare
 * its SKR-vs-distance curve against the local-rule baselines and the
 * chain capacity, all numbers straight from the service.
 */

import { ApiClient, ApiError } from "./api.js";
import { formatSkr, lineChart, type Series } from "./charts.js";
import { debounce, LatestWins } from "./requests.js";
import { ScheduleEditorState } from "./schedule.js";
import type { EvaluateRequest, EvaluateResponse } from "./types.js";

export interface WhatIfParams {
  segments: number;
  multiplexing: number;
  coupling_eff: number;
  gate_error: number;
  distances_m: number[];
  fth_threshold: number;
}

export interface WhatIfViewModel {
  manualSkrs: string[]; // rendered per-distance, straight from the response
  manualSchedule: number[];
  series: Series[];
  budget: number;
  spent: number;
  remaining: number;
  stale: boolean;
  error: string | null;
}

const COLORS = ["#0072B2", "#E69F00", "#009E73", "#D55E00", "#777777"];

export function buildSeries(
  manual: EvaluateResponse,
  baselines: Record<string, EvaluateResponse>,
): Series[] {
  const distances = manual.results.map((r) => r.params.total_distance_m);
  const series: Series[] = [
    {
      label: "manual schedule",
      x: distances,
      y: manual.results.map((r) => r.skr),
      color: COLORS[0],
    },
  ];
  let index = 1;
  for (const [label, response] of Object.entries(baselines)) {
    series.push({
      label,
      x: response.results.map((r) => r.params.total_distance_m),
      y: response.results.map((r) => r.skr),
      color: COLORS[index % COLORS.length],
    });
    index += 1;
  }
  series.push({
    label: "chain capacity",
    x: distances,
    y: manual.results.map((r) => r.bounds.ultimate ?? NaN),
    color: COLORS[4],
    dashed: true,
  });
  return series;
}

export function buildViewModel(
  editor: ScheduleEditorState,
  manual: EvaluateResponse | null,
  baselines: Record<string, EvaluateResponse>,
  stale: boolean,
  error: string | null,
): WhatIfViewModel {
  return {
    manualSkrs: manual ? manual.results.map((r) => formatSkr(r.skr)) : [],
    manualSchedule: [...editor.steps],
    series: manual ? buildSeries(manual, baselines) : [],
    budget: editor.budget,
    spent: editor.spent(),
    remaining: editor.remaining(),
    stale,
    error,
  };
}

export class WhatIfPanel {
  editor: ScheduleEditorState;
  viewModel: WhatIfViewModel;
  onRender: (vm: WhatIfViewModel) => void = () => {};
  private latest = new LatestWins<void>();
  private baselines: Record<string, EvaluateResponse> = {};
  private manual: EvaluateResponse | null = null;
  private error: string | null = null;
  private scheduleEvaluate: () => void;
  evaluateCalls = 0; // exposed for the no-local-computation audit

  constructor(
    private readonly api: ApiClient,
    public params: WhatIfParams,
    debounceMs = 250,
  ) {
    this.editor = new ScheduleEditorState(params.segments, params.multiplexing);
    this.viewModel = buildViewModel(this.editor, null, {}, false, null);
    this.scheduleEvaluate = debounce(() => void this.refresh(), debounceMs);
  }

  private request(policy: EvaluateRequest["policy"]): EvaluateRequest {
    return {
      segments: this.params.segments,
      multiplexing: this.params.multiplexing,
      coupling_eff: this.params.coupling_eff,
      gate_error: this.params.gate_error,
      distances_m: this.params.distances_m,
      policy,
    };
  }

  /** One edit = at most one evaluate call once edits settle. */
  editStep(level: number, value: number): void {
    const outcome = this.editor.setStep(level, value);
    if (!outcome.ok) {
      this.error = outcome.violation ?? "edit rejected";
      this.render(true);
      return;
    }
    this.error = null;
    this.render(true);
    this.scheduleEvaluate();
  }

  setParams(params: WhatIfParams): void {
    this.params = params;
    this.editor = new ScheduleEditorState(params.segments, params.multiplexing);
    this.baselines = {};
    this.manual = null;
    this.render(true);
    this.scheduleEvaluate();
  }

  async refresh(): Promise<void> {
    this.render(true);
    try {
      const result = await this.latest.run(async () => {
        this.evaluateCalls += 1;
        const manual = await this.api.evaluate(
          this.request({ kind: "manual", steps: [...this.editor.steps] }),
        );
        if (Object.keys(this.baselines).length === 0) {
          const fth = await this.api.evaluate(
            this.request({ kind: "fth", threshold: this.params.fth_threshold }),
          );
          const skr = await this.api.evaluate(this.request({ kind: "skr" }));
          this.baselines = {
            [`threshold rule (${this.params.fth_threshold})`]: fth,
            "SKR rule": skr,
          };
        }
        this.manual = manual;
        this.editor.markEvaluated(manual);
        this.error = null;
      });
      if (result === undefined && this.latest.inFlight) {
        return; // superseded by a newer request
      }
    } catch (err) {
      this.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render(false);
  }

  private render(stale: boolean): void {
    this.viewModel = buildViewModel(this.editor, this.manual, this.baselines, stale, this.error);
    this.onRender(this.viewModel);
  }

  chartMarkup(): string {
    return lineChart(this.viewModel.series, "SKR per channel use");
  }
}
