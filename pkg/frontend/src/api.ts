/**
 * Typed client for the scheduling service.
 *
 * Responses that have a shipped JSON schema are validated against it
 * (fetched once from the service); every number the UI shows comes from
 * these payloads untouched.
 */

import { assertValid } from "./validate.js";
import type {
  EvaluateRequest,
  EvaluateResponse,
  PlateauRow,
  ServiceError,
  SweepCurves,
  SweepSummary,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: ServiceError | null,
  ) {
    super(ApiError.describe(status, payload));
  }

  static describe(status: number, payload: ServiceError | null): string {
    if (!payload) return `service error ${status}`;
    if (typeof payload.detail === "string") return payload.detail;
    return payload.detail
      .map((entry) => `${entry.loc.join(".")}: ${entry.msg}`)
      .join("; ");
  }
}

export class ApiClient {
  private schemas = new Map<string, object>();

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (!response.ok) {
      throw new ApiError(response.status, payload as ServiceError | null);
    }
    return payload as T;
  }

  private async schema(name: string): Promise<object> {
    const cached = this.schemas.get(name);
    if (cached) return cached;
    const fetched = await this.request<object>(`/api/schemas/${name}`);
    this.schemas.set(name, fetched);
    return fetched;
  }

  async params(): Promise<Record<string, unknown>> {
    return this.request("/api/params");
  }

  async evaluate(body: EvaluateRequest): Promise<EvaluateResponse> {
    const payload = await this.request<EvaluateResponse>("/api/evaluate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const schema = await this.schema("run_report.schema.json");
    for (const entry of payload.results) {
      assertValid(entry, schema as never, "evaluate result");
    }
    return payload;
  }

  async bounds(eta: number, n: number): Promise<Record<string, number>> {
    return this.request(`/api/bounds?eta=${eta}&n=${n}`);
  }

  async sweeps(): Promise<SweepSummary[]> {
    const payload = await this.request<{ sweeps: SweepSummary[] }>("/api/sweeps");
    return payload.sweeps;
  }

  async sweepCurves(id: string): Promise<SweepCurves> {
    return this.request(`/api/sweeps/${encodeURIComponent(id)}/curves`);
  }

  async sweepPlateau(id: string): Promise<PlateauRow[]> {
    const payload = await this.request<{ rows: PlateauRow[] }>(
      `/api/sweeps/${encodeURIComponent(id)}/plateau`,
    );
    return payload.rows;
  }
}
